"""Command-line client for the embedding classifier and certifier.

The CLI is a thin layer over the service handlers: it parses one JSON
config file into the request schema, runs the matching handler (in-process
by default, over HTTP when --server is given), and renders the report.

Exit codes: 0 verdict or pass, 1 config error, 2 numeric precondition
failure, 3 certification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from pydantic import ValidationError

from . import __version__
from .errors import (
    ConfigError,
    DomainMismatch,
    GuardViolation,
    InvalidExponent,
    InvalidParams,
    LpEmbedError,
    NotSymmetric,
    SingularMatrix,
    SingularOnDomain,
)
from .service.handlers import run_certify, run_classify, run_diagonalize, run_family_eval
from .service.models import FamilyEvalConfig, ProblemConfig

SEED_ENV_VAR = "LPEMBED_SEED"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PRECONDITION = 2
EXIT_CERTIFICATION = 3

_CONFIG_ERRORS = (ConfigError, InvalidExponent, InvalidParams, ValidationError)
_PRECONDITION_ERRORS = (
    SingularMatrix,
    NotSymmetric,
    GuardViolation,
    SingularOnDomain,
    DomainMismatch,
)


def _load_config(path: str, seed_override: int | None) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if seed_override is None and SEED_ENV_VAR in os.environ:
        try:
            seed_override = int(os.environ[SEED_ENV_VAR])
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer") from exc
    if seed_override is not None:
        raw["seed"] = seed_override
    return raw


def _render_matrix(m) -> str:
    return "\n".join("    [" + "  ".join(f"{v: .10g}" for v in row) + "]" for row in m)


def _human_diagonalize(rep: dict) -> str:
    d = rep["diagonalization"]
    lines = [
        "diagonalization:",
        _render_matrix(d["matrix"]),
        f"  ell = {d['ell']}   signature = {d['signature']}   residual = {d['residual']:.3e}",
        f"provenance: seed={rep['provenance']['seed']} hash={rep['provenance']['config_hash']}",
    ]
    return "\n".join(lines)


def _human_classify(rep: dict) -> str:
    v = rep["verdict"]
    lines = [f"verdict: {v['kind']}"]
    if v["kind"] == "non-isometric":
        lines.append(f"  obstruction: {v['reason']} ({v['detail']})")
    else:
        fam = v["family"]
        if v.get("case"):
            fam += f" case {v['case']} branch {v['branch']:+d}"
        lines.append(f"  witness family: {fam}")
        if v.get("vector_condition"):
            lines.append("  constraint: drift alignment condition on the affine witness")
        lines.append(f"  note: {v['detail']}")
    lines.append(
        f"signatures: source {rep['diag_a']['signature']} target {rep['diag_b']['signature']}"
        f"   p = {rep['p']:g}"
        + (
            f"   exceptional p = {rep['special_exponent']:g}"
            if rep.get("special_exponent")
            else ""
        )
    )
    lines.append(
        f"reduced drifts: {rep['reduced_drift_a']} -> {rep['reduced_drift_b']}"
    )
    lines.append(
        f"provenance: seed={rep['provenance']['seed']} hash={rep['provenance']['config_hash']}"
    )
    return "\n".join(lines)


def _human_certify(rep: dict) -> str:
    lines = [_human_classify(rep["classify"]), ""]
    co = rep["coincidence"]
    lines.append(
        f"coincidence: forward {co['forward_fraction']:.4f} coverage "
        f"{co['coverage_fraction']:.4f} on {co['samples']} samples "
        f"[{'pass' if co['passed'] else 'FAIL'}]"
    )
    pde = rep["pde_mapping"]
    lines.append(
        f"pde mapping: max scaled residual {pde['max_scaled_residual']:.3e} "
        f"(tol {pde['tol']:.1e}, {pde['points']} points) "
        f"[{'pass' if pde['passed'] else 'FAIL'}]"
    )
    w = rep["weight_consistency"]
    lines.append(
        f"weight |F|^p vs |J|: max rel err {w['max_rel_error']:.3e} "
        f"(tol {w['tol']:.1e}) [{'pass' if w['passed'] else 'FAIL'}]"
    )
    c = rep["conformality"]
    lines.append(
        f"conformality: max residual {c['max_residual']:.3e} "
        f"(tol {c['tol']:.1e}) [{'pass' if c['passed'] else 'FAIL'}]"
    )
    iso = rep.get("isometry")
    if iso:
        lines.append(
            f"isometry ({iso['mode']}, {iso['samples']} samples, seed {iso['seed']}) "
            f"[{'pass' if iso['passed'] else 'FAIL'}]"
        )
        for pr in iso["pairs"]:
            lines.append(
                f"  {pr['kind']:<11} ||f|| = {pr['norm_source']:.6g}  "
                f"||Tf|| = {pr['norm_target']:.6g}  "
                f"[{'pass' if pr['passed'] else 'FAIL'}]"
            )
    lines.append(f"certification: {'PASS' if rep['passed'] else 'FAIL'}")
    return "\n".join(lines)


def _human_family_eval(rep: dict) -> str:
    lines = [
        f"family {rep['case']}{rep['variant']} branch {rep['branch']:+d} "
        f"({len(rep['points'])} points, {rep['skipped_singular']} singular skipped)",
        "  ".join(f"{c:>14}" for c in rep["columns"]),
    ]
    for row in rep["points"]:
        lines.append("  ".join(f"{v: 14.6g}" for v in row))
    return "\n".join(lines)


_HUMAN_RENDERERS = {
    "diagonalize": _human_diagonalize,
    "classify": _human_classify,
    "certify": _human_certify,
    "family-eval": _human_family_eval,
}


def _emit(report_dict: dict, command: str, fmt: str, out: str | None) -> None:
    if fmt == "json":
        text = json.dumps(report_dict, indent=2)
    else:
        text = _HUMAN_RENDERERS[command](report_dict)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _run_local(command: str, raw: dict) -> dict:
    if command == "family-eval":
        return run_family_eval(FamilyEvalConfig.model_validate(raw)).model_dump()
    cfg = ProblemConfig.model_validate(raw)
    handler = {
        "diagonalize": run_diagonalize,
        "classify": run_classify,
        "certify": run_certify,
    }[command]
    return handler(cfg).model_dump()


def _run_remote(command: str, raw: dict, server: str) -> tuple[dict, int | None]:
    import httpx

    url = server.rstrip("/") + "/" + command
    resp = httpx.post(url, json=raw, timeout=600.0)
    body = resp.json()
    if resp.status_code == 200:
        return body, None
    if resp.status_code == 422:
        return body, EXIT_CONFIG
    if resp.status_code == 409:
        return body, EXIT_PRECONDITION
    return body, EXIT_PRECONDITION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpembed",
        description="Classify and certify isometric embeddings between "
        "Lp spaces of PDE solutions.",
    )
    parser.add_argument("--version", action="version", version=f"lpembed {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("diagonalize", "congruence-diagonalize the source matrix"),
        ("classify", "emit the embedding verdict for a problem config"),
        ("certify", "instantiate the witness and run all certifications"),
        ("family-eval", "evaluate a planar mapping family on a grid"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the JSON problem config")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--format", choices=("human", "json"), default="human")
        cmd.add_argument("--out", default=None, help="also write the report to this path")
        cmd.add_argument(
            "--server", default=None, help="run against a service URL instead of in-process"
        )
    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        import uvicorn

        from .service.app import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK
    try:
        raw = _load_config(args.config, args.seed)
        if args.server:
            report, error_code = _run_remote(args.command, raw, args.server)
            if error_code is not None:
                print(json.dumps(report, indent=2), file=sys.stderr)
                return error_code
        else:
            report = _run_local(args.command, raw)
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _PRECONDITION_ERRORS as exc:
        print(f"numeric precondition failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except LpEmbedError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    _emit(report, args.command, args.format, args.out)
    if args.command == "certify" and not report.get("passed", False):
        return EXIT_CERTIFICATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
