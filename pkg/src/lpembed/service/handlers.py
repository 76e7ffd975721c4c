"""Pure request handlers shared by the HTTP endpoints and the CLI."""

from __future__ import annotations

import numpy as np

from ..classifier import (
    Embeddable,
    WitnessParams,
    classify,
    instantiate_witness,
    reduced_domain,
    validate_coincidence,
)
from ..errors import ConfigError, SingularPoint
from ..geometry import TwoDFamily, jacobian
from ..jets import OperatorSpec
from ..linalg import Diagonalization, diagonalize
from ..operators import (
    QuadratureSpec,
    certify_isometry,
    certify_pde_mapping,
    check_conformality,
    check_weight_consistency,
    special_exponent,
)
from ..solutions import ReducedOperator, sample_solutions
from .models import (
    CertifyReport,
    ClassifyReport,
    CoincidenceModel,
    ConformalityFragmentModel,
    DiagonalizationModel,
    DiagonalizeReport,
    FamilyEvalConfig,
    FamilyEvalReport,
    IsometryFragmentModel,
    NormPairModel,
    PdeFragmentModel,
    ProblemConfig,
    ProvenanceModel,
    VerdictModel,
    WeightFragmentModel,
)


def _diag_model(diag: Diagonalization, matrix) -> DiagonalizationModel:
    a = np.asarray(matrix, dtype=float)
    resid = float(np.max(np.abs(diag.matrix.T @ a @ diag.matrix - diag.inertia())))
    return DiagonalizationModel(
        matrix=diag.matrix.tolist(),
        ell=diag.ell,
        signature=diag.signature,
        residual=resid,
    )


def _provenance(cfg, seed: int) -> ProvenanceModel:
    return ProvenanceModel(seed=seed, config_hash=cfg.config_hash())


def run_diagonalize(cfg: ProblemConfig) -> DiagonalizeReport:
    diag = diagonalize(cfg.matrix_a)
    return DiagonalizeReport(
        diagonalization=_diag_model(diag, cfg.matrix_a),
        provenance=_provenance(cfg, cfg.seed),
    )


def _verdict_model(verdict) -> VerdictModel:
    if verdict.kind == "non-isometric":
        return VerdictModel(kind="non-isometric", reason=verdict.reason, detail=verdict.detail)
    return VerdictModel(
        kind="embeddable",
        family=verdict.family,
        case=verdict.case,
        branch=verdict.branch,
        vector_condition=verdict.vector_condition,
        detail=verdict.detail,
    )


def _classify(cfg: ProblemConfig):
    e1 = cfg.domain1.to_domain()
    e2 = cfg.domain2.to_domain()
    verdict = classify(
        cfg.matrix_a, cfg.drift_a, e1, cfg.matrix_b, cfg.drift_b, e2, cfg.p
    )
    if verdict.kind == "embeddable":
        c, d = verdict.reduced_drift_a, verdict.reduced_drift_b
    else:
        c = verdict.diag_a.reduction_transform() @ np.asarray(cfg.drift_a, dtype=float)
        d = verdict.diag_b.reduction_transform() @ np.asarray(cfg.drift_b, dtype=float)
    report = ClassifyReport(
        verdict=_verdict_model(verdict),
        diag_a=_diag_model(verdict.diag_a, cfg.matrix_a),
        diag_b=_diag_model(verdict.diag_b, cfg.matrix_b),
        reduced_drift_a=c.tolist(),
        reduced_drift_b=d.tolist(),
        p=cfg.p,
        special_exponent=special_exponent(cfg.n),
        provenance=_provenance(cfg, cfg.seed),
    )
    return verdict, e1, e2, report


def run_classify(cfg: ProblemConfig) -> ClassifyReport:
    return _classify(cfg)[3]


def _witness_params(cfg: ProblemConfig) -> WitnessParams:
    w = cfg.witness
    if w is None:
        return WitnessParams()
    return WitnessParams(
        sign=w.sign,
        t=w.t,
        q=None if w.q is None else np.asarray(w.q, dtype=float),
        shift=None if w.shift is None else np.asarray(w.shift, dtype=float),
        inversion_center=(
            None if w.inversion_center is None else np.asarray(w.inversion_center, dtype=float)
        ),
        variant=w.variant,
        gamma=w.gamma,
        delta=w.delta,
        k=w.k,
        alpha=w.alpha,
        beta=w.beta,
    )


def run_certify(cfg: ProblemConfig) -> CertifyReport:
    verdict, e1, e2, classify_report = _classify(cfg)
    if not isinstance(verdict, Embeddable):
        raise ConfigError(
            f"verdict is non-isometric ({verdict.reason}); there is no witness to certify"
        )
    if cfg.witness is not None and cfg.witness.family != verdict.family:
        raise ConfigError(
            f"witness family {cfg.witness.family!r} does not match the verdict "
            f"family {verdict.family!r}"
        )
    params = _witness_params(cfg)
    cert = cfg.certification
    op = instantiate_witness(
        verdict, e1, e2, params, coincidence_samples=cert.coincidence_samples, seed=cfg.seed
    )
    e1r = reduced_domain(e1, verdict.diag_a)
    e2r = reduced_domain(e2, verdict.diag_b)
    coincidence = validate_coincidence(
        op.tau, e1r, e2r, samples=cert.coincidence_samples, seed=cfg.seed
    )
    h = ReducedOperator(ell=verdict.diag_a.ell, alpha=verdict.reduced_drift_a, n=cfg.n)
    sols = sample_solutions(h, e1r, budget=cert.solutions, seed=cfg.seed)
    spec_b = OperatorSpec.make(cfg.matrix_b, cfg.drift_b)
    pde = certify_pde_mapping(
        op, spec_b, sols, e2, tol=cert.pde_tol, points=cert.points, seed=cfg.seed
    )
    weight = check_weight_consistency(op, e2r, tol=cert.weight_tol, seed=cfg.seed)
    conf = check_conformality(op, e2r, tol=cert.weight_tol, seed=cfg.seed)
    iso_model = None
    passed = coincidence.passed and pde.passed and weight.passed and conf.passed
    if cert.isometry:
        quad = QuadratureSpec(
            method=cfg.quadrature.method,
            points=cfg.quadrature.points,
            order=cfg.quadrature.order,
            seed=cfg.quad_seed(),
        )
        iso = certify_isometry(op, sols, e1, e2, quad)
        iso_model = IsometryFragmentModel(
            pairs=[NormPairModel(**vars(pr)) for pr in iso.pairs],
            mode=iso.mode,
            samples=iso.samples,
            seed=iso.seed,
            passed=iso.passed,
        )
        passed = passed and iso.passed
    return CertifyReport(
        classify=classify_report,
        coincidence=CoincidenceModel(**vars(coincidence)),
        pde_mapping=PdeFragmentModel(
            max_scaled_residual=pde.max_scaled_residual,
            tol=pde.tol,
            points=pde.points,
            passed=pde.passed,
            per_solution=list(pde.per_solution),
        ),
        weight_consistency=WeightFragmentModel(**vars(weight)),
        conformality=ConformalityFragmentModel(**vars(conf)),
        isometry=iso_model,
        passed=passed,
        provenance=_provenance(cfg, cfg.seed),
    )


def run_family_eval(cfg: FamilyEvalConfig) -> FamilyEvalReport:
    fam = TwoDFamily(
        case=cfg.case,
        variant=cfg.variant,
        branch=cfg.branch,
        p=cfg.p,
        c=cfg.c,
        d=cfg.d,
        gamma=cfg.gamma,
        delta=cfg.delta,
        k=cfg.k,
        alpha=cfg.alpha,
        beta=cfg.beta,
    )
    xs = np.linspace(cfg.grid.lo[0], cfg.grid.hi[0], cfg.grid.counts[0])
    ys = np.linspace(cfg.grid.lo[1], cfg.grid.hi[1], cfg.grid.counts[1])
    rows = []
    skipped = 0
    for x1 in xs:
        for x2 in ys:
            x = np.array([x1, x2])
            try:
                u = fam.apply(x)
                det = jacobian(fam, x).det
            except SingularPoint:
                skipped += 1
                continue
            rows.append([float(x1), float(x2), float(u[0]), float(u[1]), det])
    return FamilyEvalReport(
        case=cfg.case,
        variant=cfg.variant,
        branch=cfg.branch,
        columns=["x1", "x2", "u1", "u2", "jacobian_det"],
        points=rows,
        skipped_singular=skipped,
        provenance=ProvenanceModel(seed=cfg.seed, config_hash=cfg.config_hash()),
    )
