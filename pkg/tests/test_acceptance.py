"""Acceptance gate: every criterion at its stated tolerance, one line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS lines.
"""

import time

import numpy as np

from lpembed.classifier import NonIsometric, classify, vector_condition_check
from lpembed.domains import AffineImage, Ball, Box
from lpembed.errors import SingularOnDomain
from lpembed.geometry import (
    Inversion,
    Similarity,
    TwoDFamily,
    jacobian,
    pseudo_rotation,
)
from lpembed.jets import OperatorSpec
from lpembed.linalg import diagonalize, signature
from lpembed.operators import (
    QuadratureSpec,
    assemble,
    certify_isometry,
    certify_pde_mapping,
    check_weight_consistency,
    lp_norm,
)
from lpembed.solutions import ReducedOperator, sample_solutions

from conftest import fd_gradient, fd_hessian, random_composite_field, random_symmetric_nonsingular


def _report(num, name, passed, detail):
    line = f"ACCEPTANCE {num} {name}: {'PASS' if passed else 'FAIL'} ({detail})"
    print("\n" + line, flush=True)
    assert passed, line


def test_criterion_1_diagonalization_suite():
    start = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for i in range(1000):
        n = 2 + i % 4
        a = random_symmetric_nonsingular(rng, n)
        d = diagonalize(a)
        resid = float(np.max(np.abs(d.matrix.T @ a @ d.matrix - d.inertia())))
        worst = max(worst, resid)
    invariant_ok = True
    for _ in range(100):
        n = int(rng.integers(2, 6))
        a = random_symmetric_nonsingular(rng, n)
        p = rng.standard_normal((n, n))
        while abs(np.linalg.det(p)) < 1e-2:
            p = rng.standard_normal((n, n))
        b = p.T @ a @ p
        b = 0.5 * (b + b.T)
        invariant_ok &= signature(b) == signature(a)
    elapsed = time.perf_counter() - start
    _report(
        1,
        "diagonalization-suite",
        worst <= 1e-10 and invariant_ok and elapsed < 5.0,
        f"max residual {worst:.2e}, congruence invariance {invariant_ok}, {elapsed:.2f}s",
    )


def test_criterion_2_jet_correctness():
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    worst_g = 0.0
    worst_h = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 4))
        f = random_composite_field(rng, n)
        for _ in range(3):
            x = rng.uniform(-0.8, 0.8, n)
            j = f.eval_jet(x)
            g = fd_gradient(f, x)
            h = fd_hessian(f, x)
            worst_g = max(worst_g, np.max(np.abs(j.grad - g)) / (1.0 + np.max(np.abs(j.grad))))
            worst_h = max(worst_h, np.max(np.abs(j.hess - h)) / (1.0 + np.max(np.abs(j.hess))))
    elapsed = time.perf_counter() - start
    _report(
        2,
        "jet-correctness",
        worst_g <= 1e-6 and worst_h <= 1e-4 and elapsed < 10.0,
        f"grad err {worst_g:.2e}, hess err {worst_h:.2e}, {elapsed:.2f}s",
    )


def _kelvin_pieces():
    diag = diagonalize(np.eye(3))
    inv = Inversion.make(np.zeros(3), 3)
    e2 = Ball.make([1.6, 0.0, 0.0], 0.4)
    s = 1.6**2 - 0.4**2
    e1 = Ball.make([1.6 / s, 0.0, 0.0], 0.4 / s)
    h = ReducedOperator(ell=3, alpha=np.zeros(3), n=3)
    sols = sample_solutions(h, e1, budget=10, seed=33)
    assert len(sols) == 10
    assert all(
        m.kind in ("polynomial", "linear") and (m.kind == "linear" or m.meta[1] <= 3)
        for m in sols.members
    )
    return diag, inv, e1, e2, sols


def test_criterion_3_kelvin_reproduction():
    start = time.perf_counter()
    diag, inv, e1, e2, sols = _kelvin_pieces()
    op = assemble(diag, diag, inv, 6.0, 1)
    pde = certify_pde_mapping(
        op, OperatorSpec.make(np.eye(3)), sols, e2, tol=1e-7, points=200, seed=33
    )
    quad = QuadratureSpec(method="mc", points=1_000_000, seed=33)
    iso = certify_isometry(op, sols, e1, e2, quad)
    elapsed = time.perf_counter() - start
    _report(
        3,
        "kelvin-reproduction",
        pde.passed and iso.passed and elapsed < 60.0,
        f"max residual {pde.max_scaled_residual:.2e} at 200 points, "
        f"{len(iso.pairs)} norms within 3 MC errors at 1e6 samples, {elapsed:.1f}s",
    )


def test_criterion_4_wrong_exponent_negative_control():
    diag, inv, e1, e2, sols = _kelvin_pieces()
    op = assemble(diag, diag, inv, 3.0, 1)
    pde = certify_pde_mapping(
        op, OperatorSpec.make(np.eye(3)), sols, e2, tol=1e-3, points=200, seed=33
    )
    _report(
        4,
        "wrong-exponent-control",
        (not pde.passed) and pde.max_scaled_residual > 1e-3,
        f"residual {pde.max_scaled_residual:.2e} > 1e-3 as required",
    )


def test_criterion_5_drift_obstruction_and_vector_condition():
    i3 = np.eye(3)
    b1 = Box.unit(3)
    v = classify(i3, np.zeros(3), b1, i3, [1.0, 0.0, 0.0], b1, 3.0)
    obstructed = isinstance(v, NonIsometric) and v.reason == "drift-mismatch"
    t = 2.0
    ma = np.array([0.7, 0.0, 0.0])
    matched = vector_condition_check(t * i3, ma, t * ma, t**3, 3, tol=1e-8)
    mismatched = not vector_condition_check(
        t * i3, ma, t * ma + np.array([0.0, 1e-4, 0.0]), t**3, 3, tol=1e-8
    )
    _report(
        5,
        "drift-obstruction",
        obstructed and matched and mismatched,
        f"verdict {v.reason}, matched witness true, perturbed witness false",
    )


_CHAR_INTERVALS = (
    (0.3, 1.0),
    (-1.0, -0.3),
    (1.2, 2.0),
    (-2.0, -1.2),
    (0.05, 0.5),
    (-0.5, -0.05),
    (2.2, 3.0),
    (-3.0, -2.2),
)


def _admissible_ranges(fam):
    for xi in _CHAR_INTERVALS:
        for eta in _CHAR_INTERVALS:
            try:
                (vs_lo, vs_hi), (vd_lo, vd_hi) = fam.characteristic_ranges(xi, eta)
            except SingularOnDomain:
                continue
            if vs_hi - vs_lo > 1e-4 and vd_hi - vd_lo > 1e-4:
                return xi, eta, (vs_lo, vs_hi), (vd_lo, vd_hi)
    return None


def _family_domains(fam, xi_r, eta_r, vs_r, vd_r):
    c_to_x = 0.5 * np.array([[1.0, 1.0], [1.0, -1.0]])
    e2 = AffineImage.make(
        Box.make([xi_r[0], eta_r[0]], [xi_r[1], eta_r[1]]), c_to_x, margin=1e-3
    )
    e1 = AffineImage.make(
        Box.make([vs_r[0], vd_r[0]], [vs_r[1], vd_r[1]]), c_to_x, margin=1e-3
    )
    return e1, e2


def test_criterion_6_planar_family_catalog():
    start = time.perf_counter()
    rng = np.random.default_rng(606)
    a2 = np.diag([1.0, -1.0])
    diag = diagonalize(a2)
    p = 3.0
    combos = 0
    worst_sys = 0.0
    worst_weight = 0.0
    worst_pde = 0.0
    for case in ("F1", "F2", "F3", "F4"):
        for variant in ("a", "b"):
            for branch in (1, -1):
                draws = 0
                while draws < 3:
                    c = 0.0 if case == "F3" else float(rng.uniform(0.6, 1.3) * rng.choice([-1, 1]))
                    d = 0.0 if case == "F4" else float(rng.uniform(0.6, 1.3) * rng.choice([-1, 1]))
                    gamma = float(rng.uniform(0.4, 1.0) * rng.choice([-1, 1]))
                    k = float(rng.uniform(0.4, 1.0) * rng.choice([-1, 1]))
                    delta = float(rng.uniform(-0.5, 0.5))
                    fam = TwoDFamily(
                        case=case, variant=variant, branch=branch, p=p, c=c, d=d,
                        gamma=gamma, delta=delta, k=k,
                        alpha=float(rng.uniform(-0.3, 0.3)),
                        beta=float(rng.uniform(-0.3, 0.3)),
                    )
                    found = _admissible_ranges(fam)
                    if found is None:
                        continue
                    draws += 1
                    combos += 1
                    e1, e2 = _family_domains(fam, *found)
                    # first-order system residuals at sampled points
                    pts = e2.sample(np.random.default_rng(7), 40)
                    s = fam.pde_sign
                    for x in pts:
                        try:
                            j = jacobian(fam, x).jacobian
                        except Exception:
                            continue
                        worst_sys = max(
                            worst_sys,
                            abs(j[0, 0] - s * j[1, 1]),
                            abs(j[0, 1] - s * j[1, 0]),
                        )
                    ref = e2.sample(np.random.default_rng(8), 64)
                    margins = [g(ref) for g in fam.singular_margin_fns()]
                    if margins:
                        keep = np.all(np.stack(margins) >= 1e-3, axis=0)
                        ref = ref[keep]
                    op = assemble(diag, diag, fam, p, 1, ref_point=ref[0])
                    w = check_weight_consistency(op, e2, tol=1e-6, points=100, seed=9)
                    worst_weight = max(worst_weight, w.max_rel_error)
                    cvec, dvec = fam.drift_vectors()
                    h = ReducedOperator(ell=1, alpha=cvec, n=2)
                    sols = sample_solutions(h, e1, budget=5, seed=10)
                    pde = certify_pde_mapping(
                        op,
                        OperatorSpec.make(a2, dvec),
                        sols,
                        e2,
                        tol=1e-7,
                        points=200,
                        seed=11,
                    )
                    worst_pde = max(worst_pde, pde.max_scaled_residual)
    elapsed = time.perf_counter() - start
    _report(
        6,
        "planar-family-catalog",
        combos == 48
        and worst_sys <= 1e-8
        and worst_weight <= 1e-6
        and worst_pde <= 1e-7
        and elapsed < 120.0,
        f"{combos} instances, system residual {worst_sys:.2e}, weight err "
        f"{worst_weight:.2e}, pde residual {worst_pde:.2e}, {elapsed:.1f}s",
    )


def test_criterion_7_similarity_isometry():
    diag = diagonalize(np.eye(2))
    t = 0.8
    q = pseudo_rotation(2, 2, 0, 1, 0.37)
    shift = np.array([0.25, -0.4])
    tau = Similarity.make(t, q, shift, 2)
    e2 = Box.unit(2)
    e1 = AffineImage.make(Box.unit(2), t * q, shift)
    op = assemble(diag, diag, tau, 3.0, 1)
    # exact path: the constant weight satisfies |F|^p = |det J| to round-off,
    # so the change of variables gives norm equality analytically
    det = abs(np.linalg.det(tau.matrix))
    exact = abs(abs(op.weight(np.zeros(2))) ** 3.0 - det) <= 1e-12 * det
    h = ReducedOperator(ell=2, alpha=np.zeros(2), n=2)
    sols = sample_solutions(h, e1, budget=6, seed=77)
    quad = QuadratureSpec(method="gauss", order=48)
    worst_gauss = 0.0
    for f in [m.field for m in sols.members]:
        n1, _ = lp_norm(f, e1, 3.0, quad)
        n2, _ = lp_norm(op.apply(f), e2, 3.0, quad)
        worst_gauss = max(worst_gauss, abs(n1 - n2) / (1.0 + n1))
    iso = certify_isometry(op, sols, e1, e2, QuadratureSpec(method="mc", points=200_000, seed=5))
    _report(
        7,
        "similarity-isometry",
        exact and iso.passed and iso.mode == "exact-change-of-variables" and worst_gauss < 1e-4,
        f"weight identity exact, quadrature equality {worst_gauss:.2e}, MC within 3 errors",
    )


def test_criterion_8_classifier_table():
    i3, i2 = np.eye(3), np.eye(2)
    hyp = np.diag([1.0, -1.0])
    b3, b2 = Box.unit(3), Box.unit(2)
    z3, z2 = np.zeros(3), np.zeros(2)
    # hand-transcribed expected verdict tags
    table = [
        (dict(A=i3, a=z3, B=np.diag([1.0, -1.0, -1.0]), b=z3, E=b3, p=3.0),
         ("non-isometric", "signature-mismatch")),
        (dict(A=i3, a=z3, B=i3, b=[1, 0, 0], E=b3, p=3.0),
         ("non-isometric", "drift-mismatch")),
        (dict(A=i3, a=[0, 1, 0], B=i3, b=z3, E=b3, p=3.0),
         ("non-isometric", "drift-mismatch")),
        (dict(A=i3, a=z3, B=i3, b=z3, E=b3, p=3.0),
         ("embeddable", "similarity")),
        (dict(A=i3, a=z3, B=i3, b=z3, E=b3, p=6.0),
         ("embeddable", "similarity-plus-inversion")),
        (dict(A=i3, a=[1, 0, 0], B=i3, b=[0, 2, 0], E=b3, p=3.0),
         ("embeddable", "similarity")),
        (dict(A=i2, a=z2, B=hyp, b=z2, E=b2, p=3.0),
         ("non-isometric", "signature-mismatch")),
        (dict(A=i2, a=z2, B=i2, b=[1, 0], E=b2, p=3.0),
         ("non-isometric", "drift-mismatch")),
        (dict(A=i2, a=z2, B=i2, b=z2, E=b2, p=2.5),
         ("embeddable", "similarity")),
        (dict(A=hyp, a=[1, 0], B=hyp, b=[1, 1], E=b2, p=3.0),
         ("non-isometric", "null-drift-mismatch")),
        (dict(A=hyp, a=[1, 0], B=hyp, b=[2, 0], E=b2, p=3.0),
         ("embeddable", "similarity")),
        (dict(A=hyp, a=[1, 1], B=hyp, b=[1, -1], E=b2, p=3.0),
         ("embeddable", "two-d-family:F2")),
    ]
    results = []
    for cfg, expected in table:
        v = classify(cfg["A"], cfg["a"], cfg["E"], cfg["B"], cfg["b"], cfg["E"], cfg["p"])
        if isinstance(v, NonIsometric):
            tag = ("non-isometric", v.reason)
        else:
            fam = v.family if v.case is None else f"{v.family}:{v.case}"
            tag = ("embeddable", fam)
        results.append(tag == expected)
    _report(
        8,
        "classifier-table",
        all(results),
        f"{sum(results)}/12 verdicts match the expected table",
    )
