"""The embedding decision procedure.

Given two operator pairs (A, a), (B, b), domains, and an exponent p, decide
whether an isometric embedding between the solution spaces can exist, and
name the witness family when it can: similarities for matching signatures,
similarity-plus-inversion at the exceptional exponent 2n/(n-2) with zero
drifts, and the planar mapping catalog when n = 2, the index is 1, and both
reduced drifts are null vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import AffineImage, DomainSpec, sample_admissible
from .errors import DomainMismatch, InvalidParams
from .geometry import (
    Composition,
    Inversion,
    MappingSpec,
    Similarity,
    TwoDFamily,
    preimage,
)
from .linalg import Diagonalization, diagonalize, inertia_vector
from .operators import (
    WeightedCompositionOperator,
    assemble,
    check_exponent,
    special_exponent,
)

ZERO_TOL = 1e-10

REASON_SIGNATURE = "signature-mismatch"
REASON_DRIFT = "drift-mismatch"
REASON_NULL_DRIFT = "null-drift-mismatch"
REASON_VECTOR_CONDITION = "vector-condition-unsatisfiable"

FAMILY_SIMILARITY = "similarity"
FAMILY_SIMILARITY_INVERSION = "similarity-plus-inversion"
FAMILY_TWO_D = "two-d-family"


@dataclass(frozen=True, eq=False)
class NonIsometric:
    reason: str
    detail: str
    diag_a: Diagonalization
    diag_b: Diagonalization

    @property
    def kind(self) -> str:
        return "non-isometric"


@dataclass(frozen=True, eq=False)
class Embeddable:
    family: str
    detail: str
    diag_a: Diagonalization
    diag_b: Diagonalization
    reduced_drift_a: np.ndarray
    reduced_drift_b: np.ndarray
    p: float
    vector_condition: bool = False
    case: str | None = None
    branch: int | None = None

    @property
    def kind(self) -> str:
        return "embeddable"


Verdict = NonIsometric | Embeddable


def _zero(v: np.ndarray, scale: float) -> bool:
    return float(np.max(np.abs(v), initial=0.0)) <= ZERO_TOL * (1.0 + scale)


def classify(a_matrix, a_drift, e1, b_matrix, b_drift, e2, p) -> Verdict:
    """Emit the verdict for a problem instance.

    The verdict names the witness family; it does not search for a concrete
    mapping between the two domains (that is the caller's instantiation
    step, validated by sampling).
    """
    a_matrix = np.asarray(a_matrix, dtype=float)
    b_matrix = np.asarray(b_matrix, dtype=float)
    a_drift = np.asarray(a_drift, dtype=float)
    b_drift = np.asarray(b_drift, dtype=float)
    diag_a = diagonalize(a_matrix)
    diag_b = diagonalize(b_matrix)
    n = diag_a.n
    if diag_b.n != n:
        raise InvalidParams("operator pairs live in different dimensions")
    if e1 is not None and e2 is not None and (e1.dim != n or e2.dim != n):
        raise InvalidParams("domain dimension does not match the operators")
    p = check_exponent(p, n)
    scale = max(
        float(np.max(np.abs(m), initial=0.0)) for m in (a_matrix, b_matrix, a_drift, b_drift)
    )
    if diag_a.ell != diag_b.ell:
        return NonIsometric(
            REASON_SIGNATURE,
            f"signatures differ: {diag_a.signature} vs {diag_b.signature}",
            diag_a,
            diag_b,
        )
    ell = diag_a.ell
    c = diag_a.reduction_transform() @ a_drift
    d = diag_b.reduction_transform() @ b_drift
    za = _zero(a_drift, scale)
    zb = _zero(b_drift, scale)
    sp = special_exponent(n)

    def embeddable(family, detail, vc=False, case=None, branch=None):
        return Embeddable(
            family=family,
            detail=detail,
            diag_a=diag_a,
            diag_b=diag_b,
            reduced_drift_a=c,
            reduced_drift_b=d,
            p=p,
            vector_condition=vc,
            case=case,
            branch=branch,
        )

    if n == 2 and ell == 1:
        return _classify_planar_hyperbolic(c, d, scale, embeddable, diag_a, diag_b)

    # definite or higher-dimensional indefinite case: similarity machinery
    if za != zb:
        return NonIsometric(
            REASON_DRIFT,
            "exactly one of the drift vectors vanishes",
            diag_a,
            diag_b,
        )
    if za and zb:
        if n >= 3 and sp is not None and abs(p - sp) <= 1e-9:
            return embeddable(
                FAMILY_SIMILARITY_INVERSION,
                f"zero drifts at the exceptional exponent {sp:g}: an inversion may enter",
            )
        return embeddable(FAMILY_SIMILARITY, "zero drifts: similarity witnesses only")
    # both drifts nonzero: the indefinite norms of the reduced drifts must be
    # compatible for some similarity to satisfy the vector condition
    eps = inertia_vector(ell, n)
    qc = float(eps @ (c * c))
    qd = float(eps @ (d * d))
    tolq = ZERO_TOL * (1.0 + float(c @ c) + float(d @ d))
    zc, zd = abs(qc) <= tolq, abs(qd) <= tolq
    if zc != zd or (not zc and not zd and qc * qd < 0.0):
        return NonIsometric(
            REASON_VECTOR_CONDITION,
            "no similarity can align the reduced drifts: their indefinite norms are incompatible",
            diag_a,
            diag_b,
        )
    return embeddable(
        FAMILY_SIMILARITY,
        "nonzero drifts: similarity witnesses constrained by the drift alignment condition",
        vc=True,
    )


def _classify_planar_hyperbolic(c, d, scale, embeddable, diag_a, diag_b):
    """n = 2, index 1: the decision runs on the null norms c1^2 - c2^2, d1^2 - d2^2."""
    qc = float(c[0] * c[0] - c[1] * c[1])
    qd = float(d[0] * d[0] - d[1] * d[1])
    tolq = ZERO_TOL * (1.0 + float(c @ c) + float(d @ d))
    zqc, zqd = abs(qc) <= tolq, abs(qd) <= tolq
    if zqc != zqd:
        return NonIsometric(
            REASON_NULL_DRIFT,
            "exactly one reduced drift has vanishing null norm",
            diag_a,
            diag_b,
        )
    if not zqc and not zqd:
        if qc * qd < 0.0:
            return NonIsometric(
                REASON_VECTOR_CONDITION,
                "null norms of the reduced drifts have opposite signs",
                diag_a,
                diag_b,
            )
        return embeddable(
            FAMILY_SIMILARITY,
            "nonvanishing null norms: similarity witnesses with the drift alignment condition",
            vc=True,
        )
    # both null norms vanish: the planar catalog applies
    zc = _zero(c, scale)
    zd = _zero(d, scale)
    if zc and zd:
        return embeddable(FAMILY_SIMILARITY, "zero drifts: similarity witnesses only")
    if zc:
        branch = 1 if d[0] * d[1] > 0.0 else -1
        return embeddable(
            FAMILY_TWO_D, "source drift zero, target drift null", case="F3", branch=branch
        )
    if zd:
        branch = 1 if c[0] * c[1] > 0.0 else -1
        return embeddable(
            FAMILY_TWO_D, "target drift zero, source drift null", case="F4", branch=branch
        )
    sc = 1 if c[0] * c[1] > 0.0 else -1
    sd = 1 if d[0] * d[1] > 0.0 else -1
    case = "F1" if sc == sd else "F2"
    word = "aligned" if sc == sd else "anti-aligned"
    return embeddable(FAMILY_TWO_D, f"both drifts null and {word}", case=case, branch=sc)


def vector_condition_check(j, ma, nb, tau_det: float, n: int, tol: float = 1e-8) -> bool:
    """Does J d = |det J|^(2/n) c hold for the affine witness?"""
    j = np.asarray(j, dtype=float)
    ma = np.asarray(ma, dtype=float)
    nb = np.asarray(nb, dtype=float)
    lhs = j @ nb
    rhs = abs(tau_det) ** (2.0 / n) * ma
    return float(np.linalg.norm(lhs - rhs)) <= tol * (1.0 + float(np.linalg.norm(ma)))


@dataclass(frozen=True, eq=False)
class WitnessParams:
    """User-supplied data pinning one concrete witness inside a family."""

    sign: int = 1
    t: float = 1.0
    q: np.ndarray | None = None
    shift: np.ndarray | None = None
    inversion_center: np.ndarray | None = None
    variant: str = "a"
    gamma: float = 0.0
    delta: float = 0.0
    k: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0


@dataclass(frozen=True, eq=False)
class CoincidenceReport:
    forward_fraction: float
    coverage_fraction: float
    samples: int
    min_fraction: float
    passed: bool


def reduced_domain(domain: DomainSpec, diag: Diagonalization) -> DomainSpec:
    w = diag.reduction_transform()
    if np.array_equal(w, np.eye(diag.n)):
        return domain
    return AffineImage.make(domain, w, margin=domain.margin)


def validate_coincidence(
    tau: MappingSpec,
    e1_reduced: DomainSpec,
    e2_reduced: DomainSpec,
    samples: int = 10_000,
    min_fraction: float = 0.999,
    seed: int = 0,
) -> CoincidenceReport:
    """Sampling validation that the reduced domains coincide up to the mapping.

    Forward: mapped target samples must land in the closure of the source.
    Coverage: source samples must have a preimage inside the target, found
    through the mapping's closed-form inverse branches.
    """
    rng = np.random.default_rng(seed)
    tol = 1e-6 * (1.0 + e1_reduced.diameter())
    fwd_count = min(samples, 2000)
    ys = sample_admissible(e2_reduced, rng, fwd_count, tau.singular_margin_fns(),
                           margin=e2_reduced.margin)
    images = tau.apply_many(ys)
    forward_fraction = float(np.mean(e1_reduced.contains(images, tol=tol)))
    xs = e1_reduced.sample(rng, samples)
    hits = 0
    for x in xs:
        for cand in preimage(tau, x, tol=1e-8):
            if bool(e2_reduced.contains(cand[None, :], tol=tol)[0]):
                hits += 1
                break
    coverage_fraction = hits / samples
    passed = bool(forward_fraction >= min_fraction and coverage_fraction >= min_fraction)
    return CoincidenceReport(
        forward_fraction=forward_fraction,
        coverage_fraction=coverage_fraction,
        samples=samples,
        min_fraction=min_fraction,
        passed=passed,
    )


def build_witness_mapping(verdict: Embeddable, params: WitnessParams) -> MappingSpec:
    """The mapping between the reduced domains encoded by the params."""
    n = verdict.diag_a.n
    ell = verdict.diag_a.ell
    if verdict.family == FAMILY_SIMILARITY:
        q = np.eye(n) if params.q is None else np.asarray(params.q, dtype=float)
        shift = np.zeros(n) if params.shift is None else np.asarray(params.shift, dtype=float)
        tau = Similarity.make(params.t, q, shift, ell)
        if verdict.vector_condition:
            det = float(np.linalg.det(tau.matrix))
            if not vector_condition_check(
                tau.matrix, verdict.reduced_drift_a, verdict.reduced_drift_b, det, n
            ):
                raise InvalidParams(
                    "similarity witness violates the drift alignment condition"
                )
        return tau
    if verdict.family == FAMILY_SIMILARITY_INVERSION:
        if params.inversion_center is None:
            raise InvalidParams("this witness family needs an inversion center")
        inv = Inversion.make(np.asarray(params.inversion_center, dtype=float), ell)
        needs_sim = (
            params.t != 1.0
            or params.q is not None
            or (params.shift is not None and np.any(np.asarray(params.shift) != 0.0))
        )
        if needs_sim:
            q = np.eye(n) if params.q is None else np.asarray(params.q, dtype=float)
            shift = np.zeros(n) if params.shift is None else np.asarray(params.shift, dtype=float)
            return Composition((inv, Similarity.make(params.t, q, shift, ell)))
        return inv
    if verdict.family == FAMILY_TWO_D:
        c = float(verdict.reduced_drift_a[0])
        d = float(verdict.reduced_drift_b[0])
        if verdict.case == "F3":
            c = 0.0
        if verdict.case == "F4":
            d = 0.0
        return TwoDFamily(
            case=verdict.case,
            variant=params.variant,
            branch=verdict.branch,
            p=verdict.p,
            c=c,
            d=d,
            gamma=params.gamma,
            delta=params.delta,
            k=params.k,
            alpha=params.alpha,
            beta=params.beta,
        )
    raise InvalidParams(f"unknown witness family {verdict.family!r}")


def instantiate_witness(
    verdict: Verdict,
    e1: DomainSpec,
    e2: DomainSpec,
    params: WitnessParams,
    coincidence_samples: int = 10_000,
    seed: int = 0,
) -> WeightedCompositionOperator:
    """Build the operator for a concrete witness and validate the domains.

    Raises InvalidParams for constraint violations and DomainMismatch when
    the sampled coincidence validation fails.
    """
    if not isinstance(verdict, Embeddable):
        raise InvalidParams("only embeddable verdicts can be instantiated")
    tau = build_witness_mapping(verdict, params)
    e1r = reduced_domain(e1, verdict.diag_a)
    e2r = reduced_domain(e2, verdict.diag_b)
    report = validate_coincidence(
        tau, e1r, e2r, samples=coincidence_samples, seed=seed
    )
    if not report.passed:
        raise DomainMismatch(
            "domains do not coincide up to the witness mapping "
            f"(forward {report.forward_fraction:.4f}, coverage {report.coverage_fraction:.4f})"
        )
    rng = np.random.default_rng(seed)
    ref = sample_admissible(e2r, rng, 1, tau.singular_margin_fns(), margin=e2r.margin)[0]
    return assemble(verdict.diag_a, verdict.diag_b, tau, verdict.p, params.sign, ref_point=ref)
