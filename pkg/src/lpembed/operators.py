"""Weighted composition operators and their numerical certification.

An operator here is Tf = sign * F * (f o tau) acting between the reduced
solution spaces, conjugated by the diagonalizing changes of variables on
both sides.  The weight F is built per mapping variant so that |F|^p equals
the absolute Jacobian of tau; certification checks that property, the
solution-to-solution mapping property (via jets), and the norm identity
(via quadrature).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import AffineImage, Box, DomainSpec, sample_admissible
from .errors import InvalidExponent, InvalidParams, SingularOnDomain
from .geometry import (
    Affine,
    Composed,
    Composition,
    Inversion,
    MappingSpec,
    Similarity,
    TwoDFamily,
    jacobian,
)
from .jets import (
    Exp,
    OperatorSpec,
    Polynomial,
    Product,
    PseudoNormPower,
    Scale,
    ScalarField,
    Sum,
    apply_operator,
)
from .linalg import Diagonalization, inertia_matrix
from .solutions import SolutionSet, lift_solutions

EVEN_INT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class QuadratureSpec:
    method: str = "mc"  # "mc" | "gauss"
    points: int = 100_000
    order: int = 32
    seed: int = 0


def special_exponent(n: int) -> float | None:
    """The exceptional exponent 2n/(n-2) at which inversions enter (n >= 3)."""
    return 2.0 * n / (n - 2.0) if n >= 3 else None


def check_exponent(p: float, n: int | None = None) -> float:
    """p must be positive and not an even integer.

    The one carve-out is p == 2n/(n-2): for n = 3 and 4 that value happens
    to be an even integer, yet the inversion-type operator it enables is
    constructed and certified directly, so it stays admissible.
    """
    p = float(p)
    if p <= 0.0:
        raise InvalidExponent(f"p must be positive, got {p}")
    nearest = round(p)
    if abs(p - nearest) < EVEN_INT_TOL and nearest % 2 == 0:
        sp = special_exponent(n) if n is not None else None
        if sp is None or abs(p - sp) > 1e-9:
            raise InvalidExponent(f"p must not be an even integer, got {p}")
    return p


@dataclass(frozen=True, eq=False)
class WeightedCompositionOperator:
    """sign * F * (f o tau) between reduced spaces, with the diagonalizing
    transforms recorded so the operator also acts in original coordinates."""

    diag_a: Diagonalization
    diag_b: Diagonalization
    tau: MappingSpec
    weight: ScalarField
    sign: int
    p: float

    @property
    def n(self) -> int:
        return self.diag_a.n

    @property
    def ell(self) -> int:
        return self.diag_a.ell

    def source_transform(self) -> np.ndarray:
        return self.diag_a.reduction_transform()

    def target_transform(self) -> np.ndarray:
        return self.diag_b.reduction_transform()

    def overall_map(self) -> MappingSpec:
        """x -> W_a^{-1} tau(W_b x) acting between the original domains."""
        wa = self.source_transform()
        wb = self.target_transform()
        return Composition((Affine.make(wb), self.tau, Affine.make(np.linalg.inv(wa))))

    def weight_const(self) -> float:
        wa = self.source_transform()
        wb = self.target_transform()
        return abs(np.linalg.det(wb) / np.linalg.det(wa)) ** (1.0 / self.p)

    def weight_field(self) -> ScalarField:
        """The weight in original target coordinates."""
        wb = self.target_transform()
        return Scale(self.weight_const(), Composed(self.weight, Affine.make(wb)))

    def apply(self, f: ScalarField) -> ScalarField:
        """Image of an original-coordinates source solution."""
        return Scale(float(self.sign), Product(self.weight_field(), Composed(f, self.overall_map())))

    def apply_reduced(self, g: ScalarField) -> ScalarField:
        """Image of a reduced-coordinates source solution."""
        return Scale(float(self.sign), Product(self.weight, Composed(g, self.tau)))

    def guard_fns_original(self):
        wb = self.target_transform()
        pre = Affine.make(wb)
        return [
            (lambda pts, _g=g: _g(pre.apply_many(pts)))
            for g in self.tau.singular_margin_fns()
        ]


def _family_weight_shape(fam: TwoDFamily) -> ScalarField:
    """exp((1/2)(c1 u1 - c2 u2 - d1 x1 + d2 x2)): the exponential weight all
    family instances share once their coordinates solve the characteristic
    equations."""
    cvec, dvec = fam.drift_vectors()
    u1, u2 = fam.coordinate_fields()
    parts: list[ScalarField] = []
    if cvec[0] != 0.0:
        parts.append(Scale(cvec[0], u1))
    if cvec[1] != 0.0:
        parts.append(Scale(-cvec[1], u2))
    parts.append(Polynomial.linear(np.array([-dvec[0], dvec[1]])))
    return Exp(Scale(0.5, Sum(tuple(parts))))


def _stage_weight(stage: MappingSpec, prefix: list[MappingSpec], ell: int, n: int, p: float):
    """(constant, field-or-None) contribution of one composition stage."""
    if isinstance(stage, (Similarity, Affine)):
        return abs(np.linalg.det(stage.matrix)) ** (1.0 / p), None
    if isinstance(stage, Inversion):
        shape = PseudoNormPower(n, stage.center.copy(), stage.ell, -n / p)
        if prefix:
            shape = Composed(shape, Composition(tuple(prefix)))
        return 1.0, shape
    raise InvalidParams(f"no weight rule for mapping {type(stage).__name__} inside a composition")


def assemble(
    diag_a: Diagonalization,
    diag_b: Diagonalization,
    tau: MappingSpec,
    p: float,
    sign: int = 1,
    ref_point=None,
) -> WeightedCompositionOperator:
    """Build the weighted composition operator for a mapping variant.

    Similarities get the constant weight |det J|^(1/p); inversions the
    indefinite-norm power |q|^(-n/p); planar families the exponential weight
    of their system sign, normalized at ``ref_point`` so |F|^p matches the
    absolute Jacobian exactly.
    """
    if sign not in (1, -1):
        raise InvalidParams("operator sign must be +1 or -1")
    if diag_a.ell != diag_b.ell or diag_a.n != diag_b.n:
        raise InvalidParams("cannot assemble an operator across different signatures")
    p = check_exponent(p, diag_a.n)
    n = diag_a.n
    ell = diag_a.ell
    if isinstance(tau, TwoDFamily):
        if ref_point is None:
            raise InvalidParams("family weights need a reference point for normalization")
        det_ref = jacobian(tau, ref_point).det
        if det_ref == 0.0:
            raise SingularOnDomain("family mapping is degenerate at the reference point")
        shape = _family_weight_shape(tau)
        kappa = abs(det_ref) ** (1.0 / p) / shape(np.asarray(ref_point, dtype=float))
        weight: ScalarField = Scale(float(kappa), shape)
    else:
        stages = list(tau.maps) if isinstance(tau, Composition) else [tau]
        const = 1.0
        fields: list[ScalarField] = []
        prefix: list[MappingSpec] = []
        for stage in stages:
            c, f = _stage_weight(stage, prefix, ell, n, p)
            const *= c
            if f is not None:
                fields.append(f)
            prefix.append(stage)
        weight = Polynomial.constant(const, n)
        for f in fields:
            weight = Product(weight, f)
        if not fields:
            weight = Polynomial.constant(const, n)
    return WeightedCompositionOperator(
        diag_a=diag_a, diag_b=diag_b, tau=tau, weight=weight, sign=sign, p=p
    )


# --------------------------------------------------------------------------
# Certification
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PdeMappingReport:
    max_scaled_residual: float
    tol: float
    points: int
    passed: bool
    per_solution: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class WeightConsistencyReport:
    max_rel_error: float
    tol: float
    points: int
    passed: bool


@dataclass(frozen=True, eq=False)
class ConformalityReport:
    max_residual: float
    tol: float
    points: int
    passed: bool


@dataclass(frozen=True, eq=False)
class NormPair:
    kind: str
    norm_source: float
    norm_target: float
    err_source: float
    err_target: float
    passed: bool


@dataclass(frozen=True, eq=False)
class IsometryReport:
    pairs: tuple[NormPair, ...]
    mode: str  # "statistical" | "exact-change-of-variables"
    samples: int
    seed: int
    passed: bool


def certify_pde_mapping(
    op: WeightedCompositionOperator,
    spec_b: OperatorSpec,
    sols: SolutionSet,
    e2: DomainSpec,
    tol: float = 1e-7,
    points: int = 200,
    seed: int = 0,
) -> PdeMappingReport:
    """Check that images of source solutions solve the target equation.

    The residual of each image under the target operator is evaluated via
    jets at sampled points of the target domain and compared against
    tol * (1 + max |Tf|).  Failure is reported, not raised.
    """
    rng = np.random.default_rng(seed)
    pts = sample_admissible(e2, rng, points, op.guard_fns_original(), margin=e2.margin)
    fields = lift_solutions(sols, op.source_transform())
    per = []
    for f in fields:
        tf = op.apply(f)
        vals = tf.eval_many(pts)
        scale = 1.0 + float(np.max(np.abs(vals)))
        worst = 0.0
        for x in pts:
            worst = max(worst, abs(apply_operator(spec_b, tf, x)))
        per.append(worst / scale)
    worst_all = max(per) if per else 0.0
    return PdeMappingReport(
        max_scaled_residual=worst_all,
        tol=tol,
        points=points,
        passed=bool(worst_all <= tol),
        per_solution=tuple(per),
    )


def check_weight_consistency(
    op: WeightedCompositionOperator,
    e2_reduced: DomainSpec,
    tol: float = 1e-6,
    points: int = 100,
    seed: int = 0,
) -> WeightConsistencyReport:
    """|F(x)|^p must equal |det J_tau(x)| in relative terms on the reduced domain."""
    rng = np.random.default_rng(seed)
    pts = sample_admissible(
        e2_reduced, rng, points, op.tau.singular_margin_fns(), margin=e2_reduced.margin
    )
    fvals = np.abs(op.weight.eval_many(pts)) ** op.p
    worst = 0.0
    for x, fv in zip(pts, fvals):
        det = abs(jacobian(op.tau, x).det)
        worst = max(worst, abs(fv - det) / (1.0 + abs(det)))
    return WeightConsistencyReport(
        max_rel_error=worst, tol=tol, points=points, passed=bool(worst <= tol)
    )


def check_conformality(
    op: WeightedCompositionOperator,
    e2_reduced: DomainSpec,
    tol: float = 1e-6,
    points: int = 100,
    seed: int = 0,
) -> ConformalityReport:
    """J^T I_ell J must be a multiple of I_ell with |factor| = |det J|^(2/n).

    The factor itself may be negative for orientation-reversing planar
    mappings; the determinant identity only fixes its magnitude.
    """
    rng = np.random.default_rng(seed)
    pts = sample_admissible(
        e2_reduced, rng, points, op.tau.singular_margin_fns(), margin=e2_reduced.margin
    )
    i_ell = inertia_matrix(op.ell, op.n)
    worst = 0.0
    for x in pts:
        rep = jacobian(op.tau, x)
        target = abs(rep.det) ** (2.0 / op.n)
        g = rep.jacobian.T @ i_ell @ rep.jacobian
        factor = float(g[0, 0] * i_ell[0, 0])
        resid = max(
            float(np.max(np.abs(g - factor * i_ell))), abs(abs(factor) - target)
        )
        worst = max(worst, resid / (1.0 + target))
    return ConformalityReport(max_residual=worst, tol=tol, points=points, passed=bool(worst <= tol))


def _gauss_nodes(domain: DomainSpec, order: int):
    """Tensor Gauss-Legendre nodes and weights on a box or affine box image."""
    if isinstance(domain, AffineImage) and isinstance(domain.base, Box):
        base_nodes, base_w = _gauss_nodes(domain.base, order)
        nodes = base_nodes @ domain.matrix.T + domain.shift[None, :]
        return nodes, base_w * abs(np.linalg.det(domain.matrix))
    if not isinstance(domain, Box):
        raise ValueError("tensor quadrature needs a box or an affine image of a box")
    n = domain.dim
    order = max(2, min(order, int(round(2e6 ** (1.0 / n)))))
    x, w = np.polynomial.legendre.leggauss(order)
    axes = []
    weights = []
    for i in range(n):
        half = 0.5 * (domain.hi[i] - domain.lo[i])
        mid = 0.5 * (domain.hi[i] + domain.lo[i])
        axes.append(mid + half * x)
        weights.append(half * w)
    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*weights, indexing="ij")
    ww = np.ones(nodes.shape[0])
    for g in wgrids:
        ww = ww * g.ravel()
    return nodes, ww


def lp_norm(
    f: ScalarField,
    domain: DomainSpec,
    p: float,
    quad: QuadratureSpec,
    guard_fns=(),
) -> tuple[float, float]:
    """(integral_E |f|^p)^(1/p) with an error estimate.

    Tensor Gauss-Legendre on boxes (error from comparing two orders),
    Monte Carlo elsewhere (standard error, seeded and deterministic).
    """
    boxlike = isinstance(domain, Box) or (
        isinstance(domain, AffineImage) and isinstance(domain.base, Box)
    )
    if quad.method == "gauss" and boxlike and not guard_fns:
        nodes, w = _gauss_nodes(domain, quad.order)
        integral = float(w @ np.abs(f.eval_many(nodes)) ** p)
        lo_order = max(2, quad.order - max(4, quad.order // 4))
        nodes2, w2 = _gauss_nodes(domain, lo_order)
        integral2 = float(w2 @ np.abs(f.eval_many(nodes2)) ** p)
        err_i = abs(integral - integral2)
    else:
        rng = np.random.default_rng(quad.seed)
        pts = domain.sample(rng, quad.points)
        mask = np.ones(quad.points, dtype=bool)
        eff = max(domain.margin, 1e-9)
        for g in guard_fns:
            mask &= np.asarray(g(pts)) >= eff
        vals = np.zeros(quad.points)
        if np.any(mask):
            vals[mask] = np.abs(f.eval_many(pts[mask])) ** p
        vol = domain.volume()
        integral = vol * float(np.mean(vals))
        err_i = vol * float(np.std(vals)) / np.sqrt(quad.points)
    if integral <= 0.0:
        return 0.0, err_i
    value = integral ** (1.0 / p)
    err = err_i * value / (p * integral)
    return value, err


def _is_affine_chain(tau: MappingSpec) -> bool:
    if isinstance(tau, Affine):
        return True
    if isinstance(tau, Composition):
        return all(_is_affine_chain(m) for m in tau.maps)
    return False


def certify_isometry(
    op: WeightedCompositionOperator,
    sols: SolutionSet,
    e1: DomainSpec,
    e2: DomainSpec,
    quad: QuadratureSpec,
) -> IsometryReport:
    """Compare ||f|| on the source domain with ||Tf|| on the target domain.

    Both norms use the same seed schedule.  Acceptance per solution is
    |difference| <= 3 * (sum of the two error estimates).  For affine
    mappings with constant-shape weights the change of variables is exact,
    which the report records.
    """
    fields = lift_solutions(sols, op.source_transform())
    guards = op.guard_fns_original()
    pairs = []
    all_ok = True
    for member, f in zip(sols.members, fields):
        tf = op.apply(f)
        n1, err1 = lp_norm(f, e1, op.p, quad)
        n2, err2 = lp_norm(tf, e2, op.p, quad, guard_fns=guards)
        ok = bool(abs(n1 - n2) <= 3.0 * (err1 + err2) + 1e-12)
        all_ok &= ok
        pairs.append(
            NormPair(
                kind=member.kind,
                norm_source=n1,
                norm_target=n2,
                err_source=err1,
                err_target=err2,
                passed=ok,
            )
        )
    mode = "exact-change-of-variables" if _is_affine_chain(op.tau) else "statistical"
    return IsometryReport(
        pairs=tuple(pairs),
        mode=mode,
        samples=quad.points if quad.method == "mc" else quad.order,
        seed=quad.seed,
        passed=all_ok,
    )
