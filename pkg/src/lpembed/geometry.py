"""Pseudo-Euclidean geometry: indefinite norms, inversions, similarities,
the catalog of planar mapping families, Jacobians, and conformality tests.

Mappings are immutable specs that can be applied to points, differentiated
to second order (through jets), inverted, and probed for singular sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParams, SingularMatrix, SingularPoint
from .jets import (
    Exp,
    Jet2,
    LogAbs,
    Polynomial,
    Scale,
    ScalarField,
    Sum,
    compose_jet,
    jet_recip,
    jet_var,
)
from .linalg import inertia_matrix, inertia_vector

NULL_CONE_MARGIN = 1e-9
ISOMETRY_TOL = 1e-10


def pseudo_norm_sq(z, ell: int) -> float:
    """sum_{i<=ell} z_i^2 - sum_{i>ell} z_i^2."""
    z = np.asarray(z, dtype=float)
    return float(inertia_vector(ell, z.shape[0]) @ (z * z))


def pseudo_norm_sq_many(pts: np.ndarray, ell: int) -> np.ndarray:
    eps = inertia_vector(ell, pts.shape[1])
    return (pts * pts) @ eps


class MappingSpec:
    """Base class for mappings between open subsets of R^n."""

    n: int

    def apply(self, x) -> np.ndarray:
        return self.apply_many(np.asarray(x, dtype=float)[None, :])[0]

    def apply_many(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jet(self, x) -> list[Jet2]:
        """Second-order jets of the coordinate functions at x."""
        raise NotImplementedError

    def preimage_candidates(self, y) -> list[np.ndarray]:
        """Closed-form preimage candidates of y (forward-verified by callers)."""
        raise NotImplementedError

    def singular_margin_fns(self):
        """Vectorized guard quantities; the mapping is singular where any is 0."""
        return []


@dataclass(frozen=True, eq=False)
class Affine(MappingSpec):
    """x -> L x + shift for an invertible matrix L."""

    matrix: np.ndarray
    shift: np.ndarray

    @classmethod
    def make(cls, matrix, shift=None) -> "Affine":
        m = np.asarray(matrix, dtype=float)
        v = np.zeros(m.shape[0]) if shift is None else np.asarray(shift, dtype=float)
        det = np.linalg.det(m)
        scale = max(1.0, np.max(np.abs(m)))
        if abs(det) <= 1e-12 * scale ** m.shape[0]:
            raise SingularMatrix("affine mapping matrix is singular")
        return cls(m, v)

    @classmethod
    def identity(cls, n: int) -> "Affine":
        return cls(np.eye(n), np.zeros(n))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def apply_many(self, pts: np.ndarray) -> np.ndarray:
        return pts @ self.matrix.T + self.shift[None, :]

    def jet(self, x) -> list[Jet2]:
        x = np.asarray(x, dtype=float)
        y = self.matrix @ x + self.shift
        zero = np.zeros((self.n, self.n))
        return [Jet2(float(y[k]), self.matrix[k].copy(), zero) for k in range(self.n)]

    def inverse(self) -> "Affine":
        inv = np.linalg.inv(self.matrix)
        return Affine(inv, -inv @ self.shift)

    def preimage_candidates(self, y):
        y = np.asarray(y, dtype=float)
        return [np.linalg.solve(self.matrix, y - self.shift)]


def similarity(t: float, q, shift, ell: int) -> "Similarity":
    return Similarity.make(t, q, shift, ell)


@dataclass(frozen=True, eq=False)
class Similarity(Affine):
    """Homothety with coefficient t composed with an affine map whose linear
    part preserves the indefinite form of index ell."""

    t: float = 1.0
    ell: int = 0

    @classmethod
    def make(cls, t: float, q, shift, ell: int) -> "Similarity":
        q = np.asarray(q, dtype=float)
        n = q.shape[0]
        if t == 0.0:
            raise InvalidParams("homothety coefficient must be nonzero")
        i_ell = inertia_matrix(ell, n)
        resid = np.max(np.abs(q.T @ i_ell @ q - i_ell))
        if resid > ISOMETRY_TOL:
            raise InvalidParams(
                f"linear part does not preserve the index-{ell} form (residual {resid:.2e})"
            )
        v = np.zeros(n) if shift is None else np.asarray(shift, dtype=float)
        return cls(matrix=t * q, shift=v, t=t, ell=ell)


@dataclass(frozen=True, eq=False)
class Inversion(MappingSpec):
    """z -> (z - center) / q(z - center) + center with q the index-ell form.

    Singular on the null cone q(z - center) = 0; an involution elsewhere.
    """

    center: np.ndarray
    ell: int

    @classmethod
    def make(cls, center, ell: int) -> "Inversion":
        return cls(np.asarray(center, dtype=float), ell)

    @property
    def n(self) -> int:
        return self.center.shape[0]

    def _q_many(self, pts: np.ndarray) -> np.ndarray:
        return pseudo_norm_sq_many(pts - self.center[None, :], self.ell)

    def apply_many(self, pts: np.ndarray) -> np.ndarray:
        q = self._q_many(pts)
        bad = np.abs(q) < NULL_CONE_MARGIN
        if np.any(bad):
            raise SingularPoint("inversion", float(q[bad][0]))
        return (pts - self.center[None, :]) / q[:, None] + self.center[None, :]

    def jet(self, x) -> list[Jet2]:
        x = np.asarray(x, dtype=float)
        n = self.n
        eps = inertia_vector(self.ell, n)
        z = x - self.center
        qval = float(eps @ (z * z))
        if abs(qval) < NULL_CONE_MARGIN:
            raise SingularPoint("inversion", qval)
        q = Jet2(qval, 2.0 * eps * z, np.diag(2.0 * eps))
        r = jet_recip(q)
        out = []
        for k in range(n):
            zk = jet_var(x, k) - float(self.center[k])
            out.append(zk * r + float(self.center[k]))
        return out

    def preimage_candidates(self, y):
        # involution: the inverse is the mapping itself
        return [self.apply(y)]

    def singular_margin_fns(self):
        return [lambda pts: np.abs(self._q_many(pts))]


@dataclass(frozen=True, eq=False)
class Composition(MappingSpec):
    """Mappings applied in listed order: maps[0] first, maps[-1] last."""

    maps: tuple[MappingSpec, ...]

    @property
    def n(self) -> int:
        return self.maps[0].n

    def apply_many(self, pts: np.ndarray) -> np.ndarray:
        for m in self.maps:
            pts = m.apply_many(pts)
        return pts

    def jet(self, x) -> list[Jet2]:
        x = np.asarray(x, dtype=float)
        jets = [jet_var(x, k) for k in range(self.n)]
        vals = x
        for m in self.maps:
            stage = m.jet(vals)
            jets = [compose_jet(sj, jets) for sj in stage]
            vals = np.array([j.value for j in jets])
        return jets

    def preimage_candidates(self, y):
        candidates = [np.asarray(y, dtype=float)]
        for m in reversed(self.maps):
            nxt = []
            for c in candidates:
                try:
                    nxt.extend(m.preimage_candidates(c))
                except (SingularPoint, FloatingPointError, ValueError):
                    continue
            candidates = nxt
        return candidates

    def singular_margin_fns(self):
        fns = []
        prefix: list[MappingSpec] = []
        for m in self.maps:
            stages = tuple(prefix)
            for g in m.singular_margin_fns():

                def fn(pts, _g=g, _stages=stages):
                    for s in _stages:
                        pts = s.apply_many(pts)
                    return _g(pts)

                fns.append(fn)
            prefix.append(m)
        return fns


# --------------------------------------------------------------------------
# Planar mapping families (n = 2, index ell = 1).
#
# Every family decouples along the characteristic coordinates xi = x1 + x2,
# eta = x1 - x2:  u1 + u2 is a closed-form function of one characteristic and
# u1 - u2 of the other.  Variant "a" couples the sum to xi (first-kind
# families), variant "b" couples it to eta (second-kind).
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CharFunc:
    """One-dimensional building block v(t) of a family coordinate pair."""

    kind: str  # "linear" | "exp" | "log_affine" | "log_expm1"
    a: float = 0.0
    m: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0
    b: float = 0.0

    def values(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "linear":
            return self.a * t + self.b
        if self.kind == "exp":
            return self.a * np.exp(self.m * t) + self.b
        if self.kind == "log_affine":
            return self.a * np.log(np.abs(self.m * t + self.delta)) + self.b
        return self.a * np.log(np.abs(self.gamma * np.exp(self.m * t) - 1.0)) + self.b

    def inner(self, t: np.ndarray):
        """Signed guard quantity (monotone in t), or None when unguarded."""
        if self.kind == "log_affine":
            return self.m * np.asarray(t, dtype=float) + self.delta
        if self.kind == "log_expm1":
            return self.gamma * np.exp(self.m * np.asarray(t, dtype=float)) - 1.0
        return None

    def guard(self, t: np.ndarray):
        """|quantity| that must stay away from zero, or None."""
        inner = self.inner(t)
        return None if inner is None else np.abs(inner)

    def invert(self, v: float) -> list[float]:
        """Closed-form solutions of values(t) == v (both abs branches)."""
        if self.kind == "linear":
            return [] if self.a == 0.0 else [(v - self.b) / self.a]
        if self.kind == "exp":
            if self.a == 0.0 or self.m == 0.0:
                return []
            w = (v - self.b) / self.a
            return [np.log(w) / self.m] if w > 0.0 else []
        if self.a == 0.0:
            return []
        e = np.exp((v - self.b) / self.a)
        if self.kind == "log_affine":
            if self.m == 0.0:
                return []
            return [(e - self.delta) / self.m, (-e - self.delta) / self.m]
        out = []
        if self.gamma != 0.0 and self.m != 0.0:
            for z in (1.0 + e, 1.0 - e):
                w = z / self.gamma
                if w > 0.0:
                    out.append(np.log(w) / self.m)
        return out

    def as_field(self, weights: np.ndarray) -> ScalarField:
        """The field v(w . x) on the plane, w the characteristic direction."""
        lin = Polynomial.linear(self.m * weights) if self.kind != "linear" else None
        const = Polynomial.constant(self.b, 2)
        if self.kind == "linear":
            return Polynomial.linear(self.a * weights, self.b)
        if self.kind == "exp":
            return Sum((Scale(self.a, Exp(lin)), const))
        if self.kind == "log_affine":
            return Sum(
                (Scale(self.a, LogAbs(Polynomial.linear(self.m * weights, self.delta))), const)
            )
        inner = Sum((Scale(self.gamma, Exp(lin)), Polynomial.constant(-1.0, 2)))
        return Sum((Scale(self.a, LogAbs(inner)), const))


_XI = np.array([1.0, 1.0])
_ETA = np.array([1.0, -1.0])

FAMILY_CASES = ("F1", "F2", "F3", "F4")
FAMILY_VARIANTS = ("a", "b")


def _drift_components(case, s, c, d):
    """(c1, c2, d1, d2) encoded by a family case and its branch sign."""
    c1, c2 = c, s * c
    if case == "F1":
        d1, d2 = d, s * d
    elif case == "F2":
        d1, d2 = d, -s * d
    elif case == "F3":
        c1 = c2 = 0.0
        d1, d2 = d, s * d
    else:
        d1 = d2 = 0.0
    return c1, c2, d1, d2


def _char_ode_solution(a_coef, b_coef, p, gamma, delta, k, const):
    """Closed-form solution of v'' = (p/4) v' (A v' - B) on one characteristic.

    The zero pattern of (A, B) selects the solution family: linear for
    (0, 0), a pure exponential for (0, B), a logarithm of an affine form for
    (A, 0), and the log-of-shifted-exponential form otherwise.
    """
    if a_coef == 0.0 and b_coef == 0.0:
        return CharFunc("linear", a=2.0 * k, b=const)
    if a_coef == 0.0:
        return CharFunc(
            "exp", a=-4.0 * gamma / (p * b_coef), m=-p * b_coef / 4.0, b=const
        )
    if b_coef == 0.0:
        return CharFunc(
            "log_affine", a=-4.0 / (p * a_coef), m=p * a_coef / 2.0, delta=delta, b=const
        )
    return CharFunc(
        "log_expm1", a=-4.0 / (p * a_coef), gamma=gamma, m=-p * b_coef / 4.0, b=const
    )


def _family_char_functions(case, variant, s, p, c, d, gamma, delta, k, alpha, beta):
    """Sum/difference characteristic functions of a family instance.

    Returns (sum_fn, diff_fn) with u1 + u2 = sum_fn(t) and u1 - u2 = diff_fn(t);
    the sum depends on xi for variant "a" and on eta for variant "b".  Each
    factor solves the characteristic equation with coefficients built from
    the drift sums and differences: for variant "a" the pairs are
    (c1 - c2, d1 - d2) on the sum and (c1 + c2, d1 + d2) on the difference;
    for variant "b" the d-pairs swap.  Three of the printed formula displays
    carry the opposite sign on their log coefficient; the forms used here
    are the ones that satisfy the characteristic equations (and hence admit
    the exponential weight), which the certification suite enforces.
    """
    c1, c2, d1, d2 = _drift_components(case, s, c, d)
    a_minus, a_plus = c1 - c2, c1 + c2
    if variant == "a":
        b_sum, b_diff = d1 - d2, d1 + d2
    else:
        b_sum, b_diff = d1 + d2, d1 - d2
    sum_fn = _char_ode_solution(a_minus, b_sum, p, gamma, delta, k, alpha + beta)
    diff_fn = _char_ode_solution(a_plus, b_diff, p, gamma, delta, k, alpha - beta)
    return sum_fn, diff_fn


@dataclass(frozen=True, eq=False)
class TwoDFamily(MappingSpec):
    """A planar mapping family instance for index ell = 1.

    ``case`` selects the drift pattern (F1: both drifts null and aligned the
    same way, F2: anti-aligned, F3: source drift zero, F4: target drift zero),
    ``variant`` the first/second formula of the pair, ``branch`` the +1/-1
    sign reading.  ``c`` and ``d`` are the scalar drift values, p the
    exponent; gamma, delta, k, alpha, beta are the free family parameters.
    """

    case: str
    variant: str
    branch: int
    p: float
    c: float
    d: float
    gamma: float = 0.0
    delta: float = 0.0
    k: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    _sum_fn: CharFunc = field(init=False, repr=False)
    _diff_fn: CharFunc = field(init=False, repr=False)

    def __post_init__(self):
        if self.case not in FAMILY_CASES:
            raise InvalidParams(f"unknown family case {self.case!r}")
        if self.variant not in FAMILY_VARIANTS:
            raise InvalidParams(f"family variant must be 'a' or 'b', got {self.variant!r}")
        if self.branch not in (1, -1):
            raise InvalidParams("family branch must be +1 or -1")
        if self.p <= 0.0:
            raise InvalidParams("family exponent p must be positive")
        if self.case in ("F1", "F2", "F4") and self.c == 0.0:
            raise InvalidParams(f"case {self.case} requires a nonzero source drift value")
        if self.case in ("F1", "F2", "F3") and self.d == 0.0:
            raise InvalidParams(f"case {self.case} requires a nonzero target drift value")
        if self.case == "F3" and self.c != 0.0:
            raise InvalidParams("case F3 requires a zero source drift value")
        if self.case == "F4" and self.d != 0.0:
            raise InvalidParams("case F4 requires a zero target drift value")
        has_gamma_and_k = (self.case, self.variant) in (
            ("F1", "a"),
            ("F2", "b"),
            ("F3", "a"),
            ("F3", "b"),
        )
        if has_gamma_and_k and self.gamma == 0.0 and self.k == 0.0:
            raise InvalidParams("gamma and k cannot both vanish in this family")
        sum_fn, diff_fn = _family_char_functions(
            self.case,
            self.variant,
            self.branch,
            self.p,
            self.c,
            self.d,
            self.gamma,
            self.delta,
            self.k,
            self.alpha,
            self.beta,
        )
        object.__setattr__(self, "_sum_fn", sum_fn)
        object.__setattr__(self, "_diff_fn", diff_fn)

    @property
    def n(self) -> int:
        return 2

    @property
    def pde_sign(self) -> int:
        """Sign in the first-order system the coordinates satisfy:
        u1_x1 = sign * u2_x2 and u1_x2 = sign * u2_x1."""
        return 1 if self.variant == "a" else -1

    def sum_weights(self) -> np.ndarray:
        return _XI if self.variant == "a" else _ETA

    def diff_weights(self) -> np.ndarray:
        return _ETA if self.variant == "a" else _XI

    def drift_vectors(self) -> tuple[np.ndarray, np.ndarray]:
        """The planar drift vectors (c1, c2), (d1, d2) this instance encodes."""
        s = float(self.branch)
        cvec = np.array([self.c, s * self.c])
        if self.case == "F1":
            dvec = np.array([self.d, s * self.d])
        elif self.case == "F2":
            dvec = np.array([self.d, -s * self.d])
        elif self.case == "F3":
            dvec = np.array([self.d, s * self.d])
        else:
            dvec = np.array([0.0, 0.0])
        return cvec, dvec

    def coordinate_fields(self) -> tuple[ScalarField, ScalarField]:
        vs = self._sum_fn.as_field(self.sum_weights())
        vd = self._diff_fn.as_field(self.diff_weights())
        u1 = Sum((Scale(0.5, vs), Scale(0.5, vd)))
        u2 = Sum((Scale(0.5, vs), Scale(-0.5, vd)))
        return u1, u2

    def _char_values(self, pts: np.ndarray):
        ts = pts @ self.sum_weights()
        td = pts @ self.diff_weights()
        return ts, td

    def _check_guards(self, ts, td) -> None:
        for fn, t in ((self._sum_fn, ts), (self._diff_fn, td)):
            g = fn.guard(t)
            if g is not None:
                bad = g < NULL_CONE_MARGIN
                if np.any(bad):
                    raise SingularPoint("two_d_family", float(g[bad][0]))

    def apply_many(self, pts: np.ndarray) -> np.ndarray:
        ts, td = self._char_values(pts)
        self._check_guards(ts, td)
        vs = self._sum_fn.values(ts)
        vd = self._diff_fn.values(td)
        return np.stack([(vs + vd) / 2.0, (vs - vd) / 2.0], axis=1)

    def jet(self, x) -> list[Jet2]:
        u1, u2 = self.coordinate_fields()
        return [u1.eval_jet(x), u2.eval_jet(x)]

    def preimage_candidates(self, y):
        y = np.asarray(y, dtype=float)
        vs, vd = y[0] + y[1], y[0] - y[1]
        out = []
        for ts in self._sum_fn.invert(vs):
            for td in self._diff_fn.invert(vd):
                if self.variant == "a":
                    xi, eta = ts, td
                else:
                    xi, eta = td, ts
                out.append(np.array([(xi + eta) / 2.0, (xi - eta) / 2.0]))
        return out

    def singular_margin_fns(self):
        fns = []
        for fn, w in ((self._sum_fn, self.sum_weights()), (self._diff_fn, self.diff_weights())):
            if fn.guard(np.zeros(1)) is not None:

                def margin(pts, _fn=fn, _w=w):
                    return _fn.guard(pts @ _w)

                fns.append(margin)
        return fns

    def characteristic_ranges(self, xi_range, eta_range):
        """Image intervals of u1 + u2 and u1 - u2 over a characteristic box.

        The characteristic functions are monotone on guard-connected
        intervals, so endpoint values bound the image.  Raises
        SingularOnDomain when an interval crosses a singular line.
        """
        from .errors import SingularOnDomain

        t_sum = xi_range if self.variant == "a" else eta_range
        t_diff = eta_range if self.variant == "a" else xi_range
        out = []
        for fn, rng in ((self._sum_fn, t_sum), (self._diff_fn, t_diff)):
            ends = np.asarray(rng, dtype=float)
            inner = fn.inner(ends)
            if inner is not None and (np.any(np.abs(inner) < NULL_CONE_MARGIN)
                                      or inner[0] * inner[1] < 0.0):
                raise SingularOnDomain(
                    "characteristic interval crosses the family's singular line"
                )
            vals = fn.values(ends)
            out.append((float(np.min(vals)), float(np.max(vals))))
        return out[0], out[1]


@dataclass(frozen=True, eq=False)
class Composed(ScalarField):
    """A scalar field precomposed with a mapping: x -> f(tau(x))."""

    inner: ScalarField
    tau: MappingSpec

    @property
    def n(self) -> int:
        return self.tau.n

    def eval_jet(self, x) -> Jet2:
        mjets = self.tau.jet(x)
        vals = np.array([j.value for j in mjets])
        return compose_jet(self.inner.eval_jet(vals), mjets)

    def eval_many(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        return self.inner.eval_many(self.tau.apply_many(pts))


def coordinate_field(tau: MappingSpec, k: int) -> ScalarField:
    """The k-th coordinate of a mapping as a scalar field."""
    return Composed(Polynomial.coordinate(k, tau.n), tau)


@dataclass(frozen=True, eq=False)
class JacobianReport:
    jacobian: np.ndarray
    det: float
    conformal_factor: float | None = None


def apply_mapping(tau: MappingSpec, x) -> np.ndarray:
    """Evaluate the mapping at a point; raises SingularPoint near singular sets."""
    return tau.apply(x)


def jacobian(tau: MappingSpec, x) -> JacobianReport:
    """Jacobian matrix and determinant at x, computed through jets."""
    jets = tau.jet(x)
    j = np.stack([jt.grad for jt in jets], axis=0)
    return JacobianReport(jacobian=j, det=float(np.linalg.det(j)))


def conformality_test(tau: MappingSpec, x, ell: int, tol: float = 1e-8) -> float | None:
    """Return the conformal factor C with J^T I_ell J = C I_ell, or None.

    When the factor exists and det J != 0, |C| equals |det J|^(2/n).
    """
    rep = jacobian(tau, x)
    n = rep.jacobian.shape[0]
    i_ell = inertia_matrix(ell, n)
    g = rep.jacobian.T @ i_ell @ rep.jacobian
    c = float(g[0, 0] * i_ell[0, 0])
    resid = np.max(np.abs(g - c * i_ell))
    if resid > tol * (1.0 + abs(c)):
        return None
    return c


def preimage(tau: MappingSpec, y, tol: float = 1e-8) -> list[np.ndarray]:
    """Forward-verified preimages of y under the mapping."""
    y = np.asarray(y, dtype=float)
    out = []
    for cand in tau.preimage_candidates(y):
        try:
            img = tau.apply(cand)
        except SingularPoint:
            continue
        if np.max(np.abs(img - y)) <= tol * (1.0 + np.max(np.abs(y))):
            out.append(cand)
    return out


def pseudo_rotation(n: int, ell: int, i: int, j: int, angle: float) -> np.ndarray:
    """A generator of the isometry group of the index-ell form: a circular
    rotation when coordinates i, j carry equal signs, hyperbolic otherwise."""
    if i == j:
        raise ValueError("rotation plane needs two distinct coordinates")
    q = np.eye(n)
    same = (i < ell) == (j < ell)
    if same:
        cs, sn = np.cos(angle), np.sin(angle)
        q[i, i] = cs
        q[j, j] = cs
        q[i, j] = -sn
        q[j, i] = sn
    else:
        ch, sh = np.cosh(angle), np.sinh(angle)
        q[i, i] = ch
        q[j, j] = ch
        q[i, j] = sh
        q[j, i] = sh
    return q
