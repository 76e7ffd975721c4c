"""Second-order forward jets and evaluable scalar fields.

A Jet2 carries (value, gradient, Hessian) of a scalar field at a point.
Fields are immutable node graphs; every node knows how to produce a Jet2
at a single point (exact chain/product rules) and how to produce plain
values on a batch of points (vectorized, used by quadrature).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GuardViolation

GUARD_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class Jet2:
    """Value, gradient and (exactly symmetric) Hessian at a point."""

    value: float
    grad: np.ndarray
    hess: np.ndarray

    @property
    def n(self) -> int:
        return self.grad.shape[0]

    def __add__(self, other):
        if isinstance(other, Jet2):
            return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)
        return Jet2(self.value + float(other), self.grad, self.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(-self.value, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet2) else -float(other))

    def __mul__(self, other):
        if isinstance(other, Jet2):
            cross = np.outer(self.grad, other.grad)
            # the cross sum is formed first so the result stays bitwise symmetric
            return Jet2(
                self.value * other.value,
                self.value * other.grad + other.value * self.grad,
                self.value * other.hess + other.value * self.hess + (cross + cross.T),
            )
        c = float(other)
        return Jet2(c * self.value, c * self.grad, c * self.hess)

    __rmul__ = __mul__


def jet_const(c: float, n: int) -> Jet2:
    return Jet2(float(c), np.zeros(n), np.zeros((n, n)))


def jet_var(x, i: int) -> Jet2:
    """The coordinate function x_i as a jet at the point x."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    g = np.zeros(n)
    g[i] = 1.0
    return Jet2(float(x[i]), g, np.zeros((n, n)))


def jet_chain(u: Jet2, g0: float, g1: float, g2: float) -> Jet2:
    """Jet of g(u) from the univariate derivatives g0 = g(u), g1, g2."""
    outer = np.outer(u.grad, u.grad)
    return Jet2(g0, g1 * u.grad, g2 * outer + g1 * u.hess)


def jet_exp(u: Jet2) -> Jet2:
    e = np.exp(u.value)
    return jet_chain(u, e, e, e)


def jet_log_abs(u: Jet2) -> Jet2:
    inv = 1.0 / u.value
    return jet_chain(u, np.log(abs(u.value)), inv, -inv * inv)


def jet_recip(u: Jet2) -> Jet2:
    inv = 1.0 / u.value
    return jet_chain(u, inv, -inv * inv, 2.0 * inv**3)


def jet_abs_pow(u: Jet2, q: float) -> Jet2:
    """Jet of |u|^q (smooth wherever u != 0)."""
    a = abs(u.value)
    s = 1.0 if u.value >= 0.0 else -1.0
    return jet_chain(u, a**q, q * s * a ** (q - 1.0), q * (q - 1.0) * a ** (q - 2.0))


def compose_jet(outer: Jet2, inner: list[Jet2]) -> Jet2:
    """Second-order composition: outer is a jet in m variables evaluated at
    the values of the m inner jets, each a jet in the ambient n variables."""
    n = inner[0].n
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    gs = [j.grad for j in inner]
    for k, jk in enumerate(inner):
        grad += outer.grad[k] * gs[k]
        hess += outer.grad[k] * jk.hess
    m = len(inner)
    for k in range(m):
        for l in range(m):
            hkl = outer.hess[k, l]
            if hkl != 0.0:
                hess += hkl * np.outer(gs[k], gs[l])
    hess = 0.5 * (hess + hess.T)
    return Jet2(outer.value, grad, hess)


def _pts(x) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    return pts


class ScalarField:
    """Base class for immutable scalar-field nodes."""

    n: int

    def eval_jet(self, x) -> Jet2:
        raise NotImplementedError

    def eval_many(self, x) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> float:
        return float(self.eval_many(np.asarray(x, dtype=float)[None, :])[0])

    def __add__(self, other):
        if isinstance(other, ScalarField):
            return Sum((self, other))
        return Sum((self, Polynomial.constant(float(other), self.n)))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __neg__(self):
        return Scale(-1.0, self)

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            return Product(self, other)
        return Scale(float(other), self)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Polynomial(ScalarField):
    """Multivariate polynomial given by ((exponent tuple), coefficient) terms."""

    n: int
    terms: tuple[tuple[tuple[int, ...], float], ...]

    @classmethod
    def constant(cls, c: float, n: int) -> "Polynomial":
        return cls(n, (((0,) * n, float(c)),))

    @classmethod
    def coordinate(cls, i: int, n: int) -> "Polynomial":
        exps = [0] * n
        exps[i] = 1
        return cls(n, ((tuple(exps), 1.0),))

    @classmethod
    def linear(cls, w, c0: float = 0.0) -> "Polynomial":
        w = np.asarray(w, dtype=float)
        n = w.shape[0]
        terms = []
        if c0 != 0.0:
            terms.append(((0,) * n, float(c0)))
        for i in range(n):
            if w[i] != 0.0:
                exps = [0] * n
                exps[i] = 1
                terms.append((tuple(exps), float(w[i])))
        if not terms:
            terms.append(((0,) * n, 0.0))
        return cls(n, tuple(terms))

    @staticmethod
    def _mono(x: np.ndarray, exps, skip=None, skip2=None) -> float:
        out = 1.0
        for i, e in enumerate(exps):
            e = e - (1 if skip == i else 0) - (1 if skip2 == i else 0)
            if e > 0:
                out *= x[i] ** e
        return out

    def eval_jet(self, x) -> Jet2:
        x = np.asarray(x, dtype=float)
        n = self.n
        val = 0.0
        grad = np.zeros(n)
        hess = np.zeros((n, n))
        for exps, coeff in self.terms:
            val += coeff * self._mono(x, exps)
            for i in range(n):
                if exps[i] == 0:
                    continue
                grad[i] += coeff * exps[i] * self._mono(x, exps, skip=i)
                for j in range(i, n):
                    if j == i:
                        if exps[i] >= 2:
                            hess[i, i] += coeff * exps[i] * (exps[i] - 1) * self._mono(
                                x, exps, skip=i, skip2=i
                            )
                    elif exps[j] > 0:
                        h = coeff * exps[i] * exps[j] * self._mono(x, exps, skip=i, skip2=j)
                        hess[i, j] += h
                        hess[j, i] += h
        return Jet2(val, grad, hess)

    def eval_many(self, x) -> np.ndarray:
        pts = _pts(x)
        out = np.zeros(pts.shape[0])
        for exps, coeff in self.terms:
            term = np.full(pts.shape[0], coeff)
            for i, e in enumerate(exps):
                if e > 0:
                    term = term * pts[:, i] ** e
            out += term
        return out


@dataclass(frozen=True, eq=False)
class ExpLinear(ScalarField):
    """Real or imaginary part of exp(x . s) for a complex frequency vector s."""

    n: int
    s_re: np.ndarray
    s_im: np.ndarray
    part: str  # "re" | "im"

    @classmethod
    def from_complex(cls, s, part: str) -> "ExpLinear":
        s = np.asarray(s, dtype=complex)
        return cls(s.shape[0], s.real.copy(), s.imag.copy(), part)

    def _take(self, z):
        return np.real(z) if self.part == "re" else np.imag(z)

    def eval_jet(self, x) -> Jet2:
        x = np.asarray(x, dtype=float)
        s = self.s_re + 1j * self.s_im
        w = np.exp(x @ s)
        val = float(self._take(w))
        grad = self._take(s * w).astype(float)
        hess = self._take(np.outer(s, s) * w).astype(float)
        hess = 0.5 * (hess + hess.T)
        return Jet2(val, grad, hess)

    def eval_many(self, x) -> np.ndarray:
        pts = _pts(x)
        s = self.s_re + 1j * self.s_im
        return self._take(np.exp(pts @ s)).astype(float)


@dataclass(frozen=True, eq=False)
class PseudoNormPower(ScalarField):
    """|q(x)|^power where q is the indefinite form sum_{i<=ell} z_i^2 - sum_{i>ell} z_i^2
    of z = x - center.  Guarded away from the null cone |q| < GUARD_EPS."""

    n: int
    center: np.ndarray
    ell: int
    power: float

    def _q_jet(self, x) -> Jet2:
        x = np.asarray(x, dtype=float)
        eps = np.ones(self.n)
        eps[self.ell :] = -1.0
        z = x - self.center
        return Jet2(float(eps @ (z * z)), 2.0 * eps * z, np.diag(2.0 * eps))

    def eval_jet(self, x) -> Jet2:
        q = self._q_jet(x)
        if abs(q.value) < GUARD_EPS:
            raise GuardViolation("pseudo_norm_power", q.value)
        return jet_abs_pow(q, self.power)

    def eval_many(self, x) -> np.ndarray:
        pts = _pts(x)
        eps = np.ones(self.n)
        eps[self.ell :] = -1.0
        z = pts - self.center[None, :]
        q = (z * z) @ eps
        bad = np.abs(q) < GUARD_EPS
        if np.any(bad):
            raise GuardViolation("pseudo_norm_power", float(q[bad][0]))
        return np.abs(q) ** self.power


@dataclass(frozen=True, eq=False)
class Exp(ScalarField):
    inner: ScalarField

    @property
    def n(self) -> int:
        return self.inner.n

    def eval_jet(self, x) -> Jet2:
        return jet_exp(self.inner.eval_jet(x))

    def eval_many(self, x) -> np.ndarray:
        return np.exp(self.inner.eval_many(x))


@dataclass(frozen=True, eq=False)
class LogAbs(ScalarField):
    """ln|inner(x)|, guarded away from the zero set of the inner field."""

    inner: ScalarField

    @property
    def n(self) -> int:
        return self.inner.n

    def eval_jet(self, x) -> Jet2:
        u = self.inner.eval_jet(x)
        if abs(u.value) < GUARD_EPS:
            raise GuardViolation("log_abs", u.value)
        return jet_log_abs(u)

    def eval_many(self, x) -> np.ndarray:
        u = self.inner.eval_many(x)
        bad = np.abs(u) < GUARD_EPS
        if np.any(bad):
            raise GuardViolation("log_abs", float(u[bad][0]))
        return np.log(np.abs(u))


def log_abs_affine(w, c0: float = 0.0) -> LogAbs:
    """ln|w . x + c0|."""
    return LogAbs(Polynomial.linear(w, c0))


@dataclass(frozen=True, eq=False)
class Sum(ScalarField):
    fields: tuple[ScalarField, ...]

    @property
    def n(self) -> int:
        return self.fields[0].n

    def eval_jet(self, x) -> Jet2:
        out = self.fields[0].eval_jet(x)
        for f in self.fields[1:]:
            out = out + f.eval_jet(x)
        return out

    def eval_many(self, x) -> np.ndarray:
        out = self.fields[0].eval_many(x)
        for f in self.fields[1:]:
            out = out + f.eval_many(x)
        return out


@dataclass(frozen=True, eq=False)
class Scale(ScalarField):
    coeff: float
    inner: ScalarField

    @property
    def n(self) -> int:
        return self.inner.n

    def eval_jet(self, x) -> Jet2:
        return self.coeff * self.inner.eval_jet(x)

    def eval_many(self, x) -> np.ndarray:
        return self.coeff * self.inner.eval_many(x)


@dataclass(frozen=True, eq=False)
class Product(ScalarField):
    left: ScalarField
    right: ScalarField

    @property
    def n(self) -> int:
        return self.left.n

    def eval_jet(self, x) -> Jet2:
        return self.left.eval_jet(x) * self.right.eval_jet(x)

    def eval_many(self, x) -> np.ndarray:
        return self.left.eval_many(x) * self.right.eval_many(x)


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """Second-order operator sum a_ij d2/dx_i dx_j + sum a_i d/dx_i."""

    matrix: np.ndarray
    drift: np.ndarray

    @classmethod
    def make(cls, matrix, drift=None) -> "OperatorSpec":
        m = np.asarray(matrix, dtype=float)
        d = np.zeros(m.shape[0]) if drift is None else np.asarray(drift, dtype=float)
        return cls(m, d)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def apply_operator(spec: OperatorSpec, f: ScalarField, x) -> float:
    """Evaluate (sum a_ij f_ij + sum a_i f_i)(x) through the jet of f."""
    j = f.eval_jet(x)
    return float(np.sum(spec.matrix * j.hess) + spec.drift @ j.grad)
