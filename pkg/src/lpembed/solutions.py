"""Solution families of the reduced equation.

The reduced operator is the inertia-form second-order part plus a drift:
constants always solve it, linear forms solve it when orthogonal to the
drift, characteristic exponentials exp(x . s) solve it exactly on the
variety sum eps_i s_i^2 + alpha_i s_i = 0, and for zero drift there are
homogeneous polynomial solutions found by an exact nullspace computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np

from .domains import AffineImage, DomainSpec
from .errors import InvalidExponent
from .geometry import Affine, Composed
from .jets import ExpLinear, OperatorSpec, Polynomial, ScalarField
from .linalg import diagonalize, inertia_matrix, inertia_vector

DRIFT_ZERO_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ReducedOperator:
    """Inertia-form operator with index ell and drift vector alpha."""

    ell: int
    alpha: np.ndarray
    n: int

    def as_operator_spec(self) -> OperatorSpec:
        return OperatorSpec(inertia_matrix(self.ell, self.n), self.alpha.copy())

    @property
    def epsilons(self) -> np.ndarray:
        return inertia_vector(self.ell, self.n)


@dataclass(frozen=True, eq=False)
class TaggedSolution:
    field: ScalarField
    kind: str  # "polynomial" | "linear" | "exponential"
    meta: tuple


@dataclass(frozen=True, eq=False)
class SolutionSet:
    members: tuple[TaggedSolution, ...]
    operator: ReducedOperator
    seed: int

    def fields(self) -> list[ScalarField]:
        return [m.field for m in self.members]

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def reduce(a_matrix, a_drift, domain: DomainSpec, p: float):
    """Reduce a general operator pair to inertia form.

    Returns (reduced operator, transformed domain, diagonalization).  The
    change of variables is y = W x with W the transpose of the diagonalizing
    matrix, so the reduced drift is W a and the domain becomes W(domain).
    """
    if p <= 0.0:
        raise InvalidExponent(f"p must be positive, got {p}")
    diag = diagonalize(a_matrix)
    w = diag.reduction_transform()
    drift = w @ np.asarray(a_drift, dtype=float)
    reduced = ReducedOperator(ell=diag.ell, alpha=drift, n=diag.n)
    if np.array_equal(w, np.eye(diag.n)):
        mapped = domain
    else:
        mapped = AffineImage.make(domain, w, margin=domain.margin)
    return reduced, mapped, diag


def characteristic_check(s, h: ReducedOperator) -> float:
    """Modulus of sum eps_i s_i^2 + alpha_i s_i for a complex frequency s.

    exp(x . s) solves the reduced equation exactly when this vanishes.
    """
    s = np.asarray(s, dtype=complex)
    return float(abs(np.sum(h.epsilons * s * s) + np.sum(h.alpha * s)))


def _exact_nullspace(rows: list[list[int]], ncols: int) -> list[list[Fraction]]:
    """Nullspace basis of an integer matrix over the rationals (RREF)."""
    mat = [[Fraction(v) for v in row] for row in rows]
    pivots = []
    r = 0
    for col in range(ncols):
        pivot = None
        for i in range(r, len(mat)):
            if mat[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        mat[r], mat[pivot] = mat[pivot], mat[r]
        pv = mat[r][col]
        mat[r] = [v / pv for v in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
        if r == len(mat):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for ri, pc in enumerate(pivots):
            vec[pc] = -mat[ri][fc]
        basis.append(vec)
    return basis


def _homogeneous_polynomial_solutions(h: ReducedOperator, degree: int) -> list[Polynomial]:
    """Exact nullspace of the inertia-form operator on degree-d monomials."""
    n = h.n
    eps = [1 if i < h.ell else -1 for i in range(n)]
    monos = sorted(
        {tuple(sorted(c)) for c in combinations_with_replacement(range(n), degree)}
    )

    def exps_of(combo):
        e = [0] * n
        for i in combo:
            e[i] += 1
        return tuple(e)

    cols = [exps_of(c) for c in monos]
    if degree < 2:
        targets = []
    else:
        targets = sorted(
            {tuple(sorted(c)) for c in combinations_with_replacement(range(n), degree - 2)}
        )
    tindex = {exps_of(c): i for i, c in enumerate(targets)}
    rows = [[0] * len(cols) for _ in targets]
    for j, exps in enumerate(cols):
        for i in range(n):
            if exps[i] >= 2:
                out = list(exps)
                out[i] -= 2
                rows[tindex[tuple(out)]][j] += eps[i] * exps[i] * (exps[i] - 1)
    basis = _exact_nullspace(rows, len(cols))
    fields = []
    for vec in basis:
        denom = 1
        for v in vec:
            denom = denom * v.denominator // np.gcd(denom, v.denominator)
        terms = tuple(
            (cols[j], float(v * denom)) for j, v in enumerate(vec) if v != 0
        )
        if terms:
            fields.append(Polynomial(h.n, terms))
    return fields


def _drift_complement_basis(alpha: np.ndarray) -> list[np.ndarray]:
    n = alpha.shape[0]
    norm = np.linalg.norm(alpha)
    if norm <= DRIFT_ZERO_TOL * (1.0 + np.max(np.abs(alpha), initial=0.0)):
        return [np.eye(n)[i] for i in range(n)]
    q, _ = np.linalg.qr(np.column_stack([alpha / norm, np.eye(n)]), mode="complete")
    return [q[:, i].copy() for i in range(1, n)]


def _variety_frequency(h: ReducedOperator, rng: np.random.Generator):
    """A random complex frequency on the characteristic variety: draw the
    trailing coordinates, then solve the quadratic for the first one."""
    n = h.n
    eps = h.epsilons
    rest = rng.uniform(-1.2, 1.2, n - 1)
    r = np.sum(eps[1:] * rest * rest) + np.sum(h.alpha[1:] * rest)
    # eps_0 s^2 + alpha_0 s + r = 0
    a, b, c = eps[0], h.alpha[0], r
    disc = b * b - 4.0 * a * c
    root = np.sqrt(complex(disc))
    s0 = (-b + root) / (2.0 * a)
    s = np.zeros(n, dtype=complex)
    s[0] = s0
    s[1:] = rest
    return s


def sample_solutions(
    h: ReducedOperator, domain: DomainSpec, budget: int, seed: int = 0
) -> SolutionSet:
    """Up to ``budget`` independent solutions of the reduced equation.

    Emits the constant, a basis of drift-orthogonal linear forms, canonical
    drift exponentials, homogeneous polynomial solutions of degree <= 3 when
    the drift vanishes, and seeded characteristic exponentials to fill the
    remaining budget.  Deterministic for a given seed.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    del domain  # solutions are global; the domain matters only to callers
    n = h.n
    members: list[TaggedSolution] = []
    members.append(
        TaggedSolution(Polynomial.constant(1.0, n), "polynomial", ("degree", 0))
    )
    for w in _drift_complement_basis(h.alpha):
        members.append(TaggedSolution(Polynomial.linear(w), "linear", ("coefficients", tuple(w))))
    drift_zero = np.linalg.norm(h.alpha) <= DRIFT_ZERO_TOL
    if drift_zero:
        for degree in (2, 3):
            for f in _homogeneous_polynomial_solutions(h, degree):
                members.append(TaggedSolution(f, "polynomial", ("degree", degree)))
                if len(members) >= budget:
                    break
            if len(members) >= budget:
                break
    else:
        eps = h.epsilons
        for idx in range(n):
            if abs(h.alpha[idx]) > DRIFT_ZERO_TOL:
                s = np.zeros(n, dtype=complex)
                s[idx] = -h.alpha[idx] / eps[idx]
                members.append(
                    TaggedSolution(
                        ExpLinear.from_complex(s, "re"), "exponential", ("frequency", tuple(s))
                    )
                )
    rng = np.random.default_rng(seed)
    attempts = 0
    while len(members) < budget and attempts < 20 * budget:
        attempts += 1
        s = _variety_frequency(h, rng)
        if characteristic_check(s, h) > 1e-10:
            continue
        if np.max(np.abs(s.imag)) < 1e-14:
            members.append(
                TaggedSolution(
                    ExpLinear.from_complex(s.real, "re"), "exponential", ("frequency", tuple(s))
                )
            )
        else:
            for part in ("re", "im"):
                members.append(
                    TaggedSolution(
                        ExpLinear.from_complex(s, part), "exponential", ("frequency", tuple(s))
                    )
                )
    return SolutionSet(tuple(members[:budget]), h, seed)


def lift_solutions(sols: SolutionSet, transform: np.ndarray) -> list[ScalarField]:
    """Pull reduced-level solutions back to original coordinates.

    If g solves the reduced equation on W(E) then g(W x) solves the original
    equation on E; ``transform`` is W.
    """
    w = np.asarray(transform, dtype=float)
    if np.array_equal(w, np.eye(w.shape[0])):
        return sols.fields()
    aff = Affine.make(w)
    return [Composed(m.field, aff) for m in sols.members]
