"""Bounded integration domains with membership tests and uniform samplers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularOnDomain


class DomainSpec:
    """Base class: bounded domain with nonempty interior.

    ``margin`` is the exclusion radius kept around singular sets of mappings
    and weights when the domain is sampled for certification.
    """

    margin: float

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def volume(self) -> float:
        raise NotImplementedError

    def contains(self, pts: np.ndarray, tol: float = 0.0) -> np.ndarray:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))


def _pts2d(x) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts[None, :]
    return pts


@dataclass(frozen=True, eq=False)
class Box(DomainSpec):
    lo: np.ndarray
    hi: np.ndarray
    margin: float = 0.0

    @classmethod
    def make(cls, lo, hi, margin: float = 0.0) -> "Box":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if np.any(hi <= lo):
            raise ValueError("box needs hi > lo in every coordinate")
        return cls(lo, hi, margin)

    @classmethod
    def unit(cls, n: int, margin: float = 0.0) -> "Box":
        return cls(np.zeros(n), np.ones(n), margin)

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def volume(self) -> float:
        return float(np.prod(self.hi - self.lo))

    def contains(self, pts, tol: float = 0.0) -> np.ndarray:
        pts = _pts2d(pts)
        return np.all((pts >= self.lo - tol) & (pts <= self.hi + tol), axis=1)

    def sample(self, rng, count):
        return rng.uniform(self.lo, self.hi, size=(count, self.dim))

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()


@dataclass(frozen=True, eq=False)
class Ball(DomainSpec):
    center: np.ndarray
    radius: float
    margin: float = 0.0

    @classmethod
    def make(cls, center, radius: float, margin: float = 0.0) -> "Ball":
        if radius <= 0.0:
            raise ValueError("ball radius must be positive")
        return cls(np.asarray(center, dtype=float), float(radius), margin)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def volume(self) -> float:
        n = self.dim
        from math import gamma, pi

        return pi ** (n / 2.0) / gamma(n / 2.0 + 1.0) * self.radius**n

    def contains(self, pts, tol: float = 0.0) -> np.ndarray:
        pts = _pts2d(pts)
        d = np.linalg.norm(pts - self.center[None, :], axis=1)
        return d <= self.radius + tol

    def sample(self, rng, count):
        n = self.dim
        z = rng.standard_normal((count, n))
        z /= np.linalg.norm(z, axis=1)[:, None]
        r = rng.uniform(0.0, 1.0, count) ** (1.0 / n)
        return self.center[None, :] + self.radius * r[:, None] * z

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius


@dataclass(frozen=True, eq=False)
class AffineImage(DomainSpec):
    """The image {L x + shift : x in base} of a base domain under an
    invertible affine map; uniform sampling is preserved by affine maps."""

    base: DomainSpec
    matrix: np.ndarray
    shift: np.ndarray
    margin: float = 0.0

    @classmethod
    def make(cls, base: DomainSpec, matrix, shift=None, margin: float = 0.0) -> "AffineImage":
        m = np.asarray(matrix, dtype=float)
        v = np.zeros(m.shape[0]) if shift is None else np.asarray(shift, dtype=float)
        if abs(np.linalg.det(m)) <= 1e-12 * max(1.0, np.max(np.abs(m))) ** m.shape[0]:
            raise ValueError("affine image needs an invertible matrix")
        return cls(base, m, v, margin)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def volume(self) -> float:
        return abs(float(np.linalg.det(self.matrix))) * self.base.volume()

    def contains(self, pts, tol: float = 0.0) -> np.ndarray:
        pts = _pts2d(pts)
        back = np.linalg.solve(self.matrix, (pts - self.shift[None, :]).T).T
        # tolerance measured in the target space; rescale conservatively
        scale = max(np.linalg.norm(self.matrix, ord=2), 1e-30)
        return self.base.contains(back, tol=tol / scale if tol else 0.0)

    def sample(self, rng, count):
        return self.base.sample(rng, count) @ self.matrix.T + self.shift[None, :]

    def bounding_box(self):
        lo, hi = self.base.bounding_box()
        corners = np.array(np.meshgrid(*zip(lo, hi), indexing="ij")).reshape(len(lo), -1).T
        mapped = corners @ self.matrix.T + self.shift[None, :]
        return mapped.min(axis=0), mapped.max(axis=0)


def translate(domain: DomainSpec, shift) -> AffineImage:
    shift = np.asarray(shift, dtype=float)
    return AffineImage.make(domain, np.eye(shift.shape[0]), shift, margin=domain.margin)


def sample_admissible(
    domain: DomainSpec,
    rng: np.random.Generator,
    count: int,
    guard_fns=(),
    margin: float | None = None,
    max_batches: int = 200,
) -> np.ndarray:
    """Uniform samples of the domain staying ``margin`` away from the singular
    sets described by the guard functions.

    Raises SingularOnDomain when the admissible fraction is too small.
    """
    eff = domain.margin if margin is None else margin
    eff = max(eff, 1e-9)
    if not guard_fns:
        return domain.sample(rng, count)
    got = []
    have = 0
    for _ in range(max_batches):
        batch = domain.sample(rng, count)
        ok = np.ones(count, dtype=bool)
        for g in guard_fns:
            ok &= np.asarray(g(batch)) >= eff
        kept = batch[ok]
        if kept.shape[0]:
            got.append(kept)
            have += kept.shape[0]
        if have >= count:
            break
    if have < count:
        raise SingularOnDomain(
            f"only {have}/{count} admissible samples found; the mapping is "
            "singular on too much of the domain"
        )
    return np.concatenate(got, axis=0)[:count]
