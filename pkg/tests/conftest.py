import numpy as np
import pytest


def random_composite_field(rng, n):
    """A composite field mixing polynomial, oscillatory, indefinite-power and
    exponential nodes, kept away from singular sets on the unit-ish box."""
    from lpembed.jets import Exp, ExpLinear, Polynomial, Product, PseudoNormPower, Scale, Sum

    terms = []
    for _ in range(4):
        exps = tuple(int(e) for e in rng.integers(0, 3, n))
        terms.append((exps, float(rng.uniform(-2, 2))))
    poly = Polynomial(n, tuple(terms))
    s = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
    trig = ExpLinear.from_complex(s, "re")
    center = np.zeros(n)
    center[0] = rng.uniform(3.0, 4.0)
    pw = PseudoNormPower(n, center, 1, float(rng.uniform(-1.0, 1.0)))
    base = Sum((poly, Scale(0.5, trig), Product(poly, Scale(0.1, trig)), Scale(0.3, pw)))
    return Sum((base, Exp(Scale(0.05, poly))))


def random_symmetric_nonsingular(rng, n, cond_floor=0.05):
    """Well-conditioned random symmetric matrix with mixed eigenvalue signs."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = rng.uniform(cond_floor, 10.0, n) * rng.choice([-1.0, 1.0], n)
    a = q @ np.diag(lam) @ q.T
    return 0.5 * (a + a.T)


def fd_gradient(f, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    g = np.zeros(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def fd_hessian(f, x, h=1e-5):
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    hess = np.zeros((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        hess[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / (h * h)
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h
            val = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4.0 * h * h)
            hess[i, j] = val
            hess[j, i] = val
    return hess


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
