"""Shared helpers: independent oracles and random instance builders.

The oracles here deliberately avoid the package's optimizer and fitting
internals: sweeps enumerate coefficient grids directly, eigen references
are assembled from raw value tables, and integrals come from closed forms
or scipy quadrature.
"""

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sampdisc import DomainSpec, FunctionSystem, PointSet

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=25,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("suite")


# ---------------------------------------------------------------------------
# Independent sweep oracle (coefficients enumerated on a sphere grid)


def sweep_coeff_grid(n_real, complex_dim=None, size=200_000):
    """Grid on the coefficient sphere, independent of the package optimizer."""
    if complex_dim == 1:
        return np.array([[1.0, 0.0]])
    if complex_dim == 2:
        th = np.linspace(0.0, np.pi / 2, 121)
        ph = np.linspace(0.0, 2 * np.pi, 240, endpoint=False)
        T, P = np.meshgrid(th, ph, indexing="ij")
        out = np.zeros((T.size, 4))
        out[:, 0] = np.cos(T).ravel()
        out[:, 1] = (np.sin(T) * np.cos(P)).ravel()
        out[:, 3] = (np.sin(T) * np.sin(P)).ravel()
        return out
    if n_real == 1:
        return np.array([[1.0]])
    if n_real == 2:
        th = np.linspace(0.0, np.pi, 4096, endpoint=False)
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    if n_real == 3:
        k = np.arange(size, dtype=float)
        z = 1.0 - 2.0 * (k + 0.5) / size
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        golden = (1 + 5**0.5) / 2
        phi = 2 * np.pi * k / golden
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    raise ValueError("oracle sweep supports up to 3 real or 2 complex dims")


def sweep_max_ratio(ratio_fn, system):
    """Maximize a coefficient ratio by brute enumeration (lower bound)."""
    if system.field == "complex":
        grid = sweep_coeff_grid(2 * system.n, complex_dim=system.n)
        coeffs = grid[:, : system.n] + 1j * grid[:, system.n :]
    else:
        grid = sweep_coeff_grid(system.n)
        coeffs = grid
    best = -np.inf
    best_c = None
    for c in coeffs:
        v = ratio_fn(c)
        if v > best:
            best, best_c = v, c
    return best, best_c


# ---------------------------------------------------------------------------
# Random instance builders


def random_atomic_instance(rng, n_max=6, m_max=12, k_max=24, complex_ok=True,
                           weighted=False):
    """Random span on a random atomic probability space plus sample points."""
    n = int(rng.integers(1, n_max + 1))
    k = int(rng.integers(max(2 * n, 6), k_max + 1))
    atoms = np.sort(rng.uniform(0.0, 10.0, size=k))
    masses = rng.uniform(0.2, 1.0, size=k)
    masses /= masses.sum()
    dom = DomainSpec.finite_set(atoms, masses)
    vals = rng.normal(size=(n, k))
    if complex_ok and rng.integers(0, 2):
        vals = vals + 1j * rng.normal(size=(n, k))
    system = FunctionSystem.value_table(vals, atoms=atoms)
    m = int(rng.integers(1, m_max + 1))
    pts = atoms[rng.choice(k, size=m, replace=True)]
    weights = rng.uniform(0.1, 2.0, size=m) if weighted else None
    return system, dom, PointSet(points=pts, weights=weights)


def eigen_reference(system, dom, pointset):
    """Generalized-eigenvalue constants assembled from raw tables."""
    from sampdisc.fnspace import eval_system

    nodes, w = dom.quadrature()
    table = eval_system(system, nodes, dom)
    gq = ((table * w) @ table.conj().T).conj()
    gq = (gq + gq.conj().T) / 2
    A = eval_system(system, pointset.points, dom).T
    pw = pointset.effective_weights()
    H = (A.conj().T * pw) @ A
    H = (H + H.conj().T) / 2
    import scipy.linalg as sla

    ev = sla.eigh(H, gq, eigvals_only=True)
    ev = np.maximum(ev, 0.0)
    Aw = A[pw > 0]
    s = np.linalg.svd(Aw, compute_uv=False) if Aw.size else np.array([0.0])
    kernel = Aw.shape[0] < system.n or s[-1] <= 1e-10 * max(s[0], 1e-300)
    d_r = float(np.sqrt(ev[-1]))
    d_l = float("inf") if kernel else float(1.0 / np.sqrt(max(ev[0], 1e-300)))
    return d_l, d_r


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
