"""Finite-dimensional function spaces over probability domains.

A :class:`DomainSpec` fixes the probability space and the declared
evaluation/quadrature grid; a :class:`FunctionSystem` is a finite generating
family with closed-form evaluation.  Integral norms are computed by the
domain's quadrature except where an exact shortcut exists (orthonormal
exponentials on the uniform torus, atomic measures).  Uniform norms over
continuous domains are grid suprema refined by local ternary search.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import _fitcore, _optim
from .errors import (
    DegenerateSystemError,
    DomainMismatchError,
    InvalidParameterError,
)

TWO_PI = 2.0 * np.pi

# Relative eigenvalue floor below which a Gram matrix counts as singular.
DEGENERACY_THRESHOLD = 1e-10

_DEFAULT_GRID = {"torus": 2048, "unit_interval": 4097}


# ---------------------------------------------------------------------------
# Domains


@dataclass(frozen=True)
class DomainSpec:
    """Probability space with a declared evaluation grid.

    kind is one of ``torus`` (uniform measure on [0, 2*pi)^dim),
    ``unit_interval`` (Lebesgue on [0, 1]) or ``finite_set`` (atoms with
    masses).  ``grid_size`` is the per-axis resolution used for quadrature
    and for uniform-norm evaluation on the continuous kinds.
    """

    kind: str
    dim: int = 1
    grid_size: int = 0
    atoms: np.ndarray | None = None
    masses: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("torus", "unit_interval", "finite_set"):
            raise InvalidParameterError(f"unknown domain kind {self.kind!r}")
        if self.kind == "finite_set":
            atoms = np.asarray(self.atoms, dtype=float)
            masses = np.asarray(self.masses, dtype=float)
            if atoms.ndim == 0 or len(atoms) != len(masses):
                raise InvalidParameterError("atoms and masses must match in length")
            if np.any(masses < 0):
                raise InvalidParameterError("atomic masses must be nonnegative")
            if abs(masses.sum() - 1.0) > 1e-12:
                raise InvalidParameterError(
                    f"atomic masses must sum to 1, got {masses.sum()!r}"
                )
            object.__setattr__(self, "atoms", atoms)
            object.__setattr__(self, "masses", masses)
            object.__setattr__(self, "dim", 1 if atoms.ndim == 1 else atoms.shape[1])
        else:
            size = self.grid_size or _DEFAULT_GRID[self.kind]
            if size < 2:
                raise InvalidParameterError("grid_size must be at least 2")
            if self.kind == "unit_interval" and size % 2 == 0:
                size += 1  # composite Simpson needs an odd node count
            object.__setattr__(self, "grid_size", size)
        if self.kind == "unit_interval" and self.dim != 1:
            raise InvalidParameterError("unit_interval domains are one-dimensional")

    # -- constructors

    @classmethod
    def torus(cls, dim: int = 1, grid_size: int = 0) -> "DomainSpec":
        return cls(kind="torus", dim=dim, grid_size=grid_size)

    @classmethod
    def unit_interval(cls, grid_size: int = 0) -> "DomainSpec":
        return cls(kind="unit_interval", grid_size=grid_size)

    @classmethod
    def finite_set(cls, atoms, masses=None) -> "DomainSpec":
        atoms = np.asarray(atoms, dtype=float)
        if masses is None:
            masses = np.full(len(atoms), 1.0 / len(atoms))
        return cls(kind="finite_set", atoms=atoms, masses=np.asarray(masses, float))

    # -- geometry

    @property
    def n_atoms(self) -> int:
        if self.kind != "finite_set":
            raise InvalidParameterError("n_atoms only applies to finite_set domains")
        return len(self.atoms)

    def quadrature(self) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature nodes and probability weights (weights sum to 1)."""
        if self.kind == "finite_set":
            return self.atoms, self.masses
        if self.kind == "torus":
            axis = np.arange(self.grid_size) * (TWO_PI / self.grid_size)
            if self.dim == 1:
                nodes = axis
            else:
                grids = np.meshgrid(*([axis] * self.dim), indexing="ij")
                nodes = np.stack([g.ravel() for g in grids], axis=1)
            n = self.grid_size**self.dim
            return nodes, np.full(n, 1.0 / n)
        # composite Simpson on [0, 1]; grid_size is odd
        nodes = np.linspace(0.0, 1.0, self.grid_size)
        h = nodes[1] - nodes[0]
        w = np.ones(self.grid_size)
        w[1:-1:2] = 4.0
        w[2:-2:2] = 2.0
        w *= h / 3.0
        return nodes, w

    def sup_nodes(self) -> np.ndarray:
        """Nodes used for uniform-norm evaluation."""
        return self.quadrature()[0]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "finite_set":
            idx = rng.choice(len(self.atoms), size=size, p=self.masses)
            return self.atoms[idx]
        if self.kind == "torus":
            pts = rng.uniform(0.0, TWO_PI, size=(size, self.dim))
            return pts[:, 0] if self.dim == 1 else pts
        return rng.uniform(0.0, 1.0, size=size)

    def contains(self, points) -> bool:
        pts = np.asarray(points, dtype=float)
        if self.kind == "torus":
            return np.all(np.isfinite(pts))
        if self.kind == "unit_interval":
            return bool(np.all((pts >= -1e-12) & (pts <= 1.0 + 1e-12)))
        flat = np.atleast_1d(pts)
        if self.atoms.ndim == 1:
            return bool(
                np.all(np.min(np.abs(flat[..., None] - self.atoms[None]), axis=-1) < 1e-9)
            )
        d = np.linalg.norm(flat[:, None, :] - self.atoms[None, :, :], axis=2)
        return bool(np.all(d.min(axis=1) < 1e-9))

    def atom_indices(self, points) -> np.ndarray:
        """Map points of a finite_set domain to atom indices."""
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        if self.atoms.ndim == 1:
            d = np.abs(pts[:, None] - self.atoms[None, :])
        else:
            d = np.linalg.norm(pts[:, None, :] - self.atoms[None, :, :], axis=2)
        idx = d.argmin(axis=1)
        if np.any(d[np.arange(len(idx)), idx] > 1e-9):
            raise DomainMismatchError("point does not coincide with any atom")
        return idx

    # -- serialization

    def to_json(self) -> dict:
        out = {"kind": self.kind, "dim": self.dim}
        if self.kind == "finite_set":
            out["atoms"] = self.atoms.tolist()
            out["masses"] = self.masses.tolist()
        else:
            out["grid_size"] = self.grid_size
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "DomainSpec":
        kind = obj.get("kind")
        if kind == "finite_set":
            return cls.finite_set(obj["atoms"], obj.get("masses"))
        if kind == "torus":
            return cls.torus(dim=obj.get("dim", 1), grid_size=obj.get("grid_size", 0))
        if kind == "unit_interval":
            return cls.unit_interval(grid_size=obj.get("grid_size", 0))
        raise InvalidParameterError(f"unknown domain kind {kind!r}")


# ---------------------------------------------------------------------------
# Function systems


def hat_value(a: float, x) -> np.ndarray:
    """Piecewise-linear plateau function on [0, 1].

    Equals 1 on [0, a], falls linearly to 0 on [a, 2a] and vanishes on
    [2a, 1].  Defined for 0 < a <= 1/2.
    """
    x = np.asarray(x, dtype=float)
    return np.clip(np.minimum(1.0, 2.0 - x / a), 0.0, 1.0)


@dataclass(frozen=True)
class HatFunction:
    """Callable form of the plateau function with parameter ``a``."""

    a: float

    def __call__(self, x):
        return hat_value(self.a, x)


def make_fa(a: float) -> HatFunction:
    """Return the plateau function with parameter ``a`` in (0, 1/2]."""
    if not (0.0 < a <= 0.5):
        raise InvalidParameterError(f"hat parameter must lie in (0, 1/2], got {a}")
    return HatFunction(float(a))


@dataclass(frozen=True)
class FunctionSystem:
    """A finite generating system with closed-form evaluation.

    Kinds:

    * ``trig``: complex exponentials ``exp(i k.x)`` for frequencies
      ``k`` in an integer set (rows of ``frequencies``).
    * ``lacunary``: one-dimensional trig system whose frequencies grow
      geometrically; the minimal ratio ``b`` is recorded.
    * ``hat_family``: plateau functions on [0, 1] for a list of ``a`` values.
    * ``value_table``: explicit value rows on the atoms of a finite domain.
    """

    kind: str
    frequencies: np.ndarray | None = None
    a_values: np.ndarray | None = None
    values: np.ndarray | None = None
    atoms: np.ndarray | None = None
    ratio: float | None = None

    def __post_init__(self):
        if self.kind in ("trig", "lacunary"):
            freqs = np.asarray(self.frequencies)
            if self.kind == "trig" and freqs.ndim == 1:
                freqs = freqs[:, None]
            if self.kind == "lacunary":
                freqs = freqs.reshape(-1)
                if len(freqs) > 1:
                    if np.any(freqs <= 0) or np.any(np.diff(freqs) <= 0):
                        raise InvalidParameterError(
                            "lacunary frequencies must be positive and strictly increasing"
                        )
                    b = float(np.min(freqs[1:] / freqs[:-1]))
                    if b <= 1.0:
                        raise InvalidParameterError(
                            f"lacunary ratio must exceed 1, got {b}"
                        )
                    object.__setattr__(self, "ratio", b)
                else:
                    object.__setattr__(self, "ratio", float("inf"))
            object.__setattr__(self, "frequencies", freqs.astype(np.int64))
        elif self.kind == "hat_family":
            avals = np.asarray(self.a_values, dtype=float).reshape(-1)
            if np.any(avals <= 0) or np.any(avals > 0.5):
                raise InvalidParameterError("hat parameters must lie in (0, 1/2]")
            object.__setattr__(self, "a_values", avals)
        elif self.kind == "value_table":
            vals = np.asarray(self.values)
            if vals.ndim != 2:
                raise InvalidParameterError("value table must be a 2-d array")
            object.__setattr__(self, "values", vals)
            if self.atoms is not None:
                object.__setattr__(self, "atoms", np.asarray(self.atoms, dtype=float))
        else:
            raise InvalidParameterError(f"unknown system kind {self.kind!r}")

    # -- constructors

    @classmethod
    def trig(cls, frequencies) -> "FunctionSystem":
        return cls(kind="trig", frequencies=np.asarray(frequencies))

    @classmethod
    def lacunary(cls, frequencies) -> "FunctionSystem":
        return cls(kind="lacunary", frequencies=np.asarray(frequencies))

    @classmethod
    def hat_family(cls, a_values) -> "FunctionSystem":
        return cls(kind="hat_family", a_values=np.asarray(a_values, dtype=float))

    @classmethod
    def value_table(cls, values, atoms=None) -> "FunctionSystem":
        return cls(kind="value_table", values=np.asarray(values), atoms=atoms)

    # -- basic properties

    @property
    def n(self) -> int:
        if self.kind in ("trig", "lacunary"):
            return len(self.frequencies)
        if self.kind == "hat_family":
            return len(self.a_values)
        return self.values.shape[0]

    @property
    def field(self) -> str:
        if self.kind in ("trig", "lacunary"):
            return "complex"
        if self.kind == "value_table" and np.iscomplexobj(self.values):
            return "complex"
        return "real"

    @property
    def dim(self) -> int:
        if self.kind == "trig":
            return self.frequencies.shape[1]
        return 1

    def subsystem(self, indices) -> "FunctionSystem":
        """Restriction to a subset of generators (order preserved)."""
        idx = list(indices)
        if self.kind == "trig":
            return FunctionSystem.trig(self.frequencies[idx])
        if self.kind == "lacunary":
            sub = self.frequencies[idx]
            if len(sub) > 1 and np.min(sub[1:] / sub[:-1]) > 1.0:
                return FunctionSystem.lacunary(sub)
            return FunctionSystem.trig(sub)
        if self.kind == "hat_family":
            return FunctionSystem.hat_family(self.a_values[idx])
        return FunctionSystem.value_table(self.values[idx], atoms=self.atoms)

    # -- serialization

    def to_json(self) -> dict:
        if self.kind == "trig":
            return {"kind": "trig", "frequencies": self.frequencies.tolist()}
        if self.kind == "lacunary":
            return {"kind": "lacunary", "frequencies": self.frequencies.tolist()}
        if self.kind == "hat_family":
            return {"kind": "hat_family", "a_values": self.a_values.tolist()}
        out = {"kind": "value_table"}
        if np.iscomplexobj(self.values):
            out["values_re"] = self.values.real.tolist()
            out["values_im"] = self.values.imag.tolist()
        else:
            out["values"] = self.values.tolist()
        if self.atoms is not None:
            out["atoms"] = self.atoms.tolist()
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "FunctionSystem":
        kind = obj.get("kind")
        if kind == "trig":
            return cls.trig(obj["frequencies"])
        if kind == "lacunary":
            return cls.lacunary(obj["frequencies"])
        if kind == "hat_family":
            return cls.hat_family(obj["a_values"])
        if kind == "value_table":
            if "values" in obj:
                vals = np.asarray(obj["values"], dtype=float)
            else:
                vals = np.asarray(obj["values_re"], dtype=float) + 1j * np.asarray(
                    obj["values_im"], dtype=float
                )
            return cls.value_table(vals, atoms=obj.get("atoms"))
        raise InvalidParameterError(f"unknown system kind {kind!r}")


def eval_system(system: FunctionSystem, points, domain: DomainSpec | None = None) -> np.ndarray:
    """Value table of the generators at the given points, shape (N, m)."""
    if system.kind in ("trig", "lacunary"):
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        if system.kind == "lacunary" or system.dim == 1:
            phase = np.outer(system.frequencies.reshape(-1), pts.reshape(-1))
        else:
            pts2 = pts.reshape(-1, system.dim)
            phase = system.frequencies @ pts2.T
        return np.exp(1j * phase)
    if system.kind == "hat_family":
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        if np.any((pts < -1e-12) | (pts > 1.0 + 1e-12)):
            raise DomainMismatchError("hat systems live on [0, 1]")
        return np.stack([hat_value(a, pts) for a in system.a_values])
    # value_table: points must coincide with atoms
    if domain is not None and domain.kind == "finite_set":
        idx = domain.atom_indices(points)
        return system.values[:, idx]
    if system.atoms is None:
        raise DomainMismatchError(
            "value_table systems need a finite_set domain or stored atoms"
        )
    ref = DomainSpec.finite_set(system.atoms)
    idx = ref.atom_indices(points)
    return system.values[:, idx]


def as_function(coeffs, system: FunctionSystem, domain: DomainSpec | None = None):
    """Pointwise callable for the span element with the given coefficients."""
    c = np.asarray(coeffs)
    if len(c) != system.n:
        raise InvalidParameterError("coefficient length must equal the system size")

    def f(points):
        return c @ eval_system(system, points, domain)

    return f


def export_value_table(system: FunctionSystem, domain: DomainSpec, path) -> None:
    """Write the generator values on the domain grid as CSV."""
    nodes, _ = domain.quadrature()
    table = eval_system(system, nodes, domain)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        head = ["point"] + [f"g{i}" for i in range(system.n)]
        writer.writerow(head)
        for j in range(table.shape[1]):
            node = nodes[j]
            label = repr(float(node)) if np.ndim(node) == 0 else json.dumps(list(node))
            row = [label]
            for i in range(system.n):
                v = table[i, j]
                row.append(repr(complex(v)) if np.iscomplexobj(table) else repr(float(v)))
            writer.writerow(row)


# ---------------------------------------------------------------------------
# Gram matrices and orthonormal bases


def gram(system: FunctionSystem, domain: DomainSpec, check: bool = True) -> np.ndarray:
    """Gram matrix of the generators in L2 of the domain measure.

    Exact for trig systems on the uniform torus and for atomic measures;
    quadrature-based otherwise.  Raises DegenerateSystemError when the
    smallest eigenvalue falls below the relative threshold.
    """
    if system.kind in ("trig", "lacunary") and domain.kind == "torus":
        g = np.eye(system.n, dtype=complex)
    else:
        nodes, w = domain.quadrature()
        table = eval_system(system, nodes, domain)
        g = (table * w) @ table.conj().T
        g = (g + g.conj().T) / 2.0
    if check:
        ev = sla.eigvalsh(g)
        if ev[0] < DEGENERACY_THRESHOLD * max(ev[-1], 1e-300):
            raise DegenerateSystemError(
                "generating system is numerically dependent",
                smallest=float(ev[0]),
                largest=float(ev[-1]),
            )
    return g


@dataclass(frozen=True)
class OrthoBasis:
    """Orthonormal basis for the span of a system.

    ``transform`` maps generator values to orthonormal-basis values:
    u = transform @ phi.
    """

    transform: np.ndarray
    system: FunctionSystem
    domain: DomainSpec

    @property
    def n(self) -> int:
        return self.system.n

    def eval(self, points) -> np.ndarray:
        return self.transform @ eval_system(self.system, points, self.domain)


def orthonormalize(system: FunctionSystem, domain: DomainSpec) -> OrthoBasis:
    """Orthonormal basis via the inverse Cholesky factor of the Gram matrix."""
    g = gram(system, domain)
    n = system.n
    lower = sla.cholesky(g, lower=True)
    transform = sla.solve_triangular(lower, np.eye(n, dtype=lower.dtype), lower=True)
    return OrthoBasis(transform=transform, system=system, domain=domain)


def christoffel(basis: OrthoBasis, points) -> np.ndarray:
    """Sum of squared moduli of the orthonormal basis at the given points.

    Equals the squared largest point evaluation over the L2 unit ball.
    """
    table = basis.eval(points)
    out = np.sum(np.abs(table) ** 2, axis=0)
    if np.ndim(points) == 0:
        return float(out[0])
    return out


# ---------------------------------------------------------------------------
# Norms


def _refined_sup(fun, domain: DomainSpec, coarse_vals=None) -> float:
    """Supremum of |fun| on the domain grid with 1-d ternary refinement."""
    nodes = domain.sup_nodes()
    vals = np.abs(fun(nodes)) if coarse_vals is None else np.abs(coarse_vals)
    if domain.kind == "finite_set" or domain.dim > 1:
        return float(vals.max())
    n = len(nodes)
    best = float(vals.max())
    if domain.kind == "torus":
        left = np.roll(vals, 1)
        right = np.roll(vals, -1)
        local = np.where((vals >= left) & (vals >= right))[0]
        span = TWO_PI
        wrap = True
    else:
        left = np.empty(n)
        right = np.empty(n)
        left[0] = -np.inf
        left[1:] = vals[:-1]
        right[-1] = -np.inf
        right[:-1] = vals[1:]
        local = np.where((vals >= left) & (vals >= right))[0]
        span = 1.0
        wrap = False
    # keep the strongest few maxima; ternary search in each bracket
    if len(local) > 8:
        local = local[np.argsort(vals[local])[-8:]]
    h = span / (n if wrap else n - 1)
    for i in local:
        x = nodes[i]
        lo, hi = x - h, x + h
        if not wrap:
            lo, hi = max(lo, 0.0), min(hi, span)
        for _ in range(80):
            m1 = lo + (hi - lo) / 3.0
            m2 = hi - (hi - lo) / 3.0
            if abs(fun(np.array([m1]))[0]) < abs(fun(np.array([m2]))[0]):
                lo = m1
            else:
                hi = m2
        xm = (lo + hi) / 2.0
        best = max(best, abs(fun(np.array([xm]))[0]))
    return best


def lp_norm(coeffs, system: FunctionSystem, domain: DomainSpec, p) -> float:
    """Integral p-norm of the span element with the given coefficients.

    p=2 on a uniform torus with a trig system uses Parseval exactly; the
    uniform norm is the refined grid supremum; everything else is the
    domain quadrature.
    """
    c = np.asarray(coeffs)
    if len(c) != system.n:
        raise InvalidParameterError("coefficient length must equal the system size")
    if p is None or (not math.isinf(p) and p < 1):
        raise InvalidParameterError(f"p must lie in [1, inf], got {p}")
    if math.isinf(p):
        fun = as_function(c, system, domain)
        return _refined_sup(fun, domain)
    if p == 2 and system.kind in ("trig", "lacunary") and domain.kind == "torus":
        return float(np.sqrt(np.sum(np.abs(c) ** 2)))
    nodes, w = domain.quadrature()
    vals = np.abs(c @ eval_system(system, nodes, domain))
    return float(np.sum(w * vals**p) ** (1.0 / p))


def function_lp_norm(f, domain: DomainSpec, p) -> float:
    """Integral p-norm of an arbitrary callable on the domain."""
    if math.isinf(p):
        return _refined_sup(f, domain)
    nodes, w = domain.quadrature()
    vals = np.abs(np.asarray(f(nodes)))
    return float(np.sum(w * vals**p) ** (1.0 / p))


# ---------------------------------------------------------------------------
# Best approximation


@dataclass(frozen=True)
class BestApprox:
    coeffs: np.ndarray
    distance: float


def best_approx(f, system: FunctionSystem, domain: DomainSpec, p) -> BestApprox:
    """Best approximation of a callable from the span in the integral p-norm.

    p=2 is the exact orthogonal projection, p=inf a discrete minimax fit on
    the sup grid, other p an iteratively reweighted fit.  The returned
    distance is the residual norm under the same norm contract.
    """
    nodes, w = domain.quadrature()
    table = eval_system(system, nodes, domain)
    design = table.T
    y = np.asarray(f(nodes))
    if math.isinf(p):
        c = _fitcore.minimax_fit(design, y)
        resid = as_residual(f, c, system, domain)
        return BestApprox(coeffs=c, distance=_refined_sup(resid, domain))
    if p == 2:
        c = _fitcore.wls_fit(design, y, w)
    else:
        c = _fitcore.irls_fit(design, y, w, p)
    r = np.abs(y - design @ c)
    return BestApprox(coeffs=c, distance=float(np.sum(w * r**p) ** (1.0 / p)))


def as_residual(f, coeffs, system: FunctionSystem, domain: DomainSpec):
    u = as_function(coeffs, system, domain)

    def resid(points):
        return np.asarray(f(points)) - u(points)

    return resid


# ---------------------------------------------------------------------------
# Nikol'skii constants


@dataclass(frozen=True)
class NikolskiiResult:
    value: float
    witness: np.ndarray
    method: str

    def __float__(self):
        return self.value


def nikolskii_constant(
    system: FunctionSystem,
    domain: DomainSpec,
    p,
    q,
    restarts: int = 32,
    seed: int = 0,
) -> NikolskiiResult:
    """Smallest M with ||f||_q <= M ||f||_p on the span, for p <= q.

    The pair (2, inf) is computed exactly from the Christoffel function;
    other pairs run the multi-restart sphere optimizer (with a sweep
    cross-check for systems of size at most 3).
    """
    if math.isinf(p) and math.isinf(q):
        p = q = np.inf
    if (not math.isinf(q) and q < p) or (math.isinf(p) and not math.isinf(q)):
        raise InvalidParameterError("nikolskii constant needs p <= q")
    n = system.n
    if p == q:
        e0 = np.zeros(n, dtype=complex if system.field == "complex" else float)
        e0[0] = 1.0
        return NikolskiiResult(value=1.0, witness=e0, method="identity")
    basis = orthonormalize(system, domain)
    if p == 2 and math.isinf(q):
        nodes = domain.sup_nodes()
        chi = np.asarray(christoffel(basis, nodes))

        def chi_fun(points):
            return np.sqrt(np.asarray(christoffel(basis, points)))

        value = _refined_sup(chi_fun, domain, coarse_vals=np.sqrt(chi))
        jstar = int(np.argmax(chi))
        u_at = basis.eval(np.atleast_1d(nodes[jstar]) if domain.dim == 1 else nodes[jstar : jstar + 1])
        kern = basis.transform.T @ np.conj(u_at[:, 0])
        nrm = np.linalg.norm(kern)
        witness = kern / nrm if nrm > 0 else kern
        return NikolskiiResult(value=float(value), witness=witness, method="christoffel-exact")
    # generic pair: maximize the q-norm over the p-norm unit sphere
    num = _optim.integral_norm_spec(system, domain, q)
    den = _optim.integral_norm_spec(system, domain, p)
    warm = _optim.canonical_starts(system, domain)
    result = _optim.maximize_ratio(
        num, den, _optim.real_dim(system), restarts=restarts, seed=seed, warm=warm,
        sweep=(n <= 3), complex_coeffs=(system.field == "complex"),
    )
    witness = _optim.coeffs_from_real(result.x, system)
    return NikolskiiResult(value=result.value, witness=witness, method=result.method)
