"""Design matrices, operator (r, p)-norms, and row-subset selection.

Everything here works with plain matrices: rows correspond to sample
points, columns to basis elements.  Operator norms in this module are the
unweighted vector norms; the conversion factor m^(-1/p) to the normalized
discrete norms used elsewhere is applied explicitly where the two meet
(see ``pointwise_check``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np
import scipy.linalg as sla

from . import _optim
from .errors import InvalidParameterError
from .fnspace import DomainSpec, FunctionSystem, eval_system, orthonormalize
from .discretize import PointSet


@dataclass
class DesignMatrix:
    """Matrix of basis values at sample points; column i holds basis i."""

    values: np.ndarray
    basis: str
    system_tag: str = ""
    pointset_tag: str = ""

    @property
    def shape(self):
        return self.values.shape

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in self.values:
                if np.iscomplexobj(self.values):
                    writer.writerow([repr(complex(v)) for v in row])
                else:
                    writer.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, basis: str = "raw") -> "DesignMatrix":
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.reader(fh):
                rows.append([complex(tok) for tok in rec])
        arr = np.asarray(rows)
        if np.all(arr.imag == 0):
            arr = arr.real
        return cls(values=arr, basis=basis)


def build_design(
    system: FunctionSystem,
    domain: DomainSpec,
    pointset: PointSet,
    basis: str = "orthonormal",
) -> DesignMatrix:
    """Design matrix of the system (or its orthonormalization) at the points."""
    if basis not in ("raw", "orthonormal"):
        raise InvalidParameterError(f"unknown basis choice {basis!r}")
    if basis == "raw":
        table = eval_system(system, pointset.points, domain)
    else:
        table = orthonormalize(system, domain).eval(pointset.points)
    tag = f"{system.kind}:n={system.n}"
    return DesignMatrix(values=table.T, basis=basis, system_tag=tag,
                        pointset_tag=f"m={pointset.m}")


# ---------------------------------------------------------------------------
# Operator (r, p)-norms


def _dual_exponent(r) -> float:
    if math.isinf(r):
        return 1.0
    if r == 1:
        return float("inf")
    return r / (r - 1.0)


def opnorm_rp(A, r, p, restarts: int = 32, seed: int = 0) -> float:
    """Operator norm sup of ||Ax||_p over the unweighted r-unit ball.

    Exact for (2, 2) (largest singular value), for r = 1 (largest column
    p-norm), and for p = inf (largest row dual-norm); otherwise the restart
    sphere optimizer, which scale-invariance reduces to the r-sphere.
    """
    A = np.asarray(A)
    for name, v in (("r", r), ("p", p)):
        if not math.isinf(v) and v < 1:
            raise InvalidParameterError(f"{name} must lie in [1, inf]")
    if r == 2 and p == 2:
        return float(np.linalg.svd(A, compute_uv=False)[0])
    if r == 1:
        if math.isinf(p):
            return float(np.max(np.abs(A)))
        return float(np.max(np.sum(np.abs(A) ** p, axis=0) ** (1.0 / p)))
    if math.isinf(p):
        rd = _dual_exponent(r)
        if math.isinf(rd):
            return float(np.max(np.abs(A)))
        return float(np.max(np.sum(np.abs(A) ** rd, axis=1) ** (1.0 / rd)))
    m, n = A.shape
    complexc = np.iscomplexobj(A)
    num = _optim.make_norm_spec(A, np.ones(m), p, complexc)
    den = _optim.make_norm_spec(np.eye(n), np.ones(n), r, complexc)
    ndim = 2 * n if complexc else n
    warm = []
    for i in range(min(n, 8)):
        e = np.zeros(ndim)
        e[i] = 1.0
        warm.append(e)
    res = _optim.maximize_ratio(num, den, ndim, restarts=restarts, seed=seed,
                                warm=warm, sweep=(ndim <= 3),
                                complex_coeffs=complexc)
    return res.value


# ---------------------------------------------------------------------------
# Row selection realizing a right discretization with m = N rows


@dataclass
class RowSelection:
    """Chosen row indices with the achieved submatrix norm.

    ``ratio`` is the right-inequality constant in the normalized discrete
    norms, sup ||A1 x||_{L2^m} / ||A x||_{L2^m0}.  For exhaustive selections
    the optimality certificate records the number of subsets examined.
    """

    indices: tuple
    achieved_norm: float
    ratio: float
    method: str
    certificate: dict | None = None

    def to_json(self) -> dict:
        out = {
            "indices": list(self.indices),
            "achieved_norm": self.achieved_norm,
            "ratio": self.ratio,
            "method": self.method,
        }
        if self.certificate is not None:
            out["certificate"] = self.certificate
        return out


def _spectral(A1: np.ndarray) -> float:
    return float(np.linalg.svd(A1, compute_uv=False)[0]) if A1.size else 0.0


def _rdi_ratio(A: np.ndarray, indices) -> float:
    m0 = A.shape[0]
    m = len(indices)
    A1 = A[list(indices)]
    # sup ||A1 x||_2 / ||A x||_2 over x, both unweighted, then rescale
    H1 = A1.conj().T @ A1
    H0 = A.conj().T @ A
    ev = sla.eigh((H1 + H1.conj().T) / 2, (H0 + H0.conj().T) / 2, eigvals_only=True)
    return float(np.sqrt(max(ev[-1], 0.0) * m0 / m))


def select_rdi_rows(
    A,
    m: int | None = None,
    exhaustive: bool | None = None,
    orthonormal_tol: float = 1e-6,
) -> RowSelection:
    """Pick rows whose submatrix keeps the spectral norm small.

    The columns are expected orthonormal in the normalized L2 norm of the
    ambient row count (A^H A = m0 I); other inputs are re-orthonormalized
    first.  Greedy selection adds, at each step, the row minimizing the
    spectral norm of the running Gram; instances with at most 12 rows and
    4 columns default to exhaustive search with an optimality certificate.
    """
    A_raw = np.asarray(A)
    m0, n = A_raw.shape
    m = n if m is None else m
    if m > m0:
        raise InvalidParameterError("cannot select more rows than the matrix has")
    A = A_raw
    gc = A.conj().T @ A / m0
    if np.max(np.abs(gc - np.eye(n))) > orthonormal_tol:
        lower = sla.cholesky((gc + gc.conj().T) / 2, lower=True)
        A = sla.solve_triangular(lower, A.conj().T, lower=True).conj().T
    if exhaustive is None:
        exhaustive = m0 <= 12 and n <= 4 and m <= 6
    if exhaustive:
        best, best_idx, count = np.inf, None, 0
        for idx in combinations(range(m0), m):
            count += 1
            v = _spectral(A[list(idx)])
            if v < best - 1e-15:
                best, best_idx = v, idx
        cert = {"subsets_checked": count, "normalized_optimum": best}
        return RowSelection(indices=best_idx,
                            achieved_norm=_spectral(A_raw[list(best_idx)]),
                            ratio=_rdi_ratio(A, best_idx), method="exhaustive",
                            certificate=cert)
    chosen: list[int] = []
    gram_run = np.zeros((n, n), dtype=A.dtype)
    remaining = list(range(m0))
    for _ in range(m):
        best_v, best_i = np.inf, None
        for i in remaining:
            cand = gram_run + np.outer(A[i].conj(), A[i])
            v = float(sla.eigh((cand + cand.conj().T) / 2, eigvals_only=True)[-1])
            if v < best_v - 1e-15:
                best_v, best_i = v, i
        chosen.append(best_i)
        gram_run = gram_run + np.outer(A[best_i].conj(), A[best_i])
        remaining.remove(best_i)
    idx = tuple(chosen)
    return RowSelection(indices=idx, achieved_norm=_spectral(A_raw[list(idx)]),
                        ratio=_rdi_ratio(A, idx), method="greedy")


# ---------------------------------------------------------------------------
# Pointwise estimates between a matrix and a row submatrix


@dataclass
class PointwiseCheck:
    side: str
    p: float
    bound: float
    worst_ratio: float
    ok: bool
    witness: np.ndarray | None
    corollary: list[dict]


def pointwise_check(
    A,
    rows,
    side: str,
    p,
    D: float,
    restarts: int = 32,
    seed: int = 0,
    rel_tol: float = 1e-9,
) -> PointwiseCheck:
    """Verify ||Ax||_p <= D ||A1 x||_p (LDI side) or the reverse (RDI side).

    Both discrete norms carry their 1/m normalizations.  The worst ratio is
    exact for p = 2 (generalized eigenvalue) and optimizer-based otherwise.
    On the RDI side the operator-norm corollary
    ||A1||^p_(r,p) <= D^p (m/m0) ||A||^p_(r,p) is checked for r in {1, 2, inf}.
    """
    A = np.asarray(A)
    m0, n = A.shape
    rows = list(rows)
    if any(i < 0 or i >= m0 for i in rows):
        raise InvalidParameterError("row indices out of range")
    if side not in ("LDI", "RDI"):
        raise InvalidParameterError("side must be 'LDI' or 'RDI'")
    A1 = A[rows]
    m = len(rows)
    w0 = np.full(m0, 1.0 / m0)
    w1 = np.full(m, 1.0 / m)
    complexc = np.iscomplexobj(A)

    if side == "LDI":
        num_m, num_w = A, w0
        den_m, den_w = A1, w1
    else:
        num_m, num_w = A1, w1
        den_m, den_w = A, w0

    witness = None
    if p == 2:
        Hn = num_m.conj().T @ (num_m * num_w[:, None])
        Hd = den_m.conj().T @ (den_m * den_w[:, None])
        Hd = (Hd + Hd.conj().T) / 2
        sd = np.linalg.svd(den_m, compute_uv=False)
        if sd[-1] <= 1e-12 * max(sd[0], 1e-300) or den_m.shape[0] < n:
            worst = float("inf")
        else:
            ev, vec = sla.eigh((Hn + Hn.conj().T) / 2, Hd)
            worst = float(np.sqrt(max(ev[-1], 0.0)))
            witness = vec[:, -1]
    else:
        num = _optim.make_norm_spec(num_m, num_w, p, complexc)
        den = _optim.make_norm_spec(den_m, den_w, p, complexc)
        sd = np.linalg.svd(den_m, compute_uv=False)
        if sd[-1] <= 1e-12 * max(sd[0], 1e-300) or den_m.shape[0] < n:
            worst = float("inf")
        else:
            ndim = 2 * n if complexc else n
            res = _optim.maximize_ratio(num, den, ndim, restarts=restarts, seed=seed,
                                        sweep=(n <= 3), complex_coeffs=complexc)
            worst = res.value
            witness = _optim.unembed(res.x, complexc)
    ok = bool(worst <= D * (1 + rel_tol))
    corollary = []
    if side == "RDI":
        for r in (1.0, 2.0, float("inf")):
            na = opnorm_rp(A, r, p, restarts=restarts, seed=seed)
            n1 = opnorm_rp(A1, r, p, restarts=restarts, seed=seed)
            if math.isinf(p):
                lhs, rhs = n1, D * na
            else:
                lhs = n1**p
                rhs = D**p * (m / m0) * na**p
            corollary.append({
                "r": r, "lhs": lhs, "rhs": rhs,
                "ok": bool(lhs <= rhs * (1 + rel_tol)),
            })
    return PointwiseCheck(side=side, p=p, bound=D, worst_ratio=worst, ok=ok,
                          witness=witness, corollary=corollary)
