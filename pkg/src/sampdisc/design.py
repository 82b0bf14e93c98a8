"""Point-set construction for discretization.

Covers verified i.i.d. sampling, replication-based weight equalization,
the weight-budget argument via the augmented constant function, optimal
design measures by multiplicative reweighting, randomized search for good
left-inequality point sets, and universal left constants over collections
of sparse spans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg as sla

from .errors import (
    CertificationError,
    ConvergenceError,
    InvalidParameterError,
    PremiseError,
    SizeGuardError,
)
from .discretize import DiscReport, PointSet, disc_constants, disc_norm
from .fnspace import (
    DomainSpec,
    FunctionSystem,
    eval_system,
    gram,
    lp_norm,
)

SUBSPACE_GUARD = 10**6


# ---------------------------------------------------------------------------
# Verified i.i.d. sampling


@dataclass
class IidResult:
    pointset: PointSet
    report: DiscReport
    m: int
    rounds: int
    seed: int


def iid_points_verified(
    system: FunctionSystem,
    domain: DomainSpec,
    p,
    eps: float,
    seed: int = 0,
    max_rounds: int = 12,
    initial_m: int | None = None,
    growth: float = 2.0,
    restarts: int = 16,
) -> IidResult:
    """Draw i.i.d. points until the measured constants certify the target.

    Certifies (1 - eps) ||f||_p^p <= m^-1 sum |f(xi_j)|^p <= (1 + eps) ||f||_p^p
    for every f in the span, i.e. D_R^p <= 1 + eps and D_L^-p >= 1 - eps.
    Batches grow geometrically and earlier draws are kept, so the final set
    is an i.i.d. sample.  Raises CertificationError with the best report
    when the rounds run out.
    """
    if math.isinf(p) or p < 1:
        raise InvalidParameterError("certification needs 1 <= p < inf")
    if eps < 0:
        raise InvalidParameterError("eps must be nonnegative")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    m = initial_m if initial_m is not None else max(2 * system.n, 4)
    pts = domain.sample(rng, m)
    best = None
    for round_no in range(1, max_rounds + 1):
        ps = PointSet(points=pts)
        rep = disc_constants(system, domain, ps, p, p, restarts=restarts, seed=seed)
        upper_ok = rep.d_right**p <= 1.0 + eps + 1e-12
        lower_ok = (not math.isinf(rep.d_left)) and rep.d_left ** (-float(p)) >= 1.0 - eps - 1e-12
        if best is None or _iid_score(rep, p) < _iid_score(best[1], p):
            best = (ps, rep)
        if upper_ok and lower_ok:
            return IidResult(pointset=ps, report=rep, m=len(pts), rounds=round_no, seed=seed)
        extra = max(1, int(math.ceil(len(pts) * (growth - 1.0))))
        pts = np.concatenate([pts, domain.sample(rng, extra)], axis=0)
    raise CertificationError(
        f"no certification after {max_rounds} rounds (m = {len(pts)})",
        best=IidResult(pointset=best[0], report=best[1], m=best[0].m,
                       rounds=max_rounds, seed=seed),
    )


def _iid_score(rep: DiscReport, p) -> float:
    up = rep.d_right**p - 1.0
    lo = float("inf") if math.isinf(rep.d_left) else 1.0 - rep.d_left ** (-float(p))
    return max(up, lo)


# ---------------------------------------------------------------------------
# Weight equalization by replication


@dataclass
class EqualizeResult:
    pointset: PointSet
    counts: np.ndarray
    m0: int
    factor: float
    ldi_constant: float | None


def equalize_weights(pointset: PointSet, C: float, q, ldi_constant: float | None = None) -> EqualizeResult:
    """Replace weights by replication: point j repeats floor(w_j C m) + 1 times.

    The output has m0 <= (C^2 + 1) m equally weighted points; a weighted
    left inequality with constant D transfers to the unweighted one with
    constant D ((C^2 + 1) / C)^(1/q).
    """
    if pointset.weights is None:
        raise InvalidParameterError("equalization needs explicit weights")
    if math.isinf(q) or q < 1:
        raise InvalidParameterError("q must lie in [1, inf)")
    w = pointset.weights
    if C < w.sum() - 1e-12:
        raise InvalidParameterError("C must be at least the weight sum")
    m = pointset.m
    counts = np.floor(w * C * m).astype(int) + 1
    m0 = int(counts.sum())
    if m0 > (C * C + 1) * m + 1e-9:
        raise AssertionError("replication count exceeded its proven bound")
    pts = np.repeat(pointset.points, counts, axis=0)
    factor = float(((C * C + 1.0) / C) ** (1.0 / q))
    new_const = None if ldi_constant is None else ldi_constant * factor
    return EqualizeResult(pointset=PointSet(points=pts), counts=counts, m0=m0,
                          factor=factor, ldi_constant=new_const)


# ---------------------------------------------------------------------------
# Weight budget via the constant function


def augment_with_constant(system: FunctionSystem) -> FunctionSystem:
    """Span of the system together with the constant function."""
    if system.kind in ("trig", "lacunary"):
        freqs = np.atleast_2d(system.frequencies.reshape(system.n, -1))
        zero = np.zeros((1, freqs.shape[1]), dtype=freqs.dtype)
        if any(np.all(f == 0) for f in freqs):
            return FunctionSystem.trig(freqs)
        return FunctionSystem.trig(np.vstack([zero, freqs]))
    if system.kind == "value_table":
        ones = np.ones((1, system.values.shape[1]), dtype=system.values.dtype)
        return FunctionSystem.value_table(np.vstack([ones, system.values]),
                                          atoms=system.atoms)
    raise InvalidParameterError(
        f"cannot augment a {system.kind} system with the constant function"
    )


@dataclass
class BudgetResult:
    pointset: PointSet
    budget: float
    d1: float
    d2: float
    q: float


def weight_budget_trick(
    system: FunctionSystem,
    domain: DomainSpec,
    discretizer,
    q,
    p1=2,
    p2=2,
    rel_tol: float = 1e-6,
    restarts: int = 16,
    seed: int = 0,
) -> BudgetResult:
    """Bound the weight sum of a two-sided weighted discretization by D2^q.

    ``discretizer`` receives the span augmented with the constant function
    and must return (PointSet with weights, claimed D1, claimed D2) for the
    two-sided inequality D1^-1 ||f||_p1 <= (sum w_j |f|^q)^(1/q) <= D2 ||f||_p2.
    The claims are verified by measurement; the budget then follows from
    the right inequality at the constant function and is asserted.
    """
    augmented = augment_with_constant(system)
    pointset, d1, d2 = discretizer(augmented, domain)
    if pointset.weights is None:
        raise PremiseError("the discretizer must return weighted points")
    meas_r = disc_constants(augmented, domain, pointset, p2, q,
                            restarts=restarts, seed=seed).d_right
    meas_l = disc_constants(augmented, domain, pointset, p1, q,
                            restarts=restarts, seed=seed).d_left
    if meas_r > d2 * (1 + rel_tol):
        raise PremiseError(
            f"claimed right constant {d2} fails: measured {meas_r}"
        )
    if math.isinf(meas_l) or meas_l > d1 * (1 + rel_tol):
        raise PremiseError(
            f"claimed left constant {d1} fails: measured {meas_l}"
        )
    budget = float(d2**q)
    total = float(pointset.weights.sum())
    if total > budget + 1e-12:
        raise PremiseError(
            f"weight sum {total} exceeds D2^q = {budget}; the premise cannot hold"
        )
    return BudgetResult(pointset=pointset, budget=budget, d1=d1, d2=d2, q=q)


# ---------------------------------------------------------------------------
# Optimal design measures (multiplicative reweighting)


@dataclass
class DesignMeasure:
    """Probability masses on candidate points certifying a (2, inf) bound.

    ``max_christoffel`` is the largest Christoffel value of the span under
    the measure over the candidate grid; the induced uniform-norm bound is
    sqrt(max_christoffel) relative to that grid.
    """

    points: np.ndarray
    masses: np.ndarray
    max_christoffel: float
    iterations: int
    target: float
    progress: np.ndarray

    def as_domain(self) -> DomainSpec:
        return DomainSpec.finite_set(self.points, self.masses)

    @property
    def nikolskii_bound(self) -> float:
        return float(np.sqrt(self.max_christoffel))

    def to_json(self) -> dict:
        return {
            "points": self.points.tolist(),
            "masses": self.masses.tolist(),
            "max_christoffel": self.max_christoffel,
            "iterations": self.iterations,
            "target": self.target,
        }


def kw_design(
    system: FunctionSystem,
    candidates: DomainSpec,
    eps: float = 1e-3,
    max_iters: int = 50000,
) -> DesignMeasure:
    """Design measure with max Christoffel value at most N (1 + eps) on a grid.

    Runs the classical multiplicative update on the candidate masses.  The
    raw max-Christoffel sequence can blip upward by tiny amounts, so the
    best iterate is tracked; the reported progress sequence is the running
    minimum and is asserted non-increasing.  Raises ConvergenceError with
    the final value when the iteration budget runs out.
    """
    nodes = candidates.sup_nodes()
    table = eval_system(system, nodes, candidates)
    n, k = table.shape
    gram(system, candidates)  # degenerate-grid check
    mu = np.full(k, 1.0 / k)
    best_mu, best_val = mu, np.inf
    target = n * (1.0 + eps)
    progress = []
    iters = 0
    for iters in range(1, max_iters + 1):
        gmat = (table * mu) @ table.conj().T
        try:
            sol = np.linalg.solve(gmat, table)
        except np.linalg.LinAlgError:
            raise ConvergenceError("design Gram became singular", last=mu)
        chi = np.einsum("ik,ik->k", table.conj(), sol).real
        mx = float(chi.max())
        if mx < best_val:
            best_val, best_mu = mx, mu.copy()
        progress.append(best_val)
        if best_val <= target:
            break
        mu = mu * chi / n
        mu = mu / mu.sum()
    progress = np.asarray(progress)
    if np.any(np.diff(progress) > 0):
        raise AssertionError("running-minimum progress must be non-increasing")
    if best_val > target:
        raise ConvergenceError(
            f"multiplicative update stalled at max christoffel {best_val} "
            f"(target {target}) after {max_iters} iterations",
            last=DesignMeasure(points=nodes, masses=best_mu, max_christoffel=best_val,
                               iterations=iters, target=target, progress=progress),
        )
    return DesignMeasure(points=nodes, masses=best_mu, max_christoffel=best_val,
                         iterations=iters, target=target, progress=progress)


# ---------------------------------------------------------------------------
# Randomized search for left-inequality point sets


@dataclass
class SearchResult:
    pointset: PointSet
    d_left: float
    report: DiscReport
    seed: int


def _quick_d_left(system, domain, pts, p, q, seed) -> float:
    ps = PointSet(points=pts)
    if p == 2 and q == 2:
        A = eval_system(system, pts, domain).T
        g = gram(system, domain).conj()
        if A.shape[0] < system.n:
            return float("inf")
        s = np.linalg.svd(A, compute_uv=False)
        if s[-1] <= 1e-10 * max(s[0], 1e-300):
            return float("inf")
        H = A.conj().T @ A / len(pts)
        ev = sla.eigh((H + H.conj().T) / 2, g, eigvals_only=True)
        return float(1.0 / np.sqrt(max(ev[0], 1e-300)))
    return disc_constants(system, domain, ps, p, q, restarts=8, seed=seed).d_left


def search_ldi_points(
    system: FunctionSystem,
    domain: DomainSpec,
    m: int,
    p=2,
    q=2,
    restarts: int = 16,
    seed: int = 0,
    refine_rounds: int = 12,
    refine_steps: int = 12,
) -> SearchResult:
    """Best-of-restarts random search for points minimizing the left constant.

    Each restart draws m points from the domain measure; the best
    configuration is polished by coordinate-wise scans over shrinking
    offset ladders (the left constant is not smooth in the points, so no
    gradients are used).  Always returns the best set found.
    """
    if m < 1:
        raise InvalidParameterError("m must be positive")
    root = np.random.SeedSequence(seed)
    best_pts, best_val = None, np.inf
    for r, child in enumerate(root.spawn(restarts)):
        rng = np.random.default_rng(child)
        pts = domain.sample(rng, m)
        val = _quick_d_left(system, domain, pts, p, q, seed + r)
        if val < best_val:
            best_val, best_pts = val, np.asarray(pts)
    if domain.kind in ("torus", "unit_interval") and domain.dim == 1:
        span = 2.0 * np.pi if domain.kind == "torus" else 1.0
        scale = span / 8.0
        pts = np.array(best_pts, dtype=float)
        for _ in range(refine_rounds):
            for _ in range(8):  # re-sweep at this scale while points keep moving
                improved = False
                for j in range(m):
                    offsets = np.linspace(-scale, scale, 2 * refine_steps + 1)
                    cands = pts[j] + offsets
                    if domain.kind == "torus":
                        cands = np.mod(cands, span)
                    else:
                        cands = np.clip(cands, 0.0, 1.0)
                    vals = []
                    for ck in cands:
                        trial = pts.copy()
                        trial[j] = ck
                        vals.append(_quick_d_left(system, domain, trial, p, q, seed))
                    k = int(np.argmin(vals))
                    if vals[k] < best_val - 1e-15:
                        best_val = vals[k]
                        pts[j] = cands[k]
                        improved = True
                if not improved:
                    break
            scale /= 3.0
        best_pts = pts
    elif domain.kind == "finite_set":
        # coordinate exchange over atoms
        pts = np.array(best_pts)
        for _ in range(refine_rounds):
            improved = False
            for j in range(m):
                vals = []
                for atom in domain.atoms:
                    trial = pts.copy()
                    trial[j] = atom
                    vals.append(_quick_d_left(system, domain, trial, p, q, seed))
                k = int(np.argmin(vals))
                if vals[k] < best_val - 1e-15:
                    best_val = vals[k]
                    pts[j] = domain.atoms[k]
                    improved = True
            if not improved:
                break
        best_pts = pts
    ps = PointSet(points=best_pts)
    report = disc_constants(system, domain, ps, p, q, seed=seed)
    return SearchResult(pointset=ps, d_left=report.d_left, report=report, seed=seed)


# ---------------------------------------------------------------------------
# Universal left constants over sparse collections


@dataclass
class CollectionSpec:
    """All v-element spans of a dictionary (enumerated lazily, guarded)."""

    system: FunctionSystem
    domain: DomainSpec
    v: int

    def __post_init__(self):
        if not (0 < self.v <= self.system.n):
            raise InvalidParameterError("sparsity must satisfy 1 <= v <= N")
        if self.count > SUBSPACE_GUARD:
            raise SizeGuardError(
                f"collection holds {self.count} spans, above the guard {SUBSPACE_GUARD}"
            )

    @property
    def count(self) -> int:
        return math.comb(self.system.n, self.v)

    def supports(self):
        return combinations(range(self.system.n), self.v)


@dataclass
class UniversalResult:
    value: float
    worst_support: tuple
    per_support: dict


def universal_ldi_constant(
    collection: CollectionSpec,
    pointset: PointSet,
    p,
    q,
    restarts: int = 16,
    seed: int = 0,
    keep_table: bool = False,
) -> UniversalResult:
    """Largest left constant over every span in the collection.

    Equals the left constant of the union of the spans.  ``q`` must be the
    norm exponent ``p`` itself or inf.
    """
    if not (q == p or math.isinf(q)):
        raise InvalidParameterError("the universal constant is defined for q = p or q = inf")
    sysd = collection.system
    dom = collection.domain
    worst, worst_support = 0.0, None
    table = {}
    for support in collection.supports():
        sub = sysd.subsystem(support)
        rep = disc_constants(sub, dom, pointset, p, q, restarts=restarts, seed=seed)
        val = rep.d_left
        if keep_table:
            table[support] = val
        if val > worst or worst_support is None:
            worst, worst_support = val, support
        if math.isinf(worst):
            break
    return UniversalResult(value=float(worst), worst_support=worst_support,
                           per_support=table)
