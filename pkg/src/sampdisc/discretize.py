"""Sampling operators, discrete norms, and one-sided discretization constants.

The central operation measures, for a span X over a domain and a point set,
the best constants in

    left:   ||f||_p <= D_L * ||S(f)||_q      (LDI)
    right:  ||S(f)||_q <= D_R * ||f||_p      (RDI)

with ||S(f)||_q the (weighted) discrete q-norm of the sample vector.  The
pair p = q = 2 is solved exactly as a generalized eigenproblem; small real
instances with q = inf use exact vertex enumeration; everything else runs
the restart sphere optimizer.  The module also houses the lower-bound
audits built on these constants (orthonormal-basis pointwise bound, sign
enumeration against the Khinchin constant, the Hoelder transfer of weighted
right inequalities, and the injective-operator size bound).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np
import scipy.linalg as sla
from scipy.special import gammaln

from . import _optim
from .errors import (
    InvalidParameterError,
    PremiseError,
    SizeGuardError,
)
from .fnspace import (
    DomainSpec,
    FunctionSystem,
    OrthoBasis,
    christoffel,
    eval_system,
    gram,
    lp_norm,
    nikolskii_constant,
    orthonormalize,
)

RANK_THRESHOLD = 1e-10

# Guards for the exact vertex enumeration of {max_j |f(xi^j)| <= 1}.
VERTEX_MAX_POINTS = 14
VERTEX_MAX_DIM = 4


def _sampling_spectrum(system, domain, A, w):
    """Generalized eigenvalues of the sampled quadratic form against the span.

    Returns (eigenvalues, eigenvectors, gq) for A^H diag(w) A versus the
    quadratic-form matrix of the squared L2 norm.  The ratios are
    dimensionless, so a kernel is declared on an absolute floor.
    """
    gq = gram(system, domain).conj()
    H = (A.conj().T * w) @ A
    H = (H + H.conj().T) / 2.0
    ev, vec = sla.eigh(H, gq)
    return np.maximum(ev, 0.0), vec, gq


def _has_kernel(ev) -> bool:
    return bool(ev[0] <= RANK_THRESHOLD**2 * max(1.0, ev[-1]))


# ---------------------------------------------------------------------------
# Point sets and sampling


@dataclass(frozen=True)
class PointSet:
    """Sample points with optional nonnegative weights.

    Duplicate points are allowed.  If ``weight_budget`` is set, the weights
    must sum to at most that budget.
    """

    points: np.ndarray
    weights: np.ndarray | None = None
    weight_budget: float | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.size == 0:
            raise InvalidParameterError("a point set needs at least one point")
        object.__setattr__(self, "points", pts)
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if len(w) != self.m:
                raise InvalidParameterError("weights must match the number of points")
            if np.any(w < 0):
                raise InvalidParameterError("weights must be nonnegative")
            object.__setattr__(self, "weights", w)
            if self.weight_budget is not None and w.sum() > self.weight_budget + 1e-12:
                raise InvalidParameterError(
                    f"weights sum to {w.sum()} above the budget {self.weight_budget}"
                )

    @property
    def m(self) -> int:
        pts = self.points
        return len(pts) if pts.ndim >= 1 else 1

    @classmethod
    def equispaced(cls, domain: DomainSpec, m: int) -> "PointSet":
        if domain.kind == "torus" and domain.dim == 1:
            return cls(points=np.arange(m) * (2.0 * np.pi / m))
        if domain.kind == "unit_interval":
            return cls(points=(np.arange(m) + 0.5) / m)
        raise InvalidParameterError("equispaced points need a 1-d continuous domain")

    @classmethod
    def random(cls, domain: DomainSpec, m: int, rng: np.random.Generator) -> "PointSet":
        return cls(points=domain.sample(rng, m))

    def effective_weights(self, q=None) -> np.ndarray:
        """Weights actually used by the discrete norm (1/m when unweighted)."""
        if self.weights is not None:
            return self.weights
        return np.full(self.m, 1.0 / self.m)

    def replicate(self, k: int) -> "PointSet":
        pts = np.concatenate([self.points] * k, axis=0)
        w = None if self.weights is None else np.concatenate([self.weights] * k)
        return PointSet(points=pts, weights=w)

    def to_json(self) -> dict:
        out = {"points": self.points.tolist()}
        if self.weights is not None:
            out["weights"] = self.weights.tolist()
        if self.weight_budget is not None:
            out["weight_budget"] = self.weight_budget
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "PointSet":
        return cls(
            points=np.asarray(obj["points"], dtype=float),
            weights=None if obj.get("weights") is None else np.asarray(obj["weights"], float),
            weight_budget=obj.get("weight_budget"),
        )


def sample_vector(f, pointset: PointSet) -> np.ndarray:
    """Vector of function values at the sample points."""
    return np.asarray(f(pointset.points))


def disc_norm(values, q, weights=None) -> float:
    """Discrete q-norm: (m^-1 sum |v|^q)^(1/q), or the weighted seminorm.

    q = inf is the maximum over the (weighted) support.
    """
    v = np.abs(np.asarray(values))
    if not math.isinf(q) and q < 1:
        raise InvalidParameterError(f"q must lie in [1, inf], got {q}")
    if weights is None:
        if math.isinf(q):
            return float(v.max())
        return float((np.mean(v**q)) ** (1.0 / q))
    w = np.asarray(weights, dtype=float)
    if len(w) != len(v):
        raise InvalidParameterError("weights must match the sample vector length")
    if np.any(w < 0):
        raise InvalidParameterError("weights must be nonnegative")
    if math.isinf(q):
        mask = w > 0
        return float(v[mask].max()) if mask.any() else 0.0
    return float(np.sum(w * v**q) ** (1.0 / q))


# ---------------------------------------------------------------------------
# Discretization constants


@dataclass
class DiscReport:
    """Measured one-sided discretization constants with witnesses.

    ``d_left`` may be ``inf`` when the sampling operator has a kernel on
    the span.  ``margins`` carries diagnostics: the chaining product
    D_L * D_R - 1, the design singular-value ratio, and (for optimizer
    paths) the spread between the best restarts.
    """

    p: float
    q: float
    d_left: float
    d_right: float
    method: str
    witness_left: np.ndarray | None
    witness_right: np.ndarray | None
    margins: dict
    grid_size: int
    seed: int

    def to_json(self) -> dict:
        def num(x):
            return "inf" if math.isinf(x) else x

        def wit(c):
            if c is None:
                return None
            c = np.asarray(c)
            if np.iscomplexobj(c):
                return {"re": c.real.tolist(), "im": c.imag.tolist()}
            return c.tolist()

        return {
            "p": num(self.p),
            "q": num(self.q),
            "D_L": num(self.d_left),
            "D_R": num(self.d_right),
            "method": self.method,
            "witnesses": {"left": wit(self.witness_left), "right": wit(self.witness_right)},
            "margins": {k: num(v) for k, v in self.margins.items()},
            "grid_size": self.grid_size,
            "seed": self.seed,
        }


def _design_matrix(system, domain, pointset) -> np.ndarray:
    return eval_system(system, pointset.points, domain).T


def is_injective(system: FunctionSystem, domain: DomainSpec, pointset: PointSet) -> bool:
    """True when the sampling operator has full rank on the span."""
    A = _design_matrix(system, domain, pointset)
    w = pointset.effective_weights()
    A = A[w > 0]
    if A.shape[0] < system.n:
        return False
    ev, _, _ = _sampling_spectrum(system, domain, A, np.full(A.shape[0], 1.0 / A.shape[0]))
    return not _has_kernel(ev)


def _vertex_ldi(A: np.ndarray, support: np.ndarray, pnorm) -> tuple[float, np.ndarray]:
    """Exact sup of pnorm(c) over the polytope max_j |(Ac)_j| <= 1 (real A).

    A convex function attains its maximum at a vertex, so the constant is
    found by enumerating the vertices cut out by sign patterns of active
    rows.  Only called for full-rank A within the size guards.
    """
    Asub = A[support]
    m, n = Asub.shape
    best, best_c = 0.0, None
    for rows in combinations(range(m), n):
        B = Asub[list(rows)]
        if abs(np.linalg.det(B)) < 1e-12:
            continue
        for signs in product([1.0, -1.0], repeat=n - 1):
            s = np.array((1.0,) + signs)
            try:
                c = np.linalg.solve(B, s)
            except np.linalg.LinAlgError:
                continue
            if np.max(np.abs(Asub @ c)) > 1.0 + 1e-9:
                continue
            val = pnorm(c)
            if val > best:
                best, best_c = val, c
    if best_c is None:
        raise InvalidParameterError("vertex enumeration found no feasible vertex")
    return best, best_c


def disc_constants(
    system: FunctionSystem,
    domain: DomainSpec,
    pointset: PointSet,
    p,
    q,
    method: str = "auto",
    restarts: int = 32,
    seed: int = 0,
) -> DiscReport:
    """Best one-sided discretization constants of the span on the point set.

    ``method`` may force ``eigen`` (p = q = 2 only) or ``optimize``; the
    default picks the exact path available.  Weighted discrete norms are
    used when the point set carries weights, the 1/m-normalized norm
    otherwise.
    """
    if (not math.isinf(p) and p < 1) or (not math.isinf(q) and q < 1):
        raise InvalidParameterError("p and q must lie in [1, inf]")
    n = system.n
    A = _design_matrix(system, domain, pointset)
    w = pointset.effective_weights()
    ev2, vec2, gq = _sampling_spectrum(system, domain, A, w)
    kernel = A[w > 0].shape[0] < n or _has_kernel(ev2)
    lam_ratio = float(ev2[0] / max(ev2[-1], 1e-300))
    grid_size = 0 if domain.kind == "finite_set" else domain.grid_size

    if method not in ("auto", "eigen", "optimize"):
        raise InvalidParameterError(f"unknown method {method!r}")
    if method == "eigen" and not (p == 2 and q == 2):
        raise InvalidParameterError("the eigenvalue path requires p = q = 2")

    complexc = system.field == "complex"

    if p == 2 and q == 2 and method in ("auto", "eigen"):
        d_right = float(np.sqrt(ev2[-1]))
        wit_r = vec2[:, -1]
        if kernel:
            d_left, wit_l = float("inf"), vec2[:, 0]
        else:
            d_left = float(1.0 / np.sqrt(max(ev2[0], 1e-300)))
            wit_l = vec2[:, 0]
        margins = {
            "product_minus_one": d_left * d_right - 1.0 if not math.isinf(d_left) else float("inf"),
            "eig_ratio": lam_ratio,
        }
        return DiscReport(p=p, q=q, d_left=d_left, d_right=d_right, method="eigen-exact",
                          witness_left=wit_l, witness_right=wit_r, margins=margins,
                          grid_size=grid_size, seed=seed)

    exact_l = None
    exact_r = None
    wit_l = wit_r = None
    tag_parts = []

    # exact right constant for p = 2, q = inf: largest Christoffel value on the support
    basis = None
    if math.isinf(q) and p == 2 and method == "auto":
        basis = orthonormalize(system, domain)
        chi = np.atleast_1d(christoffel(basis, pointset.points))
        mask = w > 0
        j = int(np.argmax(np.where(mask, chi, -np.inf)))
        exact_r = float(np.sqrt(chi[j]))
        U = basis.eval(pointset.points)
        kern = basis.transform.T @ np.conj(U[:, j])
        wit_r = kern / max(np.linalg.norm(kern), 1e-300)
        tag_parts.append("right:christoffel-exact")

    # exact left constant by vertex enumeration: real span, q = inf, small instance
    if (
        math.isinf(q)
        and method == "auto"
        and not complexc
        and not kernel
        and pointset.m <= VERTEX_MAX_POINTS
        and n <= VERTEX_MAX_DIM
    ):
        support = np.where(w > 0)[0]

        def pnorm(c):
            return lp_norm(c, system, domain, p)

        val, c_star = _vertex_ldi(np.real(A), support, pnorm)
        exact_l = float(val)
        wit_l = c_star
        tag_parts.append("left:vertex-exact")

    opt_used = False
    if exact_r is None or exact_l is None:
        num_disc = _optim.discrete_norm_spec(system, domain, pointset.points, w, q)
        den_int = _optim.integral_norm_spec(system, domain, p)
        warm = _optim.canonical_starts(system)
        # surrogate eigen directions and point-evaluation kernels as warm starts
        warm.append(_optim.real_from_coeffs(vec2[:, -1], system))
        warm.append(_optim.real_from_coeffs(vec2[:, 0], system))
        ginv_phi = np.linalg.solve(gq, np.conj(A.T))
        for j in range(min(pointset.m, 12)):
            kcol = ginv_phi[:, j]
            nk = np.linalg.norm(kcol)
            if nk > 0:
                warm.append(_optim.real_from_coeffs(kcol / nk, system))
        sweep = n <= 3
        ndim = _optim.real_dim(system)
        opt_used = True
        if exact_r is None:
            res_r = _optim.maximize_ratio(num_disc, den_int, ndim, restarts=restarts,
                                          seed=seed, warm=warm, sweep=sweep,
                                          complex_coeffs=complexc)
            exact_r = res_r.value
            wit_r = _optim.coeffs_from_real(res_r.x, system)
            tag_parts.append(f"right:{res_r.method}")
            spread_r = res_r.spread
        else:
            spread_r = 0.0
        if exact_l is None:
            if kernel:
                exact_l = float("inf")
                wit_l = None
                tag_parts.append("left:kernel")
                spread_l = 0.0
            else:
                res_l = _optim.maximize_ratio(den_int, num_disc, ndim, restarts=restarts,
                                              seed=seed + 1, warm=warm, sweep=sweep,
                                              complex_coeffs=complexc)
                exact_l = res_l.value
                wit_l = _optim.coeffs_from_real(res_l.x, system)
                tag_parts.append(f"left:{res_l.method}")
                spread_l = res_l.spread
    margins = {
        "product_minus_one": (exact_l * exact_r - 1.0) if not math.isinf(exact_l) else float("inf"),
        "design_sv_ratio": sv_ratio,
    }
    if opt_used:
        margins["restart_spread_right"] = float(locals().get("spread_r", 0.0))
        margins["restart_spread_left"] = float(locals().get("spread_l", 0.0))
    tag = ",".join(tag_parts) if tag_parts else "optimized"
    return DiscReport(p=p, q=q, d_left=exact_l, d_right=exact_r, method=tag,
                      witness_left=wit_l, witness_right=wit_r, margins=margins,
                      grid_size=grid_size, seed=seed)


# ---------------------------------------------------------------------------
# Injective-operator size bound


def rip3_bound(a: float, p, q, D: float) -> float:
    """Lower bound m >= D^-q (2a)^(-q/p) for injective right discretization.

    Applies to spans containing the plateau pair f_a, f_(a/2); the audit
    against measured constants lives in the test suite and the harness.
    """
    if not (0.0 < a <= 0.25):
        raise InvalidParameterError("the bound needs 0 < a <= 1/4 so f_(a/2) exists")
    if D <= 0:
        raise InvalidParameterError("D must be positive")
    return float(D ** (-q) * (2.0 * a) ** (-q / p))


# ---------------------------------------------------------------------------
# Pointwise weighted-RDI audit


@dataclass
class Ril1Report:
    d_right: float
    nikolskii: float
    bound: float
    lhs: np.ndarray
    worst_slack: float
    worst_index: int
    ok: bool


def ril1_audit(
    system: FunctionSystem,
    domain: DomainSpec,
    pointset: PointSet,
    p,
    q,
    restarts: int = 32,
    seed: int = 0,
    rel_tol: float = 1e-9,
) -> Ril1Report:
    """Check lambda_j * chi(xi_j)^(q/2) <= (D M)^q for every sample point.

    D is the measured weighted right constant for the pair (p, q) and M the
    measured Nikol'skii constant for (2, p).  The premise is that the
    weighted right inequality holds, which the measurement itself certifies.
    """
    if pointset.weights is None:
        raise PremiseError("the pointwise audit needs explicit weights")
    if math.isinf(q):
        raise InvalidParameterError("the audit needs q < inf")
    if p < 2:
        raise InvalidParameterError("the audit needs p >= 2")
    rep = disc_constants(system, domain, pointset, p, q, restarts=restarts, seed=seed)
    d = rep.d_right
    m_nik = nikolskii_constant(system, domain, 2, p, restarts=restarts, seed=seed).value
    basis = orthonormalize(system, domain)
    chi = np.atleast_1d(christoffel(basis, pointset.points))
    lhs = pointset.weights * chi ** (q / 2.0)
    bound = (d * m_nik) ** q
    slack = bound - lhs
    worst = int(np.argmin(slack))
    ok = bool(slack[worst] >= -rel_tol * max(bound, 1e-300))
    return Ril1Report(d_right=d, nikolskii=m_nik, bound=bound, lhs=lhs,
                      worst_slack=float(slack[worst]), worst_index=worst, ok=ok)


# ---------------------------------------------------------------------------
# Khinchin enumeration audit


def khinchin_constant(p: float) -> float:
    """Sharp upper constant in the Khinchin inequality for p >= 2.

    This is the p-th moment of a standard Gaussian,
    sqrt(2) * (Gamma((p+1)/2) / sqrt(pi))^(1/p); validated against exact
    sign enumeration in the test suite.
    """
    if p < 2:
        raise InvalidParameterError("the closed form is used for p >= 2")
    return float(math.sqrt(2.0) * math.exp((gammaln((p + 1) / 2.0) - gammaln(0.5)) / p))


def rademacher_pth_moment(U: np.ndarray, weights: np.ndarray, p: float) -> float:
    """Exact average of sum_j w_j |sum_i eps_i U_ij|^p over all sign patterns.

    U has shape (N, m); enumeration is over 2^N patterns, guarded at N = 12.
    """
    n = U.shape[0]
    if n > 12:
        raise SizeGuardError(f"sign enumeration is guarded at N <= 12, got {n}")
    signs = np.array(list(product([1.0, -1.0], repeat=n)))
    vals = np.abs(signs @ U) ** p
    return float(np.mean(vals @ weights))


@dataclass
class KhinchinReport:
    p: float
    n: int
    m: int
    k_p: float
    d1: float
    d2: float
    nikolskii: float
    average: float
    khinchin_rhs: float
    lemma_rhs: float
    conclusion_lhs: float
    conclusion_rhs: float
    slacks: dict
    ok: bool


def khinchin_audit(
    system: FunctionSystem,
    domain: DomainSpec,
    pointset: PointSet,
    p: float,
    d1: float | None = None,
    d2: float | None = None,
    restarts: int = 32,
    seed: int = 0,
    rel_tol: float = 1e-9,
) -> KhinchinReport:
    """Exact-sign-enumeration audit of the random-sign moment chain.

    Measures the two-sided premise constants when not supplied, computes
    the exact Rademacher p-th moment of the orthonormal basis at the
    sample points, and checks every link:

    * moment lower bound: D1^{-p} N^{p/2} <= average,
    * Khinchin step: average <= K_p^p sum_j w_j chi_j^{p/2},
    * pointwise bound: each w_j chi_j^{p/2} <= (D2 M)^p,
    * conclusion: N^{p/2} <= m (K_p D1 D2 M)^p.
    """
    if p < 2:
        raise InvalidParameterError("the audit needs p >= 2")
    n = system.n
    if n > 12:
        raise SizeGuardError(f"sign enumeration is guarded at N <= 12, got {n}")
    weights = pointset.effective_weights()
    wpts = PointSet(points=pointset.points, weights=weights)
    if d2 is None:
        d2 = disc_constants(system, domain, wpts, p, p, restarts=restarts, seed=seed).d_right
    if d1 is None:
        d1 = disc_constants(system, domain, wpts, 2, p, restarts=restarts, seed=seed).d_left
    if math.isinf(d1):
        raise PremiseError("the two-sided premise fails: sampling kernel is nontrivial")
    basis = orthonormalize(system, domain)
    U = basis.eval(pointset.points)
    chi = np.sum(np.abs(U) ** 2, axis=0)
    k_p = khinchin_constant(p)
    m_nik = nikolskii_constant(system, domain, 2, p, restarts=restarts, seed=seed).value
    average = rademacher_pth_moment(U, weights, p)
    kh_rhs = k_p**p * float(np.sum(weights * chi ** (p / 2.0)))
    lemma_rhs = (d2 * m_nik) ** p
    lhs_point = weights * chi ** (p / 2.0)
    concl_lhs = float(n ** (p / 2.0))
    concl_rhs = float(pointset.m) * (k_p * d1 * d2 * m_nik) ** p
    slacks = {
        "moment_lower": average - d1 ** (-p) * n ** (p / 2.0),
        "khinchin_step": kh_rhs - average,
        "pointwise": float(np.min(lemma_rhs - lhs_point)),
        "conclusion": concl_rhs - concl_lhs,
    }
    ok = all(
        v >= -rel_tol * max(abs(ref), 1e-300)
        for v, ref in [
            (slacks["moment_lower"], average),
            (slacks["khinchin_step"], kh_rhs),
            (slacks["pointwise"], lemma_rhs),
            (slacks["conclusion"], concl_rhs),
        ]
    )
    return KhinchinReport(p=p, n=n, m=pointset.m, k_p=k_p, d1=d1, d2=d2,
                          nikolskii=m_nik, average=average, khinchin_rhs=kh_rhs,
                          lemma_rhs=lemma_rhs, conclusion_lhs=concl_lhs,
                          conclusion_rhs=concl_rhs, slacks=slacks, ok=ok)


# ---------------------------------------------------------------------------
# Hoelder transfer of weighted right inequalities


def wrdi_transfer(D: float, M: float, p, r) -> float:
    """Constant D*M transferred to the weighted right inequality at r.

    Valid for 2 <= r < p when the weights form a probability vector and the
    span satisfies the (2, p) Nikol'skii inequality with constant M.
    """
    if D <= 0 or M <= 0:
        raise InvalidParameterError("constants must be positive")
    if not (2 <= r < p):
        raise InvalidParameterError("the transfer needs 2 <= r < p")
    return float(D * M)


@dataclass
class WrdiTransferReport:
    d_p: float
    nikolskii: float
    transferred: float
    measured_r: float
    slack: float
    ok: bool


def wrdi_transfer_audit(
    system: FunctionSystem,
    domain: DomainSpec,
    pointset: PointSet,
    p,
    r,
    restarts: int = 32,
    seed: int = 0,
    rel_tol: float = 1e-9,
) -> WrdiTransferReport:
    """Measure both sides of the transfer on a concrete instance."""
    w = pointset.effective_weights()
    if abs(w.sum() - 1.0) > 1e-9:
        raise PremiseError("the transfer needs weights summing to 1")
    wpts = PointSet(points=pointset.points, weights=w)
    d_p = disc_constants(system, domain, wpts, p, p, restarts=restarts, seed=seed).d_right
    m_nik = nikolskii_constant(system, domain, 2, p, restarts=restarts, seed=seed).value
    bound = wrdi_transfer(d_p, m_nik, p, r)
    measured = disc_constants(system, domain, wpts, r, r, restarts=restarts, seed=seed).d_right
    slack = bound - measured
    ok = bool(slack >= -rel_tol * max(bound, 1e-300))
    return WrdiTransferReport(d_p=d_p, nikolskii=m_nik, transferred=bound,
                              measured_r=measured, slack=float(slack), ok=ok)
