"""Recovery algorithms from samples and their Lebesgue-type audits.

The fitting operator projects a function onto a span by minimizing the
(weighted) discrete p-seminorm of the sample residual.  Sparse variants
enumerate every v-element span of a dictionary and select the best fit
under one of three selection rules; the audits then verify, with measured
hypothesis constants, that each algorithm's error is controlled by the
best-approximation error times the proven factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from itertools import combinations

import numpy as np

from . import _fitcore
from .errors import InvalidParameterError, PremiseError, SizeGuardError
from .design import CollectionSpec, universal_ldi_constant
from .discretize import PointSet, disc_constants, disc_norm, sample_vector
from .fnspace import (
    BestApprox,
    DomainSpec,
    FunctionSystem,
    as_function,
    best_approx,
    eval_system,
    function_lp_norm,
    nikolskii_constant,
)

SUPPORT_GUARD = 10**6


# ---------------------------------------------------------------------------
# Sample-based fitting


@dataclass
class FitResult:
    coeffs: np.ndarray
    discrete_error: float


def ell_fit(
    f,
    system: FunctionSystem,
    domain: DomainSpec,
    pointset: PointSet,
    p,
    weights=None,
) -> FitResult:
    """Minimizer over the span of the discrete p-seminorm of the residual.

    Unweighted fits use the 1/m-normalized discrete norm for finite p and
    the plain maximum for p = inf.  Ties are resolved by the minimum-norm
    coefficient solution.
    """
    if pointset.m < 1:
        raise InvalidParameterError("the point set is empty")
    design = eval_system(system, pointset.points, domain).T
    y = sample_vector(f, pointset)
    w = weights
    if w is None and not math.isinf(p):
        w = np.full(pointset.m, 1.0 / pointset.m)
    c = _fitcore.pfit(design, y, p, w)
    resid = y - design @ c
    err = disc_norm(resid, p, weights)
    return FitResult(coeffs=c, discrete_error=float(err))


# ---------------------------------------------------------------------------
# Best sparse approximation


@dataclass
class SigmaResult:
    value: float
    support: tuple
    coeffs: np.ndarray | None


def sigma_v(
    f,
    dictionary: FunctionSystem,
    domain: DomainSpec,
    v: int,
    p,
    at_points: PointSet | None = None,
    guard: int = SUPPORT_GUARD,
) -> SigmaResult:
    """Best v-term approximation error over all supports of the dictionary.

    With ``at_points`` the error is the discrete p-norm at those points
    (fitting by ``ell_fit``); otherwise it is the integral norm (fitting by
    ``best_approx``).  Ties go to the lexicographically smallest support.
    v = 0 returns the norm of f itself.
    """
    n = dictionary.n
    if v < 0 or v > n:
        raise InvalidParameterError("sparsity must satisfy 0 <= v <= N")
    if v == 0:
        if at_points is None:
            return SigmaResult(value=function_lp_norm(f, domain, p), support=(), coeffs=None)
        return SigmaResult(value=disc_norm(sample_vector(f, at_points), p),
                           support=(), coeffs=None)
    if math.comb(n, v) > guard:
        raise SizeGuardError(f"{math.comb(n, v)} supports exceed the guard {guard}")
    best_val, best_support, best_coeffs = np.inf, None, None
    for support in combinations(range(n), v):
        sub = dictionary.subsystem(support)
        if at_points is None:
            res = best_approx(f, sub, domain, p)
            val, coeffs = res.distance, res.coeffs
        else:
            res = ell_fit(f, sub, domain, at_points, p)
            val, coeffs = res.discrete_error, res.coeffs
        if best_support is None or val < best_val - 1e-15 * max(1.0, abs(best_val)):
            best_val, best_support, best_coeffs = val, support, coeffs
    return SigmaResult(value=float(best_val), support=best_support, coeffs=best_coeffs)


# ---------------------------------------------------------------------------
# Universal sparse recovery


@dataclass
class AuditRecord:
    name: str
    left: float
    right: float
    slack: float
    status: str
    hypotheses: dict = dc_field(default_factory=dict)

    def to_json(self) -> dict:
        def num(x):
            return "inf" if isinstance(x, float) and math.isinf(x) else x

        return {
            "name": self.name,
            "left": num(self.left),
            "right": num(self.right),
            "slack": num(self.slack),
            "status": self.status,
            "hypotheses": {k: num(v) for k, v in self.hypotheses.items()},
        }


@dataclass
class RecoveryReport:
    algorithm: str
    input_tag: str
    support: tuple | None
    coefficients: np.ndarray | None
    errors: dict
    audits: list

    def to_json(self) -> dict:
        coeffs = None
        if self.coefficients is not None:
            c = np.asarray(self.coefficients)
            coeffs = {"re": c.real.tolist(), "im": c.imag.tolist()} if np.iscomplexobj(c) else c.tolist()
        return {
            "algorithm": self.algorithm,
            "input": self.input_tag,
            "support": None if self.support is None else list(self.support),
            "coefficients": coeffs,
            "errors": {k: ("inf" if math.isinf(v) else v) for k, v in self.errors.items()},
            "audits": [a.to_json() for a in self.audits],
        }


VARIANTS = ("lp", "lp_s", "lp_inf")


def recover_universal(
    f,
    dictionary: FunctionSystem,
    domain: DomainSpec,
    v: int,
    pointset: PointSet,
    p,
    variant: str = "lp_s",
    guard: int = SUPPORT_GUARD,
    f_tag: str = "",
) -> RecoveryReport:
    """Sparse recovery by exhaustive support selection.

    Per variant, each candidate support is fitted from samples and scored:

    * ``lp``: discrete p-fit, scored by the integral p-norm of the residual;
    * ``lp_s``: discrete p-fit, scored by the discrete p-norm at the samples
      (uses nothing but the sample vector);
    * ``lp_inf``: discrete minimax fit, scored by the integral p-norm.

    Ties go to the lexicographically smallest support.
    """
    if variant not in VARIANTS:
        raise InvalidParameterError(f"variant must be one of {VARIANTS}")
    if math.isinf(p):
        raise InvalidParameterError("selection scores need p < inf")
    n = dictionary.n
    if not (0 < v <= n):
        raise InvalidParameterError("sparsity must satisfy 1 <= v <= N")
    if math.comb(n, v) > guard:
        raise SizeGuardError(f"{math.comb(n, v)} supports exceed the guard {guard}")
    best_score, best = np.inf, None
    for support in combinations(range(n), v):
        sub = dictionary.subsystem(support)
        fit = ell_fit(f, sub, domain, pointset, np.inf if variant == "lp_inf" else p)
        u = as_function(fit.coeffs, sub, domain)
        if variant == "lp_s":
            score = disc_norm(sample_vector(f, pointset) - sample_vector(u, pointset), p)
        else:
            score = function_lp_norm(lambda x: np.asarray(f(x)) - u(x), domain, p)
        if best is None or score < best_score - 1e-15 * max(1.0, abs(best_score)):
            best_score, best = score, (support, fit)
    support, fit = best
    sub = dictionary.subsystem(support)
    u = as_function(fit.coeffs, sub, domain)
    resid = lambda x: np.asarray(f(x)) - u(x)
    errors = {
        "score": float(best_score),
        "integral_p": function_lp_norm(resid, domain, p),
        "discrete_p": disc_norm(sample_vector(resid, pointset), p),
        "sup": function_lp_norm(resid, domain, np.inf),
    }
    return RecoveryReport(algorithm=variant, input_tag=f_tag, support=support,
                          coefficients=fit.coeffs, errors=errors, audits=[])


# ---------------------------------------------------------------------------
# Lebesgue-type audits


@dataclass
class AuditInstance:
    """Everything a theorem audit needs; unused fields may stay None."""

    system: FunctionSystem
    domain: DomainSpec
    pointset: PointSet
    f: object = None
    p: float = 2.0
    weights: np.ndarray | None = None
    v: int | None = None
    battery: list | None = None
    restarts: int = 16
    seed: int = 0
    f_tag: str = ""
    rel_tol: float = 1e-8


THEOREM_AUDITS = ("BT1", "BT1a", "BT2", "BT3", "BT4",
                  "ubT3", "ubT3a", "ubT5", "ubT5a", "ubT6")


def _weighted_pointset(inst: AuditInstance) -> PointSet:
    if inst.weights is None:
        return PointSet(points=inst.pointset.points,
                        weights=np.full(inst.pointset.m, 1.0 / inst.pointset.m))
    return PointSet(points=inst.pointset.points, weights=np.asarray(inst.weights, float))


def _measured_ldi(inst: AuditInstance, q, weighted: bool) -> float:
    ps = _weighted_pointset(inst) if weighted else inst.pointset
    rep = disc_constants(inst.system, inst.domain, ps, inst.p, q,
                         restarts=inst.restarts, seed=inst.seed)
    return rep.d_left


def _slack_record(name, left, right, hypotheses, rel_tol) -> AuditRecord:
    slack = right - left
    status = "ok" if slack >= -rel_tol * max(abs(right), 1.0) else "violation"
    return AuditRecord(name=name, left=float(left), right=float(right),
                       slack=float(slack), status=status, hypotheses=hypotheses)


def lebesgue_audit(theorem: str, inst: AuditInstance) -> RecoveryReport:
    """Run one theorem audit with measured hypothesis constants.

    Computes both sides of the theorem's error bound and records the slack;
    a hypothesis that fails to hold raises PremiseError (audit not
    applicable, as opposed to a violation).
    """
    if theorem not in THEOREM_AUDITS:
        raise InvalidParameterError(f"unknown theorem audit {theorem!r}")
    if theorem.startswith("ub"):
        return _audit_universal(theorem, inst)
    return _audit_fixed_span(theorem, inst)


def _audit_fixed_span(theorem: str, inst: AuditInstance) -> RecoveryReport:
    f = inst.f
    p = 2.0 if theorem in ("BT3", "BT4") else inst.p
    weights = None if theorem == "BT4" else inst.weights
    sysN, dom, ps = inst.system, inst.domain, inst.pointset
    dinf = best_approx(f, sysN, dom, np.inf).distance
    hyp: dict = {"m": ps.m, "N": sysN.n}

    if theorem == "BT1" and math.isinf(p):
        d = _measured_ldi(inst, np.inf, weighted=False)
        if math.isinf(d):
            raise PremiseError("uniform left inequality fails: sampling kernel")
        fit = ell_fit(f, sysN, dom, ps, np.inf)
        u = as_function(fit.coeffs, sysN, dom)
        left = function_lp_norm(lambda x: np.asarray(f(x)) - u(x), dom, np.inf)
        right = (2 * d + 1) * dinf
        hyp.update({"D": d, "d_inf": dinf})
        rec = _slack_record("uniform-fit-vs-best", left, right, hyp, inst.rel_tol)
        algorithm = "minimax-fit"
    elif theorem in ("BT1", "BT4"):
        if weights is None:
            w = np.full(ps.m, 1.0 / ps.m)
        else:
            w = np.asarray(weights, dtype=float)
        budget = float(w.sum())
        wps = PointSet(points=ps.points, weights=w)
        d = disc_constants(sysN, dom, wps, p, p,
                           restarts=inst.restarts, seed=inst.seed).d_left
        if math.isinf(d):
            raise PremiseError("weighted left inequality fails: sampling kernel")
        fit = ell_fit(f, sysN, dom, ps, p, weights=w)
        u = as_function(fit.coeffs, sysN, dom)
        left = function_lp_norm(lambda x: np.asarray(f(x)) - u(x), dom, p)
        right = (2 * d * budget ** (1.0 / p) + 1) * dinf
        hyp.update({"D": d, "W": budget, "d_inf": dinf})
        rec = _slack_record("weighted-fit-vs-best", left, right, hyp, inst.rel_tol)
        algorithm = "weighted-p-fit"
    elif theorem == "BT1a":
        if math.isinf(p):
            raise InvalidParameterError("this audit needs p < inf")
        if weights is None:
            w = np.full(ps.m, 1.0 / ps.m)
        else:
            w = np.asarray(weights, dtype=float)
        budget = float(w.sum())
        wps = PointSet(points=ps.points, weights=w)
        d = disc_constants(sysN, dom, wps, p, p,
                           restarts=inst.restarts, seed=inst.seed).d_left
        if math.isinf(d):
            raise PremiseError("weighted left inequality fails: sampling kernel")
        m_nik = nikolskii_constant(sysN, dom, p, np.inf,
                                   restarts=inst.restarts, seed=inst.seed).value
        fit = ell_fit(f, sysN, dom, ps, p, weights=w)
        u = as_function(fit.coeffs, sysN, dom)
        left = function_lp_norm(lambda x: np.asarray(f(x)) - u(x), dom, np.inf)
        right = (2 * m_nik * d * budget ** (1.0 / p) + 1) * dinf
        hyp.update({"D": d, "W": budget, "M": m_nik, "d_inf": dinf})
        rec = _slack_record("weighted-fit-uniform-error", left, right, hyp, inst.rel_tol)
        algorithm = "weighted-p-fit"
    elif theorem in ("BT2", "BT3"):
        if math.isinf(p):
            raise InvalidParameterError("this audit needs p < inf")
        d = disc_constants(sysN, dom, ps, p, np.inf,
                           restarts=inst.restarts, seed=inst.seed).d_left
        if math.isinf(d):
            raise PremiseError("max-sample left inequality fails: sampling kernel")
        fit = ell_fit(f, sysN, dom, ps, np.inf)
        u = as_function(fit.coeffs, sysN, dom)
        left = function_lp_norm(lambda x: np.asarray(f(x)) - u(x), dom, p)
        right = (2 * d + 1) * dinf
        hyp.update({"D": d, "d_inf": dinf})
        rec = _slack_record("minimax-fit-vs-best", left, right, hyp, inst.rel_tol)
        algorithm = "minimax-fit"
    else:
        raise InvalidParameterError(f"unknown theorem audit {theorem!r}")
    errors = {"left": rec.left}
    return RecoveryReport(algorithm=algorithm, input_tag=inst.f_tag, support=None,
                          coefficients=fit.coeffs, errors=errors, audits=[rec])


def _audit_universal(theorem: str, inst: AuditInstance) -> RecoveryReport:
    if inst.v is None:
        raise InvalidParameterError("universal audits need the sparsity v")
    p, v = inst.p, inst.v
    if math.isinf(p):
        raise InvalidParameterError("universal audits need p < inf")
    dictionary, dom, ps = inst.system, inst.domain, inst.pointset
    width = v if theorem in ("ubT3", "ubT3a") else 2 * v
    if width > dictionary.n:
        raise InvalidParameterError("the collection width exceeds the dictionary size")
    q = p if theorem in ("ubT3a", "ubT5a") else np.inf
    coll = CollectionSpec(system=dictionary, domain=dom, v=width)
    uni = universal_ldi_constant(coll, ps, p, q, restarts=inst.restarts, seed=inst.seed)
    if math.isinf(uni.value):
        raise PremiseError(
            f"universal left inequality fails on support {uni.worst_support}"
        )
    d = uni.value
    variant = "lp_inf" if theorem == "ubT3" else "lp"
    hyp = {"D_universal": d, "collection_width": width, "v": v, "m": ps.m,
           "N": dictionary.n}

    def one(f, tag):
        rep = recover_universal(f, dictionary, dom, v, ps, p,
                                variant=("lp_s" if theorem in ("ubT5", "ubT5a", "ubT6")
                                         else variant), f_tag=tag)
        sig = sigma_v(f, dictionary, dom, v, np.inf)
        left = rep.errors["integral_p"]
        right = (2 * d + 1) * sig.value
        return rep, sig, left, right

    if theorem == "ubT6":
        if not inst.battery:
            raise InvalidParameterError("the optimal-recovery audit needs a battery of functions")
        worst_left, worst_right, reps = 0.0, 0.0, []
        for i, fb in enumerate(inst.battery):
            rep, sig, left, right = one(fb, f"{inst.f_tag}[{i}]")
            worst_left = max(worst_left, left)
            worst_right = max(worst_right, right)
            reps.append(rep)
        rec = _slack_record("sample-only-recovery-class-bound", worst_left,
                            worst_right, hyp, inst.rel_tol)
        report = RecoveryReport(algorithm="lp_s", input_tag=inst.f_tag,
                                support=None, coefficients=None,
                                errors={"class_left": worst_left}, audits=[rec])
        return report
    rep, sig, left, right = one(inst.f, inst.f_tag)
    hyp["sigma_v_inf"] = sig.value
    name = {
        "ubT3": "universal-minimax-recovery",
        "ubT3a": "universal-p-recovery",
        "ubT5": "sample-only-recovery",
        "ubT5a": "sample-only-recovery-pnorm",
    }[theorem]
    rec = _slack_record(name, left, right, hyp, inst.rel_tol)
    rep.audits.append(rec)
    return rep


# ---------------------------------------------------------------------------
# Uniform-norm discretization chains


@dataclass
class ChainReport:
    nikolskii: float
    d_left: float
    combined: float
    min_slacks: dict
    draws: int
    ok: bool


def uniform_norm_chain_audit(
    system: FunctionSystem,
    domain: DomainSpec,
    pointset: PointSet,
    draws: int = 50,
    seed: int = 0,
    restarts: int = 16,
    rel_tol: float = 1e-9,
) -> ChainReport:
    """Audit the chain sup-norm <= M * L2 <= M D_L * disc-2 <= M D_L * disc-inf.

    M is the measured (2, inf) Nikol'skii constant, D_L the measured left
    constant at p = q = 2.  Each link is checked on random span elements;
    the chain realizes a uniform-norm left inequality with constant M * D_L.
    """
    m_nik = nikolskii_constant(system, domain, 2, np.inf,
                               restarts=restarts, seed=seed).value
    rep = disc_constants(system, domain, pointset, 2, 2, restarts=restarts, seed=seed)
    if math.isinf(rep.d_left):
        raise PremiseError("the two-norm left inequality fails: sampling kernel")
    d2 = rep.d_left
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    slacks = {"nikolskii": np.inf, "left2": np.inf, "monotone": np.inf, "combined": np.inf}
    from .fnspace import lp_norm as _lp

    for _ in range(draws):
        c = rng.normal(size=system.n)
        if system.field == "complex":
            c = c + 1j * rng.normal(size=system.n)
        sup = _lp(c, system, domain, np.inf)
        l2 = _lp(c, system, domain, 2)
        vals = sample_vector(as_function(c, system, domain), pointset)
        d2n = disc_norm(vals, 2)
        dinfn = disc_norm(vals, np.inf)
        slacks["nikolskii"] = min(slacks["nikolskii"], m_nik * l2 - sup)
        slacks["left2"] = min(slacks["left2"], d2 * d2n - l2)
        slacks["monotone"] = min(slacks["monotone"], dinfn - d2n)
        slacks["combined"] = min(slacks["combined"], m_nik * d2 * dinfn - sup)
    scale = max(m_nik * d2, 1.0)
    ok = all(v >= -rel_tol * scale for v in slacks.values())
    return ChainReport(nikolskii=m_nik, d_left=d2, combined=m_nik * d2,
                       min_slacks={k: float(v) for k, v in slacks.items()},
                       draws=draws, ok=ok)
