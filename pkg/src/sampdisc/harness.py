"""Experiment registry, seeded reproducibility, and report emission.

Each registered experiment runs a family of audits end to end and returns
a report dict that serializes to bit-identical JSON for a fixed config and
seed.  Wall-clock time is printed but kept out of the serialized report so
reruns stay byte-identical.  Every experiment declares which audited
claims it covers; ``REQUIRED_CLAIMS`` is the coverage contract checked by
the meta-test.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, PremiseError
from . import fnspace
from .fnspace import DomainSpec, FunctionSystem, as_function, make_fa, nikolskii_constant
from .discretize import (
    PointSet,
    disc_constants,
    is_injective,
    khinchin_audit,
    khinchin_constant,
    rademacher_pth_moment,
    ril1_audit,
    rip3_bound,
    wrdi_transfer_audit,
)
from .design import (
    equalize_weights,
    iid_points_verified,
    kw_design,
    search_ldi_points,
    weight_budget_trick,
)
from .matrixtools import build_design, opnorm_rp, pointwise_check, select_rdi_rows
from .recovery import (
    AuditInstance,
    lebesgue_audit,
    uniform_norm_chain_audit,
)

SCHEMA_VERSION = 1

SEED_SCHEME = "numpy-seedsequence-spawn-key"


def rng_for(master: int, task: int) -> np.random.Generator:
    """Deterministic per-task generator derived from the master seed."""
    return np.random.default_rng(np.random.SeedSequence(master, spawn_key=(task,)))


# ---------------------------------------------------------------------------
# Report plumbing


def _pyify(obj):
    if isinstance(obj, dict):
        return {str(k): _pyify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pyify(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        if math.isnan(f):
            return "nan"
        return f
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _pyify(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def report_json_bytes(report: dict) -> bytes:
    return json.dumps(_pyify(report), sort_keys=True, indent=2).encode() + b"\n"


@dataclass
class ExperimentReport:
    name: str
    report: dict
    elapsed: float

    @property
    def passed(self) -> bool:
        return bool(self.report.get("pass", False))

    def json_bytes(self) -> bytes:
        return report_json_bytes(self.report)

    def write(self, out_dir) -> list:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        jpath = out / f"{self.name}.json"
        jpath.write_bytes(self.json_bytes())
        paths.append(jpath)
        for tname, table in self.report.get("tables", {}).items():
            cpath = out / f"{self.name}_{tname}.csv"
            with open(cpath, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(table["columns"])
                for row in table["rows"]:
                    writer.writerow([_csv_cell(v) for v in row])
            paths.append(cpath)
        return paths


def _csv_cell(v):
    v = _pyify(v)
    if isinstance(v, float):
        return repr(v)
    return v


def _table(columns, rows):
    return {"columns": list(columns), "rows": [list(r) for r in rows]}


def _merge_config(defaults: dict, overrides: dict | None) -> dict:
    cfg = dict(defaults)
    for k, v in (overrides or {}).items():
        if k not in defaults:
            raise ConfigError(f"unknown config key {k!r}")
        cfg[k] = v
    return cfg


# ---------------------------------------------------------------------------
# Shared instance builders


def _random_atomic_system(rng, n, k, complex_field=False, uniform_masses=True):
    atoms = np.arange(k, dtype=float)
    masses = None
    if not uniform_masses:
        masses = rng.uniform(0.5, 1.5, size=k)
        masses /= masses.sum()
    dom = DomainSpec.finite_set(atoms, masses)
    vals = rng.normal(size=(n, k))
    if complex_field:
        vals = vals + 1j * rng.normal(size=(n, k))
    return FunctionSystem.value_table(vals, atoms=atoms), dom


def _random_atom_points(rng, dom, m, need_injective_for=None, max_tries=64):
    for _ in range(max_tries):
        idx = rng.choice(dom.n_atoms, size=m, replace=False)
        ps = PointSet(points=dom.atoms[np.sort(idx)])
        if need_injective_for is None or is_injective(need_injective_for, dom, ps):
            return ps
    raise ConfigError("could not draw an injective point set")


# ---------------------------------------------------------------------------
# Experiments


def _exp_ric1_scaling(cfg: dict, master: int) -> dict:
    """Lacunary spans: every point set obeys N^(q/2) <= m (D_R M)^q."""
    p, q, base = cfg["p"], cfg["q"], cfg["base"]
    rows = []
    min_rel_slack = np.inf
    for i, n in enumerate(cfg["n_list"]):
        freqs = [base**j for j in range(1, n + 1)]
        system = FunctionSystem.lacunary(freqs)
        dom = DomainSpec.torus(grid_size=cfg["grid_size"])
        m_nik = nikolskii_constant(system, dom, 2, p, restarts=cfg["restarts"],
                                   seed=master + i).value
        pointsets = []
        for fac in cfg["size_factors"]:
            m = max(1, int(round(fac * n)))
            pointsets.append(("equispaced", PointSet.equispaced(dom, m)))
            rng = rng_for(master, 100 * i + m)
            pointsets.append(("random", PointSet.random(dom, m, rng)))
        for kind, ps in pointsets:
            rep = disc_constants(system, dom, ps, p, q,
                                 restarts=cfg["restarts"], seed=master)
            lhs = n ** (q / 2.0)
            rhs = ps.m * (rep.d_right * m_nik) ** q
            rel = (rhs - lhs) / rhs
            min_rel_slack = min(min_rel_slack, rel)
            rows.append([n, ps.m, kind, rep.d_right, m_nik, lhs, rhs, rel])
    ok = min_rel_slack >= -1e-9
    return {
        "cases": [
            {"N": r[0], "m": r[1], "kind": r[2], "D_R": r[3], "M": r[4],
             "lhs": r[5], "rhs": r[6], "rel_slack": r[7]} for r in rows
        ],
        "tables": {"scaling": _table(
            ["N", "m", "kind", "D_R", "M", "lhs", "rhs", "rel_slack"], rows)},
        "verdicts": {"zero_violations": ok},
        "min_slack": float(min_rel_slack),
        "pass": ok,
    }


def _exp_remlosi(cfg: dict, master: int) -> dict:
    """Lacunary spans admit the left inequality with linearly many points."""
    n, p, q, base = cfg["n"], cfg["p"], cfg["q"], cfg["base"]
    system = FunctionSystem.lacunary([base**j for j in range(1, n + 1)])
    dom = DomainSpec.torus(grid_size=cfg["grid_size"])
    m = cfg["m_factor"] * n
    found = search_ldi_points(system, dom, m, 2, 2, restarts=cfg["restarts"], seed=master)
    d2 = found.d_left
    m_nik = nikolskii_constant(system, dom, 2, p, restarts=cfg["restarts"], seed=master).value
    rep = disc_constants(system, dom, found.pointset, p, q,
                         restarts=cfg["restarts"], seed=master)
    bound = m_nik * d2
    ok = (not math.isinf(rep.d_left)) and rep.d_left <= bound * (1 + 1e-9)
    rows = [[n, m, d2, m_nik, rep.d_left, bound, bound - rep.d_left]]
    return {
        "cases": [{"N": n, "m": m, "D2": d2, "M": m_nik,
                   "D_L_pq": rep.d_left, "chain_bound": bound}],
        "tables": {"chain": _table(
            ["N", "m", "D2", "M", "D_L_pq", "chain_bound", "slack"], rows)},
        "verdicts": {"finite_left_constant": not math.isinf(rep.d_left),
                     "chain_bound_holds": ok},
        "min_slack": float(bound - rep.d_left),
        "pass": ok,
    }


def _exp_rip3_fa(cfg: dict, master: int) -> dict:
    """Injective right discretization of plateau pairs needs many points."""
    p, q = cfg["p"], cfg["q"]
    dom = DomainSpec.unit_interval(grid_size=cfg["grid_size"])
    rows = []
    min_rel = np.inf
    for i, k in enumerate(cfg["k_list"]):
        a = 2.0 ** (-k)
        system = FunctionSystem.hat_family([a, a / 2.0])
        for j, m in enumerate(cfg["sizes"]):
            rng = rng_for(master, 1000 * i + j)
            # injectivity needs a point where the narrower plateau is active
            pts = np.concatenate([
                rng.uniform(0.0, a / 2.0, size=1),
                rng.uniform(0.0, 1.0, size=m - 1),
            ])
            ps = PointSet(points=np.sort(pts))
            if not is_injective(system, dom, ps):
                continue
            rep = disc_constants(system, dom, ps, p, q, seed=master)
            bound = rip3_bound(a, p, q, rep.d_right)
            rel = (m - bound) / max(m, 1.0)
            min_rel = min(min_rel, rel)
            rows.append([k, a, m, rep.d_right, bound, rel])
    ok = min_rel >= -1e-9
    return {
        "cases": [{"k": r[0], "a": r[1], "m": r[2], "D_R": r[3],
                   "bound": r[4], "rel_slack": r[5]} for r in rows],
        "tables": {"size_bound": _table(
            ["k", "a", "m", "D_R", "size_bound", "rel_slack"], rows)},
        "verdicts": {"zero_violations": ok},
        "min_slack": float(min_rel),
        "pass": ok,
    }


def _exp_trd_chain(cfg: dict, master: int) -> dict:
    """Uniform-norm discretization chain for trigonometric spans."""
    n = cfg["n"]
    freqs = [[k] for k in range(-n, n + 1)]
    system = FunctionSystem.trig(freqs)
    dom = DomainSpec.torus(grid_size=cfg["grid_size"])
    found = search_ldi_points(system, dom, cfg["m"], 2, 2,
                              restarts=cfg["restarts"], seed=master)
    chain = uniform_norm_chain_audit(system, dom, found.pointset,
                                     draws=cfg["draws"], seed=master,
                                     restarts=cfg["restarts"])
    nn = system.n
    nik_exact = abs(chain.nikolskii - math.sqrt(nn)) <= 1e-6 * math.sqrt(nn)
    rows = [[nn, cfg["m"], chain.nikolskii, chain.d_left, chain.combined,
             chain.min_slacks["combined"]]]
    ok = chain.ok and nik_exact
    return {
        "cases": [{"N": nn, "m": cfg["m"], "M": chain.nikolskii,
                   "D_L2": chain.d_left, "uniform_constant": chain.combined,
                   "min_slacks": chain.min_slacks}],
        "tables": {"chain": _table(
            ["N", "m", "M", "D_L2", "uniform_constant", "min_combined_slack"], rows)},
        "verdicts": {"chain_holds": chain.ok, "nikolskii_sqrtN": nik_exact},
        "min_slack": float(min(chain.min_slacks.values())),
        "pass": ok,
    }


def _exp_kw_chain(cfg: dict, master: int) -> dict:
    """Optimal-design measure, its (2, inf) certificate, and the chain on it."""
    rng = rng_for(master, 0)
    n, k = cfg["n"], cfg["k"]
    atoms = np.linspace(0.0, 1.0, k)
    vals = rng.normal(size=(n, k))
    system = FunctionSystem.value_table(vals, atoms=atoms)
    candidates = DomainSpec.finite_set(atoms)
    measure = kw_design(system, candidates, eps=cfg["eps"], max_iters=cfg["max_iters"])
    dom_star = measure.as_domain()
    cert = measure.nikolskii_bound
    m_meas = nikolskii_constant(system, dom_star, 2, np.inf, seed=master).value
    m = cfg["m_factor"] * n
    found = search_ldi_points(system, dom_star, m, 2, 2,
                              restarts=cfg["restarts"], seed=master)
    chain = uniform_norm_chain_audit(system, dom_star, found.pointset,
                                     draws=cfg["draws"], seed=master,
                                     restarts=cfg["restarts"])
    ok = (
        measure.max_christoffel <= n * (1 + cfg["eps"]) + 1e-12
        and m_meas <= cert * (1 + 1e-9)
        and chain.ok
        and m <= 2 * n
    )
    rows = [[n, k, measure.iterations, measure.max_christoffel, cert, m_meas,
             m, chain.d_left, chain.combined]]
    return {
        "cases": [{"N": n, "grid": k, "iterations": measure.iterations,
                   "max_christoffel": measure.max_christoffel,
                   "ni_certificate": cert, "ni_measured": m_meas,
                   "m": m, "D_L2": chain.d_left,
                   "uniform_constant": chain.combined,
                   "min_slacks": chain.min_slacks}],
        "tables": {"design": _table(
            ["N", "grid", "iterations", "max_christoffel", "ni_certificate",
             "ni_measured", "m", "D_L2", "uniform_constant"], rows)},
        "verdicts": {"design_reached_target": measure.max_christoffel <= n * (1 + cfg["eps"]) + 1e-12,
                     "certificate_holds": m_meas <= cert * (1 + 1e-9),
                     "chain_holds": chain.ok,
                     "two_n_points": m <= 2 * n},
        "min_slack": float(min(chain.min_slacks.values())),
        "pass": ok,
    }


def _make_bt_instance(theorem: str, rng, p, seed):
    """Random small real instance on a uniform atomic domain."""
    k = 48
    system, dom = _random_atomic_system(rng, n=3, k=k)
    ps = _random_atom_points(rng, dom, m=8, need_injective_for=system)
    weights = rng.uniform(0.2, 1.0, size=ps.m)
    weights *= rng.uniform(0.5, 2.0) / weights.sum()
    c0 = rng.normal(size=3)
    base = as_function(c0, system, dom)
    bump = rng.normal(size=k)
    bump = bump / np.max(np.abs(bump)) * rng.uniform(0.0, 1.0)
    dom_atoms = dom.atoms

    def f(points):
        idx = dom.atom_indices(points)
        return base(points) + bump[idx]

    return AuditInstance(system=system, domain=dom, pointset=ps, f=f, p=p,
                         weights=weights if theorem in ("BT1", "BT1a") else None,
                         seed=seed, f_tag=f"{theorem}-instance")


def _make_universal_instance(theorem: str, rng, p, v, seed):
    k = 48
    dictionary, dom = _random_atomic_system(rng, n=6, k=k)
    ps = _random_atom_points(rng, dom, m=10)
    support = tuple(sorted(rng.choice(6, size=v, replace=False)))
    c = rng.normal(size=v)
    sparse = as_function(c, dictionary.subsystem(support), dom)
    bump = rng.normal(size=k)
    bump = bump / np.max(np.abs(bump)) * rng.uniform(0.0, 0.5)

    def f(points):
        idx = dom.atom_indices(points)
        return sparse(points) + bump[idx]

    battery = None
    if theorem == "ubT6":
        battery = []
        for _ in range(3):
            cb = rng.normal(size=v)
            sb = tuple(sorted(rng.choice(6, size=v, replace=False)))
            sf = as_function(cb, dictionary.subsystem(sb), dom)
            bb = rng.normal(size=k)
            bb = bb / np.max(np.abs(bb)) * rng.uniform(0.0, 0.5)
            battery.append(_battery_fn(sf, bb, dom))
    return AuditInstance(system=dictionary, domain=dom, pointset=ps, f=f, p=p,
                         v=v, battery=battery, seed=seed,
                         f_tag=f"{theorem}-instance")


def _battery_fn(sf, bb, dom):
    def fb(points):
        idx = dom.atom_indices(points)
        return sf(points) + bb[idx]

    return fb


def _exp_recovery_suite(cfg: dict, master: int) -> dict:
    """Randomized audits of every recovery error bound."""
    counts = cfg["counts"]
    p_choices = {"BT1": (2, 4, np.inf), "BT1a": (2, 4), "BT2": (2, 3),
                 "BT3": (2,), "BT4": (2,), "ubT3": (2, 3), "ubT3a": (2,),
                 "ubT5": (2, 3), "ubT5a": (2,), "ubT6": (2,)}
    summary_rows = []
    all_ok = True
    overall_min = np.inf
    cases = []
    task = 0
    for theorem, count in counts.items():
        worst = np.inf
        violations = 0
        applicable = 0
        for i in range(count):
            rng = rng_for(master, task)
            task += 1
            p = p_choices[theorem][i % len(p_choices[theorem])]
            try:
                if theorem.startswith("ub"):
                    inst = _make_universal_instance(theorem, rng, p, cfg["v"], master)
                else:
                    inst = _make_bt_instance(theorem, rng, p, master)
                report = lebesgue_audit(theorem, inst)
            except PremiseError:
                continue
            applicable += 1
            for rec in report.audits:
                worst = min(worst, rec.slack)
                if rec.status == "violation":
                    violations += 1
                cases.append({"theorem": theorem, "case": i, "name": rec.name,
                              "p": p, "left": rec.left, "right": rec.right,
                              "slack": rec.slack, "status": rec.status})
        ok = violations == 0 and applicable > 0
        all_ok = all_ok and ok
        overall_min = min(overall_min, worst)
        summary_rows.append([theorem, applicable, worst, violations])
    return {
        "cases": cases,
        "tables": {"summary": _table(
            ["theorem", "instances", "min_slack", "violations"], summary_rows)},
        "verdicts": {"zero_violations": all_ok},
        "min_slack": float(overall_min),
        "pass": all_ok,
    }


def _exp_lunin_bench(cfg: dict, master: int) -> dict:
    """Greedy vs exhaustive row selection, plus the even-exponent corollary."""
    rows = []
    factors = []
    for i in range(cfg["instances"]):
        rng = rng_for(master, i)
        m0 = int(rng.integers(cfg["m0_min"], cfg["m0_max"] + 1))
        n = int(rng.integers(cfg["n_min"], cfg["n_max"] + 1))
        raw = rng.normal(size=(m0, n))
        qmat, _ = np.linalg.qr(raw)
        A = qmat * math.sqrt(m0)
        greedy = select_rdi_rows(A, m=n, exhaustive=False)
        exact = select_rdi_rows(A, m=n, exhaustive=True)
        factor = greedy.achieved_norm / max(exact.achieved_norm, 1e-300)
        factors.append(factor)
        rows.append([i, m0, n, exact.achieved_norm, greedy.achieved_norm, factor])
    factors = np.asarray(factors)
    frac_within_2 = float(np.mean(factors <= 2.0))
    dist = {
        "min": float(factors.min()), "median": float(np.median(factors)),
        "max": float(factors.max()), "frac_within_2": frac_within_2,
    }
    # even exponent: squaring transfers a (2, 2) selection to p = 4
    rng = rng_for(master, 10_000)
    even_rows = []
    even_ok = True
    for j in range(cfg["even_instances"]):
        k = 32
        system, dom = _random_atomic_system(rng, n=2, k=k)
        u = fnspace.orthonormalize(system, dom)
        base = u.eval(dom.atoms)
        prods = []
        for a in range(2):
            for b in range(a, 2):
                prods.append(base[a] * base[b])
        prod_sys = FunctionSystem.value_table(np.asarray(prods), atoms=dom.atoms)
        a_mat = fnspace.eval_system(prod_sys, dom.atoms, dom).T
        sel = select_rdi_rows(a_mat, m=len(prods), exhaustive=False)
        ps = PointSet(points=dom.atoms[list(sel.indices)])
        rep4 = disc_constants(system, dom, ps, 4, 4, restarts=16, seed=master + j)
        bound = math.sqrt(sel.ratio)
        ok = rep4.d_right <= bound * (1 + 1e-9)
        even_ok = even_ok and ok
        even_rows.append([j, sel.ratio, rep4.d_right, bound, ok])
    passed = frac_within_2 >= cfg["required_fraction"] and even_ok
    return {
        "cases": [{"instance": r[0], "m0": r[1], "N": r[2], "exhaustive": r[3],
                   "greedy": r[4], "factor": r[5]} for r in rows],
        "tables": {
            "selection": _table(
                ["instance", "m0", "N", "exhaustive", "greedy", "factor"], rows),
            "even_exponent": _table(
                ["instance", "selection_ratio", "D_R4", "bound", "ok"], even_rows),
        },
        "verdicts": {"distribution": dist, "even_exponent_holds": even_ok,
                     "fraction_within_2": frac_within_2},
        "min_slack": float(2.0 - factors.max()),
        "pass": passed,
    }


def _exp_ril1_suite(cfg: dict, master: int) -> dict:
    """Pointwise weighted-right audits and the Hoelder transfer."""
    rows = []
    min_rel = np.inf
    for i in range(cfg["instances"]):
        rng = rng_for(master, i)
        n = int(rng.integers(1, 4))
        k = int(rng.integers(12, 25))
        system, dom = _random_atomic_system(
            rng, n=n, k=k, complex_field=bool(rng.integers(0, 2)),
            uniform_masses=False)
        m = int(rng.integers(max(n, 2), 9))
        ps_pts = dom.atoms[rng.choice(k, size=m, replace=False)]
        weights = rng.uniform(0.1, 2.0, size=m)
        ps = PointSet(points=ps_pts, weights=weights)
        p = float(rng.choice(cfg["p_choices"]))
        q = float(rng.choice(cfg["q_choices"]))
        rep = ril1_audit(system, dom, ps, p, q, restarts=cfg["restarts"], seed=master + i)
        rel = rep.worst_slack / max(rep.bound, 1e-300)
        min_rel = min(min_rel, rel)
        rows.append([i, n, m, p, q, rep.d_right, rep.nikolskii, rep.worst_slack, rep.ok])
    transfer_rows = []
    for i in range(cfg["transfer_instances"]):
        rng = rng_for(master, 5000 + i)
        system, dom = _random_atomic_system(rng, n=2, k=16, uniform_masses=False)
        m = 6
        pts = dom.atoms[rng.choice(16, size=m, replace=False)]
        w = rng.uniform(0.1, 1.0, size=m)
        w /= w.sum()
        ps = PointSet(points=pts, weights=w)
        rep = wrdi_transfer_audit(system, dom, ps, p=4, r=float(rng.uniform(2.0, 3.5)),
                                  restarts=cfg["restarts"], seed=master + i)
        rel = rep.slack / max(rep.transferred, 1e-300)
        min_rel = min(min_rel, rel)
        transfer_rows.append([i, rep.d_p, rep.nikolskii, rep.transferred,
                              rep.measured_r, rep.ok])
    ok = min_rel >= -1e-9
    return {
        "cases": [{"instance": r[0], "N": r[1], "m": r[2], "p": r[3], "q": r[4],
                   "D": r[5], "M": r[6], "worst_slack": r[7], "ok": r[8]}
                  for r in rows],
        "tables": {
            "pointwise": _table(
                ["instance", "N", "m", "p", "q", "D", "M", "worst_slack", "ok"], rows),
            "transfer": _table(
                ["instance", "D_p", "M", "transferred", "measured_r", "ok"],
                transfer_rows),
        },
        "verdicts": {"zero_violations": ok},
        "min_slack": float(min_rel),
        "pass": ok,
    }


def _exp_khinchin_suite(cfg: dict, master: int) -> dict:
    """Sign-enumeration audits of the random-sign moment chain."""
    rows = []
    all_ok = True
    min_rel = np.inf
    for i in range(cfg["instances"]):
        rng = rng_for(master, i)
        n = int(rng.integers(1, cfg["n_max"] + 1))
        k = int(rng.integers(max(12, 2 * n), 25))
        system, dom = _random_atomic_system(
            rng, n=n, k=k, complex_field=bool(rng.integers(0, 2)),
            uniform_masses=False)
        m = int(rng.integers(max(n, 2), 9))
        pts = dom.atoms[rng.choice(k, size=m, replace=False)]
        w = rng.uniform(0.1, 1.5, size=m)
        ps = PointSet(points=pts, weights=w)
        p = float(rng.choice(cfg["p_choices"]))
        try:
            rep = khinchin_audit(system, dom, ps, p, restarts=cfg["restarts"],
                                 seed=master + i)
        except PremiseError:
            continue
        all_ok = all_ok and rep.ok
        rel = min(
            rep.slacks["khinchin_step"] / max(rep.khinchin_rhs, 1e-300),
            rep.slacks["conclusion"] / max(rep.conclusion_rhs, 1e-300),
            rep.slacks["pointwise"] / max(rep.lemma_rhs, 1e-300),
            rep.slacks["moment_lower"] / max(rep.average, 1e-300),
        )
        min_rel = min(min_rel, rel)
        rows.append([i, n, m, p, rep.k_p, rep.d1, rep.d2, rep.nikolskii,
                     min(rep.slacks.values()), rep.ok])
    # closed-form constant versus enumeration on random coefficient vectors
    const_rows = []
    const_ok = True
    for j, p in enumerate(cfg["p_choices"]):
        rng = rng_for(master, 9000 + j)
        kp = khinchin_constant(p)
        worst = -np.inf
        for _ in range(cfg["constant_draws"]):
            nn = int(rng.integers(1, 11))
            a = rng.normal(size=(nn, 1))
            mom = rademacher_pth_moment(a, np.ones(1), p)
            ratio = mom ** (1.0 / p) / np.linalg.norm(a)
            worst = max(worst, ratio)
        const_ok = const_ok and worst <= kp * (1 + 1e-9)
        const_rows.append([p, kp, worst, worst <= kp * (1 + 1e-9)])
    ok = all_ok and const_ok
    return {
        "cases": [{"instance": r[0], "N": r[1], "m": r[2], "p": r[3],
                   "K_p": r[4], "D1": r[5], "D2": r[6], "M": r[7],
                   "min_slack": r[8], "ok": r[9]} for r in rows],
        "tables": {
            "audits": _table(
                ["instance", "N", "m", "p", "K_p", "D1", "D2", "M",
                 "min_slack", "ok"], rows),
            "constants": _table(
                ["p", "K_p", "worst_enumerated_ratio", "ok"], const_rows),
        },
        "verdicts": {"zero_violations": all_ok, "constant_dominates": const_ok},
        "min_slack": float(min_rel),
        "pass": ok,
    }


def _exp_ap4_equalize(cfg: dict, master: int) -> dict:
    """Weight equalization, the weight-budget bound, and linear-size search."""
    rows = []
    min_rel = np.inf
    all_ok = True
    for i in range(cfg["instances"]):
        rng = rng_for(master, i)
        n = int(rng.integers(2, 4))
        k = int(rng.integers(12, 21))
        system, dom = _random_atomic_system(rng, n=n, k=k, uniform_masses=False)
        m = int(rng.integers(n, 8))
        pts = dom.atoms[rng.choice(k, size=m, replace=False)]
        w = rng.uniform(0.05, 1.0, size=m)
        ps = PointSet(points=pts, weights=w)
        q = float(rng.choice((1.0, 2.0, 4.0)))
        c_budget = float(w.sum() * rng.uniform(1.0, 1.6))
        if q == 2.0:
            d_in = disc_constants(system, dom, ps, 2, 2, seed=master).d_left
        else:
            d_in = disc_constants(system, dom, ps, q, q,
                                  restarts=cfg["restarts"], seed=master).d_left
        if math.isinf(d_in):
            continue
        eq = equalize_weights(ps, c_budget, q, ldi_constant=d_in)
        size_ok = eq.m0 <= (c_budget**2 + 1) * m + 1e-9
        if q == 2.0:
            d_out = disc_constants(system, dom, eq.pointset, 2, 2, seed=master).d_left
        else:
            d_out = disc_constants(system, dom, eq.pointset, q, q,
                                   restarts=cfg["restarts"], seed=master).d_left
        rel = (eq.ldi_constant - d_out) / max(eq.ldi_constant, 1e-300)
        min_rel = min(min_rel, rel)
        ok = size_ok and rel >= -1e-9
        all_ok = all_ok and ok
        rows.append([i, n, m, q, c_budget, eq.m0, d_in, d_out, eq.ldi_constant, ok])
    # weight budget via the augmented constant, on a trig span
    dom_t = DomainSpec.torus(grid_size=512)
    system_t = FunctionSystem.trig([[1], [-1]])

    def discretizer(aug, domain):
        m = 9
        ps = PointSet.equispaced(domain, m)
        wps = PointSet(points=ps.points, weights=np.full(m, 1.0 / m))
        rep = disc_constants(aug, domain, wps, 2, 2, seed=master)
        return wps, rep.d_left, rep.d_right

    budget_res = weight_budget_trick(system_t, dom_t, discretizer, q=2)
    budget_ok = budget_res.pointset.weights.sum() <= budget_res.budget + 1e-12
    # linear-size left-inequality points for a plain span
    n_lin = cfg["search_n"]
    sys_lin, dom_lin = _random_atomic_system(rng_for(master, 7777), n=n_lin, k=40)
    found = search_ldi_points(sys_lin, dom_lin, 2 * n_lin, 2, 2,
                              restarts=cfg["restarts"], seed=master)
    linear_ok = not math.isinf(found.d_left)
    passed = all_ok and budget_ok and linear_ok
    return {
        "cases": [{"instance": r[0], "N": r[1], "m": r[2], "q": r[3], "C": r[4],
                   "m0": r[5], "D_in": r[6], "D_out": r[7], "bound": r[8],
                   "ok": r[9]} for r in rows],
        "tables": {"equalize": _table(
            ["instance", "N", "m", "q", "C", "m0", "D_in", "D_out", "bound", "ok"],
            rows)},
        "verdicts": {"equalizer_holds": all_ok,
                     "budget_holds": budget_ok,
                     "budget_value": budget_res.budget,
                     "linear_points_left_constant": found.d_left},
        "min_slack": float(min_rel),
        "pass": passed,
    }


def _exp_iid_verify(cfg: dict, master: int) -> dict:
    """Verified i.i.d. sampling plus matrix pointwise estimates on its design."""
    n = cfg["n"]
    freqs = [[k] for k in range(-(n // 2), n // 2 + 1)]
    system = FunctionSystem.trig(freqs)
    dom = DomainSpec.torus(grid_size=cfg["grid_size"])
    res = iid_points_verified(system, dom, p=cfg["p"], eps=cfg["eps"], seed=master,
                              max_rounds=cfg["max_rounds"])
    rep = res.report
    certified = (rep.d_right ** cfg["p"] <= 1 + cfg["eps"] + 1e-12
                 and rep.d_left ** (-cfg["p"]) >= 1 - cfg["eps"] - 1e-12)
    dm = build_design(system, dom, res.pointset, basis="orthonormal")
    sel = select_rdi_rows(dm.values, m=system.n, exhaustive=False)
    pw_rdi = pointwise_check(dm.values, list(sel.indices), "RDI", 2,
                             D=sel.ratio * (1 + 1e-9), seed=master)
    pw_ldi = pointwise_check(dm.values, list(range(res.m)), "LDI", 2, D=1.0,
                             seed=master)
    corollary_ok = all(c["ok"] for c in pw_rdi.corollary)
    ok = certified and pw_rdi.ok and pw_ldi.ok and corollary_ok
    rows = [[system.n, res.m, res.rounds, rep.d_left, rep.d_right,
             sel.ratio, pw_rdi.worst_ratio, corollary_ok]]
    return {
        "cases": [{"N": system.n, "m": res.m, "rounds": res.rounds,
                   "D_L": rep.d_left, "D_R": rep.d_right,
                   "selection_ratio": sel.ratio,
                   "pointwise_worst": pw_rdi.worst_ratio,
                   "corollary_ok": corollary_ok}],
        "tables": {"iid": _table(
            ["N", "m", "rounds", "D_L", "D_R", "selection_ratio",
             "pointwise_worst", "corollary_ok"], rows)},
        "verdicts": {"certified": certified, "pointwise_rdi": pw_rdi.ok,
                     "pointwise_ldi_all_rows": pw_ldi.ok,
                     "operator_norm_corollary": corollary_ok},
        "min_slack": float(1 + cfg["eps"] - rep.d_right ** cfg["p"]),
        "pass": ok,
    }


# ---------------------------------------------------------------------------
# Registry


@dataclass(frozen=True)
class ExperimentDef:
    func: object
    defaults: dict
    claims: tuple


REGISTRY: dict[str, ExperimentDef] = {
    "ric1_scaling": ExperimentDef(_exp_ric1_scaling, {
        "n_list": [2, 3, 4, 5, 6], "p": 4, "q": 4, "base": 2,
        "size_factors": [1, 2, 4], "grid_size": 1024, "restarts": 24,
    }, ("lacunary-rdi-lower-bound", "flat-christoffel-rdi-bound")),
    "remlosi": ExperimentDef(_exp_remlosi, {
        "n": 4, "p": 4, "q": 4, "base": 2, "m_factor": 2,
        "grid_size": 2048, "restarts": 16,
    }, ("lacunary-ldi-linear-points",)),
    "rip3_fa": ExperimentDef(_exp_rip3_fa, {
        "k_list": [3, 4, 5, 6, 7, 8], "p": 2, "q": 2, "sizes": [2, 4, 8],
        "grid_size": 4097,
    }, ("injective-rdi-size-bound", "plateau-family")),
    "trd_chain": ExperimentDef(_exp_trd_chain, {
        "n": 2, "m": 10, "draws": 100, "grid_size": 1024, "restarts": 12,
    }, ("trig-uniform-chain", "uniform-from-two-norm", "nikolskii-inequality")),
    "kw_chain": ExperimentDef(_exp_kw_chain, {
        "n": 4, "k": 256, "eps": 1e-3, "max_iters": 50000, "m_factor": 2,
        "draws": 50, "restarts": 12,
    }, ("optimal-design-nikolskii", "two-n-point-uniform-chain",
        "simultaneous-uniform-two-norm")),
    "recovery_suite": ExperimentDef(_exp_recovery_suite, {
        "counts": {"BT1": 8, "BT1a": 6, "BT2": 6, "BT3": 4, "BT4": 4,
                   "ubT3": 4, "ubT3a": 3, "ubT5": 4, "ubT5a": 3, "ubT6": 2},
        "v": 1,
    }, ("weighted-fit-lebesgue", "weighted-fit-uniform-lebesgue",
        "minimax-fit-lebesgue", "unconditional-minimax-recovery",
        "uniform-weight-recovery", "universal-recovery",
        "universal-recovery-pnorm", "sample-only-recovery",
        "sample-only-recovery-pnorm", "optimal-recovery-witness",
        "sparse-approximation", "best-approximation")),
    "lunin_bench": ExperimentDef(_exp_lunin_bench, {
        "instances": 40, "m0_min": 8, "m0_max": 12, "n_min": 2, "n_max": 4,
        "required_fraction": 0.95, "even_instances": 4,
    }, ("spectral-row-selection", "even-exponent-products",
        "submatrix-operator-norms")),
    "ril1_suite": ExperimentDef(_exp_ril1_suite, {
        "instances": 20, "transfer_instances": 8, "p_choices": [3.0, 4.0, 6.0],
        "q_choices": [1.0, 2.0, 3.0], "restarts": 24,
    }, ("weighted-rdi-pointwise-bound", "holder-r-transfer")),
    "khinchin_suite": ExperimentDef(_exp_khinchin_suite, {
        "instances": 15, "n_max": 6, "p_choices": [2.0, 4.0, 6.0],
        "constant_draws": 40, "restarts": 24,
    }, ("sign-enumeration-moment-chain", "khinchin-constant")),
    "ap4_equalize": ExperimentDef(_exp_ap4_equalize, {
        "instances": 20, "restarts": 16, "search_n": 3,
    }, ("weight-equalization", "weight-budget", "ldi-2-linear-points")),
    "iid_verify": ExperimentDef(_exp_iid_verify, {
        "n": 3, "p": 2, "eps": 0.5, "max_rounds": 12, "grid_size": 1024,
    }, ("verified-iid-discretization", "matrix-pointwise-estimates",
        "one-sided-definitions", "sampling-vector", "lp-norms",
        "weighted-variants")),
}

# Coverage contract: every in-scope claim must be carried by an experiment.
REQUIRED_CLAIMS = (
    "lp-norms", "sampling-vector", "one-sided-definitions", "weighted-variants",
    "nikolskii-inequality",
    "weighted-rdi-pointwise-bound", "flat-christoffel-rdi-bound",
    "lacunary-rdi-lower-bound", "lacunary-ldi-linear-points",
    "sign-enumeration-moment-chain", "khinchin-constant",
    "injective-rdi-size-bound", "plateau-family", "holder-r-transfer",
    "weight-budget", "weight-equalization", "ldi-2-linear-points",
    "verified-iid-discretization", "matrix-pointwise-estimates",
    "spectral-row-selection", "even-exponent-products",
    "submatrix-operator-norms",
    "best-approximation", "weighted-fit-lebesgue",
    "weighted-fit-uniform-lebesgue", "minimax-fit-lebesgue",
    "unconditional-minimax-recovery", "uniform-weight-recovery",
    "trig-uniform-chain", "uniform-from-two-norm",
    "optimal-design-nikolskii", "two-n-point-uniform-chain",
    "simultaneous-uniform-two-norm",
    "sparse-approximation", "universal-recovery", "universal-recovery-pnorm",
    "sample-only-recovery", "sample-only-recovery-pnorm",
    "optimal-recovery-witness",
)


def run_experiment(name: str, config: dict | None = None, seed: int = 0,
                   out_dir=None) -> ExperimentReport:
    """Run a registered experiment and return its deterministic report."""
    if name not in REGISTRY:
        raise ConfigError(f"unknown experiment {name!r}; known: {sorted(REGISTRY)}")
    definition = REGISTRY[name]
    cfg = _merge_config(definition.defaults, config)
    start = time.perf_counter()
    body = definition.func(cfg, seed)
    elapsed = time.perf_counter() - start
    report = {
        "schema": SCHEMA_VERSION,
        "name": name,
        "config": _pyify(cfg),
        "seed": seed,
        "seed_scheme": SEED_SCHEME,
        "claims": list(definition.claims),
        **body,
    }
    result = ExperimentReport(name=name, report=report, elapsed=elapsed)
    if out_dir is not None:
        result.write(out_dir)
    return result
