"""Command-line interface.

Subcommands map onto the package's operations; every run is driven by a
JSON config and a seed.  Exit codes: 0 when all checks pass, 1 when an
audited inequality is violated, 2 for configuration or guard errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, SampdiscError, SizeGuardError
from . import harness
from .design import CollectionSpec, kw_design, search_ldi_points, universal_ldi_constant
from .discretize import (
    PointSet,
    disc_constants,
    is_injective,
    khinchin_audit,
    ril1_audit,
    rip3_bound,
    wrdi_transfer_audit,
)
from .fnspace import (
    DomainSpec,
    FunctionSystem,
    export_value_table,
    gram,
    nikolskii_constant,
    orthonormalize,
)
from .matrixtools import DesignMatrix, build_design, pointwise_check, select_rdi_rows
from .recovery import AuditInstance, lebesgue_audit, recover_universal

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2

SEED_ENV_VAR = "SAMPDISC_SEED"


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc


def _require(cfg: dict, *keys):
    for key in keys:
        if key not in cfg:
            raise ConfigError(f"config is missing required key {key!r}")


def _domain(cfg: dict) -> DomainSpec:
    _require(cfg, "domain")
    return DomainSpec.from_json(cfg["domain"])


def _system(cfg: dict) -> FunctionSystem:
    _require(cfg, "system")
    return FunctionSystem.from_json(cfg["system"])


def _pointset(cfg: dict, domain: DomainSpec, seed: int) -> PointSet:
    _require(cfg, "pointset")
    spec = cfg["pointset"]
    kind = spec.get("kind", "explicit")
    if kind == "explicit":
        return PointSet.from_json(spec)
    if kind == "equispaced":
        return PointSet.equispaced(domain, int(spec["m"]))
    if kind == "random":
        rng = harness.rng_for(seed, 0)
        return PointSet.random(domain, int(spec["m"]), rng)
    if kind == "search_ldi":
        found = search_ldi_points(
            FunctionSystem.from_json(cfg["system"]), domain, int(spec["m"]),
            spec.get("p", 2), spec.get("q", 2),
            restarts=spec.get("restarts", 16), seed=seed)
        return found.pointset
    raise ConfigError(f"unknown pointset kind {kind!r}")


def _emit(obj: dict, out: str | None) -> None:
    data = harness.report_json_bytes(obj)
    if out:
        Path(out).write_bytes(data)
    sys.stdout.write(data.decode())


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer") from exc
    return 0


def _float_pq(value):
    if value in ("inf", "Infinity"):
        return math.inf
    return float(value)


# -- subcommand bodies


def _cmd_space(args) -> int:
    cfg = _load_config(args.config)
    dom = _domain(cfg)
    system = _system(cfg)
    g = gram(system, dom)
    ev = np.linalg.eigvalsh(g)
    nik = nikolskii_constant(system, dom, 2, math.inf, seed=_resolve_seed(args))
    out = {
        "schema": harness.SCHEMA_VERSION,
        "n": system.n,
        "field": system.field,
        "gram_eigs": {"min": float(ev[0]), "max": float(ev[-1])},
        "nikolskii_2_inf": nik.value,
        "domain": dom.to_json(),
    }
    if args.table:
        export_value_table(system, dom, args.table)
        out["table"] = args.table
    _emit(out, args.out)
    return EXIT_OK


def _cmd_points(args) -> int:
    cfg = _load_config(args.config)
    seed = _resolve_seed(args)
    dom = _domain(cfg)
    ps = _pointset(cfg, dom, seed)
    ok = True
    if "system" in cfg:
        ok = is_injective(_system(cfg), dom, ps)
    _emit({"schema": harness.SCHEMA_VERSION, "seed": seed,
           "pointset": ps.to_json(), "injective": bool(ok)}, args.out)
    return EXIT_OK


def _cmd_disc(args) -> int:
    cfg = _load_config(args.config)
    seed = _resolve_seed(args)
    dom = _domain(cfg)
    system = _system(cfg)
    ps = _pointset(cfg, dom, seed)
    rep = disc_constants(system, dom, ps, _float_pq(cfg.get("p", 2)),
                         _float_pq(cfg.get("q", 2)),
                         restarts=cfg.get("restarts", 32), seed=seed)
    _emit({"schema": harness.SCHEMA_VERSION, "seed": seed, **rep.to_json()}, args.out)
    return EXIT_OK


def _cmd_matrix(args) -> int:
    cfg = _load_config(args.config)
    seed = _resolve_seed(args)
    dom = _domain(cfg)
    system = _system(cfg)
    ps = _pointset(cfg, dom, seed)
    dm = build_design(system, dom, ps, basis=cfg.get("basis", "orthonormal"))
    out = {"schema": harness.SCHEMA_VERSION, "shape": list(dm.shape), "seed": seed}
    if cfg.get("select_rows"):
        sel = select_rdi_rows(dm.values, m=cfg.get("rows", None))
        out["selection"] = sel.to_json()
        check = pointwise_check(dm.values, list(sel.indices), "RDI",
                                _float_pq(cfg.get("p", 2)),
                                D=sel.ratio * (1 + 1e-9), seed=seed)
        out["pointwise_ok"] = bool(check.ok)
    if args.table:
        dm.to_csv(args.table)
        out["table"] = args.table
    _emit(out, args.out)
    if not out.get("pointwise_ok", True):
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_recover(args) -> int:
    cfg = _load_config(args.config)
    seed = _resolve_seed(args)
    dom = _domain(cfg)
    system = _system(cfg)
    ps = _pointset(cfg, dom, seed)
    _require(cfg, "target")
    tgt = cfg["target"]
    coeffs = np.asarray(tgt["coefficients"], dtype=float)
    from .fnspace import as_function

    f = as_function(coeffs, system, dom)
    rep = recover_universal(f, system, dom, int(cfg.get("v", 1)), ps,
                            _float_pq(cfg.get("p", 2)),
                            variant=cfg.get("variant", "lp_s"),
                            f_tag=tgt.get("tag", "config-target"))
    _emit({"schema": harness.SCHEMA_VERSION, "seed": seed, **rep.to_json()}, args.out)
    return EXIT_OK


_VERIFY_AUDITS = ("ril1", "khinchin", "wrdi_transfer", "rip3_bound",
                  "lebesgue", "universal")


def _cmd_verify(args) -> int:
    cfg = _load_config(args.config)
    seed = _resolve_seed(args)
    _require(cfg, "audit")
    audit = cfg["audit"]
    if audit not in _VERIFY_AUDITS:
        raise ConfigError(f"unknown audit {audit!r}; known: {_VERIFY_AUDITS}")
    dom = _domain(cfg)
    system = _system(cfg)
    if audit == "rip3_bound":
        _require(cfg, "a", "p", "q", "D")
        bound = rip3_bound(cfg["a"], _float_pq(cfg["p"]), _float_pq(cfg["q"]), cfg["D"])
        ps = _pointset(cfg, dom, seed)
        inj = is_injective(system, dom, ps)
        ok = (not inj) or ps.m >= bound * (1 - 1e-9)
        _emit({"schema": harness.SCHEMA_VERSION, "audit": audit, "bound": bound,
               "m": ps.m, "injective": bool(inj), "ok": bool(ok)}, args.out)
        return EXIT_OK if ok else EXIT_VIOLATION
    ps = _pointset(cfg, dom, seed)
    if audit == "ril1":
        rep = ril1_audit(system, dom, ps, _float_pq(cfg.get("p", 4)),
                         _float_pq(cfg.get("q", 2)), seed=seed)
        ok = rep.ok
        body = {"D": rep.d_right, "M": rep.nikolskii, "worst_slack": rep.worst_slack}
    elif audit == "khinchin":
        rep = khinchin_audit(system, dom, ps, float(cfg.get("p", 4)), seed=seed)
        ok = rep.ok
        body = {"K_p": rep.k_p, "slacks": rep.slacks}
    elif audit == "wrdi_transfer":
        rep = wrdi_transfer_audit(system, dom, ps, _float_pq(cfg.get("p", 4)),
                                  float(cfg.get("r", 2)), seed=seed)
        ok = rep.ok
        body = {"transferred": rep.transferred, "measured": rep.measured_r}
    elif audit == "universal":
        coll = CollectionSpec(system=system, domain=dom, v=int(cfg.get("v", 1)))
        res = universal_ldi_constant(coll, ps, _float_pq(cfg.get("p", 2)),
                                     _float_pq(cfg.get("q", "inf")), seed=seed)
        ok = not math.isinf(res.value)
        body = {"value": res.value, "worst_support": list(res.worst_support or ())}
    else:  # lebesgue
        _require(cfg, "theorem", "target")
        coeffs = np.asarray(cfg["target"]["coefficients"], dtype=float)
        from .fnspace import as_function

        inst = AuditInstance(system=system, domain=dom, pointset=ps,
                             f=as_function(coeffs, system, dom),
                             p=_float_pq(cfg.get("p", 2)),
                             v=cfg.get("v"), seed=seed)
        rep = lebesgue_audit(cfg["theorem"], inst)
        ok = all(a.status == "ok" for a in rep.audits)
        body = {"audits": [a.to_json() for a in rep.audits]}
    _emit({"schema": harness.SCHEMA_VERSION, "audit": audit, "seed": seed,
           "ok": bool(ok), **body}, args.out)
    return EXIT_OK if ok else EXIT_VIOLATION


def _cmd_experiment(args) -> int:
    seed = _resolve_seed(args)
    overrides = _load_config(args.config) if args.config else None
    result = harness.run_experiment(args.name, config=overrides, seed=seed,
                                    out_dir=args.out)
    sys.stdout.write(result.json_bytes().decode())
    sys.stderr.write(f"experiment {args.name}: elapsed {result.elapsed:.2f}s\n")
    return EXIT_OK if result.passed else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sampdisc",
        description="Discretization constants, point-set construction, "
                    "sample-based recovery, and inequality audits.",
    )
    sub = parser.add_subparsers(dest="command")

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="path to a JSON config")
        p.add_argument("--seed", type=int, default=None,
                       help=f"master seed (default: ${SEED_ENV_VAR} or 0)")
        p.add_argument("--out", default=None, help="write the JSON report here")

    p_space = sub.add_parser("space", help="inspect a function space")
    common(p_space)
    p_space.add_argument("--table", default=None, help="export the value table CSV here")

    p_points = sub.add_parser("points", help="construct or inspect a point set")
    common(p_points)

    p_disc = sub.add_parser("disc", help="measure discretization constants")
    common(p_disc)

    p_matrix = sub.add_parser("matrix", help="design matrices and row selection")
    common(p_matrix)
    p_matrix.add_argument("--table", default=None, help="export the matrix CSV here")

    p_recover = sub.add_parser("recover", help="run a recovery algorithm")
    common(p_recover)

    p_verify = sub.add_parser("verify", help="run a named inequality audit")
    common(p_verify)

    p_exp = sub.add_parser("experiment", help="run a registered experiment")
    p_exp.add_argument("name", help=f"one of {sorted(harness.REGISTRY)}")
    p_exp.add_argument("--config", default=None, help="JSON overrides")
    p_exp.add_argument("--seed", type=int, default=None)
    p_exp.add_argument("--out", default=None, help="directory for JSON/CSV reports")

    return parser


_DISPATCH = {
    "space": _cmd_space,
    "points": _cmd_points,
    "disc": _cmd_disc,
    "matrix": _cmd_matrix,
    "recover": _cmd_recover,
    "verify": _cmd_verify,
    "experiment": _cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, matching our config exit code
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG
    try:
        return _DISPATCH[args.command](args)
    except (ConfigError, SizeGuardError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except SampdiscError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
