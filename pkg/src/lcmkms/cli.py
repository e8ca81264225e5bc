"""Command-line front end.

    lcmkms analyze --config axb.toml
    lcmkms kms-eval --config axb.toml --s "(2,2)" --t "(0,2)"
    lcmkms families

Reports are deterministic JSON (schema "kms-lcm/1").  Exit codes: 0 ok,
2 configuration error, 3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from fractions import Fraction
from typing import Any

from . import __version__
from .config import SCHEMA, Config, ConfigError, load_config
from .errors import CertificateFailure, LcmKmsError
from .kms import FiniteTypeState, kms_residual, phi_kms_infty, random_monomial_pairs
from .measure import boundary_factor_check, existence_check, foundation_candidate_check, zeta_partial
from .monoids import FAMILIES, make_monoid
from .numeric import is_exact, parse_beta
from .scale import make_scale
from .uniqueness import uniqueness_verdict

EXIT_OK, EXIT_CONFIG, EXIT_INCONSISTENT = 0, 2, 3


def _num(v: Any) -> Any:
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _frac_str(v: Fraction) -> str:
    return str(Fraction(v))


def _header(cfg: Config, command: str) -> dict:
    return {
        "schema": SCHEMA,
        "version": __version__,
        "command": command,
        "monoid": cfg.monoid.descriptor(),
        "weights": {k: _frac_str(v) for k, v in cfg.scale.weights.items()},
    }


# -- sections -------------------------------------------------------------------

def structure_section(cfg: Config) -> dict:
    sc, depth = cfg.scale, int(cfg.cutoffs["depth"])
    render = sc.monoid.render
    out = {}
    for name, fn in (("kernel_directed", sc.check_kernel_directed), ("admissibility", sc.check_admissibility)):
        v = fn(depth)
        out[name] = {
            "pass": v.ok,
            "depth": depth,
            "checked": v.checked,
            "witness": [render(x) for x in v.witness] if v.witness else None,
        }
    return out


def existence_rows(cfg: Config, betas: list) -> list[dict]:
    rows = []
    sc = cfg.scale
    for beta in betas:
        if isinstance(beta, float) and math.isinf(beta):
            continue
        v = existence_check(
            sc,
            beta,
            cfg.cutoffs["class_cutoff"],
            max_size=int(cfg.cutoffs["max_subset"]),
            budget=int(cfg.cutoffs["subset_budget"]),
        )
        rows.append(
            {
                "beta": beta,
                "pass": v.ok,
                "value": _num(v.value),
                "witness": [sc.monoid.render(c.rep) for c in v.witness] if v.witness else None,
                "witness_n": [_frac_str(c.n) for c in v.witness] if v.witness else None,
                "certificate": v.certificate,
                "partial": v.partial,
                "cutoff": _frac_str(v.cutoff),
                "exact": v.exact,
                "notes": v.notes,
            }
        )
    return rows


def zeta_rows(cfg: Config, betas: list) -> list[dict]:
    rows = []
    for beta in betas:
        if isinstance(beta, float) and math.isinf(beta):
            continue
        z = zeta_partial(cfg.scale, beta, cfg.cutoffs["zeta_cutoff"])
        rows.append(
            {
                "beta": beta,
                "partial": z.partial,
                "closed_form": _num(z.closed_form),
                "tail_bound": _num(z.tail),
                "classes": z.classes,
                "cutoff": _frac_str(z.cutoff),
                "exact": False,
            }
        )
    return rows


def uniqueness_rows(cfg: Config, betas: list, existence: dict) -> list[dict]:
    rows = []
    sc = cfg.scale
    render = sc.monoid.render
    for beta in betas:
        if isinstance(beta, float) and math.isinf(beta) or beta < 0:
            continue
        if not existence.get(beta, True):
            rows.append({"beta": beta, "verdict": "no KMS state", "pairs": [], "cutoff": None, "exact": is_exact(beta)})
            continue
        rep = uniqueness_verdict(
            sc,
            beta,
            depth=int(cfg.cutoffs["kernel_depth"]),
            ladder_height=cfg.cutoffs["ladder_height"],
            tolerance=cfg.cutoffs["tolerance"],
            class_cutoff=cfg.cutoffs["zeta_cutoff"],
        )
        rows.append(
            {
                "beta": beta,
                "verdict": rep.verdict,
                "caveat": rep.caveat,
                "tolerance": rep.tolerance,
                "exact": rep.exact,
                "cutoff": _frac_str(rep.cutoff),
                "ladder": rep.ladder,
                "witness": rep.witness.to_json(render) if rep.witness else None,
                "pairs": [p.to_json(render) for p in rep.pairs],
                "notes": rep.notes,
            }
        )
    return rows


def boundary_rows(cfg: Config, betas: list) -> list[dict]:
    rows = []
    sc = cfg.scale
    for F in cfg.boundary_sets:
        found = foundation_candidate_check(sc, F, cfg.cutoffs["class_cutoff"], int(cfg.cutoffs["depth"]))
        for beta in betas:
            if isinstance(beta, float) and math.isinf(beta):
                continue
            r = boundary_factor_check(sc, beta, F)
            rows.append(
                {
                    "beta": beta,
                    "F": [sc.monoid.render(f) for f in F],
                    "foundation": found.ok,
                    "residual": _num(r),
                    "exact": is_exact(beta),
                    "cutoff": None,
                }
            )
    return rows


def kms_rows(cfg: Config, betas: list, pairs: list) -> list[dict]:
    rows = []
    sc = cfg.scale
    render = sc.monoid.render
    for beta in betas:
        for spec, trace in zip(cfg.trace_specs, cfg.traces):
            if isinstance(beta, float) and math.isinf(beta):
                for s, t in pairs:
                    v = phi_kms_infty(sc, trace, s, t)
                    rows.append({"beta": "inf", "trace": spec, "s": render(s), "t": render(t), "value": _num(v),
                                 "regime": "infinity", "tail_bound": 0.0, "cutoff": None, "exact": False})
                continue
            closed = sc.zeta_closed(float(beta))
            if closed is None or not math.isfinite(closed):
                for s, t in pairs:
                    rows.append({"beta": beta, "trace": spec, "s": render(s), "t": render(t), "value": None,
                                 "regime": "not finite type", "tail_bound": None, "cutoff": None, "exact": False})
                continue
            state = FiniteTypeState(sc, float(beta), trace, cfg.cutoffs["kms_cutoff"])
            for s, t in pairs:
                v = state.evaluate(s, t)
                rows.append({"beta": beta, "trace": spec, "s": render(s), "t": render(t), "value": _num(v.value),
                             "regime": "finite type", "tail_bound": v.tail_bound,
                             "heuristic_tail": v.heuristic_tail, "cutoff": _frac_str(v.cutoff), "exact": False})
    return rows


def residual_sample(cfg: Config, beta: float, seed: int, count: int = 10) -> dict | None:
    sc = cfg.scale
    closed = sc.zeta_closed(float(beta))
    if closed is None or not math.isfinite(closed):
        return None
    state = FiniteTypeState(sc, float(beta), cfg.traces[0], cfg.cutoffs["kms_cutoff"])
    rng = random.Random(seed)
    res = [kms_residual(sc, float(beta), state, x, y) for x, y in random_monomial_pairs(sc, rng, count)]
    return {"beta": beta, "seed": seed, "pairs": count, "max_residual": max(res), "cutoff": _frac_str(state.cutoff),
            "exact": False}


# -- commands ----------------------------------------------------------------------

def cmd_analyze(cfg: Config, args) -> dict:
    rep = _header(cfg, "analyze")
    rep["structure"] = structure_section(cfg)
    rep["existence"] = existence_rows(cfg, cfg.betas)
    ok = {r["beta"]: r["pass"] for r in rep["existence"]}
    rep["zeta"] = zeta_rows(cfg, cfg.betas)
    rep["uniqueness"] = uniqueness_rows(cfg, cfg.betas, ok)
    rep["boundary"] = boundary_rows(cfg, cfg.betas)
    rep["kms_residuals"] = [r for b in cfg.betas if not (isinstance(b, float) and math.isinf(b)) and b > 0
                            for r in [residual_sample(cfg, b, args.seed)] if r]
    return rep


def cmd_existence(cfg, args):
    return {**_header(cfg, "existence"), "rows": existence_rows(cfg, cfg.betas)}


def cmd_zeta(cfg, args):
    return {**_header(cfg, "zeta"), "rows": zeta_rows(cfg, cfg.betas)}


def cmd_uniqueness(cfg, args):
    ok = {r["beta"]: r["pass"] for r in existence_rows(cfg, cfg.betas)}
    return {**_header(cfg, "uniqueness"), "rows": uniqueness_rows(cfg, cfg.betas, ok)}


def cmd_boundary(cfg, args):
    return {**_header(cfg, "boundary"), "rows": boundary_rows(cfg, cfg.betas)}


def cmd_kms_eval(cfg, args):
    pairs = list(cfg.kms_pairs)
    if args.s is not None or args.t is not None:
        if args.s is None or args.t is None:
            raise ConfigError("--s and --t must be given together")
        try:
            pairs.append((cfg.monoid.parse(args.s), cfg.monoid.parse(args.t)))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if not pairs:
        raise ConfigError("no (s, t) pairs: use --s/--t or [kms] pairs")
    return {**_header(cfg, "kms-eval"), "rows": kms_rows(cfg, cfg.betas, pairs)}


def cmd_families(args) -> dict:
    rows = []
    for name, cls in FAMILIES.items():
        m = make_monoid(name)
        sc = make_scale(m)
        rows.append(
            {
                "family": name,
                "params": m.params(),
                "generators": {k: m.render(v) for k, v in m.generators().items()},
                "default_weights": {k: _frac_str(v) for k, v in sc.weights.items()},
                "example": m.render(m.product(*m.generators().values())),
            }
        )
    return {"schema": SCHEMA, "version": __version__, "command": "families", "rows": rows}


COMMANDS = {
    "analyze": cmd_analyze,
    "existence": cmd_existence,
    "zeta": cmd_zeta,
    "kms-eval": cmd_kms_eval,
    "uniqueness": cmd_uniqueness,
    "boundary": cmd_boundary,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lcmkms", description="KMS states of right LCM monoids with a scale.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in [*COMMANDS, "families"]:
        q = sub.add_parser(name)
        fmt = q.add_mutually_exclusive_group()
        fmt.add_argument("--json", dest="fmt", action="store_const", const="json", help="JSON output (default)")
        fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv", help="CSV of the row table")
        q.add_argument("--output", "-o", help="write the report here instead of stdout")
        if name == "families":
            continue
        q.add_argument("--config", required=True, help="TOML or JSON config")
        q.add_argument("--beta", help="comma separated list overriding the config")
        q.add_argument("--cutoff", help="override every class cutoff")
        q.add_argument("--seed", type=int, default=0, help="seed for sampled diagnostics")
        if name == "kms-eval":
            q.add_argument("--s", help="element s of v_s v_t*")
            q.add_argument("--t", help="element t of v_s v_t*")
    return p


def _apply_overrides(cfg: Config, args) -> None:
    if args.beta is not None:
        try:
            cfg.betas = [parse_beta(b) for b in args.beta.split(",") if b.strip()]
        except ValueError:
            raise ConfigError(f"bad --beta {args.beta!r}") from None
    if args.cutoff is not None:
        try:
            c = Fraction(args.cutoff)
        except ValueError:
            raise ConfigError(f"bad --cutoff {args.cutoff!r}") from None
        for key in ("class_cutoff", "zeta_cutoff", "kms_cutoff"):
            cfg.cutoffs[key] = c


def _rows_csv(report: dict) -> str:
    rows = report.get("rows")
    if rows is None:
        rows = [dict(section=k, **r) for k in ("existence", "zeta", "uniqueness", "boundary") for r in report.get(k, [])]
    buf = io.StringIO()
    keys: list[str] = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v for k, v in r.items()})
    return buf.getvalue()


def render_report(report: dict, fmt: str = "json") -> str:
    if fmt == "csv":
        return _rows_csv(report)
    return json.dumps(report, sort_keys=True, indent=2, default=_num) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.fmt or "json"
    try:
        if args.command == "families":
            report = cmd_families(args)
            out_path = args.output
        else:
            cfg = load_config(args.config)
            _apply_overrides(cfg, args)
            report = COMMANDS[args.command](cfg, args)
            out_path = args.output or cfg.output
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CertificateFailure as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except LcmKmsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render_report(report, fmt)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
