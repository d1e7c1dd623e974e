"""Command-line front end.

    worldline <parse|eliminate|simulate|events|audit|angular> --config FILE [options]

Exit status: 0 success, 1 audit or pipeline failure, 2 configuration error,
3 degenerate system.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from worldline.angular import angular_momentum_exact
from worldline.config import TOLERANCES, RunConfig, _rational, load_config
from worldline.conservation import angular_momentum_numeric, audit
from worldline.dynamics import Tracker, detect_events, event_polynomial, make_grid
from worldline.elimination import eliminants, isolate_real_roots, leading_coeff_check
from worldline.errors import ConfigError, DegenerateSystem, WorldlineError

log = logging.getLogger("worldline")

EXIT_OK, EXIT_AUDIT, EXIT_CONFIG, EXIT_DEGENERATE = 0, 1, 2, 3

CSV_COLUMNS = ["t", "particle_id", "kind", "re_x", "im_x", "re_y", "im_y", "re_vx", "im_vx",
               "re_vy", "im_vy", "re_ax", "im_ax", "re_ay", "im_ay", "near_event"]


def exact_text(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def exact_record(value) -> dict | None:
    """{exact, approx} for a rational or a tuple of rationals."""
    if value is None:
        return None
    if isinstance(value, (tuple, list)):
        if any(v is None or not isinstance(v, (int, Fraction)) for v in value):
            return {"exact": "(" + ", ".join(str(v) for v in value) + ")", "approx": None}
        return {"exact": "(" + ", ".join(exact_text(v) for v in value) + ")",
                "approx": [float(v) for v in value]}
    if isinstance(value, (int, Fraction)):
        return {"exact": exact_text(value), "approx": float(value)}
    return {"exact": str(value), "approx": None}


def _num(v: float) -> str:
    return format(float(v), ".17g")


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2) + "\n")


# subcommands ----------------------------------------------------------------

def cmd_parse(cfg: RunConfig) -> int:
    s = cfg.system
    doc = {"F1": str(s.F1), "F2": str(s.F2), "n": s.n, "m": s.m, "N": s.N, "warnings": list(s.warnings)}
    print(f"F1 = {s.F1}")
    print(f"F2 = {s.F2}")
    print(f"degrees n={s.n} m={s.m}, N={s.N}")
    for w in s.warnings:
        print(f"warning: {w}")
    _write_json(cfg.out / "parse.json", doc)
    return EXIT_OK


def cmd_eliminate(cfg: RunConfig) -> int:
    elims = eliminants(cfg.system)
    lead = leading_coeff_check(cfg.system, elims)
    D, d1, d2 = event_polynomial(elims)
    roots = isolate_real_roots(D)
    doc = {
        "R_y": str(elims[0].as_multipoly()),
        "R_x": str(elims[1].as_multipoly()),
        "leading_R_y": exact_text(elims[0].leading.constant_value()),
        "leading_R_x": exact_text(elims[1].leading.constant_value()),
        "leading_forms_resultant": exact_text(lead),
        "D": str(D),
        "D_degree": D.degree("t"),
        "D_real_roots": [[exact_text(a), exact_text(b)] for a, b in roots],
        "discriminant_degrees": [d1.degree("t"), d2.degree("t")],
    }
    print(f"R_y(x, t) = {doc['R_y']}")
    print(f"R_x(y, t) = {doc['R_x']}")
    print(f"leading coefficients: {doc['leading_R_y']}, {doc['leading_R_x']} (leading forms: {doc['leading_forms_resultant']})")
    print(f"D(t) has degree {doc['D_degree']} with {len(roots)} real roots")
    _write_json(cfg.out / "eliminants.json", doc)
    return EXIT_OK


def _run_track(cfg: RunConfig):
    elims = eliminants(cfg.system)
    grid = make_grid(cfg.t_start, cfg.t_end, cfg.steps)
    events = detect_events(cfg.system, (cfg.t_start, cfg.t_end), elims, tols=cfg.tolerances)
    samples = Tracker(cfg.system, elims, cfg.tolerances).track(grid, events)
    return elims, events, samples


def write_trajectory(path: Path, samples) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = 0
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for s in samples:
            for k, p in enumerate(s.particles):
                row = [_num(s.t), p.id, p.kind, _num(p.x.real), _num(p.x.imag), _num(p.y.real), _num(p.y.imag)]
                if s.velocities is None:
                    row += [""] * 8
                else:
                    (vx, vy), (ax, ay) = s.velocities[k], s.accelerations[k]
                    row += [_num(c) for z in (vx, vy, ax, ay) for c in (z.real, z.imag)]
                row.append(1 if s.near_event else 0)
                w.writerow(row)
                rows += 1
    return rows


def cmd_simulate(cfg: RunConfig) -> int:
    _, events, samples = _run_track(cfg)
    rows = write_trajectory(cfg.out / "trajectory.csv", samples)
    flagged = sum(s.near_event for s in samples)
    print(f"{len(samples)} samples, {rows} rows, {flagged} flagged near events, {len(events)} events")
    return EXIT_OK


def event_record(ev) -> dict:
    return {
        "t_lo": exact_text(ev.t_star[0]),
        "t_hi": exact_text(ev.t_star[1]),
        "t_approx": ev.t_approx,
        "kind": ev.kind,
        "count_change": ev.count_change,
        "real_counts": list(ev.real_counts),
        "location": list(ev.location) if ev.location else None,
        "involved_ids": list(ev.involved_ids),
    }


def cmd_events(cfg: RunConfig) -> int:
    elims = eliminants(cfg.system)
    events = detect_events(cfg.system, (cfg.t_start, cfg.t_end), elims, tols=cfg.tolerances)
    for ev in events:
        print(f"t ~ {ev.t_approx:.12g}: {ev.kind} ({ev.real_counts[0]} -> {ev.real_counts[1]} real roots)")
    if not events:
        print("no events in range")
    _write_json(cfg.out / "events.json", [event_record(ev) for ev in events])
    return EXIT_OK


def report_record(r) -> dict:
    return {"law": r.law, "expected": exact_record(r.expected), "max_drift": r.max_drift,
            "verdict": "pass" if r.verdict else "fail"}


def cmd_audit(cfg: RunConfig) -> int:
    elims, _, samples = _run_track(cfg)
    top = cfg.higher_sums_max if cfg.higher_sums_max is not None else cfg.system.N
    higher = range(3, min(top, cfg.system.N) + 1)
    try:
        # G alone is cheap; the large E(M, t) check is left to `angular --exact-angular`
        reference = angular_momentum_exact(cfg.system, elims, e_times=()).total
    except WorldlineError as exc:
        log.warning("exact angular momentum unavailable: %s", exc)
        reference = None
    reports = audit(samples, elims, higher=higher, angular_expected=reference, tols=cfg.tolerances)
    for r in reports:
        print(f"{r.law:18s} {'pass' if r.verdict else 'FAIL'}  max drift {r.max_drift:.3e}")
    _write_json(cfg.out / "report.json", [report_record(r) for r in reports])
    return EXIT_OK if all(r.verdict for r in reports) else EXIT_AUDIT


def cmd_angular(cfg: RunConfig) -> int:
    elims, _, samples = _run_track(cfg)
    exact = None
    if cfg.exact_angular:
        exact = angular_momentum_exact(cfg.system, elims)
    numeric = angular_momentum_numeric(samples, exact.total if exact else None,
                                       cfg.tolerances.get("tol_angular", 1e-6))
    doc = {"numeric": {**report_record(numeric), "reference": numeric.detail.get("reference"),
                       "max_imag": numeric.detail.get("max_imag"),
                       "samples": [[t, m.real] for t, m in numeric.observed]}}
    print(f"numeric M_z ~ {numeric.detail.get('reference', float('nan')):.12g}, drift {numeric.max_drift:.3e}")
    ok = numeric.verdict
    if exact is not None:
        ok = ok and all(s.divides for s in exact.E_samples)
        doc["exact"] = {
            "M_z": exact_record(exact.total),
            "G": str(exact.G),
            "alpha": str(exact.alpha),
            "beta": str(exact.beta),
            "alpha_has_leading_factor": exact.alpha_has_fN_factor,
            "A_over_D": exact_record(exact.A_over_D),
            "E_samples": [{"t": exact_text(s.t), "degree": s.degree, "factor_degree": s.factor_degree,
                           "cofactor_degree": s.quotient_degree, "divides": s.divides}
                          for s in exact.E_samples],
        }
        print(f"exact M_z = {exact_text(exact.total)}")
    _write_json(cfg.out / "angular.json", doc)
    return EXIT_OK if ok else EXIT_AUDIT


COMMANDS = {
    "parse": cmd_parse,
    "eliminate": cmd_eliminate,
    "simulate": cmd_simulate,
    "events": cmd_events,
    "audit": cmd_audit,
    "angular": cmd_angular,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="worldline", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="YAML file or bundled example name")
    ap.add_argument("--out", type=Path, help="output directory")
    ap.add_argument("--steps", type=int)
    ap.add_argument("--t-range", nargs=2, metavar=("A", "B"))
    ap.add_argument("--exact-angular", action="store_true", default=None)
    ap.add_argument("--verbose", "-v", action="store_true")
    for short in TOLERANCES:
        ap.add_argument(f"--tol-{short}", type=float, dest=f"tol__{short}", metavar="VALUE")
    return ap


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config)
    tols = {TOLERANCES[k]: getattr(args, f"tol__{k}") for k in TOLERANCES
            if getattr(args, f"tol__{k}") is not None}
    t_start = t_end = None
    if args.t_range:
        t_start, t_end = (_rational("t-range", v) for v in args.t_range)
    return cfg.with_overrides(out=args.out, steps=args.steps, t_start=t_start, t_end=t_end,
                              exact_angular=args.exact_angular, tolerances=tols or None)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config_from_args(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateSystem as exc:
        print(f"degenerate system: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except WorldlineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_AUDIT


if __name__ == "__main__":
    sys.exit(main())
