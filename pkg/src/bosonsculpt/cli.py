"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 protocol failure (a step
annihilated the state or the output misses the target).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import fock, optics, protocols, slater

FIDELITY_OK = 1 - 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize {x}")
    s = format(x, ".17g")
    return s if any(ch in s for ch in ".en") else s + ".0"


def dumps_report(obj, indent: int = 0) -> str:
    """Deterministic JSON: sorted keys, floats with 17 significant digits."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps_report(v, indent + 1)}"
                 for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps_report(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps_report(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text + "\n")
    sys.stdout.write(text + "\n")


def _load_state(path: str) -> fock.FockState:
    try:
        return fock.load_state(path)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise UsageError(f"cannot read state file {path}: {exc}") from exc


def _check_t(t: float):
    if not 0.0 < t < 1.0:
        raise UsageError(f"--t must lie strictly between 0 and 1, got {t}")


# -- sculpt -----------------------------------------------------------------


def cmd_sculpt(args) -> int:
    family, n, m = args.family, args.n, args.m
    if n is None or n < 2:
        raise UsageError("--n must be at least 2")
    if family == "dicke" and (m is None or not 1 <= m <= n - 1):
        raise UsageError(f"dicke needs --m in [1, {n - 1}]")
    if family != "dicke" and m is not None:
        raise UsageError("--m only applies to dicke")
    if args.flipped and family != "w":
        raise UsageError("--flipped only applies to w")
    phase = 1 if args.ghz_phase == "plus" else None
    p, target = protocols.build(family, n, m, flipped=args.flipped, ghz_phase=phase)

    start = time.perf_counter()
    try:
        res = protocols.run_protocol(fock.sym_state(p.n_modes), p)
    except protocols.ProtocolFailure as exc:
        print(f"protocol failure: {exc}", file=sys.stderr)
        return 2
    final = res.final_state
    relabeled = family == "w" and not args.flipped
    compared = protocols.flip_qubits(final) if relabeled else final
    fid = fock.fidelity(target, compared)
    elapsed = time.perf_counter() - start

    report = {
        "protocol": {"family": family, "n": n, "m": m, "n_modes": p.n_modes,
                     "steps": len(p.steps)},
        "fidelity": fid,
        "success_weight": res.success_weight,
        "per_step_weights": list(res.per_step_weights),
        "qubits_relabeled": relabeled,
    }
    if family == "ghz":
        report["ghz_relative_phase"] = "plus" if phase == 1 else "(-1)^(n+1)"
    if final.n_particles == 2:
        spec = slater.slater_spectrum(final)
        report["purity"] = slater.purity(spec)
        report["spectrum"] = [float(x) for x in spec.r]
        report["rank"] = slater.slater_rank(spec, args.tol)
    if args.timing:
        report["wall_time_s"] = elapsed

    _write(dumps_report(report), args.out)
    if args.out:
        fock.save_state(final, Path(args.out).with_suffix(".state.json"))
    if fid < FIDELITY_OK:
        print(f"fidelity {fid:.3e} below {FIDELITY_OK}", file=sys.stderr)
        return 2
    return 0


# -- analyze ----------------------------------------------------------------


def cmd_analyze(args) -> int:
    state = _load_state(args.input)
    if state.statistics is not fock.Statistics.BOSON or state.n_particles != 2:
        raise UsageError("analyze needs a bosonic two-particle state")
    if not fock.is_normalized(state):
        raise UsageError("analyze needs a normalized state")
    report = slater.slater_report(state, args.tol)
    _write(dumps_report(report), args.out)
    return 0


def cmd_random_state(args) -> int:
    d = args.modes
    if d < 1:
        raise UsageError("--modes must be positive")
    rng = np.random.default_rng(args.seed)
    beta = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    beta = beta + beta.T
    terms = {}
    for i in range(d):
        for j in range(i, d):
            occ = [0] * d
            occ[i] += 1
            occ[j] += 1
            terms[tuple(occ)] = beta[i, i] * math.sqrt(2) if i == j else 2 * beta[i, j]
    state, _ = fock.normalize(fock.FockState(d, fock.Statistics.BOSON, terms))
    text = json.dumps(fock.state_to_dict(state), indent=1)
    _write(text, args.out)
    return 0


# -- optics -----------------------------------------------------------------


def _outcome_dict(o: optics.HeraldOutcome, labels=None, ideal=None) -> dict:
    pattern = {str(labels(k) if labels else k + 1): v for k, v in o.pattern.items()}
    d = {"pattern": pattern, "probability": o.probability,
         "state": fock.state_to_dict(o.conditional_state)}
    if ideal is not None:
        d["fidelity_to_ideal"] = fock.fidelity(ideal, o.conditional_state)
    return d


def cmd_optics(args) -> int:
    if args.optics_cmd == "herald":
        t = float(args.t)
        _check_t(t)
        state = _load_state(args.input)
        if not 1 <= args.mode <= state.modes:
            raise UsageError(f"--mode must be in [1, {state.modes}]")
        try:
            o = optics.heralded_subtract(state, args.mode - 1, t)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        out = _outcome_dict(o, labels=lambda k: "ancilla")
        _write(dumps_report(out), args.out)
        return 0

    if args.optics_cmd == "module":
        t = float(args.t)
        _check_t(t)
        state = _load_state(args.input) if args.input else fock.sym_state(4)
        if state.modes != 4:
            raise UsageError("module needs a 4-mode input state")
        outs = optics.superposition_subtraction_module(state, t)
        rows = []
        for det in optics.DETECTORS:
            try:
                o = optics.single_click(outs, det)
            except ValueError:
                continue
            ideal = fock.normalize(fock.subtract(state, optics.module_superposition(det)))[0]
            rows.append({"detector": det,
                         **_outcome_dict(o, labels=lambda k: optics.DETECTORS[k - 4], ideal=ideal)})
        report = {"t": t, "single_clicks": rows,
                  "total_probability": sum(o.probability for o in outs)}
        _write(dumps_report(report), args.out)
        return 0

    # sweep
    try:
        ts = optics.parse_t_range(args.t)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    for t in ts:
        _check_t(t)
    state = _load_state(args.input) if args.input else fock.sym_state(4)
    clicks = [c.strip() for c in args.clicks.split(",") if c.strip()]
    if not clicks or any(c not in optics.DETECTORS for c in clicks):
        raise UsageError(f"--clicks must list detectors from {optics.DETECTORS}")
    rows = optics.efficiency_sweep(state, clicks, ts, model=args.detector, workers=args.workers)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "pattern", "probability", "fidelity"])
    for r in rows:
        w.writerow([format_float(r.t), r.pattern, format_float(r.probability),
                    format_float(r.fidelity)])
    _write(buf.getvalue().rstrip("\n"), args.out)
    return 0


# -- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bosonsculpt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("sculpt", help="run a built-in sculpting protocol on |sym>")
    s.add_argument("family", choices=["bipartite", "ghz", "w", "dicke"])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int)
    s.add_argument("--flipped", action="store_true",
                   help="w: compare the raw output to the one-zero-per-term W state")
    s.add_argument("--ghz-phase", choices=["alternating", "plus"], default="alternating")
    s.add_argument("--tol", type=float, default=slater.DEFAULT_RANK_TOL)
    s.add_argument("--timing", action="store_true", help="include wall time (not reproducible)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sculpt)

    a = sub.add_parser("analyze", help="Slater spectrum, rank and purity of a two-boson state")
    a.add_argument("input", nargs="?")
    a.add_argument("--input", dest="input_flag")
    a.add_argument("--tol", type=float, default=slater.DEFAULT_RANK_TOL)
    a.add_argument("--out")
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("random-state", help="write a random normalized two-boson state")
    r.add_argument("--modes", type=int, required=True)
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_random_state)

    o = sub.add_parser("optics", help="photonic simulation")
    osub = o.add_subparsers(dest="optics_cmd", required=True, parser_class=_Parser)
    h = osub.add_parser("herald", help="heralded single-photon subtraction on one mode")
    h.add_argument("--t", required=True)
    h.add_argument("--mode", type=int, required=True, help="1-based mode index")
    h.add_argument("--input", required=True)
    h.add_argument("--out")
    mo = osub.add_parser("module", help="one pass through the four-detector module")
    mo.add_argument("--t", required=True)
    mo.add_argument("--input")
    mo.add_argument("--out")
    sw = osub.add_parser("sweep", help="herald probability and fidelity versus t")
    sw.add_argument("--t", required=True, help="start:end:count")
    sw.add_argument("--input")
    sw.add_argument("--clicks", default="b,d")
    sw.add_argument("--detector", choices=["pnr", "threshold"], default="threshold")
    sw.add_argument("--workers", type=int, default=1)
    sw.add_argument("--out")
    o.set_defaults(func=cmd_optics)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.cmd == "analyze":
        args.input = args.input or args.input_flag
        if not args.input:
            parser.exit(1, "bosonsculpt analyze: error: a state file is required\n")
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
