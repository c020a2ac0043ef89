"""Command-line front end: ``qmchain {run,verify,zeno,eraser,prepare}``.

Every subcommand is a thin composition of library calls. JSON output has
sorted keys and floats written with 17 significant digits, so identical
inputs give byte-identical files.

Exit codes: 0 success, 1 a theorem check failed, 2 malformed input or
usage, 3 dimension guard exceeded, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .apps import (
    ZENO_MODES,
    ZenoConfig,
    anti_zeno_monte_carlo,
    eraser_pattern,
    prepare_via_measurement,
    visibility,
    zeno_curve,
)
from .chain import ChainSpec, SpecError, _parse_unitary, rotation_qubit, reduced_density, run_chain
from .entropy import (
    THEOREMS,
    SettingError,
    entropy_report,
    theorem_corpus,
    theorem_id,
    venn3,
    verify_theorem,
)
from .linalg import ConvergenceError, DimensionError, NumericError, is_unitary

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DIM, EXIT_NUMERIC = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


# ------------------------------------------------------------ formatting


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        raise NumericError(f"non-finite value {x!r} in output")
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    text = format(x, ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"  # keep floats distinguishable from integers
    return text


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """Canonical JSON: sorted keys, 17-significant-digit floats."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {to_json(obj[k], indent, _level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def complex_nested(m) -> list:
    m = np.asarray(m)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def emit(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(fmt_float(v) if isinstance(v, float) else str(v) for v in r))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------- helpers


def parse_label_sets(values) -> list[str]:
    out = []
    for v in values or []:
        for part in v.split(";"):
            if part.strip():
                out.append(part.strip())
    return out


def parse_ids(values) -> list[str]:
    out = []
    for v in values or []:
        out.extend(t.strip() for t in v.replace(";", ",").split(",") if t.strip())
    return out


def parse_triple(text: str) -> list[str]:
    parts = [p.strip() for p in (text.split(";") if ";" in text else text.split(",")) if p.strip()]
    if len(parts) != 3:
        raise UsageError(f"--venn needs three label sets, got {text!r}")
    return parts


def default_groups(state) -> list[str]:
    devices = []
    for lab in state.labels:
        if lab.device not in devices:
            devices.append(lab.device)
    groups = list(devices)
    for kind in ("A", "D"):
        members = [d for d in devices if d.startswith(kind)]
        if len(members) > 1:
            groups.append(",".join(members))
    return groups


# -------------------------------------------------------------- commands


def cmd_run(args) -> int:
    try:
        text = Path(args.spec).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"cannot read spec: {exc}") from exc
    spec = ChainSpec.from_json(text)
    state = run_chain(spec)
    factor = math.log2(spec.d)
    scale = factor if args.bits else 1.0

    keep = parse_label_sets(args.keep)
    groups = keep or default_groups(state)
    rep = entropy_report(state, groups)

    matrices = {}
    for k in keep:
        rho = reduced_density(state, k)
        matrices[",".join(str(lab) for lab in rho.labels)] = complex_nested(rho.matrix)

    venns = []
    for triple in args.venn or []:
        x, y, z = parse_triple(triple)
        v = venn3(state, x, y, z)
        venns.append({"sets": list(v.labels), "regions": v.to_dict(scale)})

    theorems = []
    for name in parse_ids(args.theorems):
        for tid in (THEOREMS if name.lower() == "all" else [theorem_id(name)]):
            try:
                theorems.append(verify_theorem(spec, tid).to_dict(factor))
            except SettingError as exc:
                theorems.append({"theorem": tid, "skipped": str(exc)})

    report = {
        "tool": "qmchain",
        "version": __version__,
        "seed": args.seed,
        "spec": spec.to_dict(),
        "norm": state.norm(),
        "reduced": matrices,
        "entropy": rep.to_dict(bits=args.bits),
        "venn": venns,
        "theorems": theorems,
    }
    emit(to_json(report), args.out)
    return EXIT_OK


def _verify_one(job):
    spec, tid, index = job
    r = verify_theorem(spec, tid)
    return index, r, spec.d


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    names = parse_ids([args.theorems]) or ["all"]
    tids: list[str] = []
    for name in names:
        for tid in (THEOREMS if name.lower() == "all" else [theorem_id(name)]):
            if tid not in tids:
                tids.append(tid)
    try:
        d_values = tuple(int(x) for x in str(args.d).split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"bad --d value {args.d!r}") from exc
    if not d_values or any(d < 2 for d in d_values):
        raise UsageError("--d must list dimensions >= 2")

    summary = {}
    failed = False
    for tid in tids:
        setting = THEOREMS[tid]
        if args.max_steps < setting.min_steps:
            summary[tid] = {"skipped": f"needs at least {setting.min_steps} steps"}
            continue
        corpus = theorem_corpus(tid, args.trials, args.seed, d_values, args.max_steps)
        jobs = [(s, tid, k) for k, s in enumerate(corpus)]
        if args.workers > 1:
            with ProcessPoolExecutor(args.workers) as pool:
                results = list(pool.map(_verify_one, jobs, chunksize=8))
        else:
            results = [_verify_one(j) for j in jobs]
        results.sort(key=lambda t: t[0])
        gaps = np.array([r.gap * (math.log2(d) if args.bits else 1.0) for _, r, d in results])
        passed = sum(r.verdict for _, r, _ in results)
        entry = {
            "kind": setting.kind,
            "statement": setting.statement,
            "trials": len(results),
            "passed": passed,
            "min_gap": float(np.min(gaps)),
            "max_gap": float(np.max(gaps)),
            "tolerance": results[0][1].tolerance,
        }
        if setting.kind == "equality":
            entry["max_abs_gap"] = float(np.max(np.abs(gaps)))
        if setting.kind == "interval":
            entry["gap_quantiles"] = {q: float(np.quantile(gaps, float(q))) for q in
                                      ("0", "0.25", "0.5", "0.75", "1")}
            entry["mean_gap"] = float(np.mean(gaps))
        worst = [k for k, r, _ in results if not r.verdict]
        if worst:
            entry["failures"] = worst[:20]
            failed = True
        summary[tid] = entry

    report = {
        "tool": "qmchain",
        "version": __version__,
        "seed": args.seed,
        "d": list(d_values),
        "max_steps": args.max_steps,
        "unit": "bits" if args.bits else "dits",
        "theorems": summary,
        "ok": not failed,
    }
    emit(to_json(report), args.out)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_zeno(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.anti:
        rows = []
        for n in range(1, args.n + 1):
            r = anti_zeno_monte_carlo(n, max(args.trials, 2), args.seed)
            rows.append((n, r.analytic, r.mean, r.stderr))
        emit(csv_text(["n", "analytic", "mc_mean", "mc_stderr"], rows), args.out)
        return EXIT_OK
    try:
        cfg = ZenoConfig(args.p, args.n, args.mode, args.seed, args.trials)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = [(r.step, r.q, r.entropy) for r in zeno_curve(cfg)]
    emit(csv_text(["step", "q", "entropy_bits"], rows), args.out)
    return EXIT_OK


def cmd_eraser(args) -> int:
    outcome = None if args.outcome == "none" else int(args.outcome)
    try:
        pat = eraser_pattern(args.n_x, args.theta, outcome, period=args.period, separation=args.separation)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    vis = visibility(pat)
    rows = [(int(x), float(i), vis) for x, i in zip(pat.positions, pat.intensity)]
    emit(csv_text(["x", "intensity", "visibility"], rows), args.out)
    return EXIT_OK


def cmd_prepare(args) -> int:
    if args.matrix is not None:
        try:
            raw = json.loads(args.matrix)
        except json.JSONDecodeError as exc:
            raise SpecError(f"--matrix is not valid JSON: {exc}") from exc
        try:
            basis = _parse_unitary({"matrix": raw}, len(raw))
        except (TypeError, ValueError, KeyError) as exc:
            raise SpecError(f"malformed --matrix: {exc}") from exc
    else:
        basis = rotation_qubit(args.angle)
    if basis.ndim != 2 or basis.shape[0] != basis.shape[1] or not is_unitary(basis, 1e-10):
        raise SpecError("basis must be a unitary matrix")
    rho = prepare_via_measurement(basis, args.outcome)
    d = rho.dims[0]
    diag = np.real(np.diag(rho.matrix))
    report = {
        "tool": "qmchain",
        "version": __version__,
        "outcome": args.outcome,
        "basis": complex_nested(basis),
        "rho": complex_nested(rho.matrix),
        "probabilities": [float(p) for p in diag],
        "entropy_bits": float(-sum(p * math.log2(p) for p in diag if p > 1e-12)),
        "d": d,
    }
    emit(to_json(report), args.out)
    return EXIT_OK


# ------------------------------------------------------------------ main


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 2 without a traceback
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qmchain", description="Entropy bookkeeping for chains of quantum measurements.")
    p.add_argument("--version", action="version", version=f"qmchain {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="simulate a chain spec and report entropies")
    r.add_argument("spec", help="path to a chain spec JSON file")
    r.add_argument("--keep", action="append", metavar="LABELS",
                   help="label set such as A1,A3 (repeatable; ';' separates several)")
    r.add_argument("--venn", action="append", metavar="X,Y,Z",
                   help="three label sets, comma- or ';'-separated (repeatable)")
    r.add_argument("--theorems", action="append", metavar="IDS", help="theorem ids to check, or 'all'")
    r.add_argument("--out", help="write the report here instead of stdout")
    r.add_argument("--bits", action="store_true", help="report entropies in bits")
    r.add_argument("--seed", type=int, default=0, help="recorded in the report")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="check theorems on a seeded random corpus")
    v.add_argument("--theorems", default="all", help="comma list of ids (e.g. T1,T3,markov) or 'all'")
    v.add_argument("--trials", type=int, default=200)
    v.add_argument("--seed", type=int, default=42)
    v.add_argument("--d", default="2,3", help="local dimension(s), e.g. 2 or 2,3")
    v.add_argument("--max-steps", type=int, default=4)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--out")
    v.add_argument("--bits", action="store_true")
    v.set_defaults(func=cmd_verify)

    z = sub.add_parser("zeno", help="Zeno curve, or anti-Zeno Monte Carlo with --anti")
    z.add_argument("--p", type=float, default=1.0)
    z.add_argument("--n", type=int, default=10)
    z.add_argument("--mode", choices=ZENO_MODES, default="deterministic_rotation")
    z.add_argument("--trials", type=int, default=100_000)
    z.add_argument("--seed", type=int, default=0)
    z.add_argument("--anti", action="store_true", help="emit (n, analytic, mc_mean, mc_stderr) for 1..n")
    z.add_argument("--out")
    z.set_defaults(func=cmd_zeno)

    e = sub.add_parser("eraser", help="double-slit screen pattern after a rotated polarization measurement")
    e.add_argument("--theta", type=float, default=math.pi / 4)
    e.add_argument("--n-x", type=int, default=256)
    e.add_argument("--outcome", choices=("0", "1", "none"), default="0")
    e.add_argument("--period", type=float, default=2.0)
    e.add_argument("--separation", type=float, default=0.0)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eraser)

    pr = sub.add_parser("prepare", help="state of Q after conditioning on a first detector outcome")
    pr.add_argument("--angle", type=float, default=math.pi / 4, help="qubit rotation angle of the second step")
    pr.add_argument("--matrix", help="second-step unitary as JSON [[[re,im],...],...]")
    pr.add_argument("--outcome", type=int, default=0)
    pr.add_argument("--out")
    pr.set_defaults(func=cmd_prepare)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (SpecError, UsageError, SettingError, KeyError) as exc:
        sys.stderr.write(f"qmchain: error: {exc}\n")
        return EXIT_USAGE
    except DimensionError as exc:
        sys.stderr.write(f"qmchain: dimension guard: {exc}\n")
        return EXIT_DIM
    except (NumericError, ConvergenceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"qmchain: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except ValueError as exc:
        sys.stderr.write(f"qmchain: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
