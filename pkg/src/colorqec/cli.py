"""Command-line entry point: seeded experiment runs that write CSV files and a
JSON manifest into an output directory.

Exit codes: 0 success, 1 usage error, 2 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import analysis as an
from . import circuits as cx
from . import densesim as ds
from . import ioncompile as ic
from . import kernels, qec
from .code import build_triangular_488
from .pauli import PauliError, PauliString, parse

OUT_ENV = "COLORQEC_OUT"
EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2

CARDINALS = [lab.value for lab in cx.LogicalLabel]
COMPILE_TARGETS = {
    "encode-zero": ("prep", "zero"),
    "encode-one": ("prep", "one"),
    **{lab: ("prep", lab) for lab in CARDINALS if lab not in ("zero", "one")},
    **{g: ("gate", g) for g in ("X_L", "Y_L", "Z_L", "H_L", "K_L")},
    "clifford-13": ("repeat", 10),
}
_TABLE_NAME = {"zero": "encode-zero", "one": "encode-one"}
DEFAULT_ERRORS = ["I", "X2", "Z5", "Y3", "Z2Z5"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------ helpers

def parse_cycles(text: str) -> list:
    """'1..100', '1..100:5' or '1,2,5,10'."""
    try:
        if ".." in text:
            rng, _, step = text.partition(":")
            lo, hi = (int(v) for v in rng.split(".."))
            out = list(range(lo, hi + 1, int(step) if step else 1))
        else:
            out = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad cycle list {text!r}") from None
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("cycle counts must be >= 1")
    return out


def probability(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"probability {v} outside [0, 1]")
    return v


def nonneg_float(text: str) -> float:
    v = float(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def odd_distance(text: str) -> int:
    d = int(text)
    if d < 3 or d % 2 == 0:
        raise argparse.ArgumentTypeError("distance must be odd and >= 3")
    return d


def read_config(path: str) -> dict:
    """Flat ``key = value`` file; '#' starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{num}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def parse_error_label(text: str, n: int) -> PauliString:
    """Dense ('IIIIZII') or sparse ('Z5', 'Z2Z5', 'I') error spec."""
    t = text.strip()
    if len(t.lstrip("+-i")) == n and set(t.lstrip("+-i")) <= set("IXYZ"):
        return parse(t, n)
    return PauliString.from_sparse(n, t)


def write_csv(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for r in rows:
            w.writerow([_cell(v) for v in r])


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(round(float(v), 12) + 0.0)
    return v


def versions() -> dict:
    import scipy

    return {"colorqec": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "kernel_backend": kernels.BACKEND}


class Run:
    def __init__(self, args):
        self.args = args
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files: list = []
        self.results: dict = {}
        self.failures: list = []

    def csv(self, name: str, rows) -> Path:
        p = self.out / name
        write_csv(p, rows)
        self.files.append(name)
        return p

    def text(self, name: str, body: str) -> Path:
        p = self.out / name
        p.write_text(body)
        self.files.append(name)
        return p

    def fail(self, msg: str):
        self.failures.append(msg)
        print(f"VERIFICATION FAILED: {msg}", file=sys.stderr)

    def finish(self) -> int:
        cfg = {k: v for k, v in vars(self.args).items() if k not in ("func",)}
        manifest = {
            "schema": "colorqec-manifest/1",
            "experiment": self.args.command,
            "seed": self.args.seed,
            "config": cfg,
            "versions": versions(),
            "outputs": self.files,
            "results": self.results,
            "status": "fail" if self.failures else "ok",
            "failures": self.failures,
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
        return EXIT_VERIFY if self.failures else EXIT_OK


def _code(args):
    return build_triangular_488(args.d)


def _need_d3(args):
    if args.d != 3:
        raise UsageError(f"{args.command} needs d=3 (dense simulation)")


def _noise(args) -> cx.NoiseModel:
    return cx.NoiseModel(args.depolarizing, args.sigma)



# ------------------------------------------------------------ commands

def cmd_encode(args, run: Run):
    _need_d3(args)
    code = _code(args)
    order = tuple(args.order.split(","))
    names = code.generator_names()
    rows = [["step"] + names + ["ZL", "XL"]]
    for k in range(4):
        st = cx.simulate_dense(cx.encoding_circuit(code, order, args.input, steps=k), noise=_noise(args))
        s = qec.stabilizer_expectations(st, code)
        rows.append([k] + list(s.values) + [s.logical_z, s.logical_x])
    run.csv("encoding_steps.csv", rows)
    circ = cx.encoding_circuit(code, order, args.input)
    run.text("circuit.txt", circ.to_text() + "\n")
    final = cx.simulate_dense(circ, noise=_noise(args))
    if final.is_pure:
        run.csv("state.csv", [["index", "real", "imag"]] + [list(r) for r in ds.dump_state(final)])
    m = an.code_metrics(final, code, "zero")
    run.results["metrics"] = m.to_dict()
    if _noise(args).is_noiseless and m.fidelity < 1 - 1e-9:
        run.fail(f"noiseless encoding fidelity {m.fidelity}")


def cmd_syndrome_table(args, run: Run):
    code = _code(args)
    table = qec.build_syndrome_table(code, args.max_weight, cap=args.cap)
    run.csv("syndrome_table.csv", table.to_csv_rows())
    bad = [lab for lab, s, e in zip(table.labels, table.syndromes, table.errors)
           if any((v < 0) != (not e.commutes(g)) for v, g in zip(s.values, code.generators))]
    run.results["rows"] = len(table)
    if bad:
        run.fail(f"rows disagree with commutation: {bad}")


def cmd_inject(args, run: Run):
    _need_d3(args)
    code = _code(args)
    base = cx.simulate_dense(cx.cardinal_prep(args.state, code), noise=_noise(args))
    rows = [["label"] + code.generator_names() + ["ZL", "XL", "correction", "residual"]]
    for spec in args.error or DEFAULT_ERRORS:
        try:
            err = parse_error_label(spec, code.n)
        except (PauliError, ValueError) as e:
            raise UsageError(f"bad error {spec!r}: {e}") from None
        st = qec.inject(base, err)
        s = qec.stabilizer_expectations(st, code)
        ideal = qec.ideal_syndrome(err, code)
        try:
            corr = qec.lookup_decode(ideal, code)
            resid = qec.residual_class(err, corr, code)
            corr_lab = corr.sparse_label()
        except qec.DecodingError:
            corr_lab, resid = "", "undecodable"
        rows.append([err.sparse_label()] + list(s.values) + [s.logical_z, s.logical_x, corr_lab, resid])
        if _noise(args).is_noiseless and not np.allclose(s.values, ideal.values, atol=1e-9):
            run.fail(f"simulated syndrome of {spec} differs from the commutation oracle")
    run.csv("inject.csv", rows)


def cmd_mc_classify(args, run: Run):
    code = _code(args)
    table = qec.build_syndrome_table(code, args.max_weight, cap=args.cap)
    if args.error not in table.labels:
        raise UsageError(f"error {args.error!r} not in the reference table")
    refs = table.scaled(args.magnitude)
    pts = qec.mc_curve(args.error, refs, args.cycles, args.samples, args.seed, args.workers)
    cols = ["n_cycles", "trials", "success_rate", "wilson_low", "wilson_high"]
    run.csv("mc_classify.csv", [cols] + [[p[c] for c in cols] for p in pts])
    crossing = next((p["n_cycles"] for p in pts if p["success_rate"] >= 0.99), None)
    run.results["first_cycles_at_0.99"] = crossing


def cmd_cardinal(args, run: Run):
    _need_d3(args)
    code = _code(args)
    cols = ["label", "X_L", "Y_L", "Z_L", "L", "avg_stabilizer", "fidelity", "p_cs", "fidelity_in_cs",
            "witness"]
    rows = [cols]
    for lab in CARDINALS:
        st = cx.simulate_dense(cx.cardinal_prep(lab, code), noise=_noise(args))
        m = an.code_metrics(st, code, lab)
        rows.append([lab, *m.bloch, m.bloch_length, m.avg_stabilizer, m.fidelity, m.p_cs,
                     m.fidelity_in_cs, m.witness])
        if _noise(args).is_noiseless and m.fidelity < 1 - 1e-9:
            run.fail(f"{lab}: noiseless fidelity {m.fidelity}")
    run.csv("cardinal.csv", rows)


def _series_csv(rows):
    cols = ["n_gate", "X_L", "Y_L", "Z_L", "L", "avg_stabilizer"]
    return [cols] + [[r[c] for c in cols] for r in rows]


def cmd_gate_repeat(args, run: Run):
    _need_d3(args)
    code = _code(args)
    rows = an.gate_repeat_series(code, args.n_gates, args.depolarizing, args.sigma,
                                 start=args.start, gate=args.gate)
    run.csv("gate_repeat.csv", _series_csv(rows))
    if _noise(args).is_noiseless and args.gate == "X_L" and args.start == "minus_y":
        for r in rows:
            want = -1 if r["n_gate"] % 2 == 0 else 1
            if abs(r["Y_L"] - want) > 1e-9 or abs(r["X_L"]) > 1e-9 or abs(r["Z_L"]) > 1e-9:
                run.fail(f"noiseless Y_L series broken at gate {r['n_gate']}")
                break


def cmd_decay(args, run: Run):
    _need_d3(args)
    code = _code(args)
    p = args.depolarizing
    if args.calibrate:
        try:
            p = an.calibrate_depolarizing(code, args.target_loss, args.n_gates)
        except ValueError as e:
            run.fail(str(e))
            return
    rows = an.gate_repeat_series(code, args.n_gates, p, args.sigma)
    run.csv("decay_series.csv", _series_csv(rows))
    try:
        fit = an.decay_fit(rows)
    except ValueError as e:
        run.fail(f"fit failed: {e}")
        return
    B = "inf" if fit.B == float("inf") else fit.B
    run.csv("decay_fit.csv", [["depolarizing", "A", "B", "r_squared", "loss_per_gate"],
                              [p, fit.A, B, fit.r_squared, fit.loss_per_step]])
    run.results.update({"depolarizing": p, "A": fit.A, "B": B, "r_squared": fit.r_squared,
                        "loss_per_gate": fit.loss_per_step})


def compile_target(name: str, code):
    kind, arg = COMPILE_TARGETS[name]
    if kind == "prep":
        return cx.cardinal_prep(arg, code)
    if kind == "gate":
        return cx.transversal_gate(arg, code)
    return cx.gate_repeat_circuit(code, arg)


def cmd_compile(args, run: Run):
    code = build_triangular_488(3)
    targets = list(COMPILE_TARGETS) if args.target == "all" else [args.target]
    qmap = None if args.map is None else ic.parse_map(args.map)
    cols = ["target", "ms_gates", "global_rotations", "ac_stark", "addressed_resonant", "total",
            "table_total", "match", "fidelity"]
    rows = [cols]
    for t in targets:
        circ = compile_target(t, code)
        try:
            prog = ic.compile_circuit(circ, qmap)
        except ic.CompileError as e:
            raise UsageError(str(e)) from None
        cnt = ic.resource_count(prog)
        table = _TABLE_NAME.get(t, t)
        ref = ic.TABLE_I.get(table)
        mism = ic.check_against_table(table, cnt) if ref else []
        fid = ""
        if circ.prep is not None:
            ideal = cx.simulate_dense(circ)
            fid = ds.overlap_up_to_phase(ic.simulate_pulses(prog), ideal)
            if fid < 1 - 1e-9:
                run.fail(f"{t}: compiled program fidelity {fid}")
        rows.append([t, *cnt.as_tuple(), ref[4] if ref else "", "" if not ref else not mism, fid])
        if mism:
            run.fail(f"{t}: counts differ from the tabulated row {mism}")
        if len(targets) == 1:
            run.text("pulses.txt", prog.to_text(args.expand) + "\n")
            run.results["addressed_per_qubit"] = prog.addressed_per_qubit()
    run.csv("resources.csv", rows)
    for r in rows[1:]:
        print("  ".join(f"{c}={v}" for c, v in zip(cols, r)))


def cmd_decode_sweep(args, run: Run):
    if args.d > 5:
        raise UsageError("decode-sweep is limited to d <= 5")
    code = _code(args)
    res = qec.decode_sweep(code, args.max_weight)
    rows = [["weight", "errors", "corrected"]]
    for w in sorted(res.by_weight):
        rows.append([w, *res.by_weight[w]])
    run.csv("decode_sweep.csv", rows)
    run.results.update({"errors": res.n_errors, "corrected": res.corrected})
    if res.failures:
        run.fail(f"{len(res.failures)} errors not corrected, e.g. {res.failures[:5]}")


# ------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="colorqec", description="Color-code simulation experiments.")
    p.add_argument("--version", action="version", version=f"colorqec {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.add_argument("--config", help="flat key = value file; flags override it")
        sp.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./colorqec_out/{name})")
        sp.add_argument("--seed", type=int, default=0, help="RNG seed (recorded in the manifest)")
        sp.set_defaults(func=func)
        return sp

    def noise(sp):
        sp.add_argument("--depolarizing", type=probability, default=0.0,
                        help="per-qubit depolarizing probability after each gate")
        sp.add_argument("--sigma", type=nonneg_float, default=0.0,
                        help="collective dephasing spread (rad) after each gate")

    def dist(sp, default=3):
        sp.add_argument("--d", type=odd_distance, default=default, help="code distance")

    sp = add("encode", cmd_encode, "encode |0>_L, dump the state and step-wise stabilizers")
    dist(sp)
    noise(sp)
    sp.add_argument("--order", default="red,blue,green", help="plaquette order")
    sp.add_argument("--input", default=cx.DEFAULT_INPUT, help="input basis state")

    sp = add("syndrome-table", cmd_syndrome_table, "reference syndromes of all correctable errors")
    dist(sp)
    sp.add_argument("--max-weight", type=int, default=None)
    sp.add_argument("--cap", type=int, default=10_000, help="maximum number of rows")

    sp = add("inject", cmd_inject, "inject Pauli errors into an encoded state")
    dist(sp)
    noise(sp)
    sp.add_argument("--state", default="zero", choices=CARDINALS)
    sp.add_argument("--error", action="append", help="error, e.g. Z5, Z2Z5 or IIIIZII (repeatable)")

    sp = add("mc-classify", cmd_mc_classify, "Monte-Carlo success rate of trace-distance classification")
    dist(sp)
    sp.add_argument("--error", default="Y3", help="true error label")
    sp.add_argument("--magnitude", type=probability, default=qec.MC_REFERENCE_MAGNITUDE,
                    help="reference stabilizer magnitude")
    sp.add_argument("--cycles", type=parse_cycles, default="1..100", help="e.g. 1..100 or 1,10,20")
    sp.add_argument("--samples", type=int, default=5000)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--max-weight", type=int, default=None)
    sp.add_argument("--cap", type=int, default=10_000)

    sp = add("cardinal", cmd_cardinal, "prepare the six cardinal states and report metrics")
    dist(sp)
    noise(sp)

    sp = add("gate-repeat", cmd_gate_repeat, "repeated logical gates on a prepared state")
    dist(sp)
    noise(sp)
    sp.add_argument("--n-gates", type=int, default=10)
    sp.add_argument("--start", default="minus_y", choices=CARDINALS)
    sp.add_argument("--gate", default="X_L", choices=["X_L", "Y_L", "Z_L", "H_L", "K_L"])

    sp = add("decay", cmd_decay, "fit the decay of |<Y_L>| under repeated X_L gates")
    dist(sp)
    noise(sp)
    sp.add_argument("--n-gates", type=int, default=10)
    sp.add_argument("--calibrate", action="store_true", help="search the depolarizing strength")
    sp.add_argument("--target-loss", type=probability, default=an.CALIBRATION["loss_per_gate"])

    sp = add("compile", cmd_compile, "compile to native ion-trap pulses and count resources")
    sp.add_argument("--target", default="encode-one", choices=list(COMPILE_TARGETS) + ["all"])
    sp.add_argument("--map", default=None, help="qubit:ion pairs, e.g. 1:7,2:2,...")
    sp.add_argument("--expand", action="store_true", help="expand decouple/recouple macros")

    sp = add("decode-sweep", cmd_decode_sweep, "exhaustive decoder verification via tableau")
    dist(sp)
    sp.add_argument("--max-weight", type=int, default=None)
    return p


def _subparser(parser, name):
    for act in parser._actions:
        if isinstance(act, argparse._SubParsersAction):
            return act.choices.get(name)
    return None


def parse_args(argv=None):
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config and argv and not argv[0].startswith("-"):
        sp = _subparser(parser, argv[0])
        if sp is not None:
            cfg = read_config(known.config)
            dests = {a.dest for a in sp._actions}
            unknown = sorted(set(cfg) - dests - {"config"})
            if unknown:
                raise UsageError(f"unknown config keys: {unknown}")
            # string defaults pass through each option's type converter
            sp.set_defaults(**{k: v for k, v in cfg.items() if k != "config"})
            for a in sp._actions:
                if a.dest in cfg and isinstance(a, argparse._StoreTrueAction):
                    sp.set_defaults(**{a.dest: cfg[a.dest].lower() in ("1", "true", "yes", "on")})
    args = parser.parse_args(argv)
    if args.out is None:
        base = os.environ.get(OUT_ENV)
        args.out = str(Path(base) / args.command) if base else str(Path("colorqec_out") / args.command)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        run = Run(args)
        args.func(args, run)
    except UsageError as e:
        print(f"colorqec: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    code = run.finish()
    print(f"wrote {', '.join(run.files + ['manifest.json'])} to {run.out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
