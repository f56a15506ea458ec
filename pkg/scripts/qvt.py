"""
Command-line front end for the QVT laboratory.

Subcommands
- generate       write random QVT circuits as JSON files
- transpile      compile one circuit at a given optimization level
- simulate       ideal or noisy output distribution of one circuit
- analyze        heavy sets and heavy-output probabilities of circuits
- estimate       scalable success estimate, passing threshold, passing width
- bootstrap      confidence bounds for recorded heavy counts
- experiment     full pipeline for one (N, model, eps) point
- sweep          resumable grid of experiments with threshold interpolation
- combinatorics  two-qubit gate counts after block combination
- figdata        CSV tables behind the standard figures

Machine-readable results go to stdout; progress and the effective
arguments go to stderr. Exit codes: 0 ok, 1 usage, 2 data, 3 numeric.
"""

from __future__ import annotations

import argparse
import functools
import json
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import yaml
from src import figdata
from src.combinatorics import savings_table
from src.confidence import (
    TWO_SIGMA,
    ExperimentData,
    ci_bootstrap,
    ci_original,
    crossing_prefix,
    estimate_circuit_fidelity,
    passing_curve,
)
from src.errors import EXIT_OK, EXIT_USAGE, UsageError, exit_code_for
from src.estimate import (
    MODELS,
    get_model,
    passing_qubits,
    passing_threshold,
    resolve_model,
    scalable_success,
)
from src.experiments import (
    DEFAULT_EPS,
    SweepSpec,
    generate_circuits,
    log,
    run_experiment,
    run_sweep,
    transpile_config,
    write_outcome,
)
from src.heavy import diagnostics, heavy_set
from src.model import QvtCircuit
from src.parsers import (
    load_any_circuit,
    load_circuit,
    load_heavy_counts,
    load_simulation_records,
)
from src.sampling import RngHandle
from src.simulate import NoiseSpec, density_run, ideal_state, statevector_run
from src.transpile import NativeGate, OptLevel, TranspileConfig, transpile

# Repo root (for locating preset files regardless of CWD)
ROOT = Path(__file__).resolve().parent.parent

LEVELS = [lvl.value for lvl in OptLevel]
CONFIGURABLE = ("sweep", "experiment")
FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig10")

FIG_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "fig2": {"n_list": list(range(2, 10)), "circuits": 200},
    "fig3": {"n_list": [3, 4, 5, 6], "depth_factors": [1, 2, 3, 4, 5, 6], "circuits": 100},
    "fig4": {"n_list": list(range(2, 17)), "trials": 0},
    "fig5": {"tols": [float(t) for t in np.logspace(-5, -1, 9)], "samples": 10_000},
    "fig6": {"samples": 10_000},
    "fig7": {
        "models": ["tq_depolarizing", "semi_realistic"],
        "n_list": list(range(2, 11)),
        "eps_list": list(DEFAULT_EPS),
    },
    "fig8": {"n_list": list(range(2, 10)), "circuits": 1000},
    "fig10": {
        "n_c_list": [10, 50, 100, 250, 500, 1000],
        "n_s_list": [1, 10, 50, 100, 1000],
        "reps": 500,
    },
}


class QvtArgumentParser(argparse.ArgumentParser):
    """argparse parser whose errors surface as UsageError instead of exiting 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _add_noise_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--model",
        default=None,
        help=f"Error model; one of: {', '.join(sorted(MODELS))}",
    )
    p.add_argument("--eps", type=float, default=0.0, help="Error magnitude for --model")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="YAML file with option defaults")
    p.add_argument(
        "--preset",
        type=str,
        default=None,
        help="Name of preset in configs/presets/<name>.yaml. Applied before --config and CLI.",
    )
    p.add_argument("--seed", type=int, default=0, help="Master seed")
    p.add_argument("--out", type=Path, default=None, help="Output directory")
    p.add_argument(
        "--threads", type=int, default=None, help="Worker processes (default: $QVT_THREADS or 1)"
    )
    p.add_argument(
        "--mirror",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="Try mirrored blocks during synthesis at the high level",
    )
    p.add_argument("--quiet", action="store_true", help="Disable progress bars")


def _build_parser() -> Tuple[QvtArgumentParser, Any]:
    p = QvtArgumentParser(prog="qvt", description="Quantum volume test laboratory")
    sub = p.add_subparsers(dest="command", required=True, parser_class=QvtArgumentParser)

    g = sub.add_parser("generate", help="Write random QVT circuits")
    g.add_argument("--n", type=int, required=True, help="Number of qubits (>= 2)")
    g.add_argument("--count", type=int, default=1, help="Number of circuits")
    g.add_argument("--seed", type=int, default=0, help="Master seed")
    g.add_argument("--out", type=Path, default=Path("circuits"), help="Output directory")

    t = sub.add_parser("transpile", help="Compile one circuit")
    t.add_argument("--circuit", type=Path, required=True, help="QVT circuit JSON")
    t.add_argument("--level", choices=LEVELS, default=OptLevel.MEDIUM.value)
    t.add_argument("--tol", type=float, default=0.0, help="Approximation tolerance (high level)")
    t.add_argument("--mirror", action=argparse.BooleanOptionalAction, default=False)
    t.add_argument("--arb-angle", action="store_true", help="Native arbitrary-angle ZZ gate")
    t.add_argument("--out", type=Path, default=None, help="Output file (default: stdout)")

    s = sub.add_parser("simulate", help="Output distribution of one circuit")
    s.add_argument("--circuit", type=Path, required=True, help="QVT or compiled circuit JSON")
    _add_noise_args(s)
    s.add_argument("--level", choices=LEVELS, default=OptLevel.HIGH.value)
    s.add_argument("--mirror", action=argparse.BooleanOptionalAction, default=True)
    s.add_argument("--out", type=Path, default=None, help="Output file (default: stdout)")

    a = sub.add_parser("analyze", help="Heavy-output analysis of circuits")
    a.add_argument("circuits", type=Path, nargs="+", help="QVT circuit JSON files")
    _add_noise_args(a)
    a.add_argument("--level", choices=LEVELS, default=OptLevel.HIGH.value)
    a.add_argument("--mirror", action=argparse.BooleanOptionalAction, default=True)
    a.add_argument("--heavy-set", action="store_true", help="Include the heavy bitstrings")

    e = sub.add_parser("estimate", help="Scalable success estimator")
    e.add_argument("--model", required=True, help="Error model name")
    e.add_argument("--n", type=int, default=None, help="Number of qubits")
    e.add_argument("--eps", type=float, default=None, help="Error magnitude")
    e.add_argument("--opt", choices=LEVELS, default=OptLevel.HIGH.value)
    e.add_argument("--method", choices=["avg", "proc"], default="avg")
    e.add_argument("--threshold", action="store_true", help="Solve for the passing eps at --n")
    e.add_argument("--max-qubits", type=int, default=None, help="Largest passing N up to this")

    b = sub.add_parser("bootstrap", help="Confidence bounds for heavy counts")
    b.add_argument("--data", type=Path, required=True, help="heavy_counts JSONL")
    b.add_argument("--method", choices=["original", "bootstrap", "both"], default="both")
    b.add_argument("--n-b", type=int, default=1000, help="Bootstrap replicates")
    b.add_argument("--confidence", type=float, default=TWO_SIGMA, help="Percent level")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--n", type=int, default=None, help="Width, for the circuit-fidelity estimate")
    b.add_argument("--curve", type=Path, default=None, help="Write the passing curve CSV here")
    b.add_argument("--curve-step", type=int, default=1)

    x = sub.add_parser("experiment", help="One end-to-end QVT experiment")
    x.add_argument("--n", type=int, default=None, help="Number of qubits")
    x.add_argument("--circuits", type=int, default=100, help="Number of circuits n_c")
    x.add_argument("--shots", type=int, default=100, help="Shots per circuit n_s")
    x.add_argument("--model", default="tq_depolarizing", help="Error model name")
    x.add_argument("--eps", type=float, default=0.0, help="Error magnitude")
    x.add_argument("--level", choices=LEVELS, default=OptLevel.HIGH.value)
    x.add_argument("--arb-angle", action="store_true", help="Native arbitrary-angle ZZ gate")
    x.add_argument("--n-b", type=int, default=1000, help="Bootstrap replicates")
    _add_run_args(x)

    w = sub.add_parser("sweep", help="Grid of experiments")
    w.add_argument("--n-list", type=int, nargs="+", default=None)
    w.add_argument("--models", nargs="+", default=None)
    w.add_argument("--eps-list", type=float, nargs="+", default=list(DEFAULT_EPS))
    w.add_argument("--levels", choices=LEVELS, nargs="+", default=[OptLevel.HIGH.value])
    w.add_argument("--circuits", type=int, default=100, help="Circuits per point")
    _add_run_args(w)

    c = sub.add_parser("combinatorics", help="Gate counts after block combination")
    c.add_argument("--n-list", type=int, nargs="+", default=list(range(2, 17)))
    c.add_argument("--trials", type=int, default=0, help="Monte Carlo trials per N")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", type=Path, default=None, help="CSV file (default: stdout)")

    f = sub.add_parser("figdata", help="CSV data behind a figure")
    f.add_argument("figure", choices=FIGURES)
    f.add_argument("--n-list", type=int, nargs="+", default=None)
    f.add_argument("--circuits", type=int, default=None)
    f.add_argument("--depth-factors", type=int, nargs="+", default=None)
    f.add_argument("--trials", type=int, default=None)
    f.add_argument("--samples", type=int, default=None)
    f.add_argument("--tols", type=float, nargs="+", default=None)
    f.add_argument("--models", nargs="+", default=None)
    f.add_argument("--eps-list", type=float, nargs="+", default=None)
    f.add_argument("--opt", choices=LEVELS, default=OptLevel.HIGH.value)
    f.add_argument("--pool", type=Path, default=None, help="simulations JSONL (fig10)")
    f.add_argument("--n-c-list", type=int, nargs="+", default=None)
    f.add_argument("--n-s-list", type=int, nargs="+", default=None)
    f.add_argument("--reps", type=int, default=None)
    f.add_argument("--n-b", type=int, default=1000)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", type=Path, default=None, help="CSV file (default: stdout)")
    f.add_argument("--quiet", action="store_true")

    return p, sub


def _load_yaml(path: Path, what: str) -> Dict[str, Any]:
    if not path.exists():
        raise SystemExit(f"{what} file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            loaded = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise SystemExit(f"failed to load {what} {path}: {e}")
    if not isinstance(loaded, dict):
        raise SystemExit(f"{what} file must parse to a mapping/dict: {path}")
    return loaded


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """Parse CLI args with optional preset and YAML config defaults.

    Flow (sweep and experiment only):
    1) Parse once to detect the subcommand, --preset and --config
    2) Apply the preset, then the config, as subcommand defaults
    3) Parse again so explicit CLI flags override both
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    p, sub = _build_parser()
    prelim, _ = p.parse_known_args(argv)
    if prelim.command in CONFIGURABLE:
        target = sub.choices[prelim.command]
        if prelim.preset:
            preset_path = ROOT / "configs" / "presets" / f"{prelim.preset}.yaml"
            target.set_defaults(**_load_yaml(preset_path, "preset"))
        if prelim.config is not None:
            target.set_defaults(**_load_yaml(prelim.config, "config"))
    args, unknown = p.parse_known_args(argv)
    if unknown:
        raise UsageError(f"unrecognized arguments: {' '.join(unknown)}")
    return args


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    log("out", f"wrote {out}")


def _emit_json(obj: Any) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=str))


def _noise(args: argparse.Namespace) -> NoiseSpec:
    if args.model is None:
        if args.eps:
            raise UsageError("--eps needs --model")
        return NoiseSpec()
    return resolve_model(get_model(args.model), args.eps)


def cmd_generate(args: argparse.Namespace) -> None:
    if args.n < 2:
        raise UsageError("QVT circuits need N >= 2")
    if args.count < 0:
        raise UsageError("--count must be non-negative")
    paths = generate_circuits(args.n, args.count, args.seed, args.out)
    log("generate", f"wrote {len(paths)} circuits to {args.out}")
    _emit_json({"count": len(paths), "paths": [str(p) for p in paths]})


def cmd_transpile(args: argparse.Namespace) -> None:
    try:
        cfg = TranspileConfig(
            level=args.level,
            tol=args.tol,
            mirror=args.mirror,
            native_two_qubit=NativeGate.ARB_ANGLE if args.arb_angle else NativeGate.CNOT,
        )
    except ValueError as e:
        raise UsageError(str(e)) from e
    compiled = transpile(load_circuit(args.circuit), cfg)
    log(
        "transpile",
        f"{compiled.two_qubit_count} two-qubit gates, {compiled.sq_count} single-qubit gates",
    )
    _emit(compiled.to_json() + "\n", args.out)


def _compile_for(circuit: QvtCircuit, args: argparse.Namespace):
    level = OptLevel(args.level)
    return transpile(circuit, transpile_config(level, args.eps, mirror=args.mirror))


def cmd_simulate(args: argparse.Namespace) -> None:
    circuit = load_any_circuit(args.circuit)
    noise = _noise(args)
    if noise.is_noiseless:
        dist = statevector_run(circuit)
    else:
        compiled = _compile_for(circuit, args) if isinstance(circuit, QvtCircuit) else circuit
        dist = density_run(compiled, noise)
    _emit(dist.model_dump_json() + "\n", args.out)


def cmd_analyze(args: argparse.Namespace) -> None:
    noise = _noise(args)
    outputs: List[np.ndarray] = []
    states: List[np.ndarray] = []
    heavies: List[float] = []
    for path in args.circuits:
        circuit = load_circuit(path)
        psi = ideal_state(circuit)
        analysis = heavy_set(np.abs(psi) ** 2)
        if not noise.is_noiseless:
            analysis = analysis.with_noisy(density_run(_compile_for(circuit, args), noise))
        row = analysis.model_dump(exclude=None if args.heavy_set else {"heavy_set"})
        row.update(path=str(path), seed=circuit.seed, n=circuit.width)
        print(json.dumps(row, sort_keys=True))
        outputs.append(np.abs(psi) ** 2)
        states.append(psi)
        heavies.append(analysis.ideal_heavy_prob)
    if len(args.circuits) > 1 and len({s.size for s in states}) == 1:
        n = states[0].size.bit_length() - 1
        diag = diagnostics(np.concatenate(outputs), states, n, heavies)
        log("analyze", f"mean ideal heavy {np.mean(heavies):.6f}; {diag.model_dump_json()}")


def cmd_estimate(args: argparse.Namespace) -> None:
    spec = get_model(args.model)
    out: Dict[str, Any] = {"model": spec.name, "opt": args.opt, "method": args.method}
    if args.eps is None and not args.threshold:
        raise UsageError("estimate needs --eps or --threshold")
    if args.n is None and (args.threshold or args.max_qubits is None):
        raise UsageError("estimate needs --n")
    if args.eps is not None and args.n is not None:
        res = scalable_success(spec, args.eps, args.n, args.opt, args.method)
        out["estimate"] = res.model_dump(mode="json") | {"passed": res.passed}
    if args.threshold:
        out["threshold"] = passing_threshold(spec, args.n, args.opt, args.method)
    if args.max_qubits is not None:
        if args.eps is None:
            raise UsageError("--max-qubits needs --eps")
        out["passing_qubits"] = passing_qubits(
            spec, args.eps, args.opt, args.method, n_max=args.max_qubits
        )
    _emit_json(out)


def cmd_bootstrap(args: argparse.Namespace) -> None:
    data = ExperimentData(per_circuit=tuple(load_heavy_counts(args.data)))
    rng = RngHandle(args.seed)
    out: Dict[str, Any] = {"n_c": data.n_c, "h_hat": data.h_hat}
    if args.method in ("original", "both"):
        if args.method == "both" and not data.uniform_shots:
            log("bootstrap", "shots differ between circuits; skipping the original bound")
        else:
            out["original"] = ci_original(data).model_dump(mode="json")
    if args.method in ("bootstrap", "both"):
        out["bootstrap"] = ci_bootstrap(
            data, n_b=args.n_b, confidence=args.confidence, rng=rng
        ).model_dump(mode="json")
    if args.n is not None:
        fid = estimate_circuit_fidelity(data, args.n)
        out["circuit_fidelity"] = {"value": fid.value, "clamped": fid.clamped}
    if args.curve is not None:
        curve = passing_curve(data, step=args.curve_step, n_b=args.n_b, rng=rng)
        frame = pd.DataFrame(curve)
        args.curve.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(args.curve, index=False)
        out["crossing"] = {m: crossing_prefix(curve, m) for m in ("original", "bootstrap")}
        log("bootstrap", f"wrote passing curve to {args.curve}")
    _emit_json(out)


def cmd_experiment(args: argparse.Namespace) -> None:
    if args.n is None:
        raise UsageError("experiment needs --n")
    outcome = run_experiment(
        args.n,
        args.circuits,
        args.shots,
        args.model,
        args.eps,
        OptLevel(args.level),
        args.seed,
        mirror=args.mirror,
        arb_angle=args.arb_angle,
        n_b=args.n_b,
        threads=args.threads,
        quiet=args.quiet,
    )
    if args.out is not None:
        write_outcome(outcome, Path(args.out))
        log("experiment", f"wrote results to {args.out}")
    _emit_json(outcome.summary())


def cmd_sweep(args: argparse.Namespace) -> None:
    if not args.n_list or not args.models:
        raise UsageError("sweep needs --n-list and --models (or a preset/config)")
    try:
        spec = SweepSpec(
            n_list=tuple(args.n_list),
            models=tuple(args.models),
            eps_list=tuple(float(e) for e in args.eps_list),
            levels=tuple(args.levels),
            circuits=args.circuits,
            seed=args.seed,
            out_dir=args.out or Path("results/sweep"),
            mirror=args.mirror,
        )
    except ValueError as e:
        raise UsageError(str(e)) from e
    run_sweep(spec, threads=args.threads, quiet=args.quiet)
    sys.stdout.write((Path(spec.out_dir) / "thresholds.csv").read_text(encoding="utf-8"))


def cmd_combinatorics(args: argparse.Namespace) -> None:
    rows = savings_table(list(args.n_list), args.trials, RngHandle(args.seed))
    frame = pd.DataFrame([r.model_dump() for r in rows])
    _emit(frame.to_csv(index=False), args.out)


def _fig_option(args: argparse.Namespace, name: str) -> Any:
    value = getattr(args, name)
    return FIG_DEFAULTS[args.figure].get(name) if value is None else value


def cmd_figdata(args: argparse.Namespace) -> None:
    fig = args.figure
    opt = functools.partial(_fig_option, args)
    if fig == "fig2":
        frame = figdata.fig2_ideal_heavy(opt("n_list"), opt("circuits"), args.seed, args.quiet)
    elif fig == "fig3":
        frame = figdata.fig3_depth(
            opt("n_list"), opt("depth_factors"), opt("circuits"), args.seed, args.quiet
        )
    elif fig == "fig4":
        frame = figdata.fig4_combinatorics(opt("n_list"), opt("trials"), args.seed)
    elif fig == "fig5":
        frame = figdata.fig5_block_approximation(opt("tols"), opt("samples"), args.seed)
    elif fig == "fig6":
        frame = figdata.fig6_theta_total(opt("samples"), args.seed)
    elif fig == "fig7":
        frame = figdata.fig7_estimates(opt("models"), opt("n_list"), opt("eps_list"), args.opt)
    elif fig == "fig8":
        frame = figdata.fig8_moments(opt("n_list"), opt("circuits"), args.seed, args.quiet)
    else:
        if args.pool is None:
            raise UsageError("fig10 needs --pool (simulations JSONL)")
        pool = [r.noisy_heavy_prob for r in load_simulation_records(args.pool)]
        if not pool:
            raise UsageError(f"no records in {args.pool}")
        frame = figdata.fig10_coverage(
            pool,
            float(np.mean(pool)),
            opt("n_c_list"),
            opt("n_s_list"),
            opt("reps"),
            args.seed,
            n_b=args.n_b,
            quiet=args.quiet,
        )
    _emit(frame.to_csv(index=False), args.out)


COMMANDS: Dict[str, Callable[[argparse.Namespace], None]] = {
    "generate": cmd_generate,
    "transpile": cmd_transpile,
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "estimate": cmd_estimate,
    "bootstrap": cmd_bootstrap,
    "experiment": cmd_experiment,
    "sweep": cmd_sweep,
    "combinatorics": cmd_combinatorics,
    "figdata": cmd_figdata,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as e:
        # --help exits 0; config problems carry a message
        if e.code in (None, 0):
            return EXIT_OK
        print(f"[qvt] error: {e.code}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as e:
        print(f"[qvt] error: {e}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(vars(args), sort_keys=True, default=str), file=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except KeyboardInterrupt:
        log(args.command, "interrupted; completed points are kept on disk")
        return 130
    except Exception as e:  # noqa: BLE001
        print(f"[qvt {args.command}] error: {e}", file=sys.stderr)
        return exit_code_for(e)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
