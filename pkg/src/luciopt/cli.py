"""``luciopt`` command line: sample -> build -> optimize -> analyze / render / export.

Commands talk through files only.  Each one writes ``<out>.manifest.json``
recording its argv, parameters, input and output hashes, so that
``luciopt replay`` can rerun it and compare.  Exit codes: 0 ok, 2 infeasible,
3 invalid input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

EXIT_OK, EXIT_INFEASIBLE, EXIT_INVALID = 0, 2, 3


class InvalidInput(Exception):
    pass


def _version() -> str:
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:  # not installed: running from a source tree
        return "0+source"


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    command: str
    argv: list
    inputs: dict = field(default_factory=dict)  # path -> sha256
    parameters: dict = field(default_factory=dict)
    version: str = field(default_factory=_version)
    outputs: dict = field(default_factory=dict)  # path -> sha256
    volatile: list = field(default_factory=list)  # outputs holding wall-clock data

    def add_input(self, path) -> None:
        self.inputs[str(path)] = _sha256(path)

    def add_output(self, path, volatile: bool = False) -> None:
        self.outputs[str(path)] = _sha256(path)
        if volatile:
            self.volatile.append(str(path))

    def write(self, path) -> Path:
        p = Path(str(path) + ".manifest.json")
        p.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        return p

    @classmethod
    def read(cls, path) -> "RunManifest":
        return cls(**json.loads(Path(path).read_text()))


def _write(path, text: str) -> Path:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True)
    p.write_text(text)
    return p


def _load_config(path):
    from .lattice import DropoutConfig

    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from exc
    try:
        return DropoutConfig.from_json(text)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc


def _load_diagram(path):
    from .heuristic import DiagramError, LuciDiagram

    try:
        return LuciDiagram.from_text(Path(path).read_text())
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from exc
    except (DiagramError, ValueError, KeyError) as exc:
        raise InvalidInput(f"bad diagram {path}: {exc}") from exc


def _instance(cfg, legacy: bool = False):
    from .gauge import NoLogicalError, PatchDestroyedError
    from .heuristic import Instance
    from .shapes import ShapeError

    try:
        return Instance.from_config(cfg.d, cfg, legacy=legacy)
    except (PatchDestroyedError, NoLogicalError, ShapeError, ValueError) as exc:
        raise InvalidInput(f"unusable dropout configuration: {exc}") from exc


# --- sample -----------------------------------------------------------------------

def _sample_one(job) -> tuple:
    from .lattice import build_patch, sample_dropout

    d, qr, cr, seed, out = job
    cfg = sample_dropout(build_patch(d), qr, cr, seed)
    _write(out, cfg.to_json() + "\n")
    return out


def cmd_sample(args, man: RunManifest) -> int:
    if not (0 <= args.qubit_rate <= 1 and 0 <= args.coupler_rate <= 1):
        raise InvalidInput("rates must lie in [0, 1]")
    if args.count == 1:
        jobs = [(args.d, args.qubit_rate, args.coupler_rate, args.seed, args.out)]
    else:
        # ensemble member k uses seed + k
        jobs = [(args.d, args.qubit_rate, args.coupler_rate, args.seed + k,
                 os.path.join(args.out, f"config_{args.seed + k:05d}.json"))
                for k in range(args.count)]
    man.parameters.update(d=args.d, qubit_rate=args.qubit_rate, coupler_rate=args.coupler_rate,
                          seed=args.seed, count=args.count)
    for out in _map(_sample_one, jobs, args.jobs):
        man.add_output(out)
    return EXIT_OK


def _map(fn, jobs, n_jobs: int):
    if n_jobs <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, jobs))


# --- build ------------------------------------------------------------------------

def cmd_build(args, man: RunManifest) -> int:
    from .gauge import code_distance
    from .heuristic import DiagramError, default_diagram
    from .lattice import DropoutConfig

    if args.config:
        cfg = _load_config(args.config)
        man.add_input(args.config)
    else:
        cfg = DropoutConfig(args.d)
    inst = _instance(cfg, legacy=args.legacy_gauges)
    try:
        diag = default_diagram(inst, T=args.rounds)
    except DiagramError as exc:
        print(f"no default diagram: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    man.parameters.update(d=cfg.d, legacy_gauges=args.legacy_gauges, rounds=args.rounds)
    man.add_output(_write(args.out, diag.to_text()))
    if args.operators_out:
        man.add_output(_write(args.operators_out, inst.code.to_json() + "\n"))
    if args.report_distance:
        dist = {b: code_distance(inst.code, b) for b in ("X", "Z")}
        print(json.dumps({"distance": dist}, sort_keys=True))
    return EXIT_OK


# --- optimize ---------------------------------------------------------------------

def _optimize_one(job) -> dict:
    from .heuristic import DiagramError, default_diagram
    from .ilpmodel import Objective, build_model, hint_from_diagram
    from .solver import SolveParams, feasibility, solve

    src, out, trace_out, opts = job
    if src.endswith(".json"):
        inst = _instance(_load_config(src), legacy=opts["legacy_gauges"])
        try:
            seed_diag = default_diagram(inst, T=opts["rounds"])
        except DiagramError:
            seed_diag = None
    else:
        seed_diag = _load_diagram(src)
        inst = seed_diag.instance
        if seed_diag.T != opts["rounds"]:
            seed_diag = None
    params = SolveParams(time_limit=opts["time_limit"], seed=opts["seed"],
                         emit_trace=trace_out is not None, work_limit=opts["work_limit"],
                         backend=opts["backend"])
    if opts["feasibility"]:
        model = build_model(inst, opts["rounds"], None, opts["time"])
        sol = feasibility(model, params)
    else:
        obj = Objective(opts["alpha"], opts["beta"], opts["gamma"], opts["delta"], opts["mode"])
        model = build_model(inst, opts["rounds"], obj, opts["time"])
        hint = None
        if seed_diag is not None and seed_diag.topology == opts["time"]:
            try:
                hint = hint_from_diagram(model, seed_diag)
            except ValueError:
                hint = None
            if hint is not None and not model.is_feasible(hint):
                hint = None
        params = SolveParams(params.time_limit, params.seed, hint, params.emit_trace,
                             params.work_limit, params.backend)
        sol = solve(model, params)
    res = {"source": src, "status": sol.status, "objective": sol.objective, "bound": sol.bound,
           "backend": sol.backend, "witness": list(sol.witness), "outputs": []}
    if sol.assignment is not None and out:
        diag = model.decode(sol.assignment)
        _write(out, diag.to_text())
        res["outputs"].append(out)
        if model.objective is not None:
            res["terms"] = list(model.terms(sol.assignment))
    if trace_out:
        _write(trace_out, sol.trace_csv())
        res["trace"] = trace_out
    return res


def cmd_optimize(args, man: RunManifest) -> int:
    opts = dict(rounds=args.rounds, alpha=args.alpha, beta=args.beta, gamma=args.gamma,
                delta=args.delta, mode=args.mode, time_limit=args.time_limit, seed=args.seed,
                work_limit=args.work_limit, backend=args.backend, time=args.time,
                feasibility=args.feasibility, legacy_gauges=args.legacy_gauges)
    man.parameters.update(opts)
    srcs = list(args.inputs)
    for s in srcs:
        if not Path(s).exists():
            raise InvalidInput(f"no such input {s}")
        man.add_input(s)
    if len(srcs) == 1:
        jobs = [(srcs[0], args.out, args.trace_out, opts)]
    else:
        if not args.out:
            raise InvalidInput("several inputs need --out as a directory")
        jobs = []
        for s in srcs:
            stem = Path(s).stem
            trace = os.path.join(args.out, stem + ".trace.csv") if args.trace_out else None
            jobs.append((s, os.path.join(args.out, stem + ".luci"), trace, opts))
    results = _map(_optimize_one, jobs, args.jobs)
    worst = EXIT_OK
    for r in results:
        for o in r["outputs"]:
            man.add_output(o)
        if r.get("trace"):
            man.add_output(r["trace"], volatile=True)
        if r["status"] == "infeasible":
            worst = EXIT_INFEASIBLE
    summary = json.dumps(results if len(results) > 1 else results[0], sort_keys=True)
    print(summary)
    if args.summary_out:
        man.add_output(_write(args.summary_out, summary + "\n"))
    return worst


# --- analyze / render / export -------------------------------------------------------

def cmd_analyze(args, man: RunManifest) -> int:
    from .analysis import (compile_circuit, detector_slice, detectors, measurement_frequency_stats,
                           mid_cycle_slot, min_weight_paths, volume_stats)

    diag = _load_diagram(args.diagram)
    man.add_input(args.diagram)
    want_all = not (args.volumes or args.frequencies or args.paths)
    cycles = args.cycles or diag.code.patch.d
    man.parameters.update(cycles=cycles, volumes=args.volumes, frequencies=args.frequencies,
                          paths=args.paths)
    rep: dict = {"diagram": args.diagram}
    if args.frequencies or want_all:
        rep["measurement_frequency"] = measurement_frequency_stats(diag)
    if args.volumes or args.paths or want_all:
        per_basis = {}
        all_dets = []
        for mb in ("Z", "X"):
            circ = compile_circuit(diag, cycles, mb)
            dets = detectors(circ)
            all_dets += dets
            per_basis[mb] = (circ, dets)
        if args.volumes or want_all:
            mean, table = volume_stats(all_dets)
            rep["volumes"] = {"detectors": len(all_dets), "mean": mean}
            if args.cdf_out:
                lines = ["volume,count_at_least"] + [f"{v},{c}" for v, c in table]
                man.add_output(_write(args.cdf_out, "\n".join(lines) + "\n"))
        if args.paths or want_all:
            paths = {}
            for mb, (circ, dets) in per_basis.items():
                basis = "X" if mb == "Z" else "Z"  # errors that flip this memory's logical
                sl = detector_slice(circ, dets, mid_cycle_slot(circ), basis)
                length, count = min_weight_paths(circ, sl, basis)
                paths[basis] = {"length": None if length == float("inf") else length,
                                "count": count}
            rep["min_weight_paths"] = paths
    text = json.dumps(rep, sort_keys=True, indent=2) + "\n"
    if args.out:
        man.add_output(_write(args.out, text))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_render(args, man: RunManifest) -> int:
    from .render import render_svg, render_text

    diag = _load_diagram(args.diagram)
    man.add_input(args.diagram)
    man.parameters.update(format=args.format)
    text = render_svg(diag) if args.format == "svg" else render_text(diag)
    if args.out:
        man.add_output(_write(args.out, text))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _noise(spec: str | None):
    if spec is None:
        return None
    name, _, p = spec.partition(":")
    if name != "si1000":
        raise InvalidInput(f"unknown noise model {name!r}")
    try:
        val = float(p)
    except ValueError as exc:
        raise InvalidInput(f"bad noise strength {p!r}") from exc
    if not 0 <= val <= 1:
        raise InvalidInput("noise strength must lie in [0, 1]")
    return val


def cmd_export(args, man: RunManifest) -> int:
    from .analysis import compile_circuit, detectors, export_stim

    diag = _load_diagram(args.diagram)
    man.add_input(args.diagram)
    p = _noise(args.noise)
    cycles = args.cycles or diag.code.patch.d
    man.parameters.update(cycles=cycles, noise=args.noise, memory_basis=args.memory_basis)
    circ = compile_circuit(diag, cycles, args.memory_basis)
    text = export_stim(circ, detectors(circ, with_locations=False), p)
    if args.out:
        man.add_output(_write(args.out, text))
    else:
        sys.stdout.write(text)
    return EXIT_OK


# --- replay -----------------------------------------------------------------------

def cmd_replay(args, man: RunManifest | None) -> int:
    old = RunManifest.read(args.manifest)
    code = main(old.argv[1:] if old.argv and old.argv[0] == "luciopt" else old.argv)
    new = RunManifest.read(args.manifest)
    bad = [p for p, h in old.outputs.items() if p not in old.volatile and new.outputs.get(p) != h]
    print(json.dumps({"replayed": old.command, "exit": code, "mismatched": bad}, sort_keys=True))
    return EXIT_INVALID if bad else code


# --- argument parsing ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="luciopt", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="sample a dropout configuration")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--qubit-rate", type=float, required=True)
    s.add_argument("--coupler-rate", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=1, help="ensemble size; seeds are seed+k")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out", required=True, help="file, or directory when --count > 1")

    b = sub.add_parser("build", help="gauge operators and the default diagram")
    b.add_argument("config", nargs="?", help="dropout config JSON (omit with --d)")
    b.add_argument("--d", type=int, default=None)
    b.add_argument("--legacy-gauges", action="store_true")
    b.add_argument("--rounds", type=int, default=4)
    b.add_argument("--out", required=True)
    b.add_argument("--operators-out")
    b.add_argument("--report-distance", action="store_true")

    o = sub.add_parser("optimize", help="solve the scheduling model")
    o.add_argument("inputs", nargs="+", help="dropout configs (.json) or diagrams")
    o.add_argument("--rounds", type=int, default=4)
    o.add_argument("--alpha", type=float, default=6)
    o.add_argument("--beta", type=float, default=5)
    o.add_argument("--gamma", type=float, default=12)
    o.add_argument("--delta", type=float, default=2)
    o.add_argument("--mode", choices=("full", "max-meas"), default="full")
    o.add_argument("--time-limit", type=float, default=300.0)
    o.add_argument("--work-limit", type=float, default=None,
                   help="deterministic solver budget; makes reruns reproducible")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--backend", choices=("auto", "cpsat", "highs", "bnb"), default="auto")
    o.add_argument("--time", choices=("cyclic", "open"), default="cyclic")
    o.add_argument("--feasibility", action="store_true", help="only decide satisfiability")
    o.add_argument("--legacy-gauges", action="store_true")
    o.add_argument("--jobs", type=int, default=1)
    o.add_argument("--out")
    o.add_argument("--trace-out")
    o.add_argument("--summary-out")

    a = sub.add_parser("analyze", help="detector volumes, frequencies, path counts")
    a.add_argument("diagram")
    a.add_argument("--volumes", action="store_true")
    a.add_argument("--frequencies", action="store_true")
    a.add_argument("--paths", action="store_true")
    a.add_argument("--cycles", type=int, default=None, help="default: d")
    a.add_argument("--cdf-out")
    a.add_argument("--out")

    r = sub.add_parser("render", help="board pictures")
    r.add_argument("diagram")
    r.add_argument("--format", choices=("text", "svg"), default="text")
    r.add_argument("--out")

    e = sub.add_parser("export", help="stabilizer-circuit text")
    e.add_argument("diagram")
    e.add_argument("--cycles", type=int, default=None, help="default: d")
    e.add_argument("--noise", default=None, help="si1000:p")
    e.add_argument("--memory-basis", choices=("X", "Z"), default="Z")
    e.add_argument("--out")

    p = sub.add_parser("replay", help="rerun a manifest and compare output hashes")
    p.add_argument("manifest")
    return ap


COMMANDS = {"sample": cmd_sample, "build": cmd_build, "optimize": cmd_optimize,
            "analyze": cmd_analyze, "render": cmd_render, "export": cmd_export}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    if args.command == "replay":
        return cmd_replay(args, None)
    if args.command == "build" and not args.config and args.d is None:
        print("build needs a config file or --d", file=sys.stderr)
        return EXIT_INVALID
    man = RunManifest(args.command, ["luciopt", *argv])
    try:
        code = COMMANDS[args.command](args, man)
    except InvalidInput as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    target = getattr(args, "out", None) or getattr(args, "summary_out", None)
    if target:
        man.write(target)
    return code


if __name__ == "__main__":
    sys.exit(main())
