"""Command-line front end.

Subcommands ``reach``, ``compare``, ``sample`` and ``tube`` share one set of
scenario flags; a scenario can also come from a JSON file (``--scenario``),
in which case explicit flags override its fields.

Exit codes: 0 success, 1 soundness violation found by ``compare``,
2 invalid arguments or scenario, 3 numeric failure, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, fields
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .integrate import IntegrationError, IntegratorConfig
from .interval import IntervalVector
from .model import ModelError, load_model
from .oracle import cloud_to_csv, sample_successors, tightness
from .reach import METHODS, MODES, ReachError, ReachSpec, reach
from .tube import TubeError, tube_lipschitz, tube_monte_carlo, tube_user

EXIT_OK, EXIT_UNSOUND, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4

_TUBE_NAMES = {"lipschitz": "lipschitz", "mc": "monte_carlo", "user": "user"}
_INTEGRATORS = {"rkf45": "rkf45_adaptive", "rk4": "rk4_fixed"}


class UsageError(ValueError):
    pass


@dataclass
class Scenario:
    model: str
    x0_lo: List[float]
    x0_hi: List[float]
    t_final: float
    method: str = "ct_mm"
    mode: str = "single"
    step: float = 0.05
    tube: str = "lipschitz"
    tube_lo: Optional[List[float]] = None
    tube_hi: Optional[List[float]] = None
    tube_samples: int = 2000
    tube_inflation: float = 0.1
    sens_samples: int = 100
    sens_inflation: float = 0.05
    integrator: str = "rkf45"
    fixed_step: float = 1e-3
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    seed: int = 0
    samples: int = 1000
    projections: Optional[List[Tuple[int, int]]] = None

    def __post_init__(self):
        self.x0_lo = [float(v) for v in self.x0_lo]
        self.x0_hi = [float(v) for v in self.x0_hi]
        if len(self.x0_lo) != len(self.x0_hi):
            raise UsageError("x0-lo and x0-hi have different lengths")
        if any(a > b for a, b in zip(self.x0_lo, self.x0_hi)):
            raise UsageError("x0-lo must be <= x0-hi componentwise")
        self.method = self.method.replace("-", "_")
        if self.method not in METHODS:
            raise UsageError(f"unknown method {self.method!r}")
        if self.mode not in MODES:
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.tube not in _TUBE_NAMES and self.tube not in _TUBE_NAMES.values():
            raise UsageError(f"unknown tube source {self.tube!r}")
        self.tube = {v: k for k, v in _TUBE_NAMES.items()}.get(self.tube, self.tube)
        if self.tube == "user" and (self.tube_lo is None or self.tube_hi is None):
            raise UsageError("--tube user needs --tube-lo and --tube-hi")
        if self.integrator not in _INTEGRATORS:
            raise UsageError(f"unknown integrator {self.integrator!r}")
        if self.samples < 1:
            raise UsageError("--samples must be at least 1")
        n = len(self.x0_lo)
        if self.projections is None:
            self.projections = [(i, i + 1) for i in range(1, n)]
        self.projections = [tuple(int(v) for v in p) for p in self.projections]
        for p in self.projections:
            if len(p) != 2 or not all(1 <= v <= n for v in p) or p[0] == p[1]:
                raise UsageError(f"projection {p} invalid for dimension {n} (1-based pairs)")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["projections"] = [list(p) for p in self.projections]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise UsageError(f"unknown scenario field(s): {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise UsageError(str(exc)) from None

    def integrator_config(self) -> IntegratorConfig:
        return IntegratorConfig(method=_INTEGRATORS[self.integrator], step=self.fixed_step,
                                rel_tol=self.rel_tol, abs_tol=self.abs_tol)

    def x0_box(self) -> IntervalVector:
        return IntervalVector(self.x0_lo, self.x0_hi)

    def reach_spec(self, model=None, **overrides) -> ReachSpec:
        model = model or load_model(self.model)
        user = IntervalVector(self.tube_lo, self.tube_hi) if self.tube == "user" else None
        kw = dict(model=model, x0_box=self.x0_box(), t_final=self.t_final, method=self.method,
                  mode=self.mode, step=self.step, tube_source=_TUBE_NAMES[self.tube],
                  user_tube=user, tube_samples=self.tube_samples,
                  tube_inflation=self.tube_inflation, sensitivity_samples=self.sens_samples,
                  sensitivity_inflation=self.sens_inflation,
                  integrator=self.integrator_config(), seed=self.seed)
        kw.update(overrides)
        return ReachSpec(**kw)


def _vector(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _pairs(text: str) -> List[Tuple[int, int]]:
    try:
        return [tuple(int(v) for v in item.split("-")) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected pairs like '1-2,3-4', got {text!r}") from None


# flag name -> scenario field
_FLAG_FIELDS = {
    "model": "model", "x0_lo": "x0_lo", "x0_hi": "x0_hi", "t_final": "t_final",
    "method": "method", "mode": "mode", "step": "step", "tube": "tube", "tube_lo": "tube_lo",
    "tube_hi": "tube_hi", "tube_samples": "tube_samples", "tube_inflation": "tube_inflation",
    "sens_samples": "sens_samples", "sens_inflation": "sens_inflation",
    "integrator": "integrator", "fixed_step": "fixed_step", "rel_tol": "rel_tol",
    "abs_tol": "abs_tol", "seed": "seed", "samples": "samples", "projections": "projections",
}


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="JSON scenario file; flags override its fields")
    p.add_argument("--model", help="built-in model name (fpa, spiral-synthetic) or JSON model file")
    p.add_argument("--x0-lo", type=_vector, help="initial box lower corner, e.g. -0.1,-0.1")
    p.add_argument("--x0-hi", type=_vector, help="initial box upper corner")
    p.add_argument("--t-final", type=float, help="time horizon")
    p.add_argument("--method", choices=["ct-mm", "sd-mm"])
    p.add_argument("--mode", choices=list(MODES))
    p.add_argument("--step", type=float, help="incremental step size")
    p.add_argument("--tube", choices=list(_TUBE_NAMES))
    p.add_argument("--tube-lo", type=_vector)
    p.add_argument("--tube-hi", type=_vector)
    p.add_argument("--tube-samples", type=int)
    p.add_argument("--tube-inflation", type=float)
    p.add_argument("--samples", type=int, help="Monte-Carlo samples for the oracle / sample cloud")
    p.add_argument("--sens-samples", type=int)
    p.add_argument("--sens-inflation", type=float)
    p.add_argument("--integrator", choices=list(_INTEGRATORS))
    p.add_argument("--fixed-step", type=float)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--projections", type=_pairs, help="1-based coordinate pairs, e.g. 1-2,3-4")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=["json", "text", "csv"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmreach",
                                     description="Mixed-monotone interval reachability for neural ODEs")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [("reach", "compute an interval over-approximation"),
                        ("compare", "run every method/mode and score tightness"),
                        ("sample", "write a Monte-Carlo successor cloud as CSV"),
                        ("tube", "print the reachable-tube estimate")]:
        _add_scenario_flags(sub.add_parser(name, help=help_))
    return parser


def scenario_from_args(args: argparse.Namespace) -> Scenario:
    doc = {}
    if args.scenario:
        try:
            with open(args.scenario) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read scenario {args.scenario}: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError("scenario file must hold a JSON object")
        doc = doc.get("scenario", doc)
    for flag, name in _FLAG_FIELDS.items():
        value = getattr(args, flag)
        if value is not None:
            doc[name] = value
    missing = [f for f in ("model", "x0_lo", "x0_hi", "t_final") if f not in doc]
    if missing:
        raise UsageError("missing required option(s): "
                         + ", ".join("--" + m.replace("_", "-") for m in missing))
    return Scenario.from_dict(doc)


def _write(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".mmreach-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dumps(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _box_text(lo, hi) -> str:
    return "\n".join(f"  x{k + 1}: [{float(a)!r}, {float(b)!r}]" for k, (a, b) in enumerate(zip(lo, hi)))


def cmd_reach(sc: Scenario, fmt: str) -> Tuple[int, str]:
    res = reach(sc.reach_spec())
    doc = {"scenario": sc.to_dict(), "result": res.to_dict()}
    if fmt == "text":
        text = (f"{res.method} / {res.mode}, t_final={sc.t_final}, "
                f"{res.runtime_seconds:.4f} s, steps={res.steps_taken}\n"
                + _box_text(res.box.lo, res.box.hi) + "\n")
        return EXIT_OK, text
    return EXIT_OK, _dumps(doc)


def _sig(x: float) -> Optional[float]:
    if x is None or not np.isfinite(x):
        return None
    return float(f"{x:.6g}")


def compare_report(sc: Scenario) -> dict:
    model = load_model(sc.model)
    cfg = sc.integrator_config()
    t0 = time.perf_counter()
    cloud = sample_successors(model, sc.x0_box(), sc.t_final, sc.samples, sc.seed, cfg)
    oracle_time = time.perf_counter() - t0
    pairs0 = [(i - 1, j - 1) for i, j in sc.projections]
    rows = []
    for method in METHODS:
        for mode in MODES:
            row = {"method": method, "mode": mode}
            try:
                res = reach(sc.reach_spec(model, method=method, mode=mode))
                rep = tightness(res, cloud, pairs0)
                row.update(
                    ratios={f"{i + 1}-{j + 1}": _sig(r) for (i, j), r in rep.per_projection.items()},
                    violations=rep.soundness_violations,
                    runtime_seconds=_sig(res.runtime_seconds),
                    box=res.box.to_dict(),
                    error=None,
                )
            except (ReachError, IntegrationError, TubeError, ValueError) as exc:
                row.update(ratios=None, violations=None, runtime_seconds=None, box=None,
                           error=str(exc))
            rows.append(row)
    return {
        "scenario": sc.to_dict(),
        "oracle": {"n_samples": len(cloud), "runtime_seconds": _sig(oracle_time)},
        "rows": rows,
    }


def compare_text(report: dict) -> str:
    pairs = [f"{i}-{j}" for i, j in report["scenario"]["projections"]]
    head = ["method", "mode"] + pairs + ["violations", "runtime_s"]
    lines = []
    for row in report["rows"]:
        if row["error"]:
            cells = [row["method"], row["mode"]] + ["-"] * len(pairs) + ["-", "-"]
        else:
            cells = ([row["method"], row["mode"]]
                     + [repr(row["ratios"][p]) if row["ratios"][p] is not None else "inf" for p in pairs]
                     + [str(row["violations"]), repr(row["runtime_seconds"])])
        lines.append(cells)
    widths = [max(len(h), *(len(c[k]) for c in lines)) for k, h in enumerate(head)]
    fmt = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    out = [fmt(head), fmt(["-" * w for w in widths])] + [fmt(c) for c in lines]
    for row in report["rows"]:
        if row["error"]:
            out.append(f"{row['method']}/{row['mode']} failed: {row['error']}")
    out.append(f"oracle: {report['oracle']['n_samples']} samples, "
               f"{report['oracle']['runtime_seconds']!r} s")
    return "\n".join(out) + "\n"


def cmd_compare(sc: Scenario, fmt: str) -> Tuple[int, str]:
    report = compare_report(sc)
    unsound = any(r["violations"] for r in report["rows"] if r["violations"] is not None)
    text = compare_text(report) if fmt == "text" else _dumps(report)
    return (EXIT_UNSOUND if unsound else EXIT_OK), text


def cmd_sample(sc: Scenario, fmt: str) -> Tuple[int, str]:
    model = load_model(sc.model)
    cloud = sample_successors(model, sc.x0_box(), sc.t_final, sc.samples, sc.seed,
                              sc.integrator_config())
    return EXIT_OK, cloud_to_csv(cloud)


def cmd_tube(sc: Scenario, fmt: str) -> Tuple[int, str]:
    model = load_model(sc.model)
    box = sc.x0_box()
    if sc.tube == "lipschitz":
        tube = tube_lipschitz(model, box, sc.t_final)
    elif sc.tube == "mc":
        tube = tube_monte_carlo(model, box, sc.t_final, sc.tube_samples, sc.tube_inflation,
                                sc.seed, sc.integrator_config())
    else:
        tube = tube_user(IntervalVector(sc.tube_lo, sc.tube_hi), box)
    if fmt == "text":
        return EXIT_OK, f"{tube.source} tube\n" + _box_text(tube.box.lo, tube.box.hi) + "\n"
    return EXIT_OK, _dumps({"scenario": sc.to_dict(), "tube": tube.to_dict()})


COMMANDS = {"reach": cmd_reach, "compare": cmd_compare, "sample": cmd_sample, "tube": cmd_tube}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        sc = scenario_from_args(args)
        model = load_model(sc.model)
        if model.state_dim != len(sc.x0_lo):
            raise UsageError(f"model is {model.state_dim}-D but the initial box has "
                             f"{len(sc.x0_lo)} coordinates")
    except (UsageError, ModelError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"mmreach {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    fmt = args.format or ("csv" if args.command == "sample" else "json")
    try:
        code, text = COMMANDS[args.command](sc, fmt)
    except (ReachError, IntegrationError, TubeError) as exc:
        print(f"mmreach {args.command}: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"mmreach {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        _write(text, args.out)
    except OSError as exc:
        print(f"mmreach {args.command}: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
