"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 unreadable or invalid input state,
4 numerical failure while running. Nothing is printed to stdout on an error
path. ``QCLOSENESS_SEED`` and ``QCLOSENESS_JOBS`` override the default seed
and worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from . import experiments as ex
from .closeness import exact_closeness, get_estimator, swap_test_distribution
from .amp_est import amplify
from .oracles import PreparedPair, state_preparation_unitary
from .qlin import StateFileError, StateVector, read_state, rng_from, write_state

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3, 4
COMMANDS = ("estimate", "exact", "sweep", "distinguish", "swap-test", "export")
QUANTITY_ALIASES = {"td": "td", "f": "f", "f2": "f2", "trace_distance": "td",
                    "sqrt_fidelity": "f", "squared_fidelity": "f2"}

_FAMILY_RE = re.compile(r"^family:([a-z]+)\((.*)\)$")


class InputError(Exception):
    pass


@dataclass(frozen=True)
class FamilySpec:
    name: str
    params: dict = field(default_factory=dict)


def parse_family(text: str) -> FamilySpec:
    """Parse ``family:NAME(key=value,...)``."""
    m = _FAMILY_RE.match(text.replace(" ", ""))
    if not m:
        raise ValueError(f"bad family spec {text!r}; expected family:NAME(key=value,...)")
    params = {}
    if m.group(2):
        for item in m.group(2).split(","):
            key, sep, value = item.partition("=")
            if not sep or not key or not value:
                raise ValueError(f"bad parameter {item!r} in {text!r}")
            params[key] = value
    return FamilySpec(m.group(1), params)


def _state_arg(text):
    if text.startswith("family:"):
        try:
            return parse_family(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc))
    return Path(text)


def _eps_arg(text):
    try:
        eps = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"eps must be a number, got {text!r}")
    if not 0 < eps < 1:
        raise argparse.ArgumentTypeError(f"eps must lie in (0, 1), got {eps}")
    return eps


def _grid_arg(text):
    return tuple(_eps_arg(t) for t in text.split(",") if t)


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


@dataclass
class RunConfig:
    command: str
    eps: float = 0.05
    trials: int = 100
    seed: int = 0
    jobs: int = 1
    method: str = "td"
    algorithm: str = "optimal"
    state_a: object = None
    state_b: object = None
    output: Path | None = None
    format: str = "text"
    eps_grid: tuple = ex.DEFAULT_EPS_GRID
    qubits: int = 3
    which: str = "td"
    n: int = ex.DEFAULT_N
    rounds: int = 1
    shots: int = 10_000
    renormalize: bool = False


def build_parser() -> argparse.ArgumentParser:
    env_seed = int(os.environ.get("QCLOSENESS_SEED", 0))
    env_jobs = int(os.environ.get("QCLOSENESS_JOBS", 1))

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=env_seed)
    common.add_argument("--jobs", type=_positive_int, default=env_jobs)
    common.add_argument("--output", type=Path)
    common.add_argument("--format", choices=("text", "json", "csv"), default=None)
    common.add_argument("--renormalize", action="store_true",
                        help="rescale state files whose norm is off by more than 1e-6")

    states = argparse.ArgumentParser(add_help=False)
    states.add_argument("--state-a", type=_state_arg, required=True)
    states.add_argument("--state-b", type=_state_arg, required=True)

    parser = argparse.ArgumentParser(prog="qcloseness", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", parents=[common, states], help="estimate T, F or F^2")
    p.add_argument("--method", choices=sorted(QUANTITY_ALIASES), default="td")
    p.add_argument("--algorithm", choices=("optimal", "folklore_query", "folklore_sample"),
                   default="optimal")
    p.add_argument("--eps", type=_eps_arg, default=0.05)
    p.add_argument("--rounds", type=_positive_int, default=1)

    sub.add_parser("exact", parents=[common, states], help="exact T, F, F^2 and p_err")

    p = sub.add_parser("sweep", parents=[common], help="eps sweep with a scaling fit")
    p.add_argument("--method", choices=sorted(ex.METHODS), default="optimal_td")
    p.add_argument("--eps-grid", type=_grid_arg, default=ex.DEFAULT_EPS_GRID)
    p.add_argument("--trials", type=_positive_int, default=100)
    p.add_argument("--qubits", type=_positive_int, default=3,
                   help="Haar-random pairs of this many qubits (unless states are given)")
    p.add_argument("--state-a", type=_state_arg)
    p.add_argument("--state-b", type=_state_arg)

    p = sub.add_parser("distinguish", parents=[common], help="p+ vs p- distinguishing run")
    p.add_argument("--which", choices=("td", "f2"), default="td")
    p.add_argument("--eps", type=_eps_arg, default=0.1)
    p.add_argument("--n", type=_positive_int, default=ex.DEFAULT_N)
    p.add_argument("--trials", type=_positive_int, default=300)
    p.add_argument("--rounds", type=_positive_int, default=ex.F2_DISTINGUISH_ROUNDS)

    p = sub.add_parser("swap-test", parents=[common, states], help="sampled SWAP test")
    p.add_argument("--shots", type=_positive_int, default=10_000)

    p = sub.add_parser("export", parents=[common], help="write a state vector file")
    p.add_argument("--state", dest="state_a", type=_state_arg, required=True)
    return parser


def parse_args(argv=None) -> RunConfig:
    parser = build_parser()
    ns = parser.parse_args(argv)
    values = {k: v for k, v in vars(ns).items() if v is not None}
    if ns.command == "estimate":
        values["method"] = QUANTITY_ALIASES[ns.method]
        if ns.rounds % 2 == 0:
            parser.error("--rounds must be odd")
    if ns.command == "distinguish" and ns.rounds % 2 == 0:
        parser.error("--rounds must be odd")
    if ns.command == "sweep":
        if len(set(ns.eps_grid)) < 3:
            parser.error("--eps-grid needs at least three distinct values")
        if ns.trials < 100:
            parser.error("sweeps need --trials >= 100")
        if (ns.state_a is None) != (ns.state_b is None):
            parser.error("give both --state-a and --state-b, or neither")
    if ns.command == "distinguish" and (ns.n < 2 or ns.n % 2):
        parser.error("--n must be an even integer >= 2")
    if ns.command == "export" and ns.output is None:
        parser.error("export needs --output")
    if ns.format is None:
        values["format"] = "csv" if ns.command == "sweep" else "text"
    return RunConfig(**values)


def load_unitary(spec, renormalize=False):
    """Resolve a family spec or a state file to a state-preparation unitary."""
    if isinstance(spec, FamilySpec):
        try:
            return ex.family_oracle(spec.name, **dict(spec.params))
        except (ValueError, TypeError, KeyError) as exc:
            raise InputError(f"bad state family {spec.name}: {exc}") from exc
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            state, _ = read_state(spec, renormalize=renormalize)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
    except StateFileError as exc:
        raise InputError(str(exc)) from exc
    return state_preparation_unitary(state)


def _load_pair(cfg) -> PreparedPair:
    a = load_unitary(cfg.state_a, cfg.renormalize)
    b = load_unitary(cfg.state_b, cfg.renormalize)
    if a.num_qubits != b.num_qubits:
        raise InputError(f"states have {a.num_qubits} and {b.num_qubits} qubits")
    return PreparedPair.from_unitaries(a, b)


def _fmt(v):
    return f"{v:.6f}" if isinstance(v, float) else str(v)


def _render(data: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(data) + "\n"
    if fmt == "csv":
        keys = list(data)
        return ",".join(keys) + "\n" + ",".join(repr(data[k]) if isinstance(data[k], float)
                                                else str(data[k]) for k in keys) + "\n"
    return "".join(f"{k}: {_fmt(v)}\n" for k, v in data.items())


def _cmd_exact(cfg):
    rep = exact_closeness(_load_pair(cfg))
    return {"trace_distance": rep.trace_distance, "sqrt_fidelity": rep.sqrt_fidelity,
            "squared_fidelity": rep.squared_fidelity, "helstrom_error": rep.helstrom_error}


def _cmd_estimate(cfg):
    pair = _load_pair(cfg)
    exact = exact_closeness(pair)
    truth = {"td": exact.trace_distance, "f": exact.sqrt_fidelity,
             "f2": exact.squared_fidelity}[cfg.method]
    estimator = get_estimator(cfg.algorithm, cfg.method)
    if cfg.rounds == 1:
        res = estimator(pair, cfg.eps, rng_from(cfg.seed))
    else:
        res = amplify(lambda rng: estimator(pair, cfg.eps, rng), cfg.rounds, cfg.seed)
    out = {"quantity": cfg.method, "algorithm": cfg.algorithm, "eps": cfg.eps,
           "estimate": res.estimate, "exact": truth,
           "abs_error": abs(res.estimate - truth)}
    if cfg.algorithm == "folklore_sample":
        out["samples"] = res.samples_used
    else:
        out["queries"] = res.queries_used
    if cfg.method == "td":
        out["helstrom_error"] = 0.5 - res.estimate / 2
        out["helstrom_error_exact"] = exact.helstrom_error
    out["seed"] = cfg.seed
    return out


def _cmd_swap_test(cfg):
    pair = _load_pair(cfg)
    p0 = swap_test_distribution(pair)[0]
    zeros = int(rng_from(cfg.seed).binomial(cfg.shots, min(1.0, p0)))
    freq = zeros / cfg.shots
    return {"shots": cfg.shots, "pr_zero_exact": p0, "pr_zero_sampled": freq,
            "squared_fidelity_estimate": min(1.0, max(0.0, 2 * freq - 1)),
            "squared_fidelity_exact": exact_closeness(pair).squared_fidelity,
            "seed": cfg.seed}


def _cmd_distinguish(cfg):
    summary, _ = ex.run_distinguishing(cfg.which, cfg.eps, cfg.n, cfg.trials, cfg.seed,
                                       cfg.jobs, cfg.rounds)
    return {"which": cfg.which, "eps": cfg.eps, "n": cfg.n, "trials_per_truth": cfg.trials,
            "success_p_plus": summary.success_plus, "success_p_minus": summary.success_minus,
            "success_rate": summary.success_rate, "sigma": summary.sigma,
            "passes_two_thirds_guard": summary.passes(),
            "mean_queries": summary.mean_queries, "seed": cfg.seed}


def _cmd_sweep(cfg):
    if cfg.state_a is not None:
        a = load_unitary(cfg.state_a, cfg.renormalize)
        b = load_unitary(cfg.state_b, cfg.renormalize)
        if a.num_qubits != b.num_qubits:
            raise InputError(f"states have {a.num_qubits} and {b.num_qubits} qubits")
        family = ex.fixed_pair(a, b)
    else:
        family = ex.haar_pairs(cfg.qubits)
    records = ex.sweep(family, cfg.method, cfg.eps_grid, cfg.trials, cfg.seed, cfg.jobs)
    return records, ex.fit_scaling(records)


def _write(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def run(cfg: RunConfig) -> int:
    try:
        if cfg.command == "export":
            u = load_unitary(cfg.state_a, cfg.renormalize)
            write_state(StateVector(u.matrix[:, 0]), cfg.output)
            return EXIT_OK
        if cfg.command == "sweep":
            records, exponent = _cmd_sweep(cfg)
            if cfg.format == "json":
                text = json.dumps({**json.loads(ex.records_to_json(records)),
                                   "exponent": exponent}) + "\n"
            elif cfg.format == "text":
                text = "".join(
                    f"{r.method} eps={r.eps:.6f} success={r.success_rate:.6f} "
                    f"mean_queries={r.mean_queries:.6f} exact={r.exact_value:.6f}\n"
                    for r in records)
            else:
                text = ex.records_to_csv(records)
            _write(text, cfg.output)
            print(f"exponent: {exponent:.6f}", file=sys.stderr if cfg.output is None else sys.stdout)
            return EXIT_OK
        handler = {"exact": _cmd_exact, "estimate": _cmd_estimate,
                   "swap-test": _cmd_swap_test, "distinguish": _cmd_distinguish}[cfg.command]
        data = handler(cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, ArithmeticError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _write(_render(data, cfg.format), cfg.output)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
