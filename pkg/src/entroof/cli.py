"""Command-line front end: ``compute``, ``verify`` and ``states``.

Exit status: 0 success, 1 verification found violations, 2 malformed input
file or arguments, 3 state violates an invariant, 4 dimension/measure
mismatch, unknown state or unsupported campaign dimensions.
"""

from __future__ import annotations

import argparse
import json
import math
import secrets
import sys
from pathlib import Path

import numpy as np

from . import lab
from .measures import (
    MeasureResult,
    as_cut,
    bipartite,
    classical_correlation,
    classical_correlation_max,
    ec_lower_chain,
    entanglement_entropy,
    eof_numeric,
    eof_two_qubit_exact,
    g_roof,
    witness_to_json,
)
from .roof import BoundDirection, OptimizerConfig
from .states import DensityMatrix, InvalidStateError, PureState, StateFormatError, state_from_json, state_to_json

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_MALFORMED = 2
EXIT_INVARIANT = 3
EXIT_MISMATCH = 4

MEASURES = ("entropy", "c-left", "c-right", "c-max", "eof-exact", "eof", "g-left", "g-right", "g-hv", "ec-chain")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# deterministic JSON


def _num(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = f"{x:.17g}"
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def _plain(obj):
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, BoundDirection):
        return str(obj)
    return obj


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with every float written to 17 significant digits and keys in insertion order."""
    obj = _plain(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(_plain(v), (int, float)) and not isinstance(_plain(v), bool) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)


# ---------------------------------------------------------------------------
# inputs


def load_state(path: str) -> DensityMatrix | PureState:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_MALFORMED, f"cannot read state file {path}: {exc.strerror}") from None
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_MALFORMED, f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    try:
        return state_from_json(obj)
    except StateFormatError as exc:
        raise CliError(EXIT_MALFORMED, f"{path}: schema error: {exc}") from None
    except InvalidStateError as exc:
        raise CliError(EXIT_INVARIANT, f"{path}: invariant violated ({exc})") from None


def _dims(text: str | None):
    if text is None:
        return None
    try:
        dims = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliError(EXIT_MALFORMED, f"--dims must be a comma-separated list of integers, got {text!r}") from None
    if not dims or any(d < 1 for d in dims):
        raise CliError(EXIT_MALFORMED, f"--dims must list positive integers, got {text!r}")
    return dims


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(32)
    print(f"seed: {seed}")
    return seed


def _config(args, seed: int) -> OptimizerConfig:
    kwargs = {"seed": seed}
    if args.restarts is not None:
        kwargs["restarts"] = args.restarts
    if args.tol is not None:
        kwargs["tolerance"] = args.tol
    if args.ensemble_size is not None:
        kwargs["ensemble_size"] = args.ensemble_size if args.ensemble_size == "auto" else int(args.ensemble_size)
    try:
        return OptimizerConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_MALFORMED, f"invalid optimizer settings: {exc}") from None


# ---------------------------------------------------------------------------
# compute


def _as_density(state) -> DensityMatrix:
    return state.density() if isinstance(state, PureState) else state


def _pure(state) -> PureState:
    if isinstance(state, PureState):
        return state
    if not state.is_pure():
        raise CliError(EXIT_MISMATCH, f"measure 'entropy' needs a pure state; this state has rank {state.rank()}")
    _, v = np.linalg.eigh(state.matrix)
    return PureState(v[:, -1], state.dims)


def compute(measure: str, state, cut, config: OptimizerConfig, n: int = 10) -> dict:
    """Evaluate ``measure`` and return the JSON-ready result."""
    rho = _as_density(state)
    try:
        cut_ = as_cut(cut, len(rho.dims))
    except ValueError as exc:
        raise CliError(EXIT_MISMATCH, f"bad cut for dims {list(rho.dims)}: {exc}") from None
    if measure == "entropy":
        value = entanglement_entropy(_pure(state), cut_)
        res = MeasureResult("entropy", value, BoundDirection.EXACT, str(cut_))
    elif measure == "c-left":
        res = classical_correlation(rho, cut_, "<-", config)
    elif measure == "c-right":
        res = classical_correlation(rho, cut_, "->", config)
    elif measure == "c-max":
        res = classical_correlation_max(rho, cut_, config)
    elif measure == "eof-exact":
        sizes = cut_.sizes(rho.dims)
        if sizes != (2, 2):
            raise CliError(EXIT_MISMATCH, f"eof-exact needs a 2x2 bipartition, got {sizes[0]}x{sizes[1]}")
        res = eof_two_qubit_exact(bipartite(rho, cut_)[0])
        res.cut = str(cut_)
    elif measure == "eof":
        res = eof_numeric(rho, cut_, config)
    elif measure in ("g-left", "g-right", "g-hv"):
        variant = {"g-left": "<-", "g-right": "->", "g-hv": "HV"}[measure]
        res = g_roof(rho, cut_, variant, config)
    elif measure == "ec-chain":
        if n < 1:
            raise CliError(EXIT_MALFORMED, "--n must be at least 1")
        out = ec_lower_chain(rho, cut_, n, config)
        return dict(out, config=config.to_dict())
    else:
        raise CliError(EXIT_MISMATCH, f"unknown measure {measure!r}; available: {', '.join(MEASURES)}")
    return dict(res.to_dict(), config=config.to_dict())


def _converged(diag: dict):
    conv = diag.get("converged")
    if isinstance(conv, (list, tuple)):
        return all(conv)
    return conv


def cmd_compute(args) -> int:
    if not args.state:
        raise CliError(EXIT_MALFORMED, "compute needs --state")
    state = load_state(args.state)
    config = _config(args, _seed(args))
    out = compute(args.measure, state, args.cut, config, args.n)
    if args.measure == "ec-chain":
        print(f"ec-chain n={out['n']}: {out['chain_value']:.6f} ({out['label']}, g_HV {out['g_estimate']:.6f} ({out['g_direction']}))")
        conv = _converged(out["diagnostics"])
    else:
        print(f"{out['measure']} [{out['cut']}]: {out['value_bits']:.6f} ({out['direction']})")
        conv = _converged(out["diagnostics"])
    if conv is not None:
        print(f"converged: {str(bool(conv)).lower()}")
    if args.format == "csv":
        raise CliError(EXIT_MALFORMED, "compute writes JSON only; use --format json")
    _write(dumps(out) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    check = args.check
    if check not in lab.CHECKS:
        raise CliError(EXIT_MISMATCH, f"unknown check {check!r}; available: {', '.join(lab.CHECKS)}")
    seed = _seed(args)
    config = _config(args, seed)
    if args.state:
        state = load_state(args.state)
        try:
            if check == "cloning" or check == "main":
                state = _as_density(state)
            record = lab.run_check(check, state, config, label=Path(args.state).name)
        except ValueError as exc:
            raise CliError(EXIT_MISMATCH, str(exc)) from None
        report = lab.InequalityReport(check, [record], tuple(_as_density(state).dims), seed, config.to_dict())
    else:
        dims = _dims(args.dims)
        if dims is None:
            raise CliError(EXIT_MALFORMED, "verify needs --state or --dims")
        try:
            lab.validate_campaign_dims(check, dims)
        except ValueError as exc:
            raise CliError(EXIT_MISMATCH, str(exc)) from None
        report = lab.fuzz_campaign(check, args.samples, dims, seed, config)
    print(
        f"{check}: {len(report.records)} record(s), min slack {report.min_slack:.3e}, "
        f"max slack {report.max_slack:.3e}, violations {report.violations}"
    )
    for r in report.records:
        if "gap_bits" in r.extra:
            e = r.extra
            print(
                f"gap {e['gap_bits']:.6f}: ef_joint {e['ef_joint_bits']:.6f} ({e['ef_joint_direction']}) "
                f"vs ef_single {e['ef_single_bits']:.6f} ({e['ef_single_direction']}), {e['gap_evidence']}"
            )
    if args.format == "csv":
        _write(report.to_csv(_num), args.out)
    else:
        _write(dumps(report.to_dict()) + "\n", args.out)
    return EXIT_OK if report.ok else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# states


def cmd_states(args) -> int:
    name = args.name
    if name not in lab.CANONICAL_STATES:
        raise CliError(EXIT_MISMATCH, f"unknown state {name!r}; available: {', '.join(lab.CANONICAL_STATES)}")
    params = {}
    if args.p is not None:
        params["p"] = args.p
    if args.d is not None:
        params["d"] = args.d
    if name == "random_separable":
        params["k"] = args.k
        params["seed"] = _seed(args)
    witness = None
    try:
        if name == "random_separable":
            rho, witness = lab.random_separable(params["k"], params["seed"])
        else:
            rho = lab.canonical_state(name, **params)
    except ValueError as exc:
        raise CliError(EXIT_MISMATCH, str(exc)) from None
    text = dumps(state_to_json(rho)) + "\n"
    out = args.out or f"{name}.json"
    Path(out).write_text(text)
    print(f"wrote {name} ({'x'.join(map(str, rho.dims))}, rank {rho.rank()}) to {out}")
    if witness is not None:
        wpath = Path(out).with_suffix(".witness.json")
        wpath.write_text(dumps(witness_to_json(witness)) + "\n")
        print(f"wrote decomposition to {wpath}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(EXIT_MALFORMED, message)


def _common(p: argparse.ArgumentParser):
    p.add_argument("--state", "-s", help="state file (JSON schema: dims, re, im)")
    p.add_argument("--seed", type=int, help="master seed; generated and printed when omitted")
    p.add_argument("--restarts", type=int, help="optimizer restarts")
    p.add_argument("--tol", type=float, help="optimizer relative tolerance")
    p.add_argument("--ensemble-size", help="roof ensemble size or 'auto'")
    p.add_argument("--out", "-o", help="output file")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entroof", description="Entanglement measures, convex roofs and inequality checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="evaluate a measure on a state file")
    _common(p)
    p.add_argument("--measure", required=True, choices=MEASURES)
    p.add_argument("--cut", help="factor groups such as 0,1/2,3 (default 0/1)")
    p.add_argument("--n", type=int, default=10, help="copies for ec-chain")
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("verify", help="run an inequality check or campaign")
    p.add_argument("check", help="duality, lemma1, main or cloning")
    _common(p)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--dims", help="comma-separated factor dimensions")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("states", help="write a named state")
    p.add_argument("name", help=", ".join(lab.CANONICAL_STATES))
    p.add_argument("--out", "-o", help="output file (default NAME.json)")
    p.add_argument("--p", type=float, help="mixing parameter for werner/isotropic")
    p.add_argument("--d", type=int, help="local dimension for isotropic")
    p.add_argument("--k", type=int, default=4, help="members for random_separable")
    p.add_argument("--seed", type=int, help="seed for random_separable")
    p.set_defaults(func=cmd_states)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except InvalidStateError as exc:
        print(f"error: invariant violated ({exc})", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
