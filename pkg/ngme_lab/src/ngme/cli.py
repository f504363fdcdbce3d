"""
Command-line surface: ``python -m ngme <command> ...``.

Reports go to stdout (or ``--output``) as JSON with sorted keys and every
float printed to 17 significant digits; sweeps are CSV. Errors print their
detail on stderr and map to exit codes 2 (arguments), 3 (capacity) and
4 (numerical invariant).
"""
import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from .bell_functional import (
    BellConfig,
    BellForm,
    WernerSpec,
    bell_lhs,
    critical_noise,
    pauli,
)
from .errors import ArgumentError, CapacityError, NgmeError
from .gme_bounds import BoundMethod, best_bound
from .ledger import DiscrepancyLedger, format_float
from .scenarios import SCENARIOS, get_scenario, resolve_params, scenario_eval, scenario_pipeline
from .settings import get_settings
from .state_factory import make_generalized_w, make_ghz, maximally_mixed
from .state_spec import Family, StateSpec
from .witness_lab import (
    WhiteNoiseFamily,
    build_witness,
    eval_witness,
    threshold_cluster5,
    threshold_general,
    threshold_three_qubit,
    threshold_white_noise,
)

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("scenario", "n", "k", "param-name", "param-value",
                 "lhs_pipeline", "lhs_printed", "bound", "violated")
CRITICAL_COLUMNS = ("target", "n", "k", "observable", "v_star", "monotone")

_BOUND_METHODS = {
    "auto": None,
    "closed": "closed",
    "schmidt-exact": BoundMethod.SCHMIDT_EXACT,
    "colnorm": BoundMethod.COLNORM_UPPER,
}


# -- output -------------------------------------------------------------------

def to_json(obj: Any) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits."""
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {to_json(v)}" for k, v in sorted(obj.items()))
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format_float(x) if math.isfinite(x) else json.dumps(str(x))
    return json.dumps(str(obj))


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- argument parsing ---------------------------------------------------------

def _floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _param_value(raw: str) -> Any:
    if "," in raw:
        return tuple(_floats(raw))
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def parse_params(pairs: Optional[Sequence[str]]) -> Dict[str, Any]:
    out = {}
    for pair in pairs or ():
        name, sep, raw = pair.partition("=")
        if not sep or not name:
            raise ArgumentError(f"--param expects name=value, got {pair!r}")
        out[name.strip()] = _param_value(raw.strip())
    return out


def _state_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("state")
    group.add_argument("--spec", help="state spec as inline JSON or a JSON file path")
    group.add_argument("--family", help="state family (ghz, dicke, w, sym, three-qubit, ...)")
    group.add_argument("--n", type=int)
    group.add_argument("--d", type=int, default=2)
    group.add_argument("--k", type=int)
    group.add_argument("--a", type=_floats)
    group.add_argument("--alphas", type=_floats)
    group.add_argument("--beta0", type=float, default=1.0)
    group.add_argument("--beta1", type=float, default=0.0)
    group.add_argument("--lambdas", type=_floats)
    group.add_argument("--phi", type=float, default=0.0)
    group.add_argument("--theta", type=float)
    group.add_argument("--r", type=float)
    group.add_argument("--variant", default="r-last")
    group.add_argument("--gammas", type=_floats)
    group.add_argument("--noise", type=float, help="white-noise visibility v")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ngme", description="Network-model entanglement numerics")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    state = _state_options()

    p = sub.add_parser("bound", parents=[state], help="network-model bound D for a pure target")
    p.add_argument("--method", choices=sorted(_BOUND_METHODS), default="closed")
    p.add_argument("--output")

    p = sub.add_parser("witness", parents=[state], help="evaluate the fidelity witness")
    p.add_argument("--output")

    p = sub.add_parser("threshold", parents=[state], help="white-noise or general threshold")
    p.add_argument("--output")

    p = sub.add_parser("bell", parents=[state], help="evaluate a Bell functional or scenario")
    p.add_argument("--scenario", help=f"one of {', '.join(SCENARIOS)}")
    p.add_argument("--param", action="append", help="scenario parameter name=value")
    p.add_argument("--form", choices=[f.value for f in BellForm], default=BellForm.FULLY_SEPARABLE.value)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--observable", choices=["x", "y", "z"], default="z")
    p.add_argument("--output")

    p = sub.add_parser("verify", parents=[state], help="adjudicate a closed bound with the oracle")
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=lambda s: int(s, 0))
    p.add_argument("--output")

    p = sub.add_parser("sweep", help="grid sweep of a scenario, CSV output")
    p.add_argument("--scenario")
    p.add_argument("--param-name")
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=1.0)
    p.add_argument("--num", type=int, default=0)
    p.add_argument("--n-values", type=_ints)
    p.add_argument("--k", type=int)
    p.add_argument("--param", action="append")
    p.add_argument("--critical-noise", action="store_true",
                   help="sweep v* over --n-values for --target ghz|w")
    p.add_argument("--target", choices=["ghz", "w"], default="ghz")
    p.add_argument("--observable", choices=["x", "z"])
    p.add_argument("--output")

    p = sub.add_parser("ledger", help="summarize the discrepancy ledger")
    p.add_argument("--claim", help="only entries with this claim key, e.g. S1 or cluster5")
    p.add_argument("--output")
    return parser


def spec_from_args(args: argparse.Namespace) -> StateSpec:
    if args.spec:
        return StateSpec.load(args.spec)
    if not args.family:
        raise ArgumentError("give --spec or --family")
    fields = {name: getattr(args, name) for name in
              ("n", "d", "k", "a", "alphas", "beta0", "beta1", "lambdas", "phi",
               "theta", "r", "variant", "gammas")}
    fields = {k: v for k, v in fields.items() if v is not None}
    if args.noise is not None:
        fields["noise"] = {"kind": "white", "v": args.noise}
    try:
        return StateSpec(family=args.family, **fields)
    except ValidationError as exc:
        raise ArgumentError(f"invalid state options: {exc.errors()[0]['msg']}") from None


# -- commands -----------------------------------------------------------------

def cmd_bound(args) -> str:
    spec = spec_from_args(args)
    method = _BOUND_METHODS[args.method]
    if method == "closed":
        result = spec.closed_bound()
    else:
        result = best_bound(spec.build(), prefer=method)
    return to_json(result.model_dump(mode="json"))


def cmd_witness(args) -> str:
    spec = spec_from_args(args)
    phi = spec.build()
    bound = spec.closed_bound()
    report = eval_witness(build_witness(phi, bound), spec.density(phi))
    report.threshold = threshold_general(phi, maximally_mixed(phi.layout), bound)
    return to_json(report.to_json_dict())


def cmd_threshold(args) -> str:
    family = args.family
    if not args.spec and family in {f.value for f in WhiteNoiseFamily}:
        if args.n is None:
            raise ArgumentError("--n is required")
        a = StateSpec(family="ghz", n=args.n, d=args.d, a=args.a).vector("a") if args.a else None
        v_star = threshold_white_noise(WhiteNoiseFamily(family), args.n, args.d, a=a, k=args.k)
        return to_json({"family": family, "n": args.n, "d": args.d, "v_star": v_star})
    spec = spec_from_args(args)
    if spec.family == Family.CLUSTER5:
        a = spec.vector("a") if spec.a is not None else (1 / np.sqrt(2), 1 / np.sqrt(2))
        report = threshold_cluster5(*a)
        return to_json(report.model_dump(mode="json"))
    if spec.family == Family.THREE_QUBIT:
        report = threshold_three_qubit(spec.vector("lambdas"), spec.phi)
        return to_json(report.model_dump(mode="json"))
    phi = spec.build()
    bound = spec.closed_bound()
    v_star = threshold_general(phi, maximally_mixed(phi.layout), bound)
    return to_json({"family": spec.family.value, "v_star": v_star, "bound": bound.value,
                    "method": bound.method.value})


def cmd_bell(args) -> str:
    if args.scenario:
        result = scenario_eval(args.scenario, parse_params(args.param))
        return to_json(result.model_dump(mode="json"))
    spec = spec_from_args(args)
    phi = spec.build()
    form = BellForm(args.form)
    werner = None
    if form == BellForm.WERNER_CLOSED:
        if args.noise is None:
            raise ArgumentError("werner-closed form needs --noise v")
        werner = WernerSpec(target=phi, v=args.noise)
    config = BellConfig.uniform(pauli(args.observable), phi.layout.n, form=form,
                                k=args.k, p=args.p, werner=werner)
    report = bell_lhs(None if werner else spec.density(phi), config)
    return to_json(report.model_dump(mode="json"))


def cmd_verify(args) -> str:
    from .oracle import verify_bound

    spec = spec_from_args(args)
    record = verify_bound(spec.build(), spec.closed_bound(), args.restarts, args.seed)
    return to_json(record.model_dump(mode="json"))


def _sweep_row(scenario_name: str, param_name: str, value: float, base: Dict[str, Any]):
    scenario = get_scenario(scenario_name)
    params = dict(base)
    params[param_name] = value
    report, params = scenario_pipeline(scenario_name, params)
    printed = float(scenario.printed(params))
    return (scenario.name, len(report.f1), "" if report.k is None else report.k, param_name,
            format_float(value), format_float(report.lhs), format_float(printed),
            format_float(report.classical_bound), str(report.violated).lower())


def _write_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_sweep(args) -> str:
    settings = get_settings()
    n_values = args.n_values or [None]
    if args.critical_noise:
        return _critical_sweep(args, n_values)
    if not args.scenario or not args.param_name:
        raise ArgumentError("sweep needs --scenario and --param-name")
    if args.num < 0:
        raise ArgumentError(f"--num must be >= 0, got {args.num}")
    grid_size = args.num * len(n_values)
    if grid_size > settings.max_grid_points:
        raise CapacityError(f"grid of {grid_size} points exceeds cap {settings.max_grid_points}")
    scenario = get_scenario(args.scenario)
    base = parse_params(args.param)
    if args.k is not None:
        base["k"] = args.k
    resolve_params(scenario, {**base, args.param_name: 0.0})  # reject unknown names early
    values = np.linspace(args.start, args.stop, args.num) if args.num else []
    grid = []
    for n in n_values:
        point = dict(base)
        if n is not None:
            point["n"] = n
        grid.extend((point, float(v)) for v in values)

    logger.info("sweeping %s over %d points", scenario.name, len(grid))
    with ThreadPoolExecutor(max_workers=settings.workers) as pool:
        rows = list(pool.map(lambda item: _sweep_row(scenario.name, args.param_name, item[1], item[0]),
                             grid))
    return _write_csv(SWEEP_COLUMNS, rows)


def _critical_sweep(args, n_values) -> str:
    if n_values == [None]:
        raise ArgumentError("--critical-noise needs --n-values")
    observable = args.observable or ("z" if args.target == "ghz" else "x")

    def row(n: int):
        if args.target == "ghz":
            target = make_ghz(n, 2, [1 / np.sqrt(2)] * 2)
        else:
            target = make_generalized_w([1 / np.sqrt(n)] * n)
        k = args.k if args.k is not None else (n - 1 if args.target == "ghz" else 2)
        result = critical_noise(target, [pauli(observable)] * n, k)
        return (args.target, n, k, observable, format_float(result.v_star),
                str(result.monotone).lower())

    with ThreadPoolExecutor(max_workers=get_settings().workers) as pool:
        rows = list(pool.map(row, n_values))
    return _write_csv(CRITICAL_COLUMNS, rows)


def cmd_ledger(args) -> str:
    return DiscrepancyLedger().summary(claim=args.claim)


COMMANDS = {
    "bound": cmd_bound,
    "witness": cmd_witness,
    "threshold": cmd_threshold,
    "bell": cmd_bell,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "ledger": cmd_ledger,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = get_settings()
    level = {0: settings.log_level, 1: "INFO"}.get(args.verbose, "DEBUG")
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text = COMMANDS[args.command](args)
    except NgmeError as exc:
        print(f"error: {exc.detail}", file=sys.stderr)
        return exc.exit_code
    if not text.endswith("\n"):
        text += "\n"
    _emit(text, getattr(args, "output", None))
    return 0
