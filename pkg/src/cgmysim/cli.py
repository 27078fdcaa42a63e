"""Command-line front end: ``cgmysim {price,validate,sample-paths}``.

Every flag can also be given in a ``--config`` file of ``key = value``
lines (``#`` starts a comment; keys are flag names without the leading
dashes, e.g. ``eps-tilde = 1e-4``).  Flags on the command line win.

Exit codes: 0 success, 1 validation-suite failure, 2 bad configuration,
3 sampler domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field

from . import engine, validation
from .engine import Method, PayoffKind, PayoffSpec
from .ggc import TcdConfig, Variant
from .model import DESIGN_I, DESIGN_II, CgmyParams, DomainError, MarketSpec
from .rngkit import SamplerError

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3
MAX_PATHS = 10_000
DEFAULT_WEEKLY = 13

DESIGNS = {"I": DESIGN_I, "II": DESIGN_II}
METHODS = {
    "exact": (Method.EXACT, Variant.SERIES),
    "tcd": (Method.TCD, Variant.CFTP),
    "tcd-app": (Method.TCD, Variant.SERIES),
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    params: CgmyParams
    market: MarketSpec
    method: str = "exact"
    tcd: TcdConfig = field(default_factory=TcdConfig)
    option: str = "european"
    strikes: tuple = (100.0,)
    barrier: float | None = None
    lookback_min: bool = False
    n_trials: int = 100_000
    seed: int = 1
    threads: int | None = None

    @property
    def engine_method(self) -> Method:
        return METHODS[self.method][0]

    def payoffs(self) -> list[PayoffSpec]:
        kind = PayoffKind(self.option)
        if kind is PayoffKind.LOOKBACK_FLOAT_CALL:
            return [PayoffSpec(kind, lookback_min=self.lookback_min)]
        return [PayoffSpec(kind, strike=k, barrier=self.barrier) for k in self.strikes]


def _float_list(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(parser: argparse.ArgumentParser):
    g = parser.add_argument_group("model")
    g.add_argument("--design", choices=sorted(DESIGNS), default="I", help="parameter preset (default I)")
    for name in ("C", "G", "M", "Y"):
        g.add_argument(f"--{name}", type=float, default=None, help=f"override {name} of the preset")
    g.add_argument("--r", type=float, default=0.0548, help="risk-free rate")
    g.add_argument("--q", type=float, default=0.0, help="dividend yield")
    g.add_argument("--S0", type=float, default=100.0, help="spot")
    g.add_argument("--T", type=float, default=0.25, help="maturity in years")
    g.add_argument("--weekly", type=int, default=None,
                   help="number of equal monitoring steps (default 1 for European payoffs, else 13)")
    s = parser.add_argument_group("sampler")
    s.add_argument("--method", choices=sorted(METHODS), default="exact")
    s.add_argument("--eps", type=float, default=1e-4, help="per-increment truncation budget")
    s.add_argument("--eps-tilde", type=float, default=1e-4, help="series truncation budget")
    s.add_argument("--L", type=float, default=None, help="fixed truncation level instead of l_min(eps)")
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--threads", type=int, default=None, help="worker threads (env CGMY_SIM_THREADS)")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument("--config", default=None, help="key = value file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgmysim", description="CGMY path sampling and option pricing.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("price", allow_abbrev=False, help="Monte Carlo option prices as CSV")
    _common(p)
    p.add_argument("--option", choices=[k.value for k in PayoffKind], default="european")
    p.add_argument("--strikes", type=_float_list, default=(100.0,), help="comma-separated strikes")
    p.add_argument("--barrier", type=float, default=None)
    p.add_argument("--lookback-min", action="store_true", help="lookback against the running minimum")
    p.add_argument("--no-timing", action="store_true", help="leave elapsed_sec empty (byte-stable output)")

    v = sub.add_parser("validate", allow_abbrev=False, help="statistical self-checks of the samplers")
    _common(v)
    v.add_argument("--only", type=lambda t: tuple(x.strip() for x in t.split(",") if x.strip()),
                   default=None, help=f"comma-separated subset of: {', '.join(validation.CHECKS)}")

    sp = sub.add_parser("sample-paths", allow_abbrev=False, help="sampled paths as long-format CSV")
    _common(sp)
    sp.set_defaults(trials=10)
    return parser


def _subparser(parser: argparse.ArgumentParser, command: str) -> argparse.ArgumentParser:
    for action in parser._subparsers._group_actions:
        if command in action.choices:
            return action.choices[command]
    raise KeyError(command)


def read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected 'key = value'")
        key, val = (t.strip() for t in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = val
    return out


def _apply_config(parser, command, argv, values: dict[str, str]):
    sub = _subparser(parser, command)
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, val in values.items():
        if key in ("config", "help") or key not in actions:
            raise ConfigError(f"unknown config key {key!r}")
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            low = val.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"config key {key!r} expects true/false, got {val!r}")
            defaults[key] = low in ("true", "1", "yes")
        else:
            # string defaults are converted by argparse with the action's type
            defaults[key] = val
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def config_from_args(args) -> ExperimentConfig:
    base = DESIGNS[args.design]
    over = {k: getattr(args, k) for k in ("C", "G", "M", "Y") if getattr(args, k) is not None}
    params = CgmyParams(**{**{k: getattr(base, k) for k in ("C", "G", "M", "Y")}, **over})
    option = getattr(args, "option", "european")
    weekly = args.weekly
    if weekly is None:
        european = option in (PayoffKind.EUROPEAN_CALL.value, PayoffKind.EUROPEAN_PUT.value)
        weekly = 1 if european and args.command == "price" else DEFAULT_WEEKLY
    if weekly < 1:
        raise ConfigError(f"--weekly must be at least 1, got {weekly}")
    market = MarketSpec.uniform(args.r, args.q, args.S0, args.T, weekly)
    _, variant = METHODS[args.method]
    tcd = TcdConfig(eps=args.eps, eps_tilde=args.eps_tilde, L_override=args.L, variant=variant)
    if args.trials < 1:
        raise ConfigError(f"--trials must be positive, got {args.trials}")
    if args.seed < 0:
        raise ConfigError(f"--seed must be nonnegative, got {args.seed}")
    if args.threads is not None and args.threads < 1:
        raise ConfigError(f"--threads must be positive, got {args.threads}")
    cfg = ExperimentConfig(
        params=params,
        market=market,
        method=args.method,
        tcd=tcd,
        option=option,
        strikes=tuple(getattr(args, "strikes", (100.0,))),
        barrier=getattr(args, "barrier", None),
        lookback_min=getattr(args, "lookback_min", False),
        n_trials=args.trials,
        seed=args.seed,
        threads=args.threads,
    )
    if args.command == "price":
        if not cfg.strikes and option != PayoffKind.LOOKBACK_FLOAT_CALL.value:
            raise ConfigError("--strikes is empty")
        cfg.payoffs()  # validates strikes and barrier
    return cfg


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def cmd_price(cfg: ExperimentConfig, out, *, timing: bool = True) -> int:
    specs = cfg.payoffs()
    ests = engine.price_many(specs, cfg.params, cfg.market, cfg.engine_method, cfg.tcd,
                             cfg.n_trials, cfg.seed, cfg.threads)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["strike", "method", "estimate", "stderr", "elapsed_sec", "n_trials", "seed"])
    for spec, est in zip(specs, ests):
        w.writerow([_num(spec.strike), cfg.method, _num(est.mean), _num(est.stderr),
                    _num(est.elapsed_seconds) if timing else "", est.n_trials, cfg.seed])
    return EXIT_OK


def cmd_validate(cfg: ExperimentConfig, out, only=None) -> int:
    results = validation.run_checks(cfg.params, cfg.market.T, cfg.tcd, cfg.seed, only)
    for res in results:
        print(res.line(), file=out, flush=True)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def cmd_sample_paths(cfg: ExperimentConfig, out) -> int:
    if cfg.n_trials > MAX_PATHS:
        raise ConfigError(f"sample-paths writes at most {MAX_PATHS} paths, got {cfg.n_trials}")
    m = cfg.market
    x = engine.simulate_log_paths(cfg.params, m, cfg.engine_method, cfg.tcd, cfg.n_trials, cfg.seed, cfg.threads)
    s = engine.asset_paths(cfg.params, m, x)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["trial", "t", "X", "S"])
    for i in range(cfg.n_trials):
        for t, xv, sv in zip(m.times, x[i], s[i]):
            w.writerow([i, _num(t), _num(xv), _num(sv)])
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.config:
            args = _apply_config(parser, args.command, argv, read_config(args.config))
        cfg = config_from_args(args)
        buf = io.StringIO()
        if args.command == "price":
            code = cmd_price(cfg, buf, timing=not args.no_timing)
        elif args.command == "validate":
            if args.out is None:
                return cmd_validate(cfg, sys.stdout, args.only)
            code = cmd_validate(cfg, buf, args.only)
        else:
            code = cmd_sample_paths(cfg, buf)
    except (DomainError, SamplerError) as exc:
        print(f"cgmysim: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    except ValueError as exc:
        print(f"cgmysim: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = buf.getvalue()
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
