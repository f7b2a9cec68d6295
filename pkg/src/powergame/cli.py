"""Command-line front end: solvers, equilibria, bounds, simulation, experiments.

Scenario files are JSON with keys mirroring the library's config types::

    {
      "model":   {"family": "pkt", "m": 2}            // or {"family": "exp",
                                                      //     "rate": 1.0 | "c": 0.5}
      "network": {"k": 2, "n": 1, "sigma2": 1.0, "rates": 1.0,
                  "p_max": 10.0, "eta_min": 1.0, "eta_max": 1.0},
      "channel": {"mode": "constant", "mean_gain2": 1.0},   // optional
      "gains2":  [1.0, 1.0],                                // optional: skip drawing
      "plan":    {"type": "frg", "t_total": 10, "t0": 3}    // simulate only
                 // or {"type": "drg", "lam": 0.1}
      "deviation": {"player": 1, "stage": 5, "power": "max",
                    "best_response_after": false}           // optional script
    }

Per-player fields accept a scalar (applied to everyone) or a k-length list.
``--set key=value`` overrides dotted scenario keys (``--set network.k=4``);
values parse as JSON, falling back to plain strings.  Players are 1-based on
the command line and in all emitted files.

Seed precedence: ``--seed`` flag, then the POWERGAME_SEED environment
variable, then the documented default 1729.

Exit codes: 0 success; 1 other error; 2 usage; 3 saturated regime;
4 no one-shot equilibrium; 5 no finite cooperation horizon; 6 bad channel
config.
"""

from __future__ import annotations

import argparse
import inspect
import json
import os
import sys

from . import experiments
from .channel import ChannelProcess, draw_sequence
from .efficiency import (
    InfoTheoretic,
    PacketSuccess,
    equal_action_utility,
    solve_all,
)
from .errors import (
    ChannelConfigError,
    NoFiniteT0Error,
    NoNashEquilibriumError,
    PowerGameError,
    SaturatedRegimeError,
)
from .experiments import DEFAULT_SEED
from .repeated import (
    DeviationScenario,
    DrgPlan,
    FrgPlan,
    averaged_utility_drg,
    averaged_utility_frg,
    delta_gain,
    drg_truncation_horizon,
    lambda_bound,
    make_machines,
    rg_bounds,
    run_game,
    t0_bound,
    trace_to_csv,
)
from .static_game import ChannelState, NetworkConfig, ne_profile, op_profile, se_profiles, utility

_EXIT_BY_ERROR = (
    (SaturatedRegimeError, 3),
    (NoNashEquilibriumError, 4),
    (NoFiniteT0Error, 5),
    (ChannelConfigError, 6),
)


def _emit(key, value) -> None:
    if isinstance(value, float):
        value = repr(float(value))  # plain repr even for numpy scalars
    print(f"{key}={value}")


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_overrides(doc: dict, pairs) -> dict:
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError(f"--set needs key=value, got {pair!r}")
        key, _, raw = pair.partition("=")
        node = doc
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValueError(f"cannot descend into scalar at {part!r}")
        node[parts[-1]] = _parse_value(raw)
    return doc


def _load_scenario(path: str, overrides) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    return _apply_overrides(doc, overrides)


def _build_model(fields: dict):
    family = fields.get("family")
    if family == "pkt":
        return PacketSuccess(int(fields["m"]))
    if family == "exp":
        if "c" in fields:
            return InfoTheoretic.from_c(float(fields["c"]))
        return InfoTheoretic(float(fields["rate"]))
    raise ValueError(f"unknown model family {family!r} (want 'pkt' or 'exp')")


def _build_network(fields: dict) -> NetworkConfig:
    return NetworkConfig(k=int(fields["k"]), n=int(fields["n"]),
                         sigma2=float(fields["sigma2"]), rates=fields["rates"],
                         p_max=fields["p_max"], eta_min=fields["eta_min"],
                         eta_max=fields["eta_max"])


def _resolve_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("POWERGAME_SEED")
    if env is not None:
        return int(env)
    return DEFAULT_SEED


def _gains(doc: dict, cfg: NetworkConfig, seed: int, stages: int):
    """Channel states for the run: explicit gains2, or drawn from the process."""
    if "gains2" in doc:
        state = ChannelState(tuple(float(g) for g in doc["gains2"]))
        if len(state.gains2) != cfg.k:
            raise ValueError("gains2 must list one gain per player")
        return [state] * stages
    chan = dict(doc.get("channel", {}))
    chan.setdefault("mode", "constant")
    mean = chan.get("mean_gain2", 1.0)
    process = ChannelProcess.from_config(cfg, chan["mode"], mean_gain2=mean,
                                         seed=chan.get("seed", seed))
    return draw_sequence(process, stages)


def _parse_deviation(text: str) -> dict:
    fields = {}
    for item in text.split(","):
        key, _, raw = item.partition("=")
        fields[key.strip()] = raw.strip()
    return fields


def _build_deviation(fields: dict) -> DeviationScenario:
    power = fields["power"]
    if power not in ("max", "best_response"):
        power = float(power)
    after = str(fields.get("best_response_after", "false")).lower()
    return DeviationScenario(
        player=int(fields["player"]) - 1, stage=int(fields["stage"]),
        power=power,
        best_response_after=after in ("1", "true", "yes"))


def cmd_solve(args) -> int:
    if args.model == "pkt":
        if args.m is None:
            raise ValueError("--model pkt needs --m")
        model = PacketSuccess(args.m)
    else:
        if args.c is not None:
            model = InfoTheoretic.from_c(args.c)
        elif args.rate is not None:
            model = InfoTheoretic(args.rate)
        else:
            raise ValueError("--model exp needs --rate or --c")
    sinrs = solve_all(model, args.k, args.n)
    phi_ne = equal_action_utility(model, sinrs.beta_star, args.k, args.n)
    phi_op = equal_action_utility(model, sinrs.gamma_tilde, args.k, args.n)
    _emit("beta_star", sinrs.beta_star)
    _emit("gamma_star", sinrs.gamma_star)
    _emit("gamma_tilde", sinrs.gamma_tilde)
    _emit("phi_beta_star", phi_ne)
    _emit("phi_gamma_tilde", phi_op)
    _emit("delta", phi_op - phi_ne)
    return 0


def cmd_equilibria(args) -> int:
    doc = _load_scenario(args.scenario, args.set)
    model = _build_model(doc["model"])
    cfg = _build_network(doc["network"])
    sinrs = solve_all(model, cfg.k, cfg.n)
    ch = _gains(doc, cfg, _resolve_seed(args), 1)[0]
    leader = args.leader - 1

    for name, profile in (("ne", ne_profile(cfg, ch, sinrs.beta_star)),
                          ("op", op_profile(cfg, ch, sinrs.gamma_tilde))):
        u = utility(model, cfg, ch, profile)
        for i in range(cfg.k):
            _emit(f"{name}_power_{i + 1}", profile.p[i])
            _emit(f"{name}_utility_{i + 1}", u.u[i])
    profile, u = se_profiles(model, cfg, ch, sinrs.beta_star,
                             sinrs.gamma_star, leader)
    for i in range(cfg.k):
        _emit(f"se_power_{i + 1}", profile.p[i])
        _emit(f"se_utility_{i + 1}", u.u[i])
    _emit("se_leader", leader + 1)
    return 0


def cmd_bounds(args) -> int:
    doc = _load_scenario(args.scenario, args.set)
    model = _build_model(doc["model"])
    cfg = _build_network(doc["network"])
    sinrs = solve_all(model, cfg.k, cfg.n)
    bounds = rg_bounds(cfg, model, sinrs.beta_star, sinrs.gamma_tilde)
    _emit("t0", bounds.t0)
    _emit("lambda_max", bounds.lambda_max)
    _emit("delta", bounds.delta)
    return 0


def _build_plan(doc: dict, args):
    plan_doc = dict(doc.get("plan", {}))
    if args.plan is not None:
        plan_doc["type"] = args.plan
    if args.t is not None:
        plan_doc["t_total"] = args.t
    if args.t0 is not None:
        plan_doc["t0"] = args.t0
    if args.lam is not None:
        plan_doc["lam"] = args.lam
    kind = plan_doc.get("type")
    if kind == "frg":
        return FrgPlan(int(plan_doc["t_total"]), int(plan_doc["t0"]))
    if kind == "drg":
        return DrgPlan(float(plan_doc["lam"]))
    raise ValueError("plan type must be 'frg' or 'drg' (scenario or --plan)")


def cmd_simulate(args) -> int:
    doc = _load_scenario(args.scenario, args.set)
    model = _build_model(doc["model"])
    cfg = _build_network(doc["network"])
    sinrs = solve_all(model, cfg.k, cfg.n)
    plan = _build_plan(doc, args)
    if isinstance(plan, FrgPlan):
        stages = plan.t_total
    else:
        stages = args.stages or min(drg_truncation_horizon(plan.lam), 100_000)

    scenario = None
    dev_fields = None
    if args.deviate:
        dev_fields = _parse_deviation(args.deviate)
    elif "deviation" in doc:
        dev_fields = doc["deviation"]
    if dev_fields is not None:
        scenario = _build_deviation(dict(dev_fields))

    machines = make_machines(cfg, model, plan, sinrs.beta_star,
                             sinrs.gamma_tilde)
    channels = _gains(doc, cfg, _resolve_seed(args), stages)
    trace = run_game(model, cfg, channels, machines, scenario,
                     beta_star=sinrs.beta_star)
    out = args.out or experiments._default_path(".", "trace")
    trace_to_csv(out, trace)

    _emit("out", out)
    _emit("stages", len(trace))
    detected = next((r.t for r in trace if r.deviation_detected), None)
    _emit("deviation_detected_at", detected if detected is not None else "none")
    for i in range(cfg.k):
        if isinstance(plan, FrgPlan):
            _emit(f"avg_utility_{i + 1}", averaged_utility_frg(trace, i))
        else:
            avg = averaged_utility_drg(trace, i, plan.lam)
            _emit(f"avg_utility_{i + 1}", avg.value)
            _emit(f"avg_utility_tail_bound_{i + 1}", avg.tail_bound)
    return 0


_EXPERIMENTS = {
    "fig1": experiments.fig1_region,
    "fig2": experiments.fig2_dynamics_vs_t,
    "fig3": experiments.fig3_dynamics_vs_lambda,
    "fig4": experiments.fig4_welfare_vs_load,
    "fig5": experiments.fig5_frg_ratio_vs_t,
    "t0sweep": experiments.fig5_t0_sweep,
}


def cmd_experiment(args) -> int:
    runner = _EXPERIMENTS[args.name]
    params = inspect.signature(runner).parameters
    kwargs = {}
    for pair in args.set or []:
        key, _, raw = pair.partition("=")
        if key not in params:
            raise ValueError(
                f"unknown option {key!r} for {args.name}; valid: "
                + ", ".join(sorted(params)))
        kwargs[key] = _parse_value(raw)
    if "workers" in params:
        kwargs.setdefault("workers", args.workers)
    if "seed" in params:
        kwargs.setdefault("seed", _resolve_seed(args))
    if "replicas" in params and args.replicas is not None:
        kwargs["replicas"] = args.replicas
    if args.out is not None:
        kwargs["csv_path" if "csv_path" in params else "region_path"] = args.out
    kwargs.setdefault("out_dir", args.out_dir)

    result = runner(**kwargs)
    if args.name == "fig1":
        _emit("region", result.region_path)
        _emit("points", result.points_path)
        _emit("op_within_one_cell", result.op_within_one_cell)
        _emit("op_dominates_ne", result.op_dominates_ne)
        _emit("convexity_ratio", result.convexity_ratio)
    elif args.name in ("fig2", "fig3"):
        _emit("out", result.csv_path)
        _emit("rows", len(result.rows))
    elif args.name == "fig4":
        _emit("out", result.csv_path)
        _emit("rows", len(result.rows))
        _emit("skipped", len(result.skipped))
    elif args.name == "fig5":
        _emit("out", result.csv_path)
        _emit("t0", result.t0)
        _emit("limit_ratio", result.limit_ratio)
    else:
        _emit("out", result.csv_path)
        _emit("any_match", result.any_match)
        _emit("implied_eta_min", result.implied_eta_min)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powergame",
        description="Energy-efficiency power-control games: solvers, "
                    "equilibria, repeated-game bounds, simulation, experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="characteristic SINRs and utility factors")
    p.add_argument("--model", choices=("pkt", "exp"), required=True)
    p.add_argument("--m", type=int, help="packet-success block length")
    p.add_argument("--rate", type=float, help="info-theoretic target rate")
    p.add_argument("--c", type=float, help="info-theoretic SINR constant 2^rate - 1")
    p.add_argument("--k", type=int, default=2, help="number of players")
    p.add_argument("--n", type=int, default=1, help="spreading factor")
    p.set_defaults(fn=cmd_solve)

    for name, fn, extra in (("equilibria", cmd_equilibria, "leader"),
                            ("bounds", cmd_bounds, None)):
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, help="scenario JSON path")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override dotted scenario keys")
        p.add_argument("--seed", type=int)
        if extra == "leader":
            p.add_argument("--leader", type=int, default=1,
                           help="1-based leader for the leader-follower point")
        p.set_defaults(fn=fn)

    p = sub.add_parser("simulate", help="run a repeated game, write the trace CSV")
    p.add_argument("--scenario", required=True)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--plan", choices=("frg", "drg"))
    p.add_argument("--t", type=int, help="finite horizon (frg)")
    p.add_argument("--t0", type=int, help="endgame length (frg)")
    p.add_argument("--lam", type=float, help="stopping probability (drg)")
    p.add_argument("--stages", type=int, help="drg truncation override")
    p.add_argument("--deviate", metavar="player=I,stage=T,power=P",
                   help="force a deviation (power: watts, 'max', or "
                        "'best_response'; add best_response_after=true)")
    p.add_argument("--out", help="trace CSV path")
    p.add_argument("--seed", type=int)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("experiment", help="regenerate a study as CSV")
    p.add_argument("name", choices=sorted(_EXPERIMENTS))
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--replicas", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override runner keyword arguments")
    p.set_defaults(fn=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except PowerGameError as exc:
        for err_type, code in _EXIT_BY_ERROR:
            if isinstance(exc, err_type):
                print(f"error: {exc}", file=sys.stderr)
                return code
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
