"""Command-line interface: graph generation, simulation, enumeration,
model fits, the SIS comparator, and canned figure reproductions.

Numeric config fields travel as decimal strings (parsed exactly via
``Fraction``) so exact-arithmetic runs are not polluted by float
round-tripping.  Command-line flags override config-file fields.  Exit
codes: 0 success, 1 usage/validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import approx, exact, experiments, graph, montecarlo as mc, sis
from .contagion import ConstantDelta, CuringDelta, UrnInit
from .errors import ParseError, PolyaNetError, ValidationError


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


def load_config(path) -> dict:
    """Read a JSON config file; errors carry position information."""
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise ParseError(f"cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(
            f"config {path} is not valid JSON (line {e.lineno}, column {e.colno}): {e.msg}"
        ) from e


def _merged(args: argparse.Namespace, keys: list[str]) -> dict:
    """Overlay: defaults < config file < explicitly given flags."""
    cfg = dict(load_config(args.config)) if getattr(args, "config", None) else {}
    unknown = set(cfg) - set(keys)
    if unknown:
        raise ValidationError(f"unknown config fields: {sorted(unknown)}")
    out = {}
    for key in keys:
        flag = getattr(args, key, None)
        out[key] = flag if flag is not None else cfg.get(key)
    return out


def _fraction(text, field: str) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as e:
        raise ValidationError(f"{field} must be a decimal or rational string, got {text!r}") from e


def _mass_list(text, field: str, n: int, *, positive: bool) -> tuple:
    if text is None:
        values = [Fraction(1)] * n
    else:
        parts = str(text).split(",")
        values = [_fraction(p, field) for p in parts]
        if len(values) == 1:
            values = values * n
        if len(values) != n:
            raise ValidationError(
                f"{field} needs 1 or {n} comma-separated values, got {len(values)}"
            )
    for i, v in enumerate(values):
        if positive and v <= 0:
            raise ValidationError(
                f"{field} must be > 0 for every node (urns need both colors); "
                f"node {i} has {v}"
            )
        if not positive and v < 0:
            raise ValidationError(f"{field} must be >= 0; node {i} has {v}")
    return tuple(values)


def _require(cond: bool, message: str):
    if not cond:
        raise ValidationError(message)


def _load_net(settings) -> graph.Network:
    _require(settings.get("graph") is not None, "a --graph edge-list file is required")
    return graph.read_edge_list(settings["graph"])


def _int_field(settings, field, default=None, minimum=None):
    raw = settings.get(field)
    if raw is None:
        raw = default
    _require(raw is not None, f"{field} is required")
    try:
        value = int(str(raw))
    except ValueError:
        raise ValidationError(f"{field} must be an integer, got {raw!r}")
    if minimum is not None:
        _require(value >= minimum, f"{field} must be >= {minimum}, got {value}")
    return value


def _urns(settings, n: int) -> UrnInit:
    red = _mass_list(settings.get("red"), "red", n, positive=True)
    black = _mass_list(settings.get("black"), "black", n, positive=True)
    return UrnInit(red=red, black=black)


def _schedule(settings, n: int, exact_mode: bool):
    delta = settings.get("delta")
    delta_red = settings.get("delta_red", None)
    delta_black = settings.get("delta_black", None)
    mult = settings.get("curing_multiplier")
    if delta is not None and (delta_red is not None or delta_black is not None):
        raise ValidationError("give either --delta or --delta-red/--delta-black, not both")
    conv = (lambda v: v) if exact_mode else float
    if mult is not None:
        dr = _fraction(delta_red if delta_red is not None else delta or 0, "delta_red")
        _require(dr >= 0, f"delta_red must be >= 0, got {dr}")
        m = _fraction(mult, "curing_multiplier")
        _require(m >= 0, f"curing_multiplier must be >= 0, got {m}")
        return CuringDelta(conv(dr), conv(m))
    if delta is not None:
        masses = _mass_list(delta, "delta", n, positive=False)
        return ConstantDelta(tuple(conv(v) for v in masses))
    red = _mass_list(delta_red if delta_red is not None else "0", "delta_red", n,
                     positive=False)
    black = _mass_list(delta_black if delta_black is not None else "0", "delta_black", n,
                       positive=False)
    return ConstantDelta(tuple(conv(v) for v in red), tuple(conv(v) for v in black))


def _to_float_init(init: UrnInit) -> UrnInit:
    return UrnInit(red=tuple(float(v) for v in init.red),
                   black=tuple(float(v) for v in init.black))


# ----------------------------------------------------------------------
# Subcommand handlers
# ----------------------------------------------------------------------

_GRAPH_KEYS = ["kind", "nodes", "attach", "seed", "out"]
_SIM_KEYS = ["graph", "red", "black", "delta", "delta_red", "delta_black",
             "curing_multiplier", "memory", "horizon", "trials", "seed",
             "pair_node", "out", "threads"]
_ENUM_KEYS = ["graph", "red", "black", "delta", "delta_red", "delta_black",
              "horizon", "cap", "float", "out"]
_FIT_KEYS = ["graph", "red", "black", "delta", "horizon", "node", "out"]
_SIS_KEYS = ["graph", "red", "black", "beta", "delta_sis", "horizon", "out"]


def _cmd_graph_gen(args) -> int:
    s = _merged(args, _GRAPH_KEYS)
    _require(s["kind"] in ("complete", "cycle", "star", "ba"),
             f"kind must be complete|cycle|star|ba, got {s['kind']!r}")
    n = _int_field(s, "nodes", minimum=1)
    m = _int_field(s, "attach", default=1, minimum=1) if s["kind"] == "ba" else None
    seed = _int_field(s, "seed", default=0)
    net = graph.generate(s["kind"], n, m=m, seed=seed)
    if s["out"]:
        graph.write_edge_list(net, s["out"])
    else:
        sys.stdout.write(f"{net.node_count}\n")
        for i, j in net.edges:
            sys.stdout.write(f"{i} {j}\n")
    return 0


def _cmd_simulate(args) -> int:
    s = _merged(args, _SIM_KEYS)
    net = _load_net(s)
    init = _to_float_init(_urns(s, net.node_count))
    sched = _schedule(s, net.node_count, exact_mode=False)
    horizon = _int_field(s, "horizon", minimum=1)
    trials = _int_field(s, "trials", default=1000, minimum=1)
    seed = _int_field(s, "seed", default=0)
    memory = s.get("memory")
    memory = None if memory in (None, "", "inf") else _int_field(s, "memory", minimum=1)
    pair_node = s.get("pair_node")
    pair_node = None if pair_node is None else _int_field(s, "pair_node", minimum=0)
    if pair_node is not None:
        _require(pair_node < net.node_count, f"pair_node {pair_node} not in the network")
    threads = _int_field(s, "threads", default=experiments.default_threads(), minimum=1)
    cfg = mc.RunConfig(net=net, init=init, sched=sched, horizon=horizon,
                       trials=trials, seed=seed, memory=memory,
                       collect_pair_freq=pair_node is not None, threads=threads)
    stats = mc.run_trials(cfg)
    if s["out"]:
        mc.write_trajectory_csv(stats, cfg, s["out"], pair_node=pair_node)
    final = stats.infection_rate[horizon]
    print(f"config={mc.config_hash(cfg)} seed={seed} trials={trials} "
          f"final_infection_rate={final:.6f} "
          f"final_susceptibility={stats.susceptibility[horizon]:.6f}")
    return 0


def _cmd_enumerate(args) -> int:
    s = _merged(args, _ENUM_KEYS)
    net = _load_net(s)
    init = _urns(s, net.node_count)
    horizon = _int_field(s, "horizon", minimum=1)
    cap = _int_field(s, "cap", default=exact.ENUMERATION_CAP, minimum=1)
    use_float = bool(s.get("float"))
    sched = _schedule(s, net.node_count, exact_mode=not use_float)
    if use_float:
        init = _to_float_init(init)
    table = exact.enumerate_joint(net, init, sched, horizon, exact=not use_float, cap=cap)
    header = [f"nodes={net.node_count} horizon={horizon} exact={table.exact}"]
    if s["out"]:
        table.write_csv(s["out"], header_lines=header)
        print(f"wrote {2 ** (net.node_count * horizon)} assignments to {s['out']}")
    else:
        table.write_csv(sys.stdout, header_lines=header)
    return 0


def _cmd_fit(args) -> int:
    s = _merged(args, _FIT_KEYS)
    net = _load_net(s)
    init = _urns(s, net.node_count)
    delta = _fraction(s.get("delta", "1") or "1", "delta")
    _require(delta >= 0, f"delta must be >= 0, got {delta}")
    horizon = _int_field(s, "horizon", minimum=1)
    node = _int_field(s, "node", default=0, minimum=0)
    _require(node < net.node_count, f"node {node} not in the network")
    record = approx.fit_node(net, init, delta, node, horizon)
    blob = json.dumps(record, indent=2)
    if s["out"]:
        with open(s["out"], "w") as fh:
            fh.write(blob + "\n")
    print(blob)
    return 0


def _cmd_sis(args) -> int:
    s = _merged(args, _SIS_KEYS)
    net = _load_net(s)
    init = _urns(s, net.node_count)
    _require(s.get("beta") is not None, "--beta is required")
    _require(s.get("delta_sis") is not None, "--delta-sis is required")
    beta = float(_fraction(s["beta"], "beta"))
    delta_sis = float(_fraction(s["delta_sis"], "delta_sis"))
    horizon = _int_field(s, "horizon", minimum=0)
    params = sis.SisParams(beta=beta, delta_sis=delta_sis)
    traj = sis.sis_run(net, sis.default_initial_probs(init), params, horizon)
    verdict = sis.threshold_classify(net, params)
    if s["out"]:
        with open(s["out"], "w") as fh:
            from . import __version__

            fh.write(f"# beta={beta!r} delta_sis={delta_sis!r} "
                     f"classification={verdict} version={__version__}\n")
            cols = ",".join(f"P_{i + 1}" for i in range(net.node_count))
            fh.write(f"t,{cols},mean\n")
            for t in range(horizon + 1):
                row = ",".join(repr(float(v)) for v in traj.probs[t])
                fh.write(f"{t},{row},{float(traj.mean[t])!r}\n")
    print(f"classification={verdict} lambda_max={graph.largest_eigenvalue(net):.6f} "
          f"final_mean={traj.mean[-1]:.3e}")
    return 0


def _cmd_reproduce(args) -> int:
    out_dir = args.out_dir or "results"
    os.makedirs(out_dir, exist_ok=True)
    threads = args.threads or experiments.default_threads()
    if args.figure == "fig2":
        trials = args.trials or experiments.STATIONARITY_TRIALS
        cfg, stats, report = experiments.run_stationarity(trials=trials, threads=threads)
        path = os.path.join(out_dir, "stationarity.csv")
        mc.write_trajectory_csv(stats, cfg, path, pair_node=experiments.STATIONARITY_NODE)
        print(f"wrote {path}; settled={report.settled_value:.6f} "
              f"max_successive_deviation={report.max_successive_deviation:.6f}")
        return 0
    if args.figure == "fig4":
        trials = args.trials or experiments.HIST_TRIALS
        for name in experiments.HIST_CASES:
            cfg, stats, node, beta, ks = experiments.histogram_case(name, trials=trials,
                                                                    threads=threads)
            hist = mc.histogram(stats.sample_averages[:, node], bins=40)
            path = os.path.join(out_dir, f"histogram_{name}.csv")
            mc.write_histogram_csv(hist, cfg, path)
            print(f"wrote {path}; node={node} beta=({beta.alpha:.4f},{beta.beta:.4f}) "
                  f"ks={ks:.4f}")
        return 0
    if args.figure == "fig5":
        trials = args.trials or experiments.SIS_TRIALS
        net = experiments.sis_comparison_network()
        lam = graph.largest_eigenvalue(net)
        for name, ratio in experiments.sis_ratio_cases(net).items():
            for memory in (None, experiments.SIS_MEMORY):
                cfg, stats = experiments.run_sis_comparison(
                    ratio, memory, trials=trials, threads=threads)
                tag = "inf" if memory is None else f"m{memory}"
                path = os.path.join(out_dir, f"sis_comparison_{name}_{tag}.csv")
                mc.write_trajectory_csv(stats, cfg, path)
                print(f"wrote {path}; ratio={ratio:.4f} "
                      f"final={stats.infection_rate[cfg.horizon]:.4f}")
            traj = experiments.run_sis_reference(ratio)
            path = os.path.join(out_dir, f"sis_reference_{name}.csv")
            with open(path, "w") as fh:
                fh.write(f"# ratio={ratio!r} beta={experiments.SIS_BETA!r} "
                         f"lambda_max={lam!r}\n")
                fh.write("t,mean\n")
                for t, v in enumerate(traj.mean):
                    fh.write(f"{t},{v!r}\n")
            print(f"wrote {path}")
        return 0
    raise ValidationError(f"unknown figure {args.figure!r}")


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="polya-net",
                     description="Network contagion via super-urn sampling")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, keys):
        p.add_argument("--config", help="JSON config file; flags override its fields")
        if "graph" in keys:
            p.add_argument("--graph", help="edge-list file (first line N, then 'i j' rows)")
        if "red" in keys:
            p.add_argument("--red", help="per-node red mass list, e.g. 1,2,1 (default 1)")
            p.add_argument("--black", help="per-node black mass list (default 1)")

    g = sub.add_parser("graph-gen", help="emit a generated network as an edge list")
    g.add_argument("--config")
    g.add_argument("--kind", choices=["complete", "cycle", "star", "ba"])
    g.add_argument("--nodes")
    g.add_argument("--attach", help="attachment count m for ba")
    g.add_argument("--seed")
    g.add_argument("--out")
    g.set_defaults(func=_cmd_graph_gen)

    sim = sub.add_parser("simulate", help="Monte Carlo trajectories")
    add_common(sim, _SIM_KEYS)
    sim.add_argument("--delta", help="constant equal red/black mass (list ok)")
    sim.add_argument("--delta-red", dest="delta_red")
    sim.add_argument("--delta-black", dest="delta_black")
    sim.add_argument("--curing-multiplier", dest="curing_multiplier",
                     help="black mass = multiplier x martingale bound")
    sim.add_argument("--memory", help="finite memory M (default infinite)")
    sim.add_argument("--horizon")
    sim.add_argument("--trials")
    sim.add_argument("--seed")
    sim.add_argument("--pair-node", dest="pair_node",
                     help="also record this node's consecutive-pair frequency")
    sim.add_argument("--threads")
    sim.add_argument("--out", help="trajectory CSV path")
    sim.set_defaults(func=_cmd_simulate)

    en = sub.add_parser("enumerate", help="exact joint distribution table")
    add_common(en, _ENUM_KEYS)
    en.add_argument("--delta")
    en.add_argument("--delta-red", dest="delta_red")
    en.add_argument("--delta-black", dest="delta_black")
    en.add_argument("--horizon")
    en.add_argument("--cap")
    en.add_argument("--float", action="store_const", const=True,
                    help="float table instead of exact rationals")
    en.add_argument("--out")
    en.set_defaults(func=_cmd_enumerate)

    fit = sub.add_parser("fit", help="classical-urn approximations for one node")
    add_common(fit, _FIT_KEYS)
    fit.add_argument("--delta")
    fit.add_argument("--horizon")
    fit.add_argument("--node")
    fit.add_argument("--out", help="JSON output path")
    fit.set_defaults(func=_cmd_fit)

    ss = sub.add_parser("sis", help="deterministic SIS recursion and threshold")
    add_common(ss, _SIS_KEYS)
    ss.add_argument("--beta")
    ss.add_argument("--delta-sis", dest="delta_sis")
    ss.add_argument("--horizon")
    ss.add_argument("--out")
    ss.set_defaults(func=_cmd_sis)

    rep = sub.add_parser("reproduce", help="run a canned figure experiment")
    rep.add_argument("figure", choices=["fig2", "fig4", "fig5"])
    rep.add_argument("--out-dir", dest="out_dir")
    rep.add_argument("--trials", type=int, help="override the canned trial count")
    rep.add_argument("--threads", type=int)
    rep.set_defaults(func=_cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _Usage as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (_Usage, ParseError, ValidationError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except PolyaNetError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
