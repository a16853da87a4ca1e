"""Command-line front end.

    aoimcast <command> [options]

Commands: ``age``, ``approx``, ``optimize``, ``simulate``, ``sweep``,
``validate``.  Each hop is given as ``n,k,lambda,c`` (``lambda,c`` is enough
for ``approx`` and ``optimize --objective alpha``); repeat ``--hops`` or
separate hops with ``;``.  A config file (``--config``) holds the same keys
as the long flags, one ``key = value`` per line; flags on the command line
win.

Exit status: 0 on success, 1 on bad input, 2 when ``validate`` finds a
disagreement.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import analytic, asymptotic, optimizer
from .analytic import HopConfig, InterarrivalMoments, NetworkConfig
from .asymptotic import HopParams
from .distributions import ShiftedExp
from .sim import Arrival, SimConfig, simulate

SCHEMA_VERSION = 1
COMMANDS = ("age", "approx", "optimize", "simulate", "sweep", "validate")


class InputError(Exception):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="aoimcast", description="Age of information in earliest-k multicast trees.")
    p.add_argument("command", nargs="?", choices=COMMANDS)
    p.add_argument("--config", help="key = value file mirroring these flags")
    p.add_argument("--hops", action="append", help="per-hop 'n,k,lambda,c' (or 'lambda,c'); ';' separates hops")
    p.add_argument("--alpha", help="comma-separated ratios k_l/n, one per hop")
    p.add_argument("--mu", type=float, help="Poisson arrival rate at the root")
    p.add_argument("--arrival", choices=("will", "poisson", "deterministic"))
    p.add_argument("--period", type=float, help="interarrival time for --arrival deterministic")
    p.add_argument("--z-mean", type=float, dest="z_mean", help="E[Z] of the last relay tier (exact formulas)")
    p.add_argument("--z-var", type=float, dest="z_var", help="Var[X_{k:n}+Z] of the last relay tier")
    p.add_argument("--objective", choices=("alpha", "k"), help="optimize over ratios or integer thresholds")
    p.add_argument("--of", choices=("age", "approx", "simulate"), dest="of", help="quantity evaluated by sweep")
    p.add_argument("--cycles", type=int)
    p.add_argument("--warmup", type=int)
    p.add_argument("--batches", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=("full", "tagged"))
    p.add_argument("--sweep", help="<var>=<start>:<end>:<step>, var in k<l>, alpha<l>, lambda<l>, c<l>, mu, n")
    p.add_argument("--output", choices=("csv", "json"))
    p.add_argument("--out", help="output path (default stdout)")
    return p


_DEFAULTS = {
    "arrival": None, "objective": "alpha", "cycles": 100_000, "warmup": None, "batches": 30,
    "seed": 0, "output": "csv",
}


def _load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError("config", str(exc)) from exc
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text if text.lstrip().startswith("[") else "[experiment]\n" + text)
    except configparser.Error as exc:
        raise InputError("config", str(exc)) from exc
    out = {}
    for section in cp.sections():
        for key, value in cp.items(section):
            out[key.replace("-", "_")] = value
    return out


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    ns = parser.parse_args(argv)
    merged = {a.dest: None for a in parser._actions if a.dest != "help"}
    merged.update(_DEFAULTS)
    if ns.config:
        file_vals = _load_config(ns.config)
        known = {a.dest for a in parser._actions}
        for key, value in file_vals.items():
            if key not in known or key == "config":
                raise InputError(key, "unknown key in config file")
            merged[key] = value
    for key, value in vars(ns).items():
        if value is not None:
            merged[key] = value
    # type coercion for values that came from the file
    types = {a.dest: a.type for a in parser._actions if a.type is not None}
    choices = {a.dest: a.choices for a in parser._actions if a.choices is not None}
    for key, value in list(merged.items()):
        if isinstance(value, str) and key in types:
            try:
                merged[key] = types[key](value)
            except ValueError:
                raise InputError(key, f"cannot parse {value!r}") from None
        if key in choices and merged[key] is not None and merged[key] not in choices[key]:
            raise InputError(key, f"must be one of {', '.join(choices[key])}")
    if isinstance(merged.get("hops"), str):
        merged["hops"] = [merged["hops"]]
    if merged.get("command") is None:
        raise InputError("command", f"missing; choose one of {', '.join(COMMANDS)}")
    return argparse.Namespace(**merged)


# ---------------------------------------------------------------------------
# argument parsing

@dataclass
class HopSpec:
    rate: float
    shift: float
    n: int | None = None
    k: int | None = None


def parse_hops(values) -> list[HopSpec]:
    if not values:
        raise InputError("hops", "at least one hop is required")
    items = [s.strip() for v in values for s in str(v).split(";") if s.strip()]
    hops = []
    for i, item in enumerate(items, 1):
        parts = [x.strip() for x in item.split(",")]
        try:
            if len(parts) == 2:
                hops.append(HopSpec(float(parts[0]), float(parts[1])))
            elif len(parts) == 4:
                k = None if parts[1] in ("*", "_", "") else int(parts[1])
                hops.append(HopSpec(float(parts[2]), float(parts[3]), int(parts[0]), k))
            else:
                raise ValueError("expected 'n,k,lambda,c' or 'lambda,c'")
        except ValueError as exc:
            raise InputError(f"hops[{i}]", f"{item!r}: {exc}") from None
    return hops


def parse_alpha(text, L) -> tuple[float, ...]:
    if text is None:
        raise InputError("alpha", "required for this command")
    try:
        vals = tuple(float(x) for x in str(text).split(","))
        return asymptotic.AlphaVector(vals).alphas if len(vals) == L else _bad_len(len(vals), L)
    except ValueError as exc:
        raise InputError("alpha", str(exc)) from None


def _bad_len(got, L):
    raise ValueError(f"expected {L} values, got {got}")


def parse_sweep(text) -> tuple[str, list[float]]:
    try:
        var, rng = str(text).split("=", 1)
        start, end, step = (float(x) for x in rng.split(":"))
    except ValueError:
        raise InputError("sweep", f"{text!r} is not <var>=<start>:<end>:<step>") from None
    if step <= 0 or end < start:
        raise InputError("sweep", "need step > 0 and end >= start")
    count = int(math.floor((end - start) / step + 1e-9)) + 1
    return var.strip(), [start + i * step for i in range(count)]


def _delays(hops):
    try:
        return [ShiftedExp(h.rate, h.shift) for h in hops]
    except ValueError as exc:
        raise InputError("hops", str(exc)) from None


def _network(hops) -> NetworkConfig:
    out = []
    for i, (h, d) in enumerate(zip(hops, _delays(hops)), 1):
        if h.n is None or h.k is None:
            raise InputError(f"hops[{i}]", "needs n and k ('n,k,lambda,c')")
        try:
            out.append(HopConfig(h.n, h.k, d))
        except ValueError as exc:
            raise InputError(f"hops[{i}]", str(exc)) from None
    return NetworkConfig(tuple(out))


def _params(hops):
    try:
        return [HopParams(h.rate, h.shift) for h in hops]
    except ValueError as exc:
        raise InputError("hops", str(exc)) from None


def _arrival(args) -> Arrival:
    kind = args.arrival or ("poisson" if args.mu is not None else "will")
    try:
        if kind == "poisson":
            if args.mu is None:
                raise InputError("mu", "required for poisson arrivals")
            return Arrival.poisson(args.mu)
        if kind == "deterministic":
            if args.period is None:
                raise InputError("period", "required for deterministic arrivals")
            return Arrival.deterministic(args.period)
    except ValueError as exc:
        raise InputError("arrival", str(exc)) from None
    return Arrival.will()


# ---------------------------------------------------------------------------
# evaluations (each returns a flat row dict)

def _ks_cols(net):
    return {f"k{i}": h.k for i, h in enumerate(net.hops, 1)}


def eval_age(args, hops) -> dict:
    net = _network(hops)
    row = {"L": net.L, **_ks_cols(net)}
    if args.z_mean is not None or args.z_var is not None:
        if args.z_mean is None or args.z_var is None:
            raise InputError("z_mean" if args.z_mean is None else "z_var", "give both --z-mean and --z-var")
        z = InterarrivalMoments(args.z_mean, args.z_var)
        b = analytic.age_L_hop_exact(net, z)
        row["formula"] = "exact_given_z"
    elif args.mu is not None:
        if net.L != 1:
            raise InputError("mu", "Poisson-arrival age is defined for a single hop")
        b = analytic.age_building_block_poisson(net.hops[0], args.mu)
        row["formula"] = "building_block_poisson"
    else:
        b = analytic.age_L_hop_upper(net)
        row["formula"] = "generate_at_will" if net.L == 1 else "L_hop_upper"
    row.update(b.as_dict())
    return row


def eval_approx(args, hops) -> dict:
    params = _params(hops)
    alpha = parse_alpha(args.alpha, len(params))
    row = {"L": len(params), **{f"alpha{i}": a for i, a in enumerate(alpha, 1)}}
    if args.mu is not None:
        if len(params) != 1:
            raise InputError("mu", "Poisson-arrival approximation is defined for a single hop")
        row["formula"] = "building_block_approx"
        row["age"] = asymptotic.age_building_block_approx(params[0], args.mu, alpha[0])
    else:
        row["formula"] = "L_hop_approx"
        row["age"] = asymptotic.age_L_hop_approx(params, alpha)
        if len(params) == 2:
            v2, _, agree = asymptotic.two_hop_forms(params[0], params[1], alpha)
            row["age_two_hop_form"] = v2
            row["forms_agree"] = agree
    return row


def eval_optimize(args, hops) -> dict:
    if args.objective == "k":
        net_hops = []
        for i, (h, d) in enumerate(zip(hops, _delays(hops)), 1):
            if h.n is None:
                raise InputError(f"hops[{i}]", "integer optimisation needs n ('n,*,lambda,c')")
            net_hops.append((h.n, d))
        if args.mu is not None:
            name = "building_block_poisson"
        else:
            name = "two_hop_upper" if len(net_hops) == 2 else "L_hop_upper"
        try:
            res = optimizer.optimize_k_exact(net_hops, name, mu=args.mu)
        except ValueError as exc:
            raise InputError("hops", str(exc)) from None
        row = {"objective": name, "L": len(net_hops)}
        row.update({f"k{i}": k for i, k in enumerate(res.argmin, 1)})
        chosen = [HopConfig(n, k, d) for k, (n, d) in zip(res.argmin, net_hops)]
        row.update({f"alpha{i}": h.success_prob for i, h in enumerate(chosen, 1)})
    else:
        params = _params(hops)
        if args.mu is not None:
            name = "building_block"
        else:
            name = "single_hop_limit" if len(params) == 1 else "L_hop"
        try:
            res = optimizer.optimize_alpha(name, params, mu=args.mu, seed=args.seed or optimizer.DEFAULT_SEED)
        except ValueError as exc:
            raise InputError("hops", str(exc)) from None
        row = {"objective": name, "L": len(params)}
        row.update({f"alpha{i}": a for i, a in enumerate(res.argmin, 1)})
    row["value"] = res.value
    row["status"] = res.status
    return row


def _sim_config(args, net) -> SimConfig:
    try:
        return SimConfig(
            network=net, cycles=args.cycles, warmup_cycles=args.warmup, seed=args.seed,
            mode="full_tree" if args.mode == "full" else "tagged_path",
            batches=args.batches, arrival=_arrival(args),
        )
    except ValueError as exc:
        raise InputError("simulate", str(exc)) from None


def eval_simulate(args, hops) -> dict:
    net = _network(hops)
    cfg = _sim_config(args, net)
    try:
        res = simulate(cfg)
    except ValueError as exc:
        raise InputError("hops", str(exc)) from None
    return {"L": net.L, **_ks_cols(net), "seed": cfg.seed, **res.summary()}


_EVAL = {"age": eval_age, "approx": eval_approx, "simulate": eval_simulate}


def _apply_sweep(args, hops, var, value):
    hops = [HopSpec(h.rate, h.shift, h.n, h.k) for h in hops]
    args = argparse.Namespace(**vars(args))
    name = var.rstrip("0123456789")
    idx = var[len(name):]
    if name in ("mu", "n") and idx:
        raise InputError("sweep", f"{var!r} takes no hop index")
    if name == "mu":
        args.mu = value
        return args, hops
    if name == "n":
        if value != int(value):
            raise InputError("sweep", "n must take integer values")
        for h in hops:
            h.n = int(value)
        if args.alpha is not None:
            alpha = parse_alpha(args.alpha, len(hops))
            for h, a, d in zip(hops, alpha, _delays(hops)):
                h.k = HopConfig.from_alpha(h.n, a, d).k
        return args, hops
    if name not in ("k", "alpha", "lambda", "c") or not idx:
        raise InputError("sweep", f"unknown variable {var!r}; use k<l>, alpha<l>, lambda<l>, c<l>, mu or n")
    i = int(idx) - 1
    if not 0 <= i < len(hops):
        raise InputError("sweep", f"{var!r}: hop index out of range 1..{len(hops)}")
    if name == "k":
        if value != int(value):
            raise InputError("sweep", "k must take integer values")
        hops[i].k = int(value)
    elif name == "lambda":
        hops[i].rate = value
    elif name == "c":
        hops[i].shift = value
    else:
        alpha = list(parse_alpha(args.alpha, len(hops)))
        alpha[i] = value
        args.alpha = ",".join(repr(a) for a in alpha)
    return args, hops


def run_sweep(args, hops):
    if not args.sweep:
        raise InputError("sweep", "required for the sweep command")
    var, values = parse_sweep(args.sweep)
    of = args.of or ("approx" if args.alpha is not None and not var.startswith("k") else "age")
    rows = []
    for i, value in enumerate(values):
        a2, h2 = _apply_sweep(args, hops, var, value)
        row = {"index": i, var: int(value) if var.startswith(("k", "n")) else value}
        row.update(_EVAL[of](a2, h2))
        rows.append(row)
    return rows


def run_validate(args, hops):
    """Simulate and compare with the matching formulas; one row per check."""
    net = _network(hops)
    mode = args.mode
    if mode is None:
        mode = "full" if net.L == 2 and net.hops[0].n * net.hops[1].n <= 400 else "tagged"
    a2 = argparse.Namespace(**vars(args))
    a2.mode = mode
    res = simulate(_sim_config(a2, net))
    arrival = _arrival(args)
    rows = []

    def check(name, ok, reference, detail=""):
        rows.append({"check": name, "pass": bool(ok), "sim_age": res.avg_age, "ci_halfwidth": res.ci_halfwidth,
                     "std_error": res.std_error, "reference": reference, "detail": detail})

    if net.L == 1:
        hop = net.hops[0]
        if arrival.kind == "poisson":
            ref = analytic.age_building_block_poisson(hop, arrival.rate).total
            check("building_block_poisson_ci", res.covers(ref), ref)
        elif arrival.kind == "will":
            ref = analytic.age_building_block(hop, InterarrivalMoments.generate_at_will(hop)).total
            check("generate_at_will_ci", res.covers(ref), ref)
        else:
            ref = analytic.age_building_block_poisson(hop, arrival.mean_rate).total
            check("deterministic_below_poisson", res.below(ref), ref)
        return rows, all(r["pass"] for r in rows)
    z = res.per_hop_interarrival[-1]
    if z is not None:
        hybrid = analytic.age_L_hop_exact(net, z).total
        check("hybrid_exact_ci", res.covers(hybrid), hybrid, f"E[Z]={z.mean_residual:.6g};Var[Y]={z.var_cycle:.6g}")
    bound = analytic.age_L_hop_upper(net).total
    check("upper_bound", res.below(bound), bound)
    return rows, all(r["pass"] for r in rows)


# ---------------------------------------------------------------------------
# output

def write_rows(rows, fmt, sink, command):
    if fmt == "json":
        json.dump({"schema": SCHEMA_VERSION, "command": command, "rows": rows}, sink, indent=2, default=_json_default)
        sink.write("\n")
        return
    columns = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    sink.write(f"#schema={SCHEMA_VERSION}\n")
    writer = csv.DictWriter(sink, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _fmt(v) for k, v in row.items()})


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(f"not serialisable: {type(v).__name__}")


def run(argv=None, out=None) -> int:
    """Entry point; returns the exit status."""
    try:
        args = parse_args(argv)
        hops = parse_hops(args.hops)
        status = 0
        if args.command == "sweep":
            rows = run_sweep(args, hops)
        elif args.command == "validate":
            rows, ok = run_validate(args, hops)
            status = 0 if ok else 2
        elif args.command == "optimize":
            rows = [eval_optimize(args, hops)]
        else:
            rows = [_EVAL[args.command](args, hops)]
    except InputError as exc:
        print(f"aoimcast: error: {exc}", file=sys.stderr)
        return 1
    buf = io.StringIO()
    write_rows(rows, args.output, buf, args.command)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        (out or sys.stdout).write(buf.getvalue())
    return status


def main():  # pragma: no cover
    sys.exit(run())
