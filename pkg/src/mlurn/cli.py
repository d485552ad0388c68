"""Command-line interface: ``mlurn <subcommand> ...``.

Every file written is accompanied by ``<file>.manifest.json`` recording
the subcommand, the fully resolved arguments, the input digest, the tool
version and timestamps.  ``mlurn replay MANIFEST`` re-runs it; CSV output
carries no timestamps, so a replay reproduces it byte for byte.

Exit codes: 0 success, 2 invalid input, 3 resource guard, 4 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, bounds, chain_exact, consistency, lottery, replicator, urn
from . import standard_profiles
from .errors import InvalidInputError, MlurnError, ResourceLimitError
from .prefs import MarginMatrix, margin_matrix, parse_profile

MAX_ROUNDS_DEFAULT = 50_000_000

FIGURES = {
    "fig2-left": dict(example="condorcet-winner", N=50, r=0.02, rounds=1000, init="uniform", stride=1),
    "fig2-right": dict(example="condorcet-cycle", N=5000, r=0.04, rounds=500_000, init="degenerate:2",
                       stride=50),
    "fig3": dict(example="cycle-with-loser-printed", N=50_000, r=0.01, rounds=10_000_000, init="uniform",
                 stride=1000),
    "fig4": dict(example="cycle-with-loser-printed", rates=(0.01, 0.0), t_end=1000.0, h=0.01, start="uniform",
                 record_every=10),
}

_LOTTERY = {"type": "array", "items": {"type": "string"}}
_FLOATS = {"type": "array", "items": {"type": "number"}}
_MANIFEST = {
    "type": "object",
    "required": ["subcommand", "config", "version", "input_sha256", "started", "finished"],
}
SCHEMAS = {
    "solve": {
        "type": "object",
        "required": ["lottery", "unique", "support", "condorcet_winner", "condorcet_loser", "manifest"],
        "properties": {
            "lottery": _LOTTERY,
            "unique": {"enum": ["unique", "multiple", "unknown"]},
            "support": {"type": "array", "items": {"type": "integer", "minimum": 1}},
            "condorcet_winner": {"type": ["integer", "null"]},
            "condorcet_loser": {"type": ["integer", "null"]},
            "manifest": _MANIFEST,
        },
    },
    "simulate": {
        "type": "object",
        "required": ["runs", "manifest"],
        "properties": {
            "runs": {"type": "array", "items": {
                "type": "object",
                "required": ["seed", "rounds", "final_counts", "temporal_average", "sojourn",
                             "empirical_winner_dist"],
                "properties": {
                    "temporal_average": {"type": ["array", "null"], "items": {"type": "number"}},
                    "empirical_winner_dist": {"type": ["array", "null"], "items": {"type": "number"}},
                },
            }},
            "manifest": _MANIFEST,
        },
    },
    "stationary": {
        "type": "object",
        "required": ["states", "residual", "mean_state", "ml_ball_mass", "manifest"],
        "properties": {"mean_state": _FLOATS, "residual": {"type": "number", "maximum": 1e-10}},
    },
    "levelsets": {
        "type": "object",
        "required": ["alternative", "sigma", "manifest"],
        "properties": {"sigma": _FLOATS},
    },
    "ode": {
        "type": "object",
        "required": ["final", "reference", "final_entropy", "manifest"],
        "properties": {"final": _FLOATS, "reference": _FLOATS},
    },
    "fixedpoint": {
        "type": "object",
        "required": ["points", "manifest"],
        "properties": {"points": {"type": "array", "items": {
            "type": "object",
            "required": ["r", "p", "residual", "stationarity_residual", "distance_to_ml"],
        }}},
    },
    "bounds": {
        "type": "object",
        "required": ["winner", "recipe", "manifest"],
        "properties": {"recipe": {"type": "object", "required": ["beta", "k0", "r", "N_min"]}},
    },
    "axioms": {
        "type": "object",
        "required": ["suite", "rule", "samples", "failures", "non_vacuous", "note", "manifest"],
        "properties": {"failures": {"type": "integer", "minimum": 0}},
    },
    "figures": {
        "type": "object",
        "required": ["figure", "files", "summary", "manifest"],
    },
}


# ------------------------------------------------------------------ helpers

def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _load_input(args):
    """(profile-or-margins, source text) for ``--profile`` or ``--example``."""
    if getattr(args, "example", None):
        name = args.example
        if name == "cycle-with-loser-printed":
            return standard_profiles.printed_margins("cycle-with-loser"), "printed:cycle-with-loser"
        if name not in standard_profiles.PROFILE_TEXTS:
            raise InvalidInputError(
                f"unknown example {name!r}; choose from {', '.join(sorted(_example_names()))}")
        text = standard_profiles.PROFILE_TEXTS[name]
        return parse_profile(text), text
    if not getattr(args, "profile", None):
        raise InvalidInputError("give --profile FILE or --example NAME")
    try:
        text = Path(args.profile).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"cannot read profile: {exc}") from None
    return parse_profile(text), text


def _example_names():
    return list(standard_profiles.PROFILE_TEXTS) + ["cycle-with-loser-printed"]


def _margins(src) -> MarginMatrix:
    return src if isinstance(src, MarginMatrix) else margin_matrix(src)


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "func" and not k.startswith("_")}


def _manifest(args, source: str, started: str) -> dict:
    return {
        "subcommand": args.command,
        "config": _config(args),
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "input_sha256": hashlib.sha256(source.encode()).hexdigest(),
        "started": started,
        "finished": _now(),
        "argv": getattr(args, "_argv", None),
    }


def _write(path, text: str, manifest: dict) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    Path(str(path) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return str(path)


def _emit(args, payload: dict, lines: list[str]):
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(lines))


def _parse_rate(text: str) -> Fraction:
    try:
        r = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InvalidInputError(f"bad mutation rate {text!r}") from None
    if not 0 <= r <= 1:
        raise InvalidInputError(f"mutation rate {text} outside [0, 1]")
    return r


def _parse_start(spec: str, d: int) -> np.ndarray:
    if spec == "uniform":
        return np.full(d, 1.0 / d)
    if spec.startswith("degenerate:"):
        i = int(spec.split(":", 1)[1]) - 1
        if not 0 <= i < d:
            raise InvalidInputError(f"alternative {i + 1} out of range")
        p = np.zeros(d)
        p[i] = 1.0
        return p
    try:
        p = np.array([float(Fraction(x)) for x in spec.split(",")])
    except (ValueError, ZeroDivisionError):
        raise InvalidInputError(f"bad start {spec!r}") from None
    if p.shape != (d,) or p.min() < 0 or abs(p.sum() - 1) > 1e-9:
        raise InvalidInputError(f"start {spec!r} is not a lottery over {d} alternatives")
    return p


def _unique_ml(m):
    res = lottery.maximal_lottery(m)
    return res if res.unique is lottery.Uniqueness.UNIQUE else None


def _check_rounds(rounds: int, limit: int):
    if rounds > limit:
        raise ResourceLimitError(
            f"{rounds} rounds exceeds the guard of {limit}; use --scale or raise --max-rounds")


# -------------------------------------------------------------- subcommands

def cmd_solve(args) -> int:
    started = _now()
    src, text = _load_input(args)
    m = _margins(src)
    res = lottery.maximal_lottery(m)
    cw, cl = lottery.condorcet_winner(m), lottery.condorcet_loser(m)
    payload = {
        "lottery": [str(x) for x in res.lottery],
        "unique": res.unique.value,
        "support": sorted(i + 1 for i in res.support),
        "condorcet_winner": None if cw is None else cw + 1,
        "condorcet_loser": None if cl is None else cl + 1,
        "manifest": _manifest(args, text, started),
    }
    _emit(args, payload, [
        f"maximal lottery: {lottery.format_lottery(res.lottery)}",
        f"uniqueness: {res.unique.value}",
        f"condorcet winner: {payload['condorcet_winner'] or '-'}",
        f"condorcet loser: {payload['condorcet_loser'] or '-'}",
    ])
    return 0


def _sim_config(args, seed: int, queries) -> urn.SimConfig:
    return urn.SimConfig(N=args.balls, r=float(_parse_rate(args.mutation)), rounds=args.rounds, seed=seed,
                         init=args.init, sampling=args.sampling, winner_period=args.winner_period,
                         stride=args.stride, queries=queries)


def cmd_simulate(args) -> int:
    started = _now()
    src, text = _load_input(args)
    m = _margins(src)
    _check_rounds(args.rounds * args.runs, args.max_rounds)
    queries = ()
    ml = _unique_ml(m)
    if ml is not None and args.delta is not None:
        queries = ((tuple(float(x) for x in ml.lottery), args.delta),)
    seeds = [args.seed] if args.runs == 1 else urn.seed_schedule(args.seed, args.runs)
    cfgs = [_sim_config(args, s, queries) for s in seeds]
    records = urn.run_many(cfgs, src, jobs=args.jobs)
    manifest = _manifest(args, text, started)
    files = []
    if args.out:
        for k, rec in enumerate(records):
            path = args.out if len(records) == 1 else _suffixed(args.out, f"run{k}")
            files.append(_write(path, urn.run_csv(rec), manifest))
    runs = [dict(seed=int(c.seed), **rec.summary()) for c, rec in zip(cfgs, records)]
    payload = {"runs": runs, "files": files, "manifest": manifest}
    lines = []
    for run in runs:
        za = run["temporal_average"]
        lines.append(f"seed {run['seed']}: final counts {run['final_counts']}, temporal average "
                     + ("-" if za is None else "(" + ", ".join(f"{x:.6f}" for x in za) + ")"))
    _emit(args, payload, lines)
    return 0


def _suffixed(path: str, tag: str) -> str:
    p = Path(path)
    return str(p.with_name(f"{p.stem}.{tag}{p.suffix}"))


def cmd_stationary(args) -> int:
    started = _now()
    src, text = _load_input(args)
    m = _margins(src)
    kernel = chain_exact.build_kernel(m.d, args.balls, _parse_rate(args.mutation), src,
                                      state_cap=args.state_cap)
    dist = chain_exact.stationary(kernel, method=args.method)
    ml = _unique_ml(m)
    ball = None
    if ml is not None:
        ball = chain_exact.ball_mass(dist, [float(x) for x in ml.lottery], args.delta)
    manifest = _manifest(args, text, started)
    files = []
    if args.out:
        files.append(_write(args.out, chain_exact.stationary_csv(dist), manifest))
    payload = {"states": int(dist.index.size), "residual": dist.residual, "method": dist.method,
               "mean_state": [float(x) for x in dist.mean_state()], "ml_ball_mass": ball,
               "delta": args.delta, "files": files, "manifest": manifest}
    _emit(args, payload, [
        f"states: {dist.index.size}  method: {dist.method}  residual: {dist.residual:.2e}",
        "mean state: (" + ", ".join(f"{x:.6f}" for x in payload["mean_state"]) + ")",
        f"mass within {args.delta} of the maximal lottery: " + ("-" if ball is None else f"{ball:.6f}"),
    ])
    return 0


def cmd_levelsets(args) -> int:
    started = _now()
    src, text = _load_input(args)
    m = _margins(src)
    i = args.alt - 1
    if not 0 <= i < m.d:
        raise InvalidInputError(f"alternative {args.alt} out of range 1..{m.d}")
    kernel = chain_exact.build_kernel(m.d, args.balls, _parse_rate(args.mutation), src,
                                      state_cap=args.state_cap)
    sigma = chain_exact.level_set_masses(chain_exact.stationary(kernel), i)
    manifest = _manifest(args, text, started)
    files = []
    if args.out:
        text_out = "k,sigma\n" + "".join(f"{k},{float(s)!r}\n" for k, s in enumerate(sigma))
        files.append(_write(args.out, text_out, manifest))
    payload = {"alternative": args.alt, "sigma": [float(s) for s in sigma], "files": files,
               "manifest": manifest}
    _emit(args, payload, [f"sigma_{k} = {s:.6e}" for k, s in enumerate(sigma)])
    return 0


def _ode_reference(m, r: Fraction):
    """Point the entropy is measured against: the fixed point, or the maximal lottery at r = 0."""
    if r > 0:
        return replicator.fixed_point(replicator.VectorField(m, r)).p
    ml = _unique_ml(m)
    if ml is None:
        raise InvalidInputError("r = 0 needs a unique maximal lottery as entropy reference")
    return ml.as_floats()


def _ode_csv(traj, ent) -> str:
    d = traj.y.shape[1]
    lines = [",".join(["t"] + [f"y_{a + 1}" for a in range(d)] + ["entropy"])]
    for t, y, e in zip(traj.t, traj.y, ent):
        lines.append(",".join([repr(float(t))] + [repr(float(v)) for v in y] + [repr(float(e))]))
    return "\n".join(lines) + "\n"


def cmd_ode(args) -> int:
    started = _now()
    src, text = _load_input(args)
    m = _margins(src)
    r = _parse_rate(args.mutation)
    vf = replicator.VectorField(m, r)
    p0 = _parse_start(args.start, m.d)
    ref = _ode_reference(m, r)
    traj = replicator.integrate(vf, p0, args.t_end, args.step, record_every=args.record_every, p_star=ref)
    manifest = _manifest(args, text, started)
    files = []
    if args.out:
        files.append(_write(args.out, _ode_csv(traj, traj.entropy), manifest))
    payload = {"final": [float(x) for x in traj.final], "reference": [float(x) for x in ref],
               "final_entropy": float(traj.entropy[-1]), "files": files, "manifest": manifest}
    _emit(args, payload, [
        "y(t_end) = (" + ", ".join(f"{x:.8f}" for x in traj.final) + ")",
        f"relative entropy at t_end: {traj.entropy[-1]:.3e}",
    ])
    return 0


def cmd_fixedpoint(args) -> int:
    started = _now()
    src, text = _load_input(args)
    m = _margins(src)
    schedule = [args.mutation] if not args.schedule else args.schedule.split(",")
    rates = [_parse_rate(x) for x in schedule]
    pts = replicator.ml_limit_path(m, rates)
    ml = _unique_ml(m)
    out = []
    for r, fp in zip(rates, pts):
        dist = None if ml is None else float(np.abs(fp.p - ml.as_floats()).sum())
        out.append({"r": str(r), "p": [float(x) for x in fp.p], "residual": fp.residual,
                    "stationarity_residual": fp.stationarity_residual, "distance_to_ml": dist})
    payload = {"points": out, "manifest": _manifest(args, text, started)}
    _emit(args, payload, [
        f"r={o['r']}: p=(" + ", ".join(f"{x:.8f}" for x in o["p"]) + f")  |f|={o['residual']:.1e}"
        + ("" if o["distance_to_ml"] is None else f"  |p-ML|={o['distance_to_ml']:.6f}")
        for o in out
    ])
    return 0


def cmd_bounds(args) -> int:
    started = _now()
    src, text = _load_input(args)
    target = src
    found = bounds.alpha_of(target)
    rec = bounds.recipe_for(target, Fraction(args.delta), Fraction(args.tau))
    payload = {"winner": found[0] + 1, "recipe": rec.as_dict(), "certification": None}
    lines = [
        f"condorcet winner: {found[0] + 1}  alpha = {rec.inputs.alpha}",
        f"beta = {rec.beta}  k0 = {rec.k0}  r = {rec.r}  N_min = {rec.N_min}",
        f"side conditions: r/(Nd) >= 2(1-r)/N^2: {rec.side_small_k}; r <= 1/d: {rec.side_r_le_inv_d}",
        f"heuristic (not certified): N >= {rec.heuristic_N}, "
        f"{rec.heuristic_r_range[0]} <= r <= {rec.heuristic_r_range[1]}",
    ]
    if args.certify:
        cert = bounds.certify(rec, target, state_cap=args.state_cap)
        payload["certification"] = cert.as_dict()
        lines.append(f"exact tail mass at N={cert.N}: {cert.mass:.6f} (target {cert.threshold}): "
                     + ("pass" if cert.passed else "FAIL"))
    payload["manifest"] = _manifest(args, text, started)
    _emit(args, payload, lines)
    return 0


def cmd_axioms(args) -> int:
    started = _now()
    rng = np.random.default_rng(args.seed)
    rule = consistency.exact_ml_rule() if args.delta == 0 else consistency.perturbed_ml_rule(args.delta, args.seed)
    failures, non_vacuous, worst = 0, 0, 0.0
    if args.suite == "population":
        for r1, r2 in consistency.sample_unique_triples(rng, args.alternatives, args.samples):
            rep = consistency.check_population_consistency(rule, r1, r2, Fraction(str(args.epsilon)))
            failures += not rep.passed
            if rep.antecedent:
                non_vacuous += 1
                worst = max(worst, float(rep.witness_distance))
    else:
        profiles = []
        while len(profiles) < args.samples:
            p = consistency.random_odd_profile(rng, args.alternatives)
            if lottery.condorcet_winner(margin_matrix(p)) is not None:
                profiles.append(p)
        rep = consistency.check_condorcet_consistency(rule, profiles, args.epsilon)
        failures, non_vacuous = len(rep.failures), len(profiles)
        worst = max(1 - float(x) for x in rep.masses)
    payload = {"suite": args.suite, "rule": rule.name, "samples": args.samples, "epsilon": args.epsilon,
               "delta": args.delta, "failures": failures, "non_vacuous": non_vacuous, "worst": worst,
               "note": consistency.SCOPE_NOTE, "manifest": _manifest(args, "", started)}
    _emit(args, payload, [
        f"{args.suite} check, rule {rule.name}: {failures} failures in {args.samples} samples "
        f"({non_vacuous} non-vacuous, worst distance {worst:.4g})",
        consistency.SCOPE_NOTE,
    ])
    return 0 if failures == 0 else 1


def _figure_run(spec: dict, scale: float, seed: int, jobs: int, runs: int, max_rounds: int):
    m = _fig_margins(spec["example"])
    N = max(2, int(round(spec["N"] * scale)))
    rounds = max(1, int(round(spec["rounds"] * scale)))
    _check_rounds(rounds * runs, max_rounds)
    stride = max(1, int(round(spec["stride"] * scale))) if scale != 1 else spec["stride"]
    base = urn.SimConfig(N=N, r=spec["r"], rounds=rounds, seed=seed, init=spec["init"], stride=stride)
    seeds = [seed] if runs == 1 else urn.seed_schedule(seed, runs)
    return m, urn.run_many([replace(base, seed=s) for s in seeds], m, jobs=jobs)


def _fig_margins(name: str):
    if name == "cycle-with-loser-printed":
        return standard_profiles.printed_margins("cycle-with-loser")
    return standard_profiles.printed_margins(name)


def _with_entropy(csv_text: str, rec, ml) -> str:
    lines = csv_text.rstrip("\n").split("\n")
    out = [lines[0] + ",entropy"]
    for line, counts in zip(lines[1:], rec.trajectory):
        q = counts / rec.config.N
        out.append(line + "," + repr(replicator.relative_entropy(ml, q)))
    return "\n".join(out) + "\n"


def cmd_figures(args) -> int:
    started = _now()
    if args.name not in FIGURES:
        raise InvalidInputError(f"unknown figure {args.name!r}; valid names: {', '.join(FIGURES)}")
    spec = FIGURES[args.name]
    out_dir = Path(args.out_dir)
    manifest = _manifest(args, spec["example"], started)
    files, summary = [], {}
    if args.name == "fig4":
        m = _fig_margins(spec["example"])
        for r in spec["rates"]:
            rf = _parse_rate(repr(r))
            vf = replicator.VectorField(m, rf)
            ref = _ode_reference(m, rf)
            p0 = _parse_start(spec["start"], m.d)
            traj = replicator.integrate(vf, p0, spec["t_end"] * args.scale, spec["h"],
                                        record_every=spec["record_every"], p_star=ref)
            files.append(_write(out_dir / f"fig4-r{r:g}.csv", _ode_csv(traj, traj.entropy), manifest))
            tail = traj.entropy[traj.t >= 50]
            summary[f"r={r:g}"] = {"final_entropy": float(traj.entropy[-1]),
                                   "entropy_band_after_t50": [float(tail.min()), float(tail.max())]}
    else:
        m, records = _figure_run(spec, args.scale, args.seed, args.jobs, args.runs, args.max_rounds)
        ml = lottery.maximal_lottery(m).as_floats()
        dists = []
        for k, rec in enumerate(records):
            text = urn.run_csv(rec)
            if args.name == "fig3":
                text = _with_entropy(text, rec, ml)
            name = f"{args.name}.csv" if len(records) == 1 else f"{args.name}.run{k}.csv"
            files.append(_write(out_dir / name, text, manifest))
            dists.append(float(np.abs(rec.temporal_average - ml).sum()))
        summary = {"N": records[0].config.N, "rounds": records[0].rounds, "r": records[0].config.r,
                   "final_temporal_average_l1_to_ml": dists,
                   "note": "reproduction is statistical over seeds"}
    payload = {"figure": args.name, "files": files, "summary": summary, "manifest": manifest}
    _emit(args, payload, [f"wrote {f}" for f in files] + [json.dumps(summary)])
    return 0


def cmd_replay(args) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        config = dict(manifest["config"])
        command = manifest["subcommand"]
    except (OSError, ValueError, KeyError) as exc:
        raise InvalidInputError(f"cannot read manifest: {exc}") from None
    if args.out:
        key = "out_dir" if "out_dir" in config else "out"
        config[key] = args.out
    parser = build_parser()
    ns = argparse.Namespace(**config)
    ns.func = parser._subcommand_funcs[command]
    return ns.func(ns)


# ------------------------------------------------------------------- parser

def _add_input(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--profile", help="profile file")
    g.add_argument("--example", help="bundled example: " + ", ".join(_example_names()))


def _add_common(p, seed=False, out=False):
    _add_input(p)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    if seed:
        p.add_argument("--seed", type=int, default=0)
    if out:
        p.add_argument("--out", help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlurn", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"mlurn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    funcs = {}

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        funcs[name] = func
        return p

    p = add("solve", cmd_solve, "exact maximal lottery of a profile")
    _add_common(p)

    p = add("simulate", cmd_simulate, "Monte Carlo run of the urn process")
    _add_common(p, seed=True, out=True)
    p.add_argument("--balls", type=int, required=True)
    p.add_argument("--mutation", required=True)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--init", default="uniform", help="uniform | degenerate:i | counts:c1,...")
    p.add_argument("--sampling", choices=("with", "without"), default="with")
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--winner-period", type=int, default=1)
    p.add_argument("--delta", type=float, default=0.1, help="track the sojourn of this ball around the ML")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-rounds", type=int, default=MAX_ROUNDS_DEFAULT)

    p = add("stationary", cmd_stationary, "exact stationary distribution of the urn chain")
    _add_common(p, out=True)
    p.add_argument("--balls", type=int, required=True)
    p.add_argument("--mutation", required=True)
    p.add_argument("--method", choices=("auto", "direct", "power", "gth"), default="auto")
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--state-cap", type=int, default=chain_exact.DEFAULT_STATE_CAP)

    p = add("levelsets", cmd_levelsets, "stationary mass by number of balls of one label")
    _add_common(p, out=True)
    p.add_argument("--balls", type=int, required=True)
    p.add_argument("--mutation", required=True)
    p.add_argument("--alt", type=int, required=True)
    p.add_argument("--state-cap", type=int, default=chain_exact.DEFAULT_STATE_CAP)

    p = add("ode", cmd_ode, "integrate the mean-field dynamics")
    _add_common(p, out=True)
    p.add_argument("--mutation", required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--start", default="uniform", help="uniform | degenerate:i | p1,p2,...")
    p.add_argument("--record-every", type=int, default=1)

    p = add("fixedpoint", cmd_fixedpoint, "zero of the mean-field vector field")
    _add_common(p)
    p.add_argument("--mutation", default="0.01")
    p.add_argument("--schedule", help="comma-separated decreasing mutation rates")

    p = add("bounds", cmd_bounds, "parameter recipe for a Condorcet winner")
    _add_common(p)
    p.add_argument("--delta", required=True)
    p.add_argument("--tau", required=True)
    p.add_argument("--certify", action="store_true")
    p.add_argument("--state-cap", type=int, default=chain_exact.DEFAULT_STATE_CAP)

    p = add("axioms", cmd_axioms, "approximate consistency checks on random profiles")
    p.add_argument("--suite", choices=("population", "condorcet"), required=True)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.0, help="0 checks the exact rule")
    p.add_argument("--alternatives", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")

    p = add("figures", cmd_figures, "regenerate figure data as CSV")
    p.add_argument("name", help=", ".join(FIGURES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="figures")
    p.add_argument("--scale", type=float, default=1.0, help="scale balls and rounds down")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-rounds", type=int, default=MAX_ROUNDS_DEFAULT)
    p.add_argument("--json", action="store_true")

    p = add("replay", cmd_replay, "re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="write to this path instead of the recorded one")

    parser._subcommand_funcs = funcs
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)
    args._argv = argv
    try:
        return args.func(args)
    except MlurnError as exc:
        print(f"mlurn {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
