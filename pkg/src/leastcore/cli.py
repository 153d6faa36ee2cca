"""Command-line driver: solve, sweep, timing, valuation and valuation-elo.

Every command takes ``--seed``; files written under the same seed are
byte-identical except where a quantity is itself a wall-clock measurement.
"""

from __future__ import annotations

import argparse
import json
import logging
import subprocess
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .core import all_coalitions_matrix, estimate_from_values, normalize, sample_coalition_matrix
from .errors import ConfigError, LeastCoreError, NonPositiveGrandValue
from .exact import least_core_exact, sampled_lp_least_core
from .games import (
    WeightDistribution,
    from_text,
    graph_game_generate,
    majority_game,
    mcn_generate,
    singleton_win_game,
    unanimity_game,
    wvg_generate,
)
from .graphs import GENERATORS
from .iterative import (
    SolverConfig,
    adam_softmax_solve,
    cyclic_projection_solve,
    lcv_via_bisection,
    mirror_prox_solve,
    parse_schedule,
    sgd_solve,
)

log = logging.getLogger("leastcore")

FAMILIES = ("wvg", "graph", "mcn", "majority", "unanimity", "singleton-win", "file")
SOLVERS = ("cl", "sgd", "cyclic", "lp-exact", "lp-sampled")
MAX_GRID = 64
INT_KEYS = {"n", "k", "rules", "parts", "m", "m1", "m2"}
REDRAWS = 1000

# parameters a family understands, with defaults
FAMILY_DEFAULTS = {
    "wvg": {"n": 10, "dist": "uniform-int:1:100", "xi": 0.5},
    "graph": {"n": 10, "model": "erdos-renyi", "sigma": 1.0, "positive_fraction": 0.6, "p": 0.5, "k": 4,
              "parts": 4, "p_in": 0.8, "p_out": 0.1, "m": 2, "m1": 1, "m2": 2},
    "mcn": {"n": 10, "rules": 10, "p": 0.2, "q": 0.2, "weights": "gaussian:0:1"},
}
DIST_SLOTS = {"uniform-int": ("low", "high"), "gaussian": ("mu", "sigma"), "exponential": ("rate",),
              "beta": ("a", "b")}


def fmt(x) -> str:
    return format(float(x), ".17g")


# games

def _wvg_dist(params) -> WeightDistribution:
    base = WeightDistribution.parse(str(params["dist"]))
    slots = DIST_SLOTS[base.kind]
    vals = [float(params.get(name, v)) for name, v in zip(slots, base.params)]
    return WeightDistribution(base.kind, tuple(vals))


def draw_game(family: str, params: dict, rng: np.random.Generator):
    """One random game with ``v(I) > 0``; redraws up to a fixed limit."""
    for _ in range(REDRAWS):
        n = int(params["n"])
        if family == "wvg":
            g = wvg_generate(n, _wvg_dist(params), float(params["xi"]), rng)
        elif family == "graph":
            model = str(params["model"])
            if model not in GENERATORS:
                raise ConfigError(f"unknown graph model {model!r}; choose from {sorted(GENERATORS)}")
            gp = {k: params[k] for k in GENERATORS[model][1]}
            g = graph_game_generate(model, n, float(params["sigma"]), rng,
                                    float(params["positive_fraction"]), **gp)
        elif family == "mcn":
            g = mcn_generate(n, int(params["rules"]), float(params["p"]), float(params["q"]),
                             WeightDistribution.parse(str(params["weights"])), rng)
        else:
            raise ConfigError(f"{family!r} is not a random family")
        if g.grand_value > 0:
            return g
    raise NonPositiveGrandValue(f"{REDRAWS} draws of {family} {params} all had v(I) <= 0")


def build_game(args, rng):
    family = args.game
    if family == "file":
        if not args.game_file:
            raise ConfigError("--game file needs --game-file")
        return from_text(Path(args.game_file).read_text())
    if family in ("majority", "unanimity", "singleton-win"):
        ctor = {"majority": majority_game, "unanimity": unanimity_game, "singleton-win": singleton_win_game}
        return ctor[family](args.n or 3)
    return draw_game(family, game_params(family, args), rng)


def _coerce(text):
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def parse_pairs(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value, got {item!r}")
        out[key.strip().replace("-", "_")] = _coerce(val.strip())
    return out


def game_params(family, args) -> dict:
    params = dict(FAMILY_DEFAULTS.get(family, {}))
    for key in ("n", "dist", "xi", "model", "sigma", "rules", "weights"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    params.update(parse_pairs(getattr(args, "param", None)))
    return params


def game_rng(seed, *path):
    return np.random.default_rng(np.random.SeedSequence([seed, 0x6A4E, *path]))


# solving

def solver_config(args, base=SolverConfig.defaults) -> SolverConfig:
    kw = {}
    for key in ("T", "B", "gamma", "mu0", "holdout", "prox", "time_limit"):
        val = getattr(args, key, None)
        if val is not None:
            kw[key] = val
    if getattr(args, "eta", None) is not None:
        kw["schedule"] = parse_schedule(args.eta)
    if getattr(args, "full_batch", None) is not None:
        kw["full_batch"] = args.full_batch
    return base(seed=args.seed, **kw)


def holdout_estimate(p, game, size, rng):
    n = game.n
    X = all_coalitions_matrix(n) if n <= 20 and (1 << n) - 1 <= size else sample_coalition_matrix(n, size, rng)
    return estimate_from_values(p, X, game.values(X))


def run_solver(solver: str, game, config: SolverConfig, eps=None, k=None) -> dict:
    """Solve and return a JSON-ready summary including the payoff vector."""
    t0 = time.perf_counter()
    if solver == "cl":
        res = mirror_prox_solve(game, config)
    elif solver in ("sgd", "cyclic"):
        fixed = {"sgd": sgd_solve, "cyclic": cyclic_projection_solve}[solver]
        res = fixed(normalize(game), eps, config) if eps is not None else lcv_via_bisection(game, solver, config=config)
    elif solver in ("lp-exact", "lp-sampled"):
        ngame = normalize(game)
        if solver == "lp-exact":
            value, p = least_core_exact(ngame)
        else:
            if not k:
                raise ConfigError("lp-sampled needs --k")
            value, p = sampled_lp_least_core(ngame, k, game_rng(config.seed, 2))
        est = holdout_estimate(p, ngame, config.holdout, game_rng(config.seed, 3))
        return {"method": solver, "eps_final": value, "eps_hat": est.value, "eps_hat_sample": est.size,
                "eps_hat_argmax": list(est.coalition.members), "calls": ngame.calls,
                "seconds": time.perf_counter() - t0, "p": p.tolist()}
    else:
        raise ConfigError(f"unknown solver {solver!r}")
    out = res.summary()
    out["p"] = res.p.tolist()
    return out


# output plumbing

def git_stamp() -> str:
    try:
        return subprocess.run(["git", "rev-parse", "--short", "HEAD"], cwd=Path(__file__).parent,
                              capture_output=True, text=True, timeout=5).stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def run_record(command, args, seconds, outputs, result=None) -> dict:
    config = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    return {"command": command, "argv": sys.argv[1:], "config": config, "seed": args.seed,
            "version": __version__, "git": git_stamp(), "wall_clock_seconds": seconds,
            "outputs": [str(o) for o in outputs], "result": result}


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) if isinstance(x, (float, np.floating)) else str(x) for x in row) + "\n")


def write_matrix(path, M) -> None:
    """``x_index y_index value`` per cell, one block per row, blank line between rows."""
    M = np.asarray(M, dtype=float)
    lines = []
    for iy in range(M.shape[0]):
        if iy:
            lines.append("")
        lines.extend(f"{ix} {iy} {fmt(M[iy, ix])}" for ix in range(M.shape[1]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    cells = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ConfigError(f"{path}:{lineno}: expected 'x y value'")
        cells[int(parts[1]), int(parts[0])] = float(parts[2])
    if not cells:
        raise ConfigError(f"{path}: no cells")
    ny = max(k[0] for k in cells) + 1
    nx = max(k[1] for k in cells) + 1
    M = np.full((ny, nx), np.nan)
    for (iy, ix), v in cells.items():
        M[iy, ix] = v
    return M


# commands

def cmd_solve(args):
    t0 = time.perf_counter()
    game = build_game(args, game_rng(args.seed, 0))
    config = solver_config(args)
    result = run_solver(args.solver, game, config, eps=args.eps, k=args.k)
    result["n"] = game.n
    order = np.argsort(-np.asarray(result["p"]), kind="stable")[: args.top]
    print(f"eps_final {fmt(result['eps_final'])}")
    print(f"eps_hat   {fmt(result['eps_hat'])}")
    print("top payoffs " + " ".join(f"{i}:{result['p'][i]:.6f}" for i in order))
    outputs = [args.out] if args.out else []
    record = run_record("solve", args, time.perf_counter() - t0, outputs, result)
    if args.out:
        write_json(args.out, record)
    return record


def parse_axis(text):
    try:
        name, lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise ConfigError(f"axis must be name:lo:hi:steps, got {text!r}")
    if not 1 <= steps <= MAX_GRID:
        raise ConfigError(f"axis steps must lie in [1, {MAX_GRID}]")
    return name.replace("-", "_"), np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])


def _sweep_cell(task):
    family, params, games, seed, cell, config = task
    vals = []
    for g in range(games):
        game = draw_game(family, params, game_rng(seed, *cell, g))
        solver_seed = int(np.random.SeedSequence([seed, *cell, g]).generate_state(1)[0])
        res = mirror_prox_solve(game, replace(config, seed=solver_seed))
        vals.append(res.eps_final)
    return np.asarray(vals)


def _pool_map(fn, tasks, workers):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks))


def cmd_sweep(args):
    t0 = time.perf_counter()
    if args.game not in FAMILY_DEFAULTS:
        raise ConfigError(f"sweeps need a random family, one of {sorted(FAMILY_DEFAULTS)}")
    if args.games < 1:
        raise ConfigError("need at least one game per cell")
    xname, xs = parse_axis(args.x)
    yname, ys = parse_axis(args.y)
    base = game_params(args.game, args)
    config = solver_config(args)
    tasks = []
    for iy, yv in enumerate(ys):
        for ix, xv in enumerate(xs):
            params = dict(base)
            params[xname], params[yname] = float(xv), float(yv)
            for key in INT_KEYS & params.keys():
                params[key] = int(round(float(params[key])))
            tasks.append((args.game, params, args.games, args.seed, (ix, iy), config))
    results = _pool_map(_sweep_cell, tasks, args.workers)
    M = np.zeros((len(ys), len(xs)))
    rows = []
    for (_, params, _, _, (ix, iy), _), vals in zip(tasks, results):
        M[iy, ix] = vals.mean()
        se = vals.std(ddof=1) / np.sqrt(len(vals)) if len(vals) > 1 else 0.0
        rows.append((ix, iy, float(xs[ix]), float(ys[iy]), float(vals.mean()), float(se), len(vals)))
    write_matrix(args.out_dat, M)
    outputs = [args.out_dat]
    if args.out_csv:
        write_csv(args.out_csv, ["x_index", "y_index", xname, yname, "mean_lcv", "stderr", "games"], rows)
        outputs.append(args.out_csv)
    record = run_record("sweep", args, time.perf_counter() - t0, outputs, {"matrix": M.tolist()})
    if args.record:
        write_json(args.record, record)
    print(f"wrote {len(ys)}x{len(xs)} grid to {args.out_dat}")
    return record


def timing_game(seed, rep, n, rng=None):
    """WVG with uniform integer weights and a quota ratio away from one half."""
    rng = rng or game_rng(seed, 7, rep)
    while True:
        xi = rng.uniform(0.1, 0.9)
        if not 0.45 <= xi <= 0.55:
            break
    dist = WeightDistribution.parse("uniform-int:1:100")
    for _ in range(REDRAWS):
        g = wvg_generate(n, dist, xi, rng)
        if g.grand_value > 0:
            return g
    raise NonPositiveGrandValue("could not draw a timing game")


def race(game, k, config: SolverConfig, sample_X, seed):
    """Sampled LP with ``k`` rows, then CL for the same wall-clock time."""
    ngame = normalize(game)
    v_shared = ngame.values(sample_X)
    t0 = time.perf_counter()
    _, p_lp = sampled_lp_least_core(ngame, k, game_rng(seed, 8, k))
    t_k = time.perf_counter() - t0
    res = mirror_prox_solve(ngame, replace(config, time_limit=t_k))
    eps_lp = estimate_from_values(p_lp, sample_X, v_shared).value
    eps_cl = estimate_from_values(res.p, sample_X, v_shared).value
    return t_k, eps_lp, eps_cl, res.iterations


def cmd_timing(args):
    t0 = time.perf_counter()
    ks = [int(x) for x in str(args.ks).split(",")]
    if ks != sorted(ks) or any(k < 1 for k in ks):
        raise ConfigError("k values must be positive and ascending")
    rows = []
    for k in ks:
        stats = []
        for rep in range(args.repeats):
            game = timing_game(args.seed, rep, args.n)
            X = sample_coalition_matrix(args.n, args.sample, game_rng(args.seed, 9, rep))
            config = solver_config(args, SolverConfig.race_defaults)
            config = replace(config, seed=args.seed * 1000 + rep, holdout=1)
            stats.append(race(game, k, config, X, args.seed * 1000 + rep))
        s = np.array(stats)
        se = s.std(axis=0, ddof=1) / np.sqrt(len(s)) if len(s) > 1 else np.zeros(4)
        rows.append((k, len(s), float(s[:, 0].mean()), float(s[:, 1].mean()), float(se[1]), float(s[:, 2].mean()),
                     float(se[2]), float(np.median(s[:, 1])), float(np.median(s[:, 2])), float(s[:, 3].mean())))
        log.info("k=%d t=%.3fs lp=%.4f cl=%.4f", k, rows[-1][2], rows[-1][3], rows[-1][5])
    header = ["k", "repeats", "t_seconds", "eps_lp_mean", "eps_lp_se", "eps_cl_mean", "eps_cl_se",
              "eps_lp_median", "eps_cl_median", "cl_iterations"]
    write_csv(args.out, header, rows)
    record = run_record("timing", args, time.perf_counter() - t0, [args.out], {"rows": rows})
    if args.record:
        write_json(args.record, record)
    print(f"wrote {len(rows)} rows to {args.out}")
    return record


def _parse_source(text, prefix):
    """``prefix:key=val:key=val`` into a dict."""
    head, *rest = text.split(":")
    if head != prefix:
        return None
    return parse_pairs(rest)


def valuation_importances(game, methods, budget, seed, holdout_share=0.1, B=1000):
    """Importances per method under a shared oracle-call budget."""
    from .shapley import shapley_mc

    out = {}
    for method in methods:
        game.reset_calls()
        if method == "shapley":
            out[method] = shapley_mc(game, budget, game_rng(seed, 11)).phi
        elif method == "leastcore":
            holdout = max(1, int(holdout_share * budget))
            T = (budget - holdout) // (2 * B)
            if T < 1:
                raise ConfigError(f"budget {budget} cannot fund one iteration at B={B}")
            config = SolverConfig.defaults(T=T, B=B, holdout=holdout, seed=seed, full_batch=False)
            out[method] = adam_softmax_solve(game, config).p
        elif method == "random":
            out[method] = game_rng(seed, 12).permutation(game.n).astype(float)
        else:
            raise ConfigError(f"unknown valuation method {method!r}")
    return out


def _methods(text):
    methods = [m.strip() for m in text.split(",") if m.strip()]
    if not methods:
        raise ConfigError("no methods given")
    return methods


def cmd_valuation(args):
    from .xai import data_valuation_game, load_csv, planted_noise_regression, removal_curve, split_train_test

    t0 = time.perf_counter()
    source = _parse_source(args.dataset, "planted")
    extra = {}
    if source is not None:
        train, test, bad = planted_noise_regression(
            n_train=int(source.get("n", 200)), n_test=int(source.get("test", 200)),
            n_features=int(source.get("features", 5)), corrupt=float(source.get("corrupt", 0.1)),
            noise=float(source.get("noise", 0.1)), seed=int(source.get("seed", args.seed)))
        extra["corrupted"] = bad.astype(int)
    else:
        if not args.target:
            raise ConfigError("--target is required for CSV datasets")
        train, test = split_train_test(load_csv(args.dataset, args.target, args.task), args.train_fraction, args.seed)
    methods = _methods(args.methods)
    game = data_valuation_game(train, test)
    imps = valuation_importances(game, methods, args.budget, args.seed, B=args.B)
    curves = {m: removal_curve(train, test, imps[m], args.step, args.max_fraction) for m in methods}
    fractions = [f for f, _ in curves[methods[0]]]
    write_csv(args.out_curve, ["fraction"] + [f"score_{m}" for m in methods],
              [(f, *(curves[m][i][1] for m in methods)) for i, f in enumerate(fractions)])
    outputs = [args.out_curve]
    if args.out_importance:
        cols = methods + list(extra)
        write_csv(args.out_importance, ["index"] + cols,
                  [(i, *(float(imps[m][i]) for m in methods), *(int(extra[c][i]) for c in extra))
                   for i in range(len(train))])
        outputs.append(args.out_importance)
    record = run_record("valuation", args, time.perf_counter() - t0, outputs,
                        {m: [list(map(float, row)) for row in curves[m]] for m in methods})
    if args.record:
        write_json(args.record, record)
    print(f"wrote removal curves for {', '.join(methods)} to {args.out_curve}")
    return record


def cmd_valuation_elo(args):
    from .elo import arena_valuation_game, load_matches, removal_curve_matches, synthetic_matches

    t0 = time.perf_counter()
    rng = game_rng(args.seed, 13)
    source = _parse_source(args.train, "synthetic")
    if source is not None:
        models, gap = int(source.get("models", 20)), float(source.get("gap", 40.0))
        pool = synthetic_matches(gap * np.arange(models), args.dr + args.dt, rng)
    else:
        pool = load_matches(args.train)
    if args.test:
        train = pool.take(rng.permutation(len(pool))[: args.dr])
        test = load_matches(args.test)
        if test.names and pool.names and test.names != pool.names:
            raise ConfigError("train and test files list models in a different order")
    else:
        if len(pool) < args.dr + args.dt:
            raise ConfigError(f"need {args.dr + args.dt} matches, file has {len(pool)}")
        order = rng.permutation(len(pool))
        train, test = pool.take(order[: args.dr]), pool.take(order[args.dr: args.dr + args.dt])
    methods = _methods(args.methods)
    game = arena_valuation_game(train, test, iterations=args.iterations)
    imps = valuation_importances(game, methods, args.budget, args.seed, B=args.B)
    curves = {m: removal_curve_matches(train, test, imps[m], args.step, args.max_fraction, args.iterations)
              for m in methods}
    fractions = [f for f, _ in curves[methods[0]]]
    write_csv(args.out_curve, ["fraction"] + [f"score_{m}" for m in methods],
              [(f, *(curves[m][i][1] for m in methods)) for i, f in enumerate(fractions)])
    outputs = [args.out_curve]
    if args.out_importance:
        write_csv(args.out_importance, ["index"] + methods,
                  [(i, *(float(imps[m][i]) for m in methods)) for i in range(len(train))])
        outputs.append(args.out_importance)
    record = run_record("valuation-elo", args, time.perf_counter() - t0, outputs,
                        {m: [list(map(float, row)) for row in curves[m]] for m in methods})
    if args.record:
        write_json(args.record, record)
    print(f"wrote removal curves for {', '.join(methods)} to {args.out_curve}")
    return record


# argument parsing

def _add_game_args(p):
    g = p.add_argument_group("game")
    g.add_argument("--game", choices=FAMILIES, default="wvg")
    g.add_argument("--game-file")
    g.add_argument("--n", type=int)
    g.add_argument("--dist", help="wvg weights, e.g. uniform-int:1:100 or gaussian:1:0.1")
    g.add_argument("--xi", type=float, help="wvg quota ratio")
    g.add_argument("--model", help="graph generator")
    g.add_argument("--sigma", type=float, help="graph edge-weight spread, or gaussian wvg spread")
    g.add_argument("--rules", type=int, help="mcn rule count")
    g.add_argument("--weights", help="mcn rule weight distribution")
    g.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="any other family parameter (graph p/k/parts/..., mcn p/q)")


def _add_solver_args(p):
    s = p.add_argument_group("solver")
    s.add_argument("--T", type=int)
    s.add_argument("--B", type=int)
    s.add_argument("--eta", help="step size: constant or linear:start:end:horizon")
    s.add_argument("--gamma", type=float)
    s.add_argument("--mu0", type=float)
    s.add_argument("--prox", choices=("adam", "tailored"))
    s.add_argument("--holdout", type=int)
    s.add_argument("--time-limit", type=float)
    s.add_argument("--full-batch", action=argparse.BooleanOptionalAction, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leastcore", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--config", help="key=value file; command-line flags take precedence")
        p.add_argument("--record", help="write a JSON run record here")

    p = sub.add_parser("solve", help="solve one game")
    common(p)
    _add_game_args(p)
    _add_solver_args(p)
    p.add_argument("--solver", choices=SOLVERS, default="cl")
    p.add_argument("--eps", type=float, help="fixed slack for sgd/cyclic (default: bisection)")
    p.add_argument("--k", type=int, help="rows for lp-sampled")
    p.add_argument("--top", type=int, default=5)
    p.add_argument("--out", help="JSON result")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="mean least-core value over a 2-D parameter grid")
    common(p)
    _add_game_args(p)
    _add_solver_args(p)
    p.add_argument("--x", required=True, metavar="NAME:LO:HI:STEPS")
    p.add_argument("--y", required=True, metavar="NAME:LO:HI:STEPS")
    p.add_argument("--games", type=int, default=100, help="games per cell")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dat", required=True)
    p.add_argument("--out-csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("timing", help="sampled LP against CL at matched wall-clock time")
    common(p)
    _add_solver_args(p)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--ks", default="500,1000,2000,4000,8000,16000")
    p.add_argument("--repeats", type=int, default=2)
    p.add_argument("--sample", type=int, default=50_000, help="shared coalitions for eps-hat")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_timing)

    def valuation_common(p):
        p.add_argument("--budget", type=int, default=50_000)
        p.add_argument("--B", type=int, default=1000, help="least-core batch size")
        p.add_argument("--methods", default="shapley,leastcore,random")
        p.add_argument("--step", type=float, default=0.05)
        p.add_argument("--max-fraction", type=float, default=0.5)
        p.add_argument("--out-curve", required=True)
        p.add_argument("--out-importance")

    p = sub.add_parser("valuation", help="data valuation and removal curves")
    common(p)
    p.add_argument("--dataset", default="planted", help="CSV path or planted[:n=200:corrupt=0.1:...]")
    p.add_argument("--target")
    p.add_argument("--task", choices=("regression", "classification"), default="regression")
    p.add_argument("--train-fraction", type=float, default=0.8)
    valuation_common(p)
    p.set_defaults(func=cmd_valuation)

    p = sub.add_parser("valuation-elo", help="value pairwise-preference matches")
    common(p)
    p.add_argument("--train", required=True, help="match CSV or synthetic[:models=20:gap=40]")
    p.add_argument("--test", help="separate test match CSV")
    p.add_argument("--dr", type=int, default=1000)
    p.add_argument("--dt", type=int, default=10_000)
    p.add_argument("--iterations", type=int, default=20_000, help="MM sweeps per fit")
    valuation_common(p)
    p.set_defaults(func=cmd_valuation_elo)
    return parser


def config_tokens(path) -> list[str]:
    """Turn a key=value file into command-line tokens."""
    tokens = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        flag = "--" + key.strip().replace("_", "-")
        val = val.strip()
        if val.lower() in ("true", "false"):
            tokens.append(flag if val.lower() == "true" else "--no-" + flag[2:])
        else:
            tokens += [flag, val]
    return tokens


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        # file values go first so explicit flags override them
        i = argv.index(args.command) + 1
        args = parser.parse_args(argv[:i] + config_tokens(args.config) + argv[i:])
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        args.func(args)
    except LeastCoreError as e:
        print(json.dumps({"error": type(e).__name__, "message": str(e), "exit_code": e.exit_code}), file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
