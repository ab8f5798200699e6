"""Command-line interface.

Exit codes: 0 success, 1 input error, 2 rank or degeneracy error, 3 stalled
path, 4 certificate check failed. Set ``LARS_PATH_LOG`` to a logging level
name (e.g. DEBUG) for progress messages on stderr.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import ensemble as ens
from .errors import InputError, LassoPathError
from .lars import ALGOS, solve
from .oracle import NOISE_MODES, EstimateContract, QueryLedger, estimate_inner_product
from .serialize import (load_problem, path_from_dict, path_to_dict, read_json, with_meta,
                        write_json)
from .verify import certify_path

log = logging.getLogger("lassopath")
EXIT_CERT_FAIL = 4


def _setup_logging() -> None:
    level = os.environ.get("LARS_PATH_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _emit(doc: dict, out: str | None) -> None:
    text = write_json(doc, out)
    if out is None:
        click.echo(text, nl=False)


def _merge_config(config: str | None, params: dict, keys: tuple[str, ...]) -> dict:
    """Values from a JSON config file fill in options left at their defaults."""
    if not config:
        return params
    doc = read_json(config)
    if not isinstance(doc, dict):
        raise InputError(f"{config}: config must be a JSON object")
    ctx = click.get_current_context()
    out = dict(params)
    for key in keys:
        src = ctx.get_parameter_source(key)
        name = key.replace("_", "-")
        for k in (key, name):
            if k in doc and src == click.core.ParameterSource.DEFAULT:
                out[key] = doc[k]
    return out


common_seed = click.option("--seed", type=int, default=0, show_default=True)
common_threads = click.option("--threads", type=int, default=1, show_default=True,
                              help="Worker threads for independent trials.")
common_meta = click.option("--no-meta", is_flag=True, help="Omit the timestamped meta block.")
common_out = click.option("--out", type=click.Path(dir_okay=False), default=None,
                          help="Output JSON file (stdout if omitted).")
common_noise = click.option("--noise-mode", type=click.Choice(NOISE_MODES), default="stochastic",
                            show_default=True)


@click.group()
def cli() -> None:
    """Pathwise Lasso solvers, certificates and random-design experiments."""


@cli.command("solve-path")
@click.argument("problem_file", type=click.Path(dir_okay=False))
@click.option("--algo", type=click.Choice(ALGOS), default="exact", show_default=True)
@click.option("--epsilon", type=float, default=0.05, show_default=True)
@click.option("--delta", type=float, default=0.05, show_default=True)
@click.option("--max-kinks", type=int, default=None)
@common_seed
@common_noise
@common_threads
@common_meta
@common_out
@click.option("--ledger", "ledger_out", type=click.Path(dir_okay=False), default=None,
              help="Ledger JSON file (defaults next to --out).")
@click.option("--config", type=click.Path(dir_okay=False), default=None,
              help="JSON file with solver settings.")
def solve_path_cmd(problem_file, algo, epsilon, delta, max_kinks, seed, noise_mode, threads,
                   no_meta, out, ledger_out, config):
    """Compute a regularisation path and its query ledger."""
    p = _merge_config(config, dict(algo=algo, epsilon=epsilon, delta=delta, max_kinks=max_kinks,
                                   seed=seed, noise_mode=noise_mode),
                      ("algo", "epsilon", "delta", "max_kinks", "seed", "noise_mode"))
    problem = load_problem(problem_file)
    ledger = QueryLedger()
    log.info("solving %s on n=%d d=%d", p["algo"], problem.n, problem.d)
    path = solve(problem, p["algo"], epsilon=p["epsilon"], delta=p["delta"],
                 max_kinks=p["max_kinks"], seed=p["seed"], noise_mode=p["noise_mode"], ledger=ledger)
    log.info("%d kinks, truncated=%s", len(path), path.truncated)
    _emit(with_meta(path_to_dict(path), no_meta), out)
    if ledger_out is None and out is not None:
        ledger_out = str(Path(out).with_suffix("")) + ".ledger.json"
    if ledger_out is not None:
        write_json(with_meta(ledger.to_dict(), no_meta), ledger_out)


@cli.command("verify")
@click.argument("path_file", type=click.Path(dir_okay=False))
@click.argument("problem_file", type=click.Path(dir_okay=False))
@click.option("--epsilon", type=float, default=None, help="Defaults to the path's epsilon.")
@click.option("--grid", type=int, default=50, show_default=True, help="Points per segment.")
@common_meta
@common_out
def verify_cmd(path_file, problem_file, epsilon, grid, no_meta, out):
    """Certify a stored path with the duality gap; exit 0 iff it passes."""
    problem = load_problem(problem_file)
    path = path_from_dict(read_json(path_file), problem.d)
    eps = path.epsilon if epsilon is None else epsilon
    cert = certify_path(path, problem, eps, grid)
    _emit(with_meta(cert.to_dict(), no_meta), out)
    if not cert.passed:
        click.echo(f"certificate failed: worst lambda {cert.worst_lambda!r}, "
                   f"excess {cert.max_violation!r}", err=True)
        sys.exit(EXIT_CERT_FAIL)


@cli.command("estimate")
@click.argument("problem_file", type=click.Path(dir_okay=False))
@click.option("--column", type=int, required=True, help="Feature index j (0-based).")
@click.option("--kind", type=click.Choice(("classical", "quantum", "exact")), default="classical",
              show_default=True)
@click.option("--epsilon", type=float, default=0.05, show_default=True)
@click.option("--delta", type=float, default=0.05, show_default=True)
@common_seed
@common_noise
@common_meta
@common_out
def estimate_cmd(problem_file, column, kind, epsilon, delta, seed, noise_mode, no_meta, out):
    """Estimate X_j^T y with one of the inner-product oracles."""
    problem = load_problem(problem_file)
    if not 0 <= column < problem.d:
        raise InputError(f"column {column} outside [0, {problem.d})")
    col = problem.X[:, column]
    contract = EstimateContract(epsilon, delta, noise_mode)
    ledger = QueryLedger()
    est = estimate_inner_product(kind, col, problem.y, contract, np.random.default_rng(seed), ledger)
    exact = float(col @ problem.y)
    scale = float(min(np.abs(col).max() * np.abs(problem.y).sum(),
                      np.abs(col).sum() * np.abs(problem.y).max()))
    doc = {"column": column, "kind": kind, "epsilon": epsilon, "delta": delta, "exact": exact,
           "estimate": est, "error": abs(est - exact), "bound": epsilon * scale,
           "ledger": ledger.to_dict()}
    _emit(with_meta(doc, no_meta), out)


def _write_csv(result: ens.ExperimentResult, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "statistic"])
        for k, s in enumerate(result.stats):
            w.writerow([k, "" if s is None else repr(float(s))])


def _sigma(spec: str, d: int):
    if spec in ("identity", "I"):
        return None
    if spec.startswith("ar1:"):
        return ens.ar1_covariance(d, float(spec[4:]))
    raise InputError(f"unknown covariance {spec!r}; use 'identity' or 'ar1:RHO'")


@cli.command("ensemble")
@click.option("--experiment", type=click.Choice(("conditioning", "incoherence", "overlap")),
              required=True)
@click.option("--n", "n", type=int, default=200, show_default=True)
@click.option("--d", "d", type=int, default=1000, show_default=True)
@click.option("--a-size", type=int, default=None,
              help="|A|; defaults to n/4, or the budget for the incoherence experiment.")
@click.option("--trials", type=int, default=200, show_default=True)
@click.option("--delta", type=float, default=0.05, show_default=True)
@click.option("--sigma", "sigma_spec", default="identity", show_default=True,
              help="'identity' or 'ar1:RHO'.")
@click.option("--y", "y_kind", type=click.Choice(("sparse", "dense")), default="sparse",
              show_default=True, help="Observation vector for the overlap experiment.")
@common_seed
@common_threads
@common_meta
@common_out
@click.option("--csv", "csv_out", type=click.Path(dir_okay=False), default=None,
              help="Per-trial statistics as CSV.")
@click.option("--config", type=click.Path(dir_okay=False), default=None)
def ensemble_cmd(experiment, n, d, a_size, trials, delta, sigma_spec, y_kind, seed, threads,
                 no_meta, out, csv_out, config):
    """Monte Carlo frequency of a random-design bound."""
    keys = ("n", "d", "a_size", "trials", "delta", "sigma_spec", "y_kind", "seed")
    p = _merge_config(config, dict(n=n, d=d, a_size=a_size, trials=trials, delta=delta,
                                   sigma_spec=sigma_spec, y_kind=y_kind, seed=seed), keys)
    if p["trials"] < 1:
        raise InputError("trials must be at least 1")
    spec = ens.GaussianSpec(p["n"], p["d"], _sigma(p["sigma_spec"], p["d"]), p["seed"])
    if experiment == "conditioning":
        size = p["a_size"] if p["a_size"] is not None else max(1, p["n"] // 4)
        res = ens.conditioning_experiment(spec, size, p["trials"], p["delta"], threads)
    elif experiment == "incoherence":
        size = p["a_size"] if p["a_size"] is not None else ens.incoherence_budget(spec, p["delta"])
        res = ens.incoherence_experiment(spec, size, p["trials"], p["delta"], threads)
    else:
        size = p["a_size"] if p["a_size"] is not None else max(1, p["n"] // 20)
        y = np.zeros(p["n"])
        if p["y_kind"] == "sparse":
            y[0] = 1.0
        else:
            y[:] = 1.0
        res = ens.overlap_experiment(spec, y, size, p["trials"], p["delta"], threads)
    _emit(with_meta(res.to_dict(), no_meta), out)
    if csv_out:
        _write_csv(res, csv_out)


@cli.command("rates")
@click.option("--kind", type=click.Choice(("slow", "fast")), required=True)
@click.option("--n", "n", type=int, default=None, help="Defaults to 50 (slow) or 100 (fast).")
@click.option("--d", "d", type=int, default=None, help="Defaults to 100 (slow) or 20 (fast).")
@click.option("--sparsity", type=int, default=5, show_default=True)
@click.option("--sigma", type=float, default=0.5, show_default=True, help="Noise level.")
@click.option("--epsilon", type=float, default=0.2, show_default=True)
@click.option("--delta", type=float, default=0.05, show_default=True)
@click.option("--trials", type=int, default=100, show_default=True)
@click.option("--algo", type=click.Choice(("approx-classical", "approx-quantum")),
              default="approx-classical", show_default=True)
@common_seed
@common_noise
@common_threads
@common_meta
@common_out
@click.option("--csv", "csv_out", type=click.Path(dir_okay=False), default=None)
def rates_cmd(kind, n, d, sparsity, sigma, epsilon, delta, trials, algo, seed, noise_mode,
              threads, no_meta, out, csv_out):
    """Check the slow or fast prediction-error rate on certified approximate solutions."""
    if trials < 1:
        raise InputError("trials must be at least 1")
    n = n if n is not None else (50 if kind == "slow" else 100)
    d = d if d is not None else (100 if kind == "slow" else 20)
    res = ens.rate_experiment(kind, n, d, sparsity, sigma, epsilon, trials, seed, delta,
                              algo.split("-")[1], noise_mode, threads=threads)
    _emit(with_meta(res.to_dict(), no_meta), out)
    if csv_out:
        _write_csv(res, csv_out)


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    try:
        cli.main(args=argv, prog_name="lassopath", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        return 1
    except LassoPathError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except SystemExit as exc:
        return int(exc.code or 0)
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
