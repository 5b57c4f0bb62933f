"""Command line front end: ``ulmimo schedule|sweep|antenna-select|verify|enumerate``."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .antenna import AntennaSelectionInstance, antenna_exact, antenna_greedy
from .constraints import ConstraintSystem
from .errors import CapacityError, InvalidArgument, NumericError
from .ground_set import count_allocations
from .oracle import (OracleBudget, best_corner_point, exact_schedule, verify_rate_region_membership,
                     verify_submodular)
from .scheduler import data_dependent_upper_bound
from .sim import (ALGORITHMS, ALPHABETS, ConfigError, Scenario, _capped_rank, format_rows, generate_channels,
                  metadata, run_experiment)
from .utility import corner_point_rates, weighted_sum_rate_h

EXIT_CONFIG, EXIT_CAPACITY, EXIT_NUMERIC = 2, 3, 4
SUBMODULAR_SAMPLE = 10

config_option = click.option("--config", "config_path", required=True,
                             type=click.Path(exists=True, dir_okay=False), help="Scenario YAML file.")
seed_option = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None,
                           help="Override the scenario seed.")
algo_option = click.option("--algo", type=click.Choice(sorted(ALGORITHMS)), multiple=True,
                           help="Algorithm(s) to run; repeatable. Defaults to the scenario's list.")
alphabet_option = click.option("--alphabet", type=click.Choice(ALPHABETS), default=None,
                               help="Rank function: Gaussian inputs or finite constellations.")
out_option = click.option("--out", type=click.Path(dir_okay=False), default=None,
                          help="Output file (default: stdout).")
format_option = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv")


def _load(config_path, seed) -> Scenario:
    scenario = Scenario.load(config_path)
    if seed is not None:
        scenario.seed = seed
    return scenario


def _emit(text: str, out) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)


def _run(config_path, seed, algo, alphabet, out, fmt, timing, snr_db):
    scenario = _load(config_path, seed)
    rows = run_experiment(scenario, algorithms=list(algo) or None, alphabet=alphabet, snr_db=snr_db, timing=timing)
    _emit(format_rows(rows, fmt, metadata(scenario, alphabet)), out)


@click.group()
@click.version_option(package_name="ulmimo")
def cli():
    """Uplink MU-MIMO scheduling by constrained submodular maximization."""


@cli.command()
@config_option
@seed_option
@algo_option
@alphabet_option
@out_option
@format_option
@click.option("--snr-db", type=float, default=None, help="SNR point (default: first in the scenario).")
@click.option("--timing", is_flag=True, help="Record wall-clock runtime (output is then not reproducible).")
def schedule(config_path, seed, algo, alphabet, out, fmt, snr_db, timing):
    """Run the scenario's intervals at a single SNR point."""
    scenario = _load(config_path, seed)
    point = scenario.snr_db[0] if snr_db is None else snr_db
    rows = run_experiment(scenario, algorithms=list(algo) or None, alphabet=alphabet, snr_db=[point], timing=timing)
    _emit(format_rows(rows, fmt, metadata(scenario, alphabet)), out)


@cli.command()
@config_option
@seed_option
@algo_option
@alphabet_option
@out_option
@format_option
@click.option("--timing", is_flag=True, help="Record wall-clock runtime (output is then not reproducible).")
def sweep(config_path, seed, algo, alphabet, out, fmt, timing):
    """Run every SNR point of the scenario."""
    _run(config_path, seed, algo, alphabet, out, fmt, timing, None)


@cli.command("antenna-select")
@click.argument("matrix", type=click.Path(exists=True, dir_okay=False))
@click.option("--C", "count", type=int, required=True, help="Number of antennas to select.")
@click.option("--snr-db", type=float, default=None, help="Scale columns by sqrt(snr / C).")
@click.option("--exact/--no-exact", default=True, help="Also solve exhaustively when small enough.")
@format_option
def antenna_select(matrix, count, snr_db, exact, fmt):
    """Greedy transmit antenna selection for the channel in MATRIX (.npy or text)."""
    try:
        h = np.load(matrix) if matrix.endswith(".npy") else np.loadtxt(matrix, dtype=complex, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read matrix {matrix}: {exc}") from None
    snr = None if snr_db is None else 10.0 ** (snr_db / 10.0)
    inst = AntennaSelectionInstance(h, count, snr)
    cols, value = antenna_greedy(inst)
    result = {"selected": list(cols), "value": value}
    if exact and inst.n_antennas <= 20:
        best_cols, best = antenna_exact(inst)
        result.update(exact_selected=list(best_cols), exact_value=best, ratio=value / best if best > 0 else 1.0)
    if fmt == "json":
        click.echo(json.dumps(result, sort_keys=True))
    else:
        click.echo(",".join(result))
        click.echo(",".join(" ".join(map(str, v)) if isinstance(v, list) else f"{v:.9g}" for v in result.values()))


@cli.command("enumerate")
@config_option
@seed_option
@alphabet_option
def enumerate_cmd(config_path, seed, alphabet):
    """Print ground-set and constraint statistics."""
    scenario = _load(config_path, seed)
    ground = scenario.build_ground_set()
    constraints = ConstraintSystem(ground, scenario.build_knapsacks(ground))
    two = sum(a.is_two_chunk for a in ground.allocations)
    ok, diag = constraints.assumptions_hold()
    stats = {
        "users": ground.n_users,
        "rbs": ground.n_rbs,
        "allocations": count_allocations(ground.n_rbs),
        "one_chunk_allocations": len(ground.allocations) - two,
        "two_chunk_allocations": two,
        "precoders": len(ground.codebook),
        "elements": len(ground),
        "control_rows": constraints.knapsacks.n_control,
        "interference_rows": constraints.knapsacks.n_interference,
        "structured_constraints": ok,
        "structure_diagnostic": diag,
        "max_cardinality": constraints.max_cardinality(),
        "alphabet": alphabet or scenario.alphabet,
    }
    for key, value in stats.items():
        click.echo(f"{key}: {value}")


@cli.command()
@config_option
@seed_option
@alphabet_option
@click.option("--snr-db", type=float, default=None)
@click.option("--interval", type=int, default=0, show_default=True)
def verify(config_path, seed, alphabet, snr_db, interval):
    """Check scheduler properties on one channel draw against exhaustive oracles.

    Exits 1 if any check fails.
    """
    scenario = _load(config_path, seed)
    alphabet = alphabet or scenario.alphabet
    ground = scenario.build_ground_set()
    constraints = ConstraintSystem(ground, scenario.build_knapsacks(ground))
    point = scenario.snr_db[0] if snr_db is None else snr_db
    channels = generate_channels((scenario.seed, interval), ground.n_users, ground.n_rbs,
                                 scenario.n_r, scenario.n_t, 10.0 ** (point / 10.0))
    rank = _capped_rank(ground, channels, alphabet, scenario.brute_force_cap)
    weights = ground.weights()
    budget = OracleBudget()
    results = []

    def check(name, ok, detail=""):
        results.append(bool(ok))
        click.echo(f"{'PASS' if ok else 'FAIL'} {name}{': ' + detail if detail else ''}")

    rng = np.random.default_rng(scenario.seed)
    sample = np.sort(rng.choice(len(ground), size=min(len(ground), SUBMODULAR_SAMPLE), replace=False))
    for label, fn in (("capped rank", rank), ("weighted sum rate", lambda s: weighted_sum_rate_h(s, weights, rank))):
        verdict = verify_submodular(lambda s: fn(tuple(int(sample[i]) for i in s)), len(sample))
        check(f"{label} monotone submodular on {len(sample)} sampled elements", verdict,
              f"{verdict.message} {verdict.witness}" if not verdict else "")

    outcomes = {name: ALGORITHMS[name](ground, weights, rank, constraints) for name in ("greedy", "lazy", "pruned")}
    eager = outcomes["greedy"]
    for name, out in outcomes.items():
        check(f"{name} selection feasible", constraints.is_feasible(out.selected))
    check("lazy matches eager", outcomes["lazy"].selected == eager.selected
          and outcomes["lazy"].objective == eager.objective)
    check("pruned within half of eager", outcomes["pruned"].objective >= 0.5 * eager.objective - 1e-9)
    bound = data_dependent_upper_bound(ground, weights, rank, constraints, eager)
    check("greedy below upper bound", eager.objective <= bound + 1e-9, f"{eager.objective:.6g} <= {bound:.6g}")

    if len(eager.selected) <= budget.max_region:
        rates = corner_point_rates(eager.selected, weights, rank)
        check("corner rates in rate region", verify_rate_region_membership(eager.selected, rates, rank, budget))
        best, _ = best_corner_point(eager.selected, weights, rank)
        check("corner rates optimal over vertices", abs(best - eager.objective) <= 1e-9 * max(1.0, best))
    else:
        click.echo(f"SKIP rate region checks: {len(eager.selected)} scheduled elements")
    if len(ground) <= budget.max_ground:
        opt = exact_schedule(ground, weights, rank, constraints, budget)
        check("upper bound above exact optimum", bound >= opt.objective - 1e-9, f"{opt.objective:.6g} <= {bound:.6g}")
        m = constraints.knapsacks.n_interference
        if constraints.assumptions_hold()[0]:
            check(f"greedy within 1/{2 + m} of exact", eager.objective >= opt.objective / (2 + m) - 1e-9)
    else:
        click.echo(f"SKIP exact checks: {len(ground)} elements exceeds budget {budget.max_ground}")
    if not all(results):
        return 1
    return 0


def main(argv=None) -> int:
    """Entry point with exit codes: 2 invalid input, 3 capacity exceeded, 4 numerical failure."""
    try:
        code = cli.main(args=argv, prog_name="ulmimo", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return EXIT_CONFIG
    except CapacityError as exc:
        click.echo(f"capacity error: {exc}", err=True)
        return EXIT_CAPACITY
    except NumericError as exc:
        click.echo(f"numeric error: {exc}", err=True)
        return EXIT_NUMERIC
    except InvalidArgument as exc:
        click.echo(f"invalid input: {exc}", err=True)
        return EXIT_CONFIG
    return code if isinstance(code, int) else 0


if __name__ == "__main__":
    sys.exit(main())
