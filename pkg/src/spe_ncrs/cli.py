"""Command line interface: ``spe-ncrs solve|check|oracle``.

Exit codes: 0 YES (or all checks passed, or no refutation found), 1 NO (or a
check failed, or a counterexample was found), 2 input error, 3 resource guard.
"""
from __future__ import annotations

import json
import sys

import click

from . import knowledge, observer, one_prover, pcp as pcp_mod
from .arena import GameError, Reach, binarize_ex, parse_game, validate
from .equilibria_oracle import ResourceGuard, refute_solution
from .igame import SizeGuard
from .pipeline import MODES, export_dot, solve_spe_ncrs, strategy_summary
from .strategy import MealyStrategy

EXIT_YES, EXIT_NO, EXIT_INPUT, EXIT_GUARD = 0, 1, 2, 3


def _load(path: str):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise GameError(f"cannot read {path}: {exc.strerror}") from None
    return parse_game(text)


@click.group()
def cli():
    """Rational synthesis under subgame-perfect responses."""


@cli.command()
@click.argument("path")
@click.option("--mode", type=click.Choice(MODES), default="auto", show_default=True)
@click.option("--emit-strategy", "emit", type=click.Path(dir_okay=False), default=None,
              help="Write the extracted strategy as JSON.")
@click.option("--export-dot", "dot_dir", type=click.Path(file_okay=False), default=None,
              help="Write one DOT file per stage into this directory.")
@click.option("--stats", is_flag=True, help="Print stage sizes and timings.")
@click.option("--max-states", type=int, default=200_000, show_default=True,
              help="State bound for every intermediate construction.")
def solve(path, mode, emit, dot_dir, stats, max_states):
    """Decide whether player 0 has a solution strategy."""
    g, objs = _load(path)
    v = solve_spe_ncrs(g, objs, mode, max_states=max_states)
    click.echo(v.answer)
    if v.strategy is not None:
        click.echo(f"strategy: {len(v.strategy.memory)} memory states")
        for line in strategy_summary(g, v.strategy):
            click.echo(f"  {line}")
        if emit:
            with open(emit, "w") as fh:
                fh.write(v.strategy.dumps())
    if dot_dir:
        for p in export_dot(v, dot_dir):
            click.echo(f"wrote {p}", err=True)
    if stats:
        click.echo(json.dumps(v.stats_dict(), indent=1))
    return EXIT_YES if v.yes else EXIT_NO


def _line(ok: bool, name: str, detail: str) -> bool:
    click.echo(f"[{'ok' if ok else 'FAIL'}] {name}: {detail}")
    return ok


@cli.command()
@click.argument("path")
@click.option("--samples", type=int, default=10_000, show_default=True,
              help="Synchronized walk pairs for the sampled checks.")
@click.option("--max-states", type=int, default=200_000, show_default=True)
def check(path, samples, max_states):
    """Run the structural invariant suite on the constructions for a game."""
    g, objs = _load(path)
    problems = validate(g)
    ok = _line(not problems, "game", "valid" if not problems else "; ".join(problems))
    if problems:
        return EXIT_NO
    gb = binarize_ex(g, objs)
    pg = pcp_mod.build_pcp(gb.game, gb.objectives, max_states=max_states)
    rep = pcp_mod.size_report(pg)
    ok &= _line(pcp_mod.size_bounds_hold(pg), "pcp size",
                f"{rep['states']} <= {rep['state_bound']} states, "
                f"{rep['actions']} <= {rep['action_bound']} actions")
    bad = pcp_mod.action_stability_violations(pg.arena)
    ok &= _line(not bad, "action-stability", f"{len(bad)} violations")
    bad = pcp_mod.player_stability_violations(pg.arena)
    ok &= _line(not bad, "player-stability (exhaustive)", f"{len(bad)} violating pairs")
    n, bad_n = pcp_mod.sampled_player_stability(pg.arena, samples)
    ok &= _line(bad_n == 0, "player-stability (sampled)", f"{bad_n} of {n} pairs")
    bad = pcp_mod.gain_monotonicity_violations(pg)
    ok &= _line(not bad, "gain monotonicity", f"{len(bad)} violations")
    bad = pcp_mod.deadlocks(pg.arena)
    ok &= _line(not bad, "deadlock-free", f"{len(bad)} deadlocks")
    if all(isinstance(o, Reach) for o in gb.objectives):
        prod = observer.build_reach_observer_product(pg, limit=max_states)
        bound = observer.reach_observer_bound(gb.game.n_players, gb.game.n_actions)
        n_obs = len(prod.observer_states())
        ok &= _line(n_obs <= bound, "observer size", f"{n_obs} <= {bound} observer states, "
                    f"{len(prod.pairs)} pairs")
    else:
        prod = observer.build_parity_observer_product(pg, limit=max_states)
        _line(True, "observer size", f"{prod.n} product states, {len(prod.pairs)} pairs")
    pc = one_prover.merge_provers(prod)
    quot = all(one_prover.quotient_check(pc, o) for o in pc.classes)
    ok &= _line(quot, "function-action quotient", f"{len(pc.classes)} observation classes")
    v = solve_spe_ncrs(g, objs, max_states=max_states, extract=False)
    kg = v.artifacts["kg"]
    vis = kg.visibility_report()
    ok &= _line(not vis["mixed_owner"], "knowledge visibility",
                f"{vis['states']} states, {len(vis['mixed_owner'])} with mixed owners")
    click.echo("advisory:")
    st = one_prover.sampled_strong_stability(pc, samples)
    click.echo(f"  strong player-stability (sampled): {st['owner_violations']} owner and "
               f"{st['observation_violations']} observation mismatches in {st['pairs']} pairs")
    click.echo(f"  prover knowledge sets spanning several observations: {len(vis['mixed_obs_prover'])}")
    click.echo(f"  challenger knowledge sets spanning several observations: "
               f"{len(vis['mixed_obs_challenger'])}")
    return EXIT_YES if ok else EXIT_NO


@cli.command()
@click.argument("path")
@click.option("--strategy", "strategy_path", required=True, type=click.Path(dir_okay=False))
@click.option("--max-profiles", type=int, default=1 << 16, show_default=True)
def oracle(path, strategy_path, max_profiles):
    """Search for a subgame-perfect response that makes player 0 lose."""
    g, objs = _load(path)
    try:
        with open(strategy_path) as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise GameError(f"cannot read strategy {strategy_path}: {exc}") from None
    strat = MealyStrategy.from_json(g, data)
    problems = strat.check()
    if problems:
        raise GameError("strategy is malformed: " + "; ".join(problems))
    ce = refute_solution(g, objs, strat, max_profiles)
    if ce is None:
        click.echo("no counterexample among memoryless responses on the strategy product")
        return EXIT_YES
    click.echo("counterexample found")
    steps = [f"{g.state_names[s]} {g.action_names[a]}" for s, a in ce.outcome.prefix]
    loop = [f"{g.state_names[s]} {g.action_names[a]}" for s, a in ce.outcome.cycle]
    click.echo(f"  outcome: {' '.join(steps)} ({' '.join(loop)})^w")
    click.echo(f"  gains: {list(ce.gains)}")
    click.echo(json.dumps({"profile": [{"memory": m, "state": s, "visited": mask, "action": a}
                                       for (m, s, mask), a in sorted(ce.profile.items())]},
                          indent=1))
    return EXIT_NO


def main(argv=None) -> int:
    try:
        rv = cli.main(args=argv, prog_name="spe-ncrs", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return EXIT_INPUT
    except click.Abort:
        return EXIT_INPUT
    except GameError as exc:
        click.echo(f"input error: {exc}", err=True)
        return EXIT_INPUT
    except (SizeGuard, ResourceGuard) as exc:
        click.echo(f"resource guard: {exc}", err=True)
        return EXIT_GUARD
    return rv if isinstance(rv, int) else 0


if __name__ == "__main__":
    sys.exit(main())
