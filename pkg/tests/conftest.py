import pathlib

import pytest

from spe_ncrs.arena import parse_game
from spe_ncrs.knowledge import imperfect_game

DATA = pathlib.Path(__file__).parent / "data"


def load(name):
    return parse_game((DATA / name).read_text())


@pytest.fixture
def fig2():
    return load("fig2.game")


@pytest.fixture
def fig2_mod():
    return load("fig2-mod.game")


def fig3_game():
    """Challenger secretly picks v1 or v2; the prover sees only {v1, v2} and
    must choose the branch leading to v3."""
    states = [("v0", "C", "v0"), ("v1", "P", "v12"), ("v2", "P", "v12"), ("v3", "P", "v35"),
              ("v4", "P", "v46"), ("v5", "P", "v35"), ("v6", "P", "v46")]
    edges = [("v0", "l", "v1"), ("v0", "r", "v2"), ("v1", "lp", "v3"), ("v1", "rp", "v4"),
             ("v2", "lp", "v5"), ("v2", "rp", "v6")] + [(x, "lp", x) for x in ("v3", "v4", "v5", "v6")]
    return imperfect_game(states, edges, "v0", hidden=["l", "r"])


def profile(g, **named):
    """Memoryless profile from ``state=action`` keywords (primes written as _p)."""
    return {g.state_id(s): g.action_id(a.replace("_p", "'")) for s, a in named.items()}
