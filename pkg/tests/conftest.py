import itertools
import sys
from pathlib import Path

import pytest

from mimset.graph import Admg, GraphError, parse_graph

sys.path.insert(0, str(Path(__file__).parent))

G1_TEXT = "vertices: a b c d\na -> b\nb -> c\nc -> d\nb <-> d\n"
G2_TEXT = "vertices: a b c d\na -> c\nb -> d\na <-> d\nb <-> c\n"
G3_TEXT = "vertices: a b c d e\na -> b\ne -> d\nb <-> c\nc <-> d\norder: e a d b c\n"
CYCLE6_TEXT = "vertices: a b c d e f\n" + "".join(
    f"{x} <-> {y}\n" for x, y in zip("abcdef", "bcdefa"))
CHAIN5_TEXT = "vertices: a b c d e\na <-> b\nb <-> c\nc <-> d\nd <-> e\n"

# Per-pair edge states of a general ADMG: none, ->, <-, <->, -> and <->, <- and <->.
PAIR_STATES = ((), ("f",), ("r",), ("s",), ("f", "s"), ("r", "s"))


def graph(text):
    return parse_graph(text)[0]


@pytest.fixture(scope="session")
def g1():
    return graph(G1_TEXT)


@pytest.fixture(scope="session")
def g2():
    return graph(G2_TEXT)


@pytest.fixture(scope="session")
def g3():
    return parse_graph(G3_TEXT)


@pytest.fixture(scope="session")
def cycle6():
    return graph(CYCLE6_TEXT)


@pytest.fixture(scope="session")
def chain5():
    return graph(CHAIN5_TEXT)


def all_admgs(n, names="abcdefgh"):
    """Every ADMG on ``n`` labeled vertices."""
    pairs = list(itertools.combinations(range(n), 2))
    for combo in itertools.product(range(len(PAIR_STATES)), repeat=len(pairs)):
        directed, bidirected = [], []
        for (i, j), s in zip(pairs, combo):
            for e in PAIR_STATES[s]:
                if e == "f":
                    directed.append((i, j))
                elif e == "r":
                    directed.append((j, i))
                else:
                    bidirected.append((i, j))
        try:
            yield Admg(names[:n], directed, bidirected)
        except GraphError:
            pass


@pytest.fixture(scope="session")
def admgs3():
    return [g for n in range(1, 4) for g in all_admgs(n)]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None:
        return
    reports = terminalreporter.stats.get("passed", []) + terminalreporter.stats.get("failed", [])
    ran = {int(r.nodeid.rsplit("test_criterion_", 1)[1][:2]) for r in reports
           if "test_criterion_" in r.nodeid}
    terminalreporter.section("acceptance criteria")
    for k in sorted(ran | set(mod.RESULTS)):
        terminalreporter.write_line(mod.RESULTS.get(k, f"criterion {k:2d}: FAIL  did not complete"))
