import numpy as np
import pytest

from gstrack.graph_core import WeightedGraph, graph_basis, random_geometric_graph

_criteria: dict[str, list[tuple[str, str]]] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    crit = props.get("criterion")
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria.setdefault(crit, []).append((report.nodeid, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_criteria, key=int):
        results = _criteria[crit]
        ok = all(outcome == "passed" for _, outcome in results)
        failed = [nid.split("::")[-1] for nid, outcome in results if outcome != "passed"]
        line = f"criterion {crit}: {'PASS' if ok else 'FAIL'} ({len(results) - len(failed)}/{len(results)} checks)"
        if failed:
            line += " failing: " + ", ".join(failed)
        tr.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def path3():
    return WeightedGraph(np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float))


@pytest.fixture
def small_graph():
    g = random_geometric_graph(8, 0.6, np.random.default_rng(3), require_connected=True)
    return g, graph_basis(g)


def _accumulated_by_seed(scenario, horizon, seeds=range(5)):
    import time

    from gstrack.harness import accumulated_error, make_config, run_scenario

    start = time.perf_counter()
    totals: dict[str, list[float]] = {}
    for seed in seeds:
        reports = run_scenario(make_config(scenario, seed=seed, horizon=horizon))
        for name, rep in reports.items():
            totals.setdefault(name, []).append(accumulated_error(rep))
    return totals, time.perf_counter() - start


@pytest.fixture(scope="session")
def sensor_runs():
    """Accumulated NMSE per policy and seed, sensor defaults at T=200, seeds 0-4."""
    totals, elapsed = _accumulated_by_seed("sensor", 200)
    print(f"\nsensor T=200 accumulated NMSE by seed {totals} ({elapsed:.1f} s)")
    return totals, elapsed


@pytest.fixture(scope="session")
def social_runs():
    """Accumulated NMSE per policy and seed, social defaults at T=100, seeds 0-4."""
    totals, elapsed = _accumulated_by_seed("social", 100)
    print(f"\nsocial T=100 accumulated NMSE by seed {totals} ({elapsed:.1f} s)")
    return totals, elapsed
