import hashlib
import pathlib
import time

import pytest

from fanetsim.harness.config import ScenarioConfig
from fanetsim.harness.sweep import DEFAULT_CELLS, Aggregates, run_sweep
from fanetsim.oracles import static_network  # noqa: F401  (re-exported for tests)

ACCEPTANCE_LINES: list[str] = []


class SweepRecord(tuple):
    def __new__(cls, aggregates, runs_csv, conserved, seconds, n_runs):
        rec = super().__new__(cls, (aggregates, runs_csv, conserved))
        rec.seconds, rec.n_runs = seconds, n_runs
        return rec


@pytest.fixture
def criterion():
    """Record one ``[PASS]/[FAIL] criterion N: ...`` line for the end-of-run summary."""
    def record(number, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=_criterion_key):
            terminalreporter.write_line(line)


def _criterion_key(line):
    tag = line.split("criterion ", 1)[1].split(":", 1)[0]
    num = "".join(ch for ch in tag if ch.isdigit())
    return (int(num) if num else 99, tag)


SRC = pathlib.Path(__file__).resolve().parents[1] / "src" / "fanetsim"


def _source_digest():
    h = hashlib.sha256()
    for p in sorted(SRC.rglob("*.py")):
        h.update(p.read_bytes())
    return h.hexdigest()[:16]


@pytest.fixture(scope="session")
def default_grid(request):
    """Full default grid (both densities, 10 seeds, all attack cells), cached per source digest.

    Returns a function ``queue_capacity -> SweepRecord``; the record unpacks as
    ``(aggregates, runs_csv, all_conserved)`` and also carries the wall time.
    """
    digest = _source_digest()
    memo = {}

    def get(queue_capacity=64):
        if queue_capacity in memo:
            return memo[queue_capacity]
        key = f"fanetsim/default_grid/{digest}/q{queue_capacity}"
        hit = request.config.cache.get(key, None)
        if hit is None:
            t0 = time.perf_counter()
            res = run_sweep(ScenarioConfig(queue_capacity=queue_capacity), attacks=DEFAULT_CELLS)
            hit = {"agg": res.aggregates.csv_text(), "runs": res.runs_csv(),
                   "conserved": res.all_conserved(), "seconds": time.perf_counter() - t0,
                   "n_runs": len(res.rows)}
            request.config.cache.set(key, hit)
        memo[queue_capacity] = SweepRecord(Aggregates.from_csv(hit["agg"]), hit["runs"],
                                           hit["conserved"], hit["seconds"], hit["n_runs"])
        return memo[queue_capacity]

    return get
