"""Machine-checkable trend rules and the published reference table."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable

from .sweep import HIGH, LOW, Cell

RATIOS = (0.05, 0.10, 0.15, 0.20, 0.25)
DENSITIES = (LOW, HIGH)
PTS = 100.0  # PDR fractions -> percentage points


class MissingCellsError(LookupError):
    def __init__(self, missing):
        self.missing = sorted(set(missing))
        super().__init__("missing cells: " + ", ".join(
            f"{n}/{a}/{p}/{r:g}" for n, a, p, r in self.missing))


class ReferenceTable:
    """Published per-cell means; ratio 0 resolves to the table's own 0% row."""

    def __init__(self, rows):
        self.rows = {}
        for r in rows:
            key = (int(r["nodes"]), r["attack"], r["placement"], round(float(r["ratio"]), 4))
            self.rows[key] = Cell(key[0], key[1], key[2], key[3], float(r["pdr"]), 0.0,
                                  float(r["e2e_s"]), 0.0, float(r["overhead"]), 0.0, 1)

    @classmethod
    def load(cls) -> "ReferenceTable":
        text = resources.files("fanetsim.harness").joinpath("data/reference_tables.csv").read_text()
        lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
        return cls(csv.DictReader(io.StringIO("\n".join(lines))))

    def get(self, nodes, attack, placement="random", ratio=0.0):
        if attack == "none":
            # Every attack block repeats the attack-free row; the dropping block's copy is used.
            attack, placement, ratio = "dropping", "random", 0.0
        return self.rows.get((nodes, attack, placement, round(ratio, 4)))

    def __len__(self):
        return len(self.rows)


@dataclass
class RuleOutcome:
    name: str
    passed: bool
    measured: float
    required: str
    detail: str
    provenance: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        m = "nan" if math.isnan(self.measured) else f"{self.measured:.4g}"
        return f"[{status}] {self.name}: measured {m}, required {self.required} ({self.detail})"


@dataclass(frozen=True)
class TrendRule:
    name: str
    cells: tuple            # (nodes, attack, placement, ratio) the rule reads
    evaluate: Callable      # lookup -> (passed, measured, required, detail)
    provenance: str

    def check(self, table) -> RuleOutcome:
        missing = [c for c in self.cells if table.get(*c) is None]
        if missing:
            raise MissingCellsError(missing)
        ok, measured, required, detail = self.evaluate(table.get)
        return RuleOutcome(self.name, bool(ok), float(measured), required, detail,
                           self.provenance)


def _pdr_drop(get, n, attack, placement, ratio):
    return (get(n, attack, placement, 0.0).pdr - get(n, attack, placement, ratio).pdr) * PTS


def _min_margin(values):
    return min(values) if values else float("nan")


def _nan_safe(cond, x):
    return (not math.isnan(x)) and cond


def default_rules(step_tolerance: float = 0.02) -> list[TrendRule]:
    rules = []

    def baseline_pdr(get):
        vals = [get(n, "none", "random", 0.0).pdr for n in DENSITIES]
        m = min(vals)
        return _nan_safe(m >= 0.88, m), m, ">= 0.88", "min baseline PDR over densities"
    rules.append(TrendRule("1 baseline PDR", tuple((n, "none", "random", 0.0) for n in DENSITIES),
                           baseline_pdr, "reference 0% rows: PDR 93.70% / 94.00%"))

    def baseline_ovh(get):
        lo = get(LOW, "none", "random", 0.0).overhead
        hi = get(HIGH, "none", "random", 0.0).overhead
        ok = _nan_safe(3 <= lo <= 13, lo) and _nan_safe(1.5 <= hi <= 8, hi)
        return ok, hi, "low in [3, 13] and high in [1.5, 8]", f"low={lo:.4g} high={hi:.4g}"
    rules.append(TrendRule("2 baseline overhead", tuple((n, "none", "random", 0.0) for n in DENSITIES),
                           baseline_ovh, "reference 0% rows: OVH 7.49 / 3.77"))

    def flood_drop(get):
        d = _pdr_drop(get, HIGH, "flooding", "random", 0.25)
        return _nan_safe(d >= 20, d), d, ">= 20 pts", "high density, 25%"
    rules.append(TrendRule("3 flooding PDR drop", ((HIGH, "flooding", "random", 0.0),
                                                   (HIGH, "flooding", "random", 0.25)),
                           flood_drop, "reference flooding, 50 nodes: PDR 94.00% -> 62.70%"))

    def bh_drop(get):
        ds = [_pdr_drop(get, n, "blackhole", "random", 0.25) for n in DENSITIES]
        m = _min_margin(ds)
        return _nan_safe(m >= 10, m), m, ">= 10 pts both densities", \
            f"low={ds[0]:.3g} high={ds[1]:.3g}"
    rules.append(TrendRule("4 blackhole PDR drop",
                           tuple((n, "blackhole", "random", r) for n in DENSITIES for r in (0.0, 0.25)),
                           bh_drop, "reference blackhole 25% rows: PDR 79.10% / 76.00%"))

    def sinkhole(get):
        diffs = [abs(get(n, "sinkhole", "random", r).pdr - get(n, "sinkhole", "random", 0.0).pdr) * PTS
                 for n in DENSITIES for r in RATIOS]
        worst = max(diffs)
        e = [get(HIGH, "sinkhole", "random", r).e2e for r in (0.0,) + RATIOS]
        inc = all(b > a for a, b in zip(e, e[1:]))
        ok = _nan_safe(worst <= 3, worst) and inc and not any(math.isnan(x) for x in e)
        return ok, worst, "|dPDR| <= 3 pts every ratio; high-density E2E strictly increasing", \
            "E2E " + " ".join(f"{x:.4g}" for x in e)
    rules.append(TrendRule("5 sinkhole PDR flat, E2E rising",
                           tuple((n, "sinkhole", "random", r) for n in DENSITIES for r in (0.0,) + RATIOS),
                           sinkhole, "reference sinkhole, 50 nodes: E2E 0.100 -> 0.174"))

    def dropping(get):
        rnd = [_pdr_drop(get, n, "dropping", "random", 0.25) for n in DENSITIES]
        act = [_pdr_drop(get, n, "dropping", "on_active_route", 0.25) for n in DENSITIES]
        ok = (all(_nan_safe(d <= 3, d) for d in rnd) and all(_nan_safe(d >= 3, d) for d in act)
              and all(a > r for a, r in zip(act, rnd)))
        return ok, min(act), "random drop <= 3, on-route drop >= 3 and > random", \
            f"random={rnd[0]:.3g}/{rnd[1]:.3g} on-route={act[0]:.3g}/{act[1]:.3g}"
    rules.append(TrendRule("6 dropping placement",
                           tuple((n, "dropping", p, r) for n in DENSITIES
                                 for p in ("random", "on_active_route") for r in (0.0, 0.25)),
                           dropping, "reference dropping 25% rows, random and on-route"))

    def bh_worst(get):
        margins = []
        for n in DENSITIES:
            for r in RATIOS:
                bh = get(n, "blackhole", "random", r).pdr
                other = min(get(n, "sinkhole", "random", r).pdr, get(n, "dropping", "random", r).pdr)
                margins.append((other - bh) * PTS)
        m = min(margins)
        return _nan_safe(m >= 0, m), m, "blackhole PDR <= min(sinkhole, dropping) every ratio", \
            "min margin in pts"
    rules.append(TrendRule("7 blackhole worst of three",
                           tuple((n, a, "random", r) for n in DENSITIES for r in RATIOS
                                 for a in ("blackhole", "sinkhole", "dropping")),
                           bh_worst, "reference sinkhole, dropping and blackhole PDR columns"))

    def flood_ovh(get):
        fs = [get(n, "flooding", "random", 0.25).overhead / get(n, "flooding", "random", 0.0).overhead
              for n in DENSITIES]
        m = min(fs)
        return _nan_safe(m >= 1.8, m), m, ">= 1.8x baseline both densities", \
            f"low={fs[0]:.3g}x high={fs[1]:.3g}x"
    rules.append(TrendRule("8 flooding overhead",
                           tuple((n, "flooding", "random", r) for n in DENSITIES for r in (0.0, 0.25)),
                           flood_ovh, "reference flooding OVH: 16.27/7.49 and 8.11/3.77"))

    def ovh_monotone(get):
        worst = float("inf")
        for a in ("sinkhole", "blackhole"):
            for n in DENSITIES:
                o = [get(n, a, "random", r).overhead for r in (0.0,) + RATIOS]
                for x, y in zip(o, o[1:]):
                    worst = min(worst, (y - x) / x if x else float("nan"))
        return _nan_safe(worst >= -step_tolerance, worst), worst, \
            f"every step >= -{step_tolerance:g} (relative)", "worst relative overhead step"
    rules.append(TrendRule("9 overhead nondecreasing",
                           tuple((n, a, "random", r) for a in ("sinkhole", "blackhole")
                                 for n in DENSITIES for r in (0.0,) + RATIOS),
                           ovh_monotone, "reference sinkhole and blackhole OVH columns"))
    return rules


def check_trends(aggregates, rules=None) -> list[RuleOutcome]:
    """Evaluate every rule; raise ``MissingCellsError`` listing all absent cells."""
    rules = default_rules() if rules is None else rules
    missing = [c for rule in rules for c in rule.cells if aggregates.get(*c) is None]
    if missing:
        raise MissingCellsError(missing)
    return [rule.check(aggregates) for rule in rules]


def report_text(outcomes) -> str:
    return "\n".join(o.line() for o in outcomes)
