"""Experiment grid: runs, aggregation, CSV output."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .config import ScenarioConfig
from .run import CSV_COLUMNS, csv_text, format_value, run_scenario

LOW, HIGH = 25, 50
DEFAULT_CELLS = ("sinkhole", "dropping", "dropping:on_active_route", "blackhole", "flooding")
AGG_COLUMNS = ("nodes", "attack", "placement", "ratio", "runs", "pdr_mean", "pdr_std",
               "e2e_mean", "e2e_std", "overhead_mean", "overhead_std", "conservation_ok")


def parse_attack(label: str) -> tuple[str, str]:
    """``"dropping:on_active_route"`` -> ``("dropping", "on_active_route")``."""
    kind, _, placement = label.partition(":")
    return kind, placement or "random"


@dataclass(frozen=True)
class Cell:
    nodes: int
    attack: str
    placement: str
    ratio: float
    pdr: float
    pdr_std: float
    e2e: float
    e2e_std: float
    overhead: float
    overhead_std: float
    runs: int = 0
    conservation_ok: bool = True

    def row(self):
        return {"nodes": self.nodes, "attack": self.attack, "placement": self.placement,
                "ratio": self.ratio, "runs": self.runs, "pdr_mean": self.pdr,
                "pdr_std": self.pdr_std, "e2e_mean": self.e2e, "e2e_std": self.e2e_std,
                "overhead_mean": self.overhead, "overhead_std": self.overhead_std,
                "conservation_ok": self.conservation_ok}


class Aggregates:
    """Per-cell means keyed by ``(nodes, attack, placement, ratio)``.

    Ratio 0 of any attack resolves to the attack-free baseline.
    """

    def __init__(self, cells):
        self.cells = {(c.nodes, c.attack, c.placement, round(c.ratio, 4)): c for c in cells}

    def get(self, nodes, attack, placement="random", ratio=0.0):
        if ratio == 0:
            c = self.cells.get((nodes, "none", "random", 0.0))
            if c is not None:
                return c
        return self.cells.get((nodes, attack, placement, round(ratio, 4)))

    def __len__(self):
        return len(self.cells)

    def __iter__(self):
        return iter(sorted(self.cells.values(),
                           key=lambda c: (c.nodes, c.attack, c.placement, c.ratio)))

    def csv_text(self) -> str:
        lines = [",".join(AGG_COLUMNS)]
        for c in self:
            row = c.row()
            lines.append(",".join(format_value(row[k]) for k in AGG_COLUMNS))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "Aggregates":
        cells = []
        for r in csv.DictReader(io.StringIO(text)):
            cells.append(Cell(int(r["nodes"]), r["attack"], r["placement"], float(r["ratio"]),
                              float(r["pdr_mean"]), float(r["pdr_std"]), float(r["e2e_mean"]),
                              float(r["e2e_std"]), float(r["overhead_mean"]),
                              float(r["overhead_std"]), int(r["runs"]),
                              r["conservation_ok"] == "True"))
        return cls(cells)


def _stats(values):
    arr = np.array([v for v in values if not math.isnan(v)], dtype=float)
    if arr.size == 0:
        return float("nan"), float("nan")
    return float(arr.mean()), float(arr.std(ddof=1)) if arr.size > 1 else 0.0


def aggregate(rows, conservation=None) -> Aggregates:
    groups: dict[tuple, list] = {}
    for r in rows:
        key = (r["nodes"], r["attack"], r["placement"], round(r["ratio"], 4))
        groups.setdefault(key, []).append(r)
    cells = []
    for key in sorted(groups):
        rs = groups[key]
        pm, ps = _stats([r["pdr"] for r in rs])
        em, es = _stats([r["e2e_s"] for r in rs])
        om, os_ = _stats([r["overhead"] for r in rs])
        ok = True if conservation is None else all(conservation.get(id(r), True) for r in rs)
        cells.append(Cell(*key, pm, ps, em, es, om, os_, len(rs), ok))
    return Aggregates(cells)


def sweep_configs(base: ScenarioConfig, attacks=None, ratios=None, seeds=None,
                  densities=None) -> list[ScenarioConfig]:
    """Every run of the grid in deterministic (nodes, attack, ratio, seed) order.

    One attack-free run per (density, seed) serves as the ratio-0 cell of
    every attack. The i-th seed gets alpha = alpha_start + i * alpha_step.
    """
    attacks = tuple(base.attacks if attacks is None else attacks)
    ratios = tuple(base.ratios if ratios is None else ratios)
    seeds = tuple(base.seeds if seeds is None else seeds)
    densities = tuple(base.densities if densities is None else densities)
    out = []
    for n in densities:
        for i, seed in enumerate(seeds):
            out.append(base.with_(nodes=n, seed=seed, alpha=base.alpha_for(i), attack="none",
                                  ratio=0.0, placement="random"))
        for label in attacks:
            kind, placement = parse_attack(label)
            for ratio in ratios:
                if ratio == 0:
                    continue
                for i, seed in enumerate(seeds):
                    out.append(base.with_(nodes=n, seed=seed, alpha=base.alpha_for(i),
                                          attack=kind, placement=placement, ratio=ratio))
    return out


def _run_one(cfg):
    res = run_scenario(cfg)
    return res.row(), not res.conservation_errors


@dataclass
class SweepResult:
    rows: list
    conservation: list
    aggregates: Aggregates

    def runs_csv(self) -> str:
        return csv_text(self.rows)

    def all_conserved(self) -> bool:
        return all(self.conservation)


def run_sweep(base: ScenarioConfig, attacks=None, ratios=None, seeds=None, densities=None,
              jobs: int = 1, out_dir: str | None = None, progress=None) -> SweepResult:
    cfgs = sweep_configs(base, attacks, ratios, seeds, densities)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_one, cfgs, chunksize=1))
    else:
        results = []
        for k, cfg in enumerate(cfgs):
            results.append(_run_one(cfg))
            if progress:
                progress(k + 1, len(cfgs), cfg)
    rows = [r for r, _ in results]
    cons = [ok for _, ok in results]
    flags = {id(r): ok for r, ok in zip(rows, cons)}
    agg = aggregate(rows, flags)
    result = SweepResult(rows, cons, agg)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "runs.csv"), "w") as fh:
            fh.write(result.runs_csv())
        with open(os.path.join(out_dir, "aggregates.csv"), "w") as fh:
            fh.write(agg.csv_text())
    return result


def summary_table(agg: Aggregates) -> str:
    lines = [f"{'nodes':>5} {'attack':<26} {'ratio':>5} {'runs':>4} {'PDR':>8} {'E2E(s)':>9} {'OVH':>8}"]
    for c in agg:
        label = c.attack if c.placement == "random" else f"{c.attack}:{c.placement}"
        lines.append(f"{c.nodes:>5} {label:<26} {c.ratio:>5.2f} {c.runs:>4} "
                     f"{c.pdr:>8.4f} {c.e2e:>9.4f} {c.overhead:>8.3f}")
    return "\n".join(lines)


__all__ = ["Aggregates", "Cell", "aggregate", "run_sweep", "sweep_configs", "summary_table",
           "parse_attack", "CSV_COLUMNS", "LOW", "HIGH"]
