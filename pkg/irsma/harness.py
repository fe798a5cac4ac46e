# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

"""
Monte-Carlo experiments

A sweep is a grid of (value, trial) cells. Each cell draws one channel
realization from its own seed and runs every scheme on it; cells are
independent tasks run by a SweepRunner, either in-process or on a process
pool, and their results are sorted back into (value, trial) order before
averaging so that the output does not depend on scheduling.
"""

import asyncio
import csv
import hashlib
import io
import json
import logging
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

import irsma

from irsma.analysis import optimal_single_position
from irsma.channel import ChannelRealization, NearFieldModel, draw_scatterers, rician_irs_user
from irsma.config import ConfigError, ScenarioConfig
from irsma.geometry import Apv
from irsma.optimize import (SolverStart, ao_solve, fpa_fixed, fpa_with_as,
                            fpa_without_as)

logger = logging.getLogger(__name__)

SCHEMES = ("MA", "FPA_AS", "FPA_NOAS")

SWEEP_NAMES = {
    "d_bi": "sweep_distance",
    "n_antennas": "sweep_antennas",
    "m_elements": "sweep_irs",
    "n_paths": "sweep_paths",
}

DEFAULT_VALUES = {
    "d_bi": [float(d) for d in range(2, 11)],
    "n_antennas": [2, 4, 6, 8],
    "m_elements": [side ** 2 for side in range(9, 20, 2)],
    "n_paths": [0, 2, 4, 8, 16],
}

# MA over FPA_NOAS gains reported for the IRS size sweep (dB), for comparison
PUBLISHED_GAIN_DB = {81: 2.01, 361: 1.58}
PUBLISHED_GAIN_TOLERANCE_DB = 0.75

CSV_HEADER = ["sweep", "variable_value", "scheme", "trials", "mean_snr_db", "stderr_db"]

AVERAGING = ("mean over trials of the per-trial SNR in dB; "
             "stderr_db = sample standard deviation (ddof=1) / sqrt(trials), 0 for one trial")


class InvalidScenarioError(ConfigError):
    pass


class OutputError(OSError):

    def __init__(self, path: str, error: OSError):
        super().__init__(f"Cannot write {path}: {error.strerror or error}")
        self.path = path


def cell_seed(seed: int, variable: str, value, trial: int) -> int:
    """Seed of one (value, trial) cell, stable across processes and runs.
    """
    digest = hashlib.sha256(f"{seed}:{variable}:{value!r}:{trial}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def apply_value(config: ScenarioConfig, variable: str, value) -> ScenarioConfig:
    """Get the scenario of one sweep point.
    """
    try:
        if variable == "d_bi":
            if not value > 0:
                raise ConfigError(f"BS-IRS distance must be positive, got {value}")
            return config.with_changes(**{"tx_region.center": (float(value), 0.0, 0.0)})
        if variable == "n_antennas":
            return config.with_changes(n_antennas=int(value))
        if variable == "m_elements":
            side = math.isqrt(int(value))
            if side * side != value:
                raise ConfigError(f"IRS size {value} is not a perfect square")
            return config.with_changes(**{"irs.m_y_count": side, "irs.m_z_count": side})
        if variable == "n_paths":
            return config.with_changes(**{"multipath.n_paths": int(value)})
    except (ConfigError, ValueError) as error:
        raise InvalidScenarioError(f"{variable} = {value!r}: {error}") from error
    raise InvalidScenarioError(f'Unknown sweep variable "{variable}"')


def draw_realization(config: ScenarioConfig, seed: int) -> ChannelRealization:
    """Draw the multipath BS-IRS channel and the IRS-user channel of one cell.
    """
    scatter_seq, user_seq = np.random.SeedSequence(seed).spawn(2)
    mp = config.multipath
    if not mp.redraw:
        scatter_seq = np.random.SeedSequence(mp.seed)
    geom = config.geometry()
    scatterers = draw_scatterers(mp.n_paths, mp.box_min, mp.box_max, config.scatter_power(),
                                 scatter_seq)
    h_iu = rician_irs_user(geom, config.user_position(), config.fading_params(), user_seq,
                           config.wavelength)
    return ChannelRealization(NearFieldModel(geom, config.wavelength, scatterers), h_iu)


@dataclass(frozen=True)
class Cell:
    study: str      # "compare" or "single_ma"
    value_index: int
    value: object
    trial: int
    seed: int


@dataclass(frozen=True)
class CellResult:
    value_index: int
    value: object
    trial: int
    seed: int
    checksum: str
    snr_db: Dict[str, float]


def solve_cell(config: ScenarioConfig, cell: Cell) -> CellResult:
    """Run every scheme of the study on the realization of one cell.
    """
    realization = draw_realization(config, cell.seed)
    checksum = realization.checksum()
    scenario = config.scenario()
    ao_settings = config.ao_settings()
    if cell.study == "single_ma":
        if scenario.n_antennas == 1:
            apv = Apv(optimal_single_position(scenario.region))
            fixed = fpa_fixed(scenario, realization, apv, config.bcd_settings(), "FPA_NEAREST")
        else:
            fixed = fpa_without_as(scenario, realization, config.bcd_settings())
        ma = ao_solve(scenario, realization, ao_settings,
                      extra_starts=[SolverStart(fixed.apv, fixed.phases, "fixed")])
        states = [ma, fixed]
    else:
        no_as = fpa_without_as(scenario, realization, config.bcd_settings())
        with_as = fpa_with_as(scenario, realization, ao_settings)
        ma = ao_solve(scenario, realization, ao_settings,
                      extra_starts=[SolverStart(with_as.apv, with_as.phases, "antenna selection")])
        states = [ma, with_as, no_as]
    if realization.checksum() != checksum:
        raise RuntimeError(f"channel realization of cell {cell} changed while solving")
    snr = {state.scheme: state.snr_db(scenario.budget) for state in states}
    logger.debug("cell %s = %r trial %d seed %d: %s", cell.value_index, cell.value,
                 cell.trial, cell.seed, snr)
    return CellResult(cell.value_index, cell.value, cell.trial, cell.seed, checksum, snr)


class SweepRunner:
    """Run cells as asyncio tasks, on a process pool if workers > 1.
    """

    def __init__(self, workers: int = 1, loop=None):
        if workers < 1:
            raise ValueError(f"number of workers must be at least 1, got {workers}")
        self.workers = workers
        self.has_own_loop = loop is None
        if self.has_own_loop:
            self.loop = asyncio.new_event_loop()
        else:
            self.loop = loop
        self.executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
        self.tasks = set()

    def submit(self, config: ScenarioConfig, cell: Cell) -> None:
        async def run():
            if self.executor is None:
                return solve_cell(config, cell)
            return await self.loop.run_in_executor(self.executor, solve_cell, config, cell)
        self.tasks.add(self.loop.create_task(run()))

    def run_tasks(self) -> List[CellResult]:
        """Run the asyncio loop until all the tasks have finished and get
        their results in (value, trial) order.
        """
        async def all_tasks():
            return await asyncio.gather(*self.tasks)
        try:
            results = self.loop.run_until_complete(all_tasks())
        finally:
            self.tasks = set()
        return sorted(results, key=lambda r: (r.value_index, r.trial))

    def close(self) -> None:
        if self.executor is not None:
            self.executor.shutdown(cancel_futures=True)
            self.executor = None
        if self.has_own_loop and not self.loop.is_closed():
            self.loop.close()

    def __enter__(self) -> "SweepRunner":
        return self

    def __exit__(self, type, value, traceback) -> None:
        self.close()


@dataclass(frozen=True)
class SweepRow:
    sweep: str
    variable_value: object
    scheme: str
    trials: int
    mean_snr_db: float
    stderr_db: float


@dataclass
class SweepResult:
    variable: str
    values: List[object]
    rows: List[SweepRow] = field(default_factory=list)
    cells: Dict[str, List[CellResult]] = field(default_factory=dict)

    @property
    def sweeps(self) -> List[str]:
        return list(self.cells)

    def row(self, value, scheme: str, sweep: Optional[str] = None) -> SweepRow:
        for r in self.rows:
            if r.variable_value == value and r.scheme == scheme and sweep in (None, r.sweep):
                return r
        raise KeyError(f"no row for {self.variable} = {value!r}, scheme {scheme}")

    def gain_db(self, value, scheme: str = "MA", baseline: str = "FPA_NOAS",
                sweep: Optional[str] = None) -> float:
        return (self.row(value, scheme, sweep).mean_snr_db
                - self.row(value, baseline, sweep).mean_snr_db)

    def merged(self, other: "SweepResult") -> "SweepResult":
        return SweepResult(self.variable, self.values, self.rows + other.rows,
                           {**self.cells, **other.cells})


def aggregate(sweep: str, variable: str, values: Sequence, schemes: Sequence[str],
              cells: List[CellResult]) -> SweepResult:
    rows = []
    for i, value in enumerate(values):
        cell_results = [c for c in cells if c.value_index == i]
        for scheme in schemes:
            snr = np.array([c.snr_db[scheme] for c in cell_results])
            n = snr.size
            stderr = float(np.std(snr, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
            rows.append(SweepRow(sweep, value, scheme, n, float(np.mean(snr)), stderr))
    return SweepResult(variable, list(values), rows, {sweep: cells})


def run_sweep(config: ScenarioConfig, variable: str, values: Optional[Sequence] = None,
              workers: int = 1, study: str = "compare",
              sweep_name: Optional[str] = None) -> SweepResult:
    """Average the SNR of every scheme over config.trials realizations at
    each value of a sweep variable (d_bi, n_antennas, m_elements or n_paths).
    """
    if variable not in SWEEP_NAMES:
        raise InvalidScenarioError(f'Unknown sweep variable "{variable}"')
    values = list(values) if values is not None else list(DEFAULT_VALUES[variable])
    if len(values) == 0:
        raise InvalidScenarioError(f"No values for sweep variable {variable}")
    configs = [apply_value(config, variable, v) for v in values]
    sweep = sweep_name or SWEEP_NAMES[variable]
    if study == "single_ma":
        schemes = ["MA", "FPA_NEAREST" if config.n_antennas == 1 else "FPA_NOAS"]
    else:
        schemes = list(SCHEMES)
    logger.info("%s: %d values of %s x %d trials, %d worker(s)", sweep, len(values), variable,
                config.trials, workers)
    with SweepRunner(workers) as runner:
        for i, (value, value_config) in enumerate(zip(values, configs)):
            for trial in range(config.trials):
                seed = cell_seed(config.seed, variable, value, trial)
                runner.submit(value_config, Cell(study, i, value, trial, seed))
        cells = runner.run_tasks()
    result = aggregate(sweep, variable, values, schemes, cells)
    logger.info("%s done", sweep)
    return result


def run_single_ma_study(config: ScenarioConfig, d_bi_values: Optional[Sequence[float]] = None,
                        workers: int = 1, antenna_counts: Sequence[int] = (1, 4),
                        irs_side: Optional[int] = 25) -> SweepResult:
    """MA versus fixed antennas over the BS-IRS distance with a LoS BS-IRS
    channel: one antenna against the antenna fixed at the point nearest the
    IRS, several antennas against the symmetric FPA array.
    """
    base = config.with_changes(**{"multipath.n_paths": 0})
    if irs_side is not None:
        base = base.with_changes(**{"irs.m_y_count": irs_side, "irs.m_z_count": irs_side})
    result = None
    for n in antenna_counts:
        try:
            study_config = base.with_changes(n_antennas=n)
        except ConfigError as error:
            raise InvalidScenarioError(f"n_antennas = {n}: {error}") from error
        r = run_sweep(study_config, "d_bi", d_bi_values, workers, study="single_ma",
                      sweep_name=f"single_ma_n{n}")
        result = r if result is None else result.merged(r)
    return result


def format_csv(result: SweepResult) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in result.rows:
        writer.writerow([r.sweep, f"{r.variable_value:.6g}", r.scheme, r.trials,
                         f"{r.mean_snr_db:.6g}", f"{r.stderr_db:.6g}"])
    return out.getvalue()


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as error:
        raise OutputError(path, error) from error


def emit_csv(result: SweepResult, path: str) -> None:
    """Write the result rows as CSV (UTF-8, LF line endings).
    """
    _write(path, format_csv(result))
    logger.info("results written to %s", path)


def published_comparison(result: SweepResult) -> List[dict]:
    """MA over FPA_NOAS gain at the values with a published counterpart.
    """
    if result.variable != "m_elements":
        return []
    table = []
    for value, published in PUBLISHED_GAIN_DB.items():
        if value in result.values:
            gain = result.gain_db(value)
            table.append({
                "m_elements": value,
                "gain_db": gain,
                "published_gain_db": published,
                "within_tolerance": abs(gain - published) <= PUBLISHED_GAIN_TOLERANCE_DB,
            })
    return table


def manifest(config: ScenarioConfig, result: SweepResult) -> dict:
    return {
        "versions": {
            "irsma": irsma.__version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "config": config.resolved(),
        "sweep": {
            "variable": result.variable,
            "values": result.values,
            "sweeps": result.sweeps,
            "trials": config.trials,
        },
        "averaging": AVERAGING,
        "scatterers": ("redrawn for every trial" if config.multipath.redraw
                       else f"one placement drawn from multipath.seed = {config.multipath.seed}"),
        "published_gain": {
            "tolerance_db": PUBLISHED_GAIN_TOLERANCE_DB,
            "informational": True,
            "comparison": published_comparison(result),
        },
        "cells": [
            {"sweep": sweep, "value": c.value, "trial": c.trial, "seed": c.seed,
             "checksum": c.checksum}
            for sweep, cells in result.cells.items() for c in cells
        ],
    }


def emit_manifest(config: ScenarioConfig, result: SweepResult, path: str) -> None:
    """Write the run manifest as JSON: resolved parameters, seeds, realization
    checksums and versions.
    """
    _write(path, json.dumps(manifest(config, result), indent=2, sort_keys=True) + "\n")
    logger.info("manifest written to %s", path)
