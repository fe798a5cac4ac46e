# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

"""
Solvers for the joint IRS phase / antenna position / beamforming problem

- bcd_phase_opt: element-wise block coordinate descent on the IRS phases
  for a fixed APV.
- dp_position_select: optimal selection of N sampling points with a
  minimum index gap (dynamic programming over suffix maxima).
- ao_solve: alternating optimization of phases and positions, with MRT
  substituted so that the objective is ||h_IU^H Psi H_BI(T)||^2.
- fpa_with_as, fpa_without_as: fixed-position antenna benchmarks.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from irsma.beamforming import (DimensionMismatchError, LinkBudget, aligned_phases,
                               mrt, objective, snr_db, wrap_phases)
from irsma.channel import ChannelRealization
from irsma.geometry import (Apv, InfeasibleArrayError, IrsGeometry, TxRegion,
                            apv_from_indices, min_index_gap, packed_indices,
                            project_onto_segment, sample_tx_region, segment_coordinate,
                            symmetric_apv)

logger = logging.getLogger(__name__)

# largest number of combinations brute_force_select enumerates
BRUTE_FORCE_LIMIT = 10 ** 7


class InfeasibleSelectionError(ValueError):

    def __init__(self, message: str, max_feasible: int):
        super().__init__(message)
        self.max_feasible = max_feasible


class SizeLimitError(ValueError):
    pass


@dataclass(frozen=True)
class BcdSettings:
    max_sweeps: int = 20
    rel_tol: float = 1e-6

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be at least 1, got {self.max_sweeps}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")


@dataclass(frozen=True)
class AoSettings:
    max_iters: int = 30
    rel_tol: float = 1e-5
    bcd: BcdSettings = field(default_factory=BcdSettings)

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")


@dataclass(frozen=True, eq=False)
class Scenario:
    """Physical setup shared by all solvers.
    """

    geom: IrsGeometry
    region: TxRegion
    n_antennas: int
    wavelength: float
    budget: LinkBudget = field(default_factory=lambda: LinkBudget(1.0))

    def __post_init__(self):
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 1:
            raise InfeasibleArrayError(
                f"number of antennas must be a positive integer, got {self.n_antennas}")


@dataclass(frozen=True, eq=False)
class SelectionProblem:
    """Pick n_select of the weights, pairwise index gap at least min_gap,
    maximizing their sum.
    """

    weights: np.ndarray
    n_select: int
    min_gap: int

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size == 0:
            raise ValueError("no weights")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        if self.n_select < 1:
            raise ValueError(f"n_select must be at least 1, got {self.n_select}")
        if self.min_gap < 1:
            raise ValueError(f"min_gap must be at least 1, got {self.min_gap}")
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def max_feasible(self) -> int:
        return (self.size - 1) // self.min_gap + 1

    @property
    def feasible(self) -> bool:
        return (self.n_select - 1) * self.min_gap + 1 <= self.size

    def check_feasible(self) -> None:
        if not self.feasible:
            raise InfeasibleSelectionError(
                f"cannot select {self.n_select} of {self.size} points with gap "
                f"{self.min_gap}; at most {self.max_feasible} fit", self.max_feasible)


@dataclass(frozen=True, eq=False)
class SolverStart:
    """Initial APV with initial phases or None for aligned phases, and its grid
    indices when the APV is a selection of sampling points.
    """

    apv: Apv
    phases: Optional[np.ndarray] = None
    label: str = ""
    indices: Optional[np.ndarray] = None


@dataclass(eq=False)
class SolverState:
    """Result of one solver: phases, APV, MRT beamformer and the trace of
    the post-MRT objective (without P/sigma^2).
    """

    phases: np.ndarray
    apv: Apv
    beam: np.ndarray
    objective_trace: List[float]
    scheme: str = "MA"
    grid_indices: Optional[List[int]] = None
    iterations: int = 0
    converged: bool = True
    start: str = ""

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]

    def snr(self, budget: LinkBudget) -> float:
        return budget.transmit_snr * self.objective

    def snr_db(self, budget: LinkBudget) -> float:
        return snr_db(self.snr(budget))


def bcd_phase_opt(g1, init, settings: BcdSettings = BcdSettings()) -> Tuple[np.ndarray, List[float]]:
    """Maximize ||sum_m g1[m] exp(j phi_m)||^2 one phase at a time.

    Each update sets phi_m to the exact maximizer with the other phases
    fixed and is kept only if the objective does not decrease. Returns the
    phases and the objective after every single-element update.
    """
    g1 = np.asarray(g1, dtype=complex)
    if g1.ndim == 1:
        g1 = g1[:, None]
    phases = wrap_phases(init).copy()
    if phases.shape != (g1.shape[0],):
        raise DimensionMismatchError(
            f"{phases.shape[0]} initial phases for {g1.shape[0]} rows of g1")
    e = np.exp(1j * phases)
    s = e @ g1
    value = float(np.vdot(s, s).real)
    if g1.shape[0] == 1:
        # a single term has the same norm for any phase
        return phases, [value]
    trace = []
    for sweep in range(settings.max_sweeps):
        sweep_start = value
        for m in range(g1.shape[0]):
            gm = g1[m]
            alpha = s - gm * e[m]
            c = np.vdot(alpha, gm)
            if c != 0:
                phi = (-np.angle(c)) % (2 * np.pi)
                e_new = np.exp(1j * phi)
                s_new = alpha + gm * e_new
                value_new = float(np.vdot(s_new, s_new).real)
                if value_new >= value:
                    phases[m] = phi if phi < 2 * np.pi else 0.0
                    e[m] = e_new
                    s = s_new
                    value = value_new
            trace.append(value)
        if value - sweep_start <= settings.rel_tol * sweep_start:
            logger.debug("BCD converged after %d sweeps, objective %.6g", sweep + 1, value)
            break
    else:
        logger.debug("BCD stopped at %d sweeps, objective %.6g", settings.max_sweeps, value)
    return phases, trace


def dp_position_select(p: SelectionProblem) -> Tuple[List[int], float]:
    """Select p.n_select indices with pairwise gap >= p.min_gap maximizing the
    sum of their weights; ties go to the lexicographically smallest tuple.

    best[k][i] is the best sum of k weights taken from indices >= i; it is
    the suffix maximum of w[j] + best[k-1][j+gap].
    """
    p.check_feasible()
    w = p.weights
    size, gap = p.size, p.min_gap
    best_prev = np.zeros(size + gap)
    candidates = []
    bests = []
    for k in range(p.n_select):
        cand = w + best_prev[gap:gap + size]
        best = np.full(size + gap, -np.inf)
        best[:size] = np.maximum.accumulate(cand[::-1])[::-1]
        candidates.append(cand)
        bests.append(best)
        best_prev = best
    indices = []
    i = 0
    for k in reversed(range(p.n_select)):
        cand = candidates[k]
        j = i + int(np.flatnonzero(cand[i:] == bests[k][i])[0])
        indices.append(j)
        i = j + gap
    return indices, float(bests[-1][0])


def brute_force_select(p: SelectionProblem) -> Tuple[List[int], float]:
    """Same result as dp_position_select by exhaustive enumeration.
    """
    p.check_feasible()
    count = math.comb(p.size, p.n_select)
    if count > BRUTE_FORCE_LIMIT:
        raise SizeLimitError(
            f"C({p.size}, {p.n_select}) = {count} selections exceed the limit {BRUTE_FORCE_LIMIT}")
    w = p.weights.tolist()
    best_indices, best_total = None, -math.inf
    for combo in itertools.combinations(range(p.size), p.n_select):
        if any(b - a < p.min_gap for a, b in zip(combo, combo[1:])):
            continue
        # same summation order as the DP recursion
        total = 0.0
        for j in reversed(combo):
            total = w[j] + total
        if total > best_total:
            best_indices, best_total = list(combo), total
    return best_indices, best_total


def default_starts(scenario: Scenario) -> List[SolverStart]:
    """Starting selections of the AO loop, all on the sampling grid: the
    packed array closest to the segment center, the packed array from the
    point nearest the IRS and the antennas spread over the whole segment.
    """
    region = scenario.region
    n = scenario.n_antennas
    gap = min_index_gap(region)
    last = region.sample_count - 1
    anchor, _ = segment_coordinate(region, project_onto_segment(region, np.zeros(3)))
    candidates = [
        ("symmetric", packed_indices(region, n, (last - (n - 1) * gap) // 2)),
        ("nearest", packed_indices(region, n, round(anchor / region.sample_spacing_delta_s))),
    ]
    if n > 1:
        candidates.append(("spread", np.arange(n) * last // (n - 1)))
    starts = []
    for label, indices in candidates:
        if any(np.array_equal(indices, s.indices) for s in starts):
            continue
        starts.append(SolverStart(apv_from_indices(region, indices), label=label,
                                  indices=indices))
    return starts


def strongest_start(scenario: Scenario, realization: ChannelRealization,
                    h_grid: np.ndarray) -> SolverStart:
    """Start with the phases aligned to the sampling point of largest
    single-antenna gain and the selection those phases favor.
    """
    h_iu = realization.h_iu
    single = np.abs(h_iu) @ np.abs(h_grid)
    phases = aligned_phases(h_grid[:, int(np.argmax(single))], h_iu)
    weights = np.abs((h_iu.conj() * np.exp(1j * phases)) @ h_grid) ** 2
    indices, _ = dp_position_select(
        SelectionProblem(weights, scenario.n_antennas, min_index_gap(scenario.region)))
    indices = np.asarray(indices)
    return SolverStart(apv_from_indices(scenario.region, indices), phases,
                       "strongest", indices)


def _initial_phases(realization: ChannelRealization, apv: Apv) -> np.ndarray:
    centroid = apv.positions.mean(axis=0)
    return aligned_phases(realization.model.los_column(centroid), realization.h_iu)


def _ao_run(scenario: Scenario, realization: ChannelRealization, settings: AoSettings,
            grid: np.ndarray, h_grid: np.ndarray, gap: int, start: SolverStart) -> SolverState:
    h_iu = realization.h_iu
    apv = start.apv
    indices = None if start.indices is None else [int(i) for i in start.indices]
    h_bi = realization.h_bi(apv)
    phases = (wrap_phases(start.phases) if start.phases is not None
              else _initial_phases(realization, apv))
    value = objective(h_iu, phases, h_bi)
    trace = [value]
    converged = False
    iteration = 0
    for iteration in range(1, settings.max_iters + 1):
        previous = value
        phases, _ = bcd_phase_opt(h_iu.conj()[:, None] * h_bi, phases, settings.bcd)
        value = objective(h_iu, phases, h_bi)
        trace.append(value)

        g2 = h_iu.conj() * np.exp(1j * phases)
        weights = np.abs(g2 @ h_grid) ** 2
        selected, total = dp_position_select(
            SelectionProblem(weights, scenario.n_antennas, gap))
        if total >= value:
            indices = selected
            apv = Apv(grid[selected])
            h_bi = h_grid[:, selected]
            value = total
        trace.append(value)
        logger.debug("AO %s iteration %d: objective %.9g", start.label, iteration, value)
        if value - previous <= settings.rel_tol * previous:
            converged = True
            break
    if not converged:
        logger.warning("AO (%s start) reached %d iterations without converging",
                       start.label, settings.max_iters)
    return SolverState(phases=phases, apv=apv, beam=mrt(h_iu, phases, h_bi),
                       objective_trace=trace, grid_indices=indices,
                       iterations=iteration, converged=converged, start=start.label)


def ao_solve(scenario: Scenario, realization: ChannelRealization,
             settings: AoSettings = AoSettings(),
             starts: Optional[Sequence[SolverStart]] = None,
             extra_starts: Sequence[SolverStart] = ()) -> SolverState:
    """Alternate BCD phase optimization and DP position selection from each
    start and keep the best final objective (earliest start on ties).
    """
    region = scenario.region
    grid = sample_tx_region(region)
    h_grid = realization.model.bs_irs(grid)
    gap = min_index_gap(region)
    SelectionProblem(np.zeros(grid.shape[0]), scenario.n_antennas, gap).check_feasible()
    if starts is None:
        starts = default_starts(scenario) + [strongest_start(scenario, realization, h_grid)]
    best = None
    for start in list(starts) + list(extra_starts):
        state = _ao_run(scenario, realization, settings, grid, h_grid, gap, start)
        if best is None or state.objective > best.objective:
            best = state
    return best


def fpa_with_as(scenario: Scenario, realization: ChannelRealization,
                settings: AoSettings = AoSettings(),
                starts: Optional[Sequence[SolverStart]] = None) -> SolverState:
    """Antenna selection among FPAs spaced D_min apart: AO on the grid with
    delta_s = D_min, started only from selections of that grid.
    """
    region = scenario.region
    coarse = replace(scenario, region=region.with_changes(
        sample_spacing_delta_s=region.min_spacing_d_min))
    if starts is not None and any(s.indices is None for s in starts):
        raise ValueError("antenna selection starts must be selections of the FPA grid")
    state = ao_solve(coarse, realization, settings, starts)
    state.scheme = "FPA_AS"
    return state


def fpa_fixed(scenario: Scenario, realization: ChannelRealization, apv: Apv,
              settings: BcdSettings = BcdSettings(), scheme: str = "FPA") -> SolverState:
    """Optimize only the IRS phases (and MRT) for antennas fixed at apv.
    """
    h_iu = realization.h_iu
    h_bi = realization.h_bi(apv)
    phases = _initial_phases(realization, apv)
    trace = [objective(h_iu, phases, h_bi)]
    phases, _ = bcd_phase_opt(h_iu.conj()[:, None] * h_bi, phases, settings)
    trace.append(objective(h_iu, phases, h_bi))
    return SolverState(phases=phases, apv=apv, beam=mrt(h_iu, phases, h_bi),
                       objective_trace=trace, scheme=scheme, iterations=1)


def fpa_without_as(scenario: Scenario, realization: ChannelRealization,
                   settings: BcdSettings = BcdSettings()) -> SolverState:
    """N FPAs placed symmetrically about q_B with pitch D_min.
    """
    apv = symmetric_apv(scenario.region, scenario.n_antennas)
    return fpa_fixed(scenario, realization, apv, settings, scheme="FPA_NOAS")
