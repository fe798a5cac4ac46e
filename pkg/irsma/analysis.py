# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

"""
Closed-form results for a LoS BS-IRS link with aligned IRS phases

The approximate gain replaces each element distance D(t, m) by
sqrt(R(t)^2 + y_m^2 + z_m^2), with R(t) = ||t||; it is accurate when
y_t d / R(t)^2 and z_t d / R(t)^2 are small. run_checks evaluates the
resulting predictions numerically.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from irsma.beamforming import effective_gain_single
from irsma.channel import distances
from irsma.geometry import (IrsGeometry, TxRegion, Vec3, as_vec3, irs_element_positions,
                            lattice_offsets, project_onto_segment, sample_tx_region)

logger = logging.getLogger(__name__)


class OrderingError(ValueError):
    pass


def _magnitudes(geom: IrsGeometry, h_iu_magnitudes) -> np.ndarray:
    if h_iu_magnitudes is None:
        return np.ones(geom.element_count)
    mags = np.abs(np.asarray(h_iu_magnitudes, dtype=float)).reshape(-1)
    if mags.shape != (geom.element_count,):
        raise ValueError(f"{mags.shape[0]} magnitudes for {geom.element_count} IRS elements")
    return mags


def aperture_sum(t, geom: IrsGeometry, h_iu_magnitudes=None) -> float:
    """Sum of |h_IU,m| / sqrt(R(t)^2 + y_m^2 + z_m^2) over the IRS elements.
    """
    r = float(np.linalg.norm(as_vec3(t, "t")))
    y, z = lattice_offsets(geom)
    return float(np.sum(_magnitudes(geom, h_iu_magnitudes) / np.sqrt(r ** 2 + y ** 2 + z ** 2)))


def approx_gain(t, geom: IrsGeometry, h_iu_magnitudes, wavelength: float) -> float:
    """Approximate channel power gain of a single antenna at t with aligned
    IRS phases.
    """
    return (wavelength / (4 * np.pi)) ** 2 * aperture_sum(t, geom, h_iu_magnitudes) ** 2


def optimal_single_position(region: TxRegion) -> Vec3:
    """Position of a single antenna maximizing the aligned LoS gain: the
    segment point closest to the IRS center, whatever h_IU is.
    """
    return project_onto_segment(region, np.zeros(3))


def direct_link_optimal_position(region: TxRegion, user_pos) -> Vec3:
    """Position of a single antenna maximizing the direct BS-user LoS gain:
    the segment point closest to the user.
    """
    return project_onto_segment(region, user_pos)


@dataclass(frozen=True)
class FluctuationReport:
    g_t1: float
    g_t2: float
    difference: float
    h_t1: float
    h_t2: float


def gain_fluctuation(t1, t2, geom: IrsGeometry, h_iu_magnitudes,
                     wavelength: float) -> FluctuationReport:
    """Difference of the approximate gains at t1 and t2, with t1 closer to
    the IRS center than t2.
    """
    r1 = float(np.linalg.norm(as_vec3(t1, "t1")))
    r2 = float(np.linalg.norm(as_vec3(t2, "t2")))
    if not r1 < r2:
        raise OrderingError(f"R(t1) = {r1:.9g} m must be smaller than R(t2) = {r2:.9g} m")
    h1 = aperture_sum(t1, geom, h_iu_magnitudes)
    h2 = aperture_sum(t2, geom, h_iu_magnitudes)
    scale = (wavelength / (4 * np.pi)) ** 2
    return FluctuationReport(g_t1=scale * h1 ** 2, g_t2=scale * h2 ** 2,
                             difference=scale * (h1 + h2) * (h1 - h2), h_t1=h1, h_t2=h2)


def broadside_region(region: TxRegion, d_bi: float) -> TxRegion:
    """Region centered on the IRS boresight at distance d_bi and parallel to
    the IRS, so that R(t)^2 = d_bi^2 + d(t)^2.
    """
    return region.with_changes(center_q_b=np.array([d_bi, 0.0, 0.0]),
                               axis=np.array([0.0, 1.0, 0.0]))


def gain_profile(region: TxRegion, geom: IrsGeometry, h_iu_magnitudes,
                 wavelength: float) -> np.ndarray:
    """Exact aligned single-antenna gain at every sampling point of region.
    """
    mags = _magnitudes(geom, h_iu_magnitudes)
    dist = distances(irs_element_positions(geom), sample_tx_region(region))
    return (wavelength / (4 * np.pi)) ** 2 * (mags @ (1 / dist)) ** 2


def farfield_uniformity_check(geom: IrsGeometry, region: TxRegion, d_bi_values: Sequence[float],
                              wavelength: float,
                              h_iu_magnitudes=None) -> List[Tuple[float, float]]:
    """Relative spread (max - min) / min of the gain profile over the region
    moved to broadside distance d_bi, for each d_bi.
    """
    table = []
    for d_bi in d_bi_values:
        g = gain_profile(broadside_region(region, d_bi), geom, h_iu_magnitudes, wavelength)
        table.append((float(d_bi), float((g.max() - g.min()) / g.min())))
    return table


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __str__(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _strictly_monotonic(values: Sequence[float], increasing: bool) -> bool:
    d = np.diff(values)
    return bool(np.all(d > 0) if increasing else np.all(d < 0))


def _relative_error(t, geom, wavelength) -> float:
    mags = np.ones(geom.element_count)
    exact = effective_gain_single(t, geom, mags, wavelength)
    return abs(approx_gain(t, geom, mags, wavelength) - exact) / exact


def check_approx_accuracy(wavelength: float) -> CheckResult:
    geom = IrsGeometry(25, 25, wavelength / 2)
    err = _relative_error([5.0, 5.0, 0.0], geom, wavelength)
    return CheckResult("approx_gain_accuracy", err < 0.01,
                       f"relative error {err:.3e} at t=[5,5,0], M=25x25")


def check_approx_scaling(wavelength: float,
                         radii: Sequence[float] = (2.0, 5.0, 10.0, 20.0)) -> CheckResult:
    geom = IrsGeometry(25, 25, wavelength / 2)
    diagonal = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
    errors = [_relative_error(r * diagonal, geom, wavelength) for r in radii]
    return CheckResult("approx_gain_error_vs_distance",
                       _strictly_monotonic(errors, increasing=False),
                       ", ".join(f"R={r:g}: {e:.3e}" for r, e in zip(radii, errors)))


def check_fluctuation_vs_size(wavelength: float,
                              m_y_values: Sequence[int] = (8, 16, 32)) -> CheckResult:
    # IRS-user magnitudes are extended with ones as the IRS grows
    t1, t2 = [4.7, 5.0, 0.0], [5.3, 5.0, 0.0]
    diffs = [gain_fluctuation(t1, t2, IrsGeometry(m_y, 8, wavelength / 2), None,
                              wavelength).difference
             for m_y in m_y_values]
    return CheckResult("fluctuation_vs_m_y", _strictly_monotonic(diffs, increasing=True),
                       ", ".join(f"M_y={m}: {d:.4e}" for m, d in zip(m_y_values, diffs)))


def check_fluctuation_vs_distance(wavelength: float, region: TxRegion,
                                  d_bi_values: Sequence[float] = (2.0, 5.0, 10.0, 20.0)) -> CheckResult:
    geom = IrsGeometry(15, 15, wavelength / 2)
    diffs = []
    for d_bi in d_bi_values:
        broadside = broadside_region(region, d_bi)
        t1 = broadside.center_q_b
        t2 = broadside.center_q_b + broadside.axis * (region.length_a / 2)
        diffs.append(gain_fluctuation(t1, t2, geom, None, wavelength).difference)
    return CheckResult("fluctuation_vs_d_bi", _strictly_monotonic(diffs, increasing=False),
                       ", ".join(f"d_BI={d:g}: {v:.4e}" for d, v in zip(d_bi_values, diffs)))


def check_farfield_uniformity(wavelength: float, region: TxRegion,
                              d_bi_values: Sequence[float] = (2.0, 5.0, 10.0, 50.0, 1000.0)) -> CheckResult:
    geom = IrsGeometry(25, 25, wavelength / 2)
    table = farfield_uniformity_check(geom, region, d_bi_values, wavelength)
    spreads = [s for _, s in table]
    passed = (_strictly_monotonic(spreads, increasing=False) and spreads[-1] < 1e-3
              and spreads[0] > 10 * spreads[-1])
    return CheckResult("farfield_uniformity", passed,
                       ", ".join(f"d_BI={d:g}: {s:.3e}" for d, s in table))


def check_position_independence(wavelength: float, region: TxRegion,
                                profiles: int = 20, seed: int = 0) -> CheckResult:
    geom = IrsGeometry(15, 15, wavelength / 2)
    grid = sample_tx_region(region)
    expected = int(np.argmin(np.linalg.norm(grid - optimal_single_position(region), axis=1)))
    rng = np.random.default_rng(seed)
    misses = 0
    for _ in range(profiles):
        m = geom.element_count
        mags = np.abs(rng.standard_normal(m) + 1j * rng.standard_normal(m))
        if int(np.argmax(gain_profile(region, geom, mags, wavelength))) != expected:
            misses += 1
    return CheckResult("single_position_independence", misses == 0,
                       f"{profiles - misses}/{profiles} magnitude profiles peak at grid point {expected}")


def run_checks(wavelength: float = 0.06, region: Optional[TxRegion] = None) -> List[CheckResult]:
    """Evaluate every analytical prediction numerically.
    """
    if region is None:
        region = TxRegion([5.0, 5.0, 0.0], 0.6, wavelength / 2, 0.01)
    results = [
        check_approx_accuracy(wavelength),
        check_approx_scaling(wavelength),
        check_fluctuation_vs_size(wavelength),
        check_fluctuation_vs_distance(wavelength, region),
        check_farfield_uniformity(wavelength, region),
        check_position_independence(wavelength, region),
    ]
    for r in results:
        logger.info("%s", r)
    return results
