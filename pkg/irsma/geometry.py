# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

"""
Spatial structure of the IRS-assisted link: IRS lattice, movable-antenna
region, its sampling grid and antenna position vectors (APV).

All coordinates are in meters in a global frame where the IRS lies in the
yOz-plane, centered at the origin.
"""

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

# Vec3 values are numpy float arrays of shape (3,)
Vec3 = np.ndarray

# absolute tolerance (m) when checking points against the region segment
POSITION_TOL = 1e-9

# distances below this threshold (m) are considered degenerate
DEGENERATE_DISTANCE = 1e-6


class GeometryError(ValueError):
    pass


class DegenerateDistanceError(GeometryError):
    pass


class InfeasibleArrayError(GeometryError):
    pass


def as_vec3(v, name: str = "vector") -> Vec3:
    """Convert a 3-sequence to a finite float vector.
    """
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise GeometryError(f"{name} must have 3 components, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise GeometryError(f"{name} has non-finite components: {a.tolist()}")
    return a


@dataclass(frozen=True)
class IrsGeometry:
    """Uniform rectangular lattice of reflecting elements in the plane x = 0.
    """

    m_y_count: int
    m_z_count: int
    spacing_d: float

    def __post_init__(self):
        for name in ("m_y_count", "m_z_count"):
            count = getattr(self, name)
            if int(count) != count or count < 1:
                raise GeometryError(f"{name} must be a positive integer, got {count}")
        if not (self.spacing_d > 0 and math.isfinite(self.spacing_d)):
            raise GeometryError(f"spacing_d must be positive, got {self.spacing_d}")

    @property
    def element_count(self) -> int:
        return int(self.m_y_count) * int(self.m_z_count)

    def __str__(self):
        return f"IRS {self.m_y_count}x{self.m_z_count} d={self.spacing_d:g} m"


def lattice_offsets(geom: IrsGeometry) -> Tuple[np.ndarray, np.ndarray]:
    """Get the y and z offsets (m) of every element, in element order.

    Offsets are (k - (count-1)/2)*d so the lattice is centered on the origin;
    the y index runs fastest.
    """
    k_y = np.arange(geom.m_y_count) - (geom.m_y_count - 1) / 2
    k_z = np.arange(geom.m_z_count) - (geom.m_z_count - 1) / 2
    zz, yy = np.meshgrid(k_z * geom.spacing_d, k_y * geom.spacing_d, indexing="ij")
    return yy.ravel(), zz.ravel()


def irs_element_positions(geom: IrsGeometry) -> np.ndarray:
    """Get the coordinates of all M elements as an (M, 3) array.
    """
    y, z = lattice_offsets(geom)
    return np.column_stack((np.zeros_like(y), y, z))


@dataclass(frozen=True, eq=False)
class TxRegion:
    """Line segment of length A centered on q_B along which the movable
    antennas can be placed, with its minimum antenna spacing and sampling
    pitch.
    """

    center_q_b: Vec3
    length_a: float
    min_spacing_d_min: float
    sample_spacing_delta_s: float
    axis: Vec3 = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))

    def __post_init__(self):
        object.__setattr__(self, "center_q_b", as_vec3(self.center_q_b, "center_q_b"))
        axis = as_vec3(self.axis, "axis")
        norm = np.linalg.norm(axis)
        if norm < 1e-12:
            raise GeometryError("axis must be nonzero")
        object.__setattr__(self, "axis", axis / norm)
        for name in ("length_a", "min_spacing_d_min", "sample_spacing_delta_s"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise GeometryError(f"{name} must be positive, got {value}")

    @property
    def start(self) -> Vec3:
        return self.center_q_b - self.axis * (self.length_a / 2)

    @property
    def end(self) -> Vec3:
        return self.center_q_b + self.axis * (self.length_a / 2)

    @property
    def sample_count(self) -> int:
        # tolerance keeps e.g. 0.6/0.01 from flooring to 59
        return int(math.floor(self.length_a / self.sample_spacing_delta_s + 1e-9)) + 1

    def with_changes(self, **changes) -> "TxRegion":
        """Copy of the region with some fields replaced.
        """
        values = {
            "center_q_b": self.center_q_b,
            "length_a": self.length_a,
            "min_spacing_d_min": self.min_spacing_d_min,
            "sample_spacing_delta_s": self.sample_spacing_delta_s,
            "axis": self.axis,
        }
        values.update(changes)
        return TxRegion(**values)

    def __str__(self):
        return (f"TxRegion q_B={self.center_q_b.tolist()} axis={self.axis.tolist()} "
                f"A={self.length_a:g} D_min={self.min_spacing_d_min:g} "
                f"delta_s={self.sample_spacing_delta_s:g}")


@dataclass(frozen=True, eq=False)
class Apv:
    """Antenna position vector: N antenna coordinates as an (N, 3) array.
    """

    positions: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.positions, dtype=float)
        if p.ndim == 1 and p.shape == (3,):
            p = p.reshape(1, 3)
        if p.ndim != 2 or p.shape[1] != 3 or p.shape[0] < 1:
            raise GeometryError(f"APV must be an (N, 3) array, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise GeometryError("APV has non-finite coordinates")
        object.__setattr__(self, "positions", p)

    @property
    def count(self) -> int:
        return self.positions.shape[0]

    def __len__(self):
        return self.count


def sample_tx_region(region: TxRegion) -> np.ndarray:
    """Get the L_samp sampling points of the region as an (L_samp, 3) array,
    at arc length k*delta_s from the segment start.
    """
    s = np.arange(region.sample_count) * region.sample_spacing_delta_s
    s = np.minimum(s, region.length_a)
    return region.start + np.outer(s, region.axis)


@dataclass(frozen=True)
class ApvViolation:
    """One violated APV constraint; indices are 0-based antenna indices.
    """

    kind: str   # "region" or "spacing"
    indices: Tuple[int, ...]
    detail: str = ""

    def __str__(self):
        return f"{self.kind} violation {self.indices}: {self.detail}"


@dataclass(frozen=True)
class ApvVerdict:
    violations: List[ApvViolation]

    @property
    def ok(self) -> bool:
        return len(self.violations) == 0

    def __bool__(self):
        return self.ok


def segment_coordinate(region: TxRegion, point) -> Tuple[float, float]:
    """Get the arc length of the projection of point on the region line,
    measured from the segment start, and the distance from the line.
    """
    rel = as_vec3(point, "point") - region.start
    s = float(rel @ region.axis)
    off = float(np.linalg.norm(rel - s * region.axis))
    return s, off


def validate_apv(apv: Apv, region: TxRegion) -> ApvVerdict:
    """Check that every antenna lies on the segment and that all pairs are
    at least D_min apart; report every violation.
    """
    violations = []
    for n, p in enumerate(apv.positions):
        s, off = segment_coordinate(region, p)
        if off > POSITION_TOL or s < -POSITION_TOL or s > region.length_a + POSITION_TOL:
            violations.append(ApvViolation(
                "region", (n,),
                f"arc length {s:.6g} m, off-axis {off:.3g} m, segment length {region.length_a:g} m"))
    for i in range(apv.count):
        for j in range(i + 1, apv.count):
            dist = float(np.linalg.norm(apv.positions[i] - apv.positions[j]))
            if dist < region.min_spacing_d_min - POSITION_TOL:
                violations.append(ApvViolation(
                    "spacing", (i, j),
                    f"distance {dist:.6g} m < D_min {region.min_spacing_d_min:g} m"))
    return ApvVerdict(violations)


def point_on_segment(region: TxRegion, s: float) -> Vec3:
    """Get the point at arc length s from the segment start.
    """
    return region.start + region.axis * s


def project_onto_segment(region: TxRegion, point) -> Vec3:
    """Get the point of the segment closest to point.
    """
    s, _ = segment_coordinate(region, point)
    return point_on_segment(region, min(max(s, 0.0), region.length_a))


def symmetric_apv(region: TxRegion, n: int) -> Apv:
    """Place n antennas symmetrically about q_B with pitch D_min.
    """
    if n < 1:
        raise InfeasibleArrayError(f"number of antennas must be at least 1, got {n}")
    if n * region.min_spacing_d_min > region.length_a + POSITION_TOL:
        raise InfeasibleArrayError(
            f"{n} antennas at pitch {region.min_spacing_d_min:g} m need "
            f"{n * region.min_spacing_d_min:g} m > A = {region.length_a:g} m")
    k = np.arange(n) - (n - 1) / 2
    return Apv(region.center_q_b + np.outer(k * region.min_spacing_d_min, region.axis))


def packed_indices(region: TxRegion, n: int, first: int) -> np.ndarray:
    """Get the indices of n sampling points at the smallest feasible index
    gap, the first one as close as possible to index first.
    """
    gap = min_index_gap(region)
    last_first = region.sample_count - 1 - (n - 1) * gap
    if n < 1 or last_first < 0:
        raise InfeasibleArrayError(
            f"{n} antennas at index gap {gap} do not fit on "
            f"{region.sample_count} sampling points")
    first = min(max(int(first), 0), last_first)
    return first + gap * np.arange(n)


def apv_from_indices(region: TxRegion, indices: Sequence[int]) -> Apv:
    """Get the APV made of the sampling points with the given indices.
    """
    points = sample_tx_region(region)
    return Apv(points[np.asarray(indices, dtype=int)])


def min_index_gap(region: TxRegion) -> int:
    """Get the smallest index gap between sampling points which keeps the
    physical spacing at least D_min.
    """
    return max(1, int(math.ceil(region.min_spacing_d_min / region.sample_spacing_delta_s - 1e-9)))
