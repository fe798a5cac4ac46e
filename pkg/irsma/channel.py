# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

"""
Channel synthesis for the BS-IRS and IRS-user links

Near-field LoS and multipath BS-IRS channels, the rank-one far-field
BS-IRS channel, the Rician IRS-user channel and the direct BS-user LoS
channel. Every length-M vector and every row of an M x N matrix follows the
element order of geometry.irs_element_positions.
"""

import hashlib
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from irsma.geometry import (Apv, DEGENERATE_DISTANCE, DegenerateDistanceError,
                            GeometryError, IrsGeometry, Vec3, as_vec3,
                            irs_element_positions)

SPEED_OF_LIGHT = 3e8  # m/s

Seed = Union[None, int, np.random.SeedSequence, np.random.Generator]


def wavelength(frequency_hz: float) -> float:
    """Get the wavelength (m) at a carrier frequency (Hz).
    """
    if not frequency_hz > 0:
        raise ValueError(f"frequency must be positive, got {frequency_hz}")
    return SPEED_OF_LIGHT / frequency_hz


def distances(points: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Get the (P, Q) matrix of distances between P points and Q targets,
    rejecting degenerate ones.
    """
    points = np.atleast_2d(points)
    targets = np.atleast_2d(targets)
    dist = np.linalg.norm(points[:, None, :] - targets[None, :, :], axis=2)
    if dist.size > 0 and dist.min() < DEGENERATE_DISTANCE:
        p, q = np.unravel_index(np.argmin(dist), dist.shape)
        raise DegenerateDistanceError(
            f"distance {dist[p, q]:.3g} m between {points[p].tolist()} and "
            f"{targets[q].tolist()} is below {DEGENERATE_DISTANCE:g} m")
    return dist


def _free_space(dist: np.ndarray, wavelength: float) -> np.ndarray:
    return wavelength / (4 * np.pi * dist) * np.exp(1j * 2 * np.pi / wavelength * dist)


def nf_los_vector(t, geom: IrsGeometry, wavelength: float) -> np.ndarray:
    """Near-field LoS channel (M,) from one antenna at t to every element.
    """
    t = as_vec3(t, "t")
    dist = distances(irs_element_positions(geom), t)[:, 0]
    return _free_space(dist, wavelength)


def nf_los_matrix(apv: Apv, geom: IrsGeometry, wavelength: float) -> np.ndarray:
    """Near-field LoS BS-IRS channel (M, N); column n is nf_los_vector(t_n).
    """
    return _free_space(distances(irs_element_positions(geom), apv.positions), wavelength)


def nf_array_response_irs(s, geom: IrsGeometry, wavelength: float) -> np.ndarray:
    """Unit-modulus near-field response (M,) of the IRS to a point s.
    """
    s = as_vec3(s, "s")
    dist = distances(irs_element_positions(geom), s)[:, 0]
    return np.exp(1j * 2 * np.pi / wavelength * dist)


def nf_array_response_tx(apv: Apv, s, wavelength: float) -> np.ndarray:
    """Unit-modulus near-field response (N,) of the antennas to a point s.
    """
    s = as_vec3(s, "s")
    dist = distances(apv.positions, s)[:, 0]
    return np.exp(1j * 2 * np.pi / wavelength * dist)


@dataclass(frozen=True, eq=False)
class ScatterSet:
    """L scatterers of the BS-IRS link: positions (L, 3) and complex gains (L,).
    """

    positions: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    gains: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        gains = np.asarray(self.gains, dtype=complex).reshape(-1)
        if positions.shape[0] != gains.shape[0]:
            raise GeometryError(
                f"{positions.shape[0]} scatterer positions but {gains.shape[0]} gains")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "gains", gains)

    def __len__(self):
        return self.gains.shape[0]


def draw_scatterers(count: int, box_min, box_max, total_power: float,
                    seed: Seed = None) -> ScatterSet:
    """Draw count scatterers uniformly in an axis-aligned box with i.i.d.
    circularly-symmetric complex Gaussian gains of power total_power/count.
    """
    if count < 0:
        raise ValueError(f"number of scatterers must be nonnegative, got {count}")
    if count == 0:
        return ScatterSet()
    box_min = as_vec3(box_min, "box_min")
    box_max = as_vec3(box_max, "box_max")
    if np.any(box_max < box_min):
        raise GeometryError(f"empty scatter box {box_min.tolist()}..{box_max.tolist()}")
    rng = np.random.default_rng(seed)
    positions = box_min + rng.random((count, 3)) * (box_max - box_min)
    sigma = np.sqrt(total_power / count / 2)
    gains = sigma * (rng.standard_normal(count) + 1j * rng.standard_normal(count))
    return ScatterSet(positions, gains)


def multipath_channel(apv: Apv, geom: IrsGeometry, scatterers: ScatterSet,
                      wavelength: float) -> np.ndarray:
    """Near-field multipath BS-IRS channel (M, N): LoS plus one rank-one
    term beta_l a(s_l) b(T, s_l)^T per scatterer.
    """
    h = nf_los_matrix(apv, geom, wavelength)
    if len(scatterers) == 0:
        return h
    k = 2 * np.pi / wavelength
    a = np.exp(1j * k * distances(irs_element_positions(geom), scatterers.positions))  # (M, L)
    b = np.exp(1j * k * distances(apv.positions, scatterers.positions))  # (N, L)
    return h + (a * scatterers.gains) @ b.T


def planar_response(points: np.ndarray, direction, wavelength: float) -> np.ndarray:
    """Unit-modulus planar-wavefront response of points for a propagation
    direction.
    """
    direction = as_vec3(direction, "direction")
    direction = direction / np.linalg.norm(direction)
    return np.exp(1j * 2 * np.pi / wavelength * (np.atleast_2d(points) @ direction))


def farfield_channel(apv: Apv, geom: IrsGeometry, beta_bi: complex, direction,
                     wavelength: float) -> np.ndarray:
    """Rank-one far-field BS-IRS channel beta u v(T)^H (M, N).

    direction is the unit vector from the IRS toward the BS; u is the IRS
    response and v(T) the BS response for that direction.
    """
    u = planar_response(irs_element_positions(geom), direction, wavelength)
    v = planar_response(apv.positions, direction, wavelength)
    return beta_bi * np.outer(u, v.conj())


@dataclass(frozen=True)
class FadingParams:
    """Large-scale and Rician parameters of the IRS-user link.
    """

    rician_k: float
    pathloss_exponent_kappa: float
    distance_d_iu: float
    reference_gain: float

    def __post_init__(self):
        for name in ("rician_k", "pathloss_exponent_kappa", "distance_d_iu", "reference_gain"):
            value = getattr(self, name)
            if not (value > 0 and np.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value}")

    @property
    def path_loss_amplitude(self) -> float:
        """Amplitude gain sqrt(PL) = reference_gain * d_IU^(-kappa/2).
        """
        return self.reference_gain * self.distance_d_iu ** (-self.pathloss_exponent_kappa / 2)


def reference_gain(wavelength: float) -> float:
    """Free-space amplitude gain at 1 m.
    """
    return wavelength / (4 * np.pi)


def rician_irs_user(geom: IrsGeometry, user_pos, fading: FadingParams,
                    rng_seed: Seed, wavelength: float) -> np.ndarray:
    """Rician IRS-user channel (M,), deterministic for a given seed.
    """
    user_pos = as_vec3(user_pos, "user_pos")
    if abs(user_pos[0]) < DEGENERATE_DISTANCE:
        raise GeometryError(f"user position {user_pos.tolist()} lies in the IRS plane")
    m = geom.element_count
    h_los = nf_array_response_irs(user_pos, geom, wavelength)
    rng = np.random.default_rng(rng_seed)
    h_nlos = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2)
    k = fading.rician_k
    return fading.path_loss_amplitude * (np.sqrt(k / (k + 1)) * h_los
                                         + np.sqrt(1 / (k + 1)) * h_nlos)


def direct_bu_channel(t, user_pos, wavelength: float) -> complex:
    """Near-field LoS channel from one antenna at t to the user.
    """
    t = as_vec3(t, "t")
    dist = distances(t, as_vec3(user_pos, "user_pos"))[0, 0]
    return complex(_free_space(dist, wavelength))


class NearFieldModel:
    """Multipath BS-IRS channel (LoS plus scatterers) for a fixed set of
    scatterers, evaluated at any set of antenna points.
    """

    def __init__(self, geom: IrsGeometry, wavelength: float,
                 scatterers: Optional[ScatterSet] = None):
        self.geom = geom
        self.wavelength = wavelength
        self.scatterers = scatterers if scatterers is not None else ScatterSet()

    def bs_irs(self, points: np.ndarray) -> np.ndarray:
        """Get the (M, P) channel for P antenna points.
        """
        return multipath_channel(Apv(points), self.geom, self.scatterers, self.wavelength)

    def los_column(self, point: Vec3) -> np.ndarray:
        return nf_los_vector(point, self.geom, self.wavelength)

    def arrays(self):
        return [self.scatterers.positions, self.scatterers.gains]

    def __str__(self):
        return f"near-field, {len(self.scatterers)} NLoS paths"


class FarFieldModel:
    """Rank-one BS-IRS channel for a fixed arrival direction.
    """

    def __init__(self, geom: IrsGeometry, wavelength: float, beta_bi: complex, direction):
        self.geom = geom
        self.wavelength = wavelength
        self.beta_bi = complex(beta_bi)
        self.direction = as_vec3(direction, "direction") / np.linalg.norm(direction)

    def bs_irs(self, points: np.ndarray) -> np.ndarray:
        return farfield_channel(Apv(points), self.geom, self.beta_bi, self.direction,
                                self.wavelength)

    def los_column(self, point: Vec3) -> np.ndarray:
        return self.bs_irs(np.atleast_2d(point))[:, 0]

    def arrays(self):
        return [np.array([self.beta_bi]), self.direction]

    def __str__(self):
        return f"far-field, direction {self.direction.tolist()}"


class ChannelRealization:
    """One channel draw: a BS-IRS model and an IRS-user vector h_IU.
    """

    def __init__(self, model, h_iu: np.ndarray):
        self.model = model
        self.h_iu = np.asarray(h_iu, dtype=complex)
        if self.h_iu.shape != (model.geom.element_count,):
            raise GeometryError(
                f"h_iu has shape {self.h_iu.shape}, expected ({model.geom.element_count},)")

    def h_bi(self, apv: Apv) -> np.ndarray:
        return self.model.bs_irs(apv.positions)

    def checksum(self) -> str:
        """SHA-256 over every array defining the realization.
        """
        h = hashlib.sha256()
        for a in [self.h_iu] + list(self.model.arrays()):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()
