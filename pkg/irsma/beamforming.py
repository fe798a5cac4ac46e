# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

"""
End-to-end link evaluation: received SNR, MRT beamforming, IRS phase
alignment and the single-antenna effective channel power gain.

Phases are kept as a length-M vector of radians in [0, 2pi); the diagonal
reflection matrix is never formed.
"""

from dataclasses import dataclass

import numpy as np

from irsma.channel import distances
from irsma.geometry import IrsGeometry, as_vec3, irs_element_positions

TWO_PI = 2 * np.pi


class DimensionMismatchError(ValueError):
    pass


class ZeroChannelError(ValueError):
    pass


class ZeroEntryError(ValueError):

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class LinkBudget:
    """Transmit SNR P/sigma^2 (linear).
    """

    transmit_snr: float

    def __post_init__(self):
        if not (self.transmit_snr > 0 and np.isfinite(self.transmit_snr)):
            raise ValueError(f"transmit SNR must be positive, got {self.transmit_snr}")

    @staticmethod
    def from_db(snr_db: float) -> "LinkBudget":
        return LinkBudget(10 ** (snr_db / 10))


def snr_db(snr: float) -> float:
    """Convert a linear SNR to dB.
    """
    return 10 * np.log10(snr) if snr > 0 else -np.inf


def wrap_phases(phi) -> np.ndarray:
    """Reduce phases to [0, 2pi).
    """
    phi = np.mod(np.asarray(phi, dtype=float), TWO_PI)
    # mod can round up to exactly 2pi for tiny negative inputs
    phi[phi >= TWO_PI] = 0.0
    return phi


def _check_dimensions(h_iu: np.ndarray, phases: np.ndarray, h_bi: np.ndarray) -> None:
    if h_iu.ndim != 1 or phases.shape != h_iu.shape:
        raise DimensionMismatchError(
            f"h_iu has shape {h_iu.shape} but phases have shape {phases.shape}")
    if h_bi.ndim != 2 or h_bi.shape[0] != h_iu.shape[0]:
        raise DimensionMismatchError(
            f"h_bi has shape {h_bi.shape}, expected ({h_iu.shape[0]}, N)")


def effective_row(h_iu, phases, h_bi) -> np.ndarray:
    """Get the effective channel h_IU^H Psi H_BI as an (N,) vector.
    """
    h_iu = np.asarray(h_iu, dtype=complex)
    phases = np.asarray(phases, dtype=float)
    h_bi = np.asarray(h_bi, dtype=complex)
    _check_dimensions(h_iu, phases, h_bi)
    return (h_iu.conj() * np.exp(1j * phases)) @ h_bi


def objective(h_iu, phases, h_bi) -> float:
    """Post-MRT SNR objective ||h_IU^H Psi H_BI||^2, without P/sigma^2.
    """
    row = effective_row(h_iu, phases, h_bi)
    return float(np.vdot(row, row).real)


def received_snr(h_iu, phases, h_bi, w, budget: LinkBudget) -> float:
    """Linear received SNR (P/sigma^2) |h_IU^H Psi H_BI w|^2.
    """
    row = effective_row(h_iu, phases, h_bi)
    w = np.asarray(w, dtype=complex).reshape(-1)
    if w.shape != row.shape:
        raise DimensionMismatchError(
            f"beamformer has {w.shape[0]} entries, channel has {row.shape[0]} antennas")
    return budget.transmit_snr * float(abs(row @ w) ** 2)


def mrt(h_iu, phases, h_bi) -> np.ndarray:
    """Maximum ratio transmission beamformer for the effective channel.
    """
    row = effective_row(h_iu, phases, h_bi)
    norm = np.linalg.norm(row)
    if norm == 0:
        raise ZeroChannelError("effective channel h_IU^H Psi H_BI is zero")
    return row.conj() / norm


def aligned_phases(h_bi_vec, h_iu) -> np.ndarray:
    """IRS phases which co-phase every reflected path of a single antenna:
    phi_m = arg(h_IU,m) - arg(h_BI,m).
    """
    h_bi_vec = np.asarray(h_bi_vec, dtype=complex)
    h_iu = np.asarray(h_iu, dtype=complex)
    if h_bi_vec.shape != h_iu.shape or h_iu.ndim != 1:
        raise DimensionMismatchError(
            f"h_bi has shape {h_bi_vec.shape} but h_iu has shape {h_iu.shape}")
    for name, h in (("h_bi", h_bi_vec), ("h_iu", h_iu)):
        zeros = np.flatnonzero(h == 0)
        if zeros.size > 0:
            raise ZeroEntryError(f"{name} entry {zeros[0]} is zero", int(zeros[0]))
    return wrap_phases(np.angle(h_iu) - np.angle(h_bi_vec))


def effective_gain_single(t, geom: IrsGeometry, h_iu, wavelength: float) -> float:
    """Channel power gain of one antenna at t under aligned IRS phases,
    (lambda/4pi)^2 (sum_m |h_IU,m| / D(t, m))^2.
    """
    dist = distances(irs_element_positions(geom), as_vec3(t, "t"))[:, 0]
    h = np.sum(np.abs(h_iu) / dist)
    return float((wavelength / (4 * np.pi)) ** 2 * h ** 2)
