# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

"""
IRS-assisted downlink with movable transmit antennas
====================================================

This package simulates a multi-antenna base station (BS) whose antennas can
move along a short segment, serving a single-antenna user through an
intelligent reflecting surface (IRS). It builds near-field and far-field
channels, jointly optimizes the IRS phases, the antenna positions and the
transmit beamformer, and runs Monte-Carlo comparisons against fixed antennas.

Example
-------

import numpy as np
from irsma import (IrsGeometry, TxRegion, NearFieldModel, ChannelRealization,
                   FadingParams, Scenario, LinkBudget, ao_solve, fpa_without_as,
                   rician_irs_user, reference_gain, wavelength)

lam = wavelength(5e9)
geom = IrsGeometry(15, 15, lam / 2)
region = TxRegion([5, 5, 0], length_a=0.6, min_spacing_d_min=lam / 2,
                  sample_spacing_delta_s=0.01)
scenario = Scenario(geom, region, n_antennas=4, wavelength=lam,
                    budget=LinkBudget.from_db(110))

# LoS BS-IRS channel and Rician IRS-user channel
fading = FadingParams(10 ** 0.3, 2.8, 30, reference_gain(lam))
h_iu = rician_irs_user(geom, [3, 30, -2], fading, 1, lam)
realization = ChannelRealization(NearFieldModel(geom, lam), h_iu)

# movable antennas versus fixed symmetric array
ma = ao_solve(scenario, realization)
fpa = fpa_without_as(scenario, realization)
print(ma.snr_db(scenario.budget) - fpa.snr_db(scenario.budget))

Experiments
-----------

python3 -m irsma sweep-distance --trials 20 --workers 4 --out results
python3 -m irsma check-analysis
"""

__version__ = "0.1.0"

from irsma.geometry import (Apv, IrsGeometry, TxRegion, irs_element_positions,
                            sample_tx_region, symmetric_apv, validate_apv)
from irsma.channel import (ChannelRealization, FadingParams, FarFieldModel, NearFieldModel,
                           ScatterSet, reference_gain, rician_irs_user, wavelength)
from irsma.beamforming import LinkBudget, aligned_phases, mrt, received_snr
from irsma.optimize import (AoSettings, BcdSettings, Scenario, SolverState, ao_solve,
                            fpa_with_as, fpa_without_as)
from irsma.config import ScenarioConfig, load_config, parse_config
from irsma.harness import run_single_ma_study, run_sweep
