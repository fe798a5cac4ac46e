# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

import numpy as np
import pytest
from numpy.testing import assert_allclose

from irsma.config import ConfigError, ScenarioConfig, load_config, parse_config


def test_defaults():
    config = ScenarioConfig()
    assert config.wavelength == pytest.approx(0.06)
    assert config.irs_spacing == pytest.approx(0.03)
    assert config.d_min == pytest.approx(0.03)
    assert config.rician_k == pytest.approx(10 ** 0.3)
    assert config.geometry().element_count == 225
    region = config.region()
    assert region.sample_count == 61
    assert_allclose(region.center_q_b, [5, 5, 0])
    assert config.d_iu == 30
    assert np.linalg.norm(config.user_position()) == pytest.approx(30)
    assert config.budget().transmit_snr == pytest.approx(1e11)
    assert config.scatter_power() == pytest.approx((0.06 / (4 * np.pi * np.sqrt(50))) ** 2)


def test_scenario_builder():
    scenario = ScenarioConfig(n_antennas=6).scenario()
    assert scenario.n_antennas == 6
    assert scenario.wavelength == pytest.approx(0.06)
    settings = ScenarioConfig().ao_settings()
    assert settings.max_iters == 30
    assert settings.bcd.max_sweeps == 20


def test_parse_config():
    src = """
# reduced setup
n_antennas = 6
trials = 10           ; quick run
irs.m_y_count = 9
irs.spacing = 0.025
tx_region.center = [6, 4.5, 0.0]
user.position = [5, 25, -1]
multipath.redraw = no
solver.ao_rel_tol = 1e-4
"""
    config = parse_config(src)
    assert config.n_antennas == 6
    assert config.trials == 10
    assert config.irs.m_y_count == 9
    assert config.irs_spacing == 0.025
    assert config.tx_region.center == (6.0, 4.5, 0.0)
    assert config.multipath.redraw is False
    assert config.solver.ao_rel_tol == 1e-4
    assert config.d_iu == pytest.approx(np.sqrt(25 + 625 + 1))
    # untouched values keep their defaults
    assert config.irs.m_z_count == 15


def test_parse_on_top_of_base():
    base = ScenarioConfig(trials=7)
    config = parse_config("seed = 3\n", base)
    assert (config.trials, config.seed) == (7, 3)
    assert parse_config("irs.spacing = none\n", parse_config("irs.spacing = 0.02")).irs.spacing \
        is None


def test_integral_float_accepted_for_int():
    assert parse_config("trials = 1e2").trials == 100


@pytest.mark.parametrize("src, message", [
    ("trials = 10\nbogus line\n", "Syntax error (line 2)"),
    ("\n\nfoo = 1", 'Unknown key "foo" (line 3)'),
    ("antenna.count = 1", 'Unknown section "antenna" (line 1)'),
    ("irs.rows = 1", 'Unknown key "irs.rows" (line 1)'),
    ("seed = 1\nseed = 2", 'Duplicate key "seed", first set on line 1 (line 2)'),
    ("trials = 2.5", '"trials" must be an integer (line 1)'),
    ("trials = many", 'Bad value "many" (line 1)'),
    ("multipath.redraw = 1", '"multipath.redraw" must be true or false (line 1)'),
    ("tx_region.center = [1, 2]", '"tx_region.center" must be a vector [x, y, z] (line 1)'),
    ("n_antennas = none", '"n_antennas" cannot be none (line 1)'),
    ("irs = 3", 'Unknown key "irs" (line 1)'),
])
def test_parse_errors(src, message):
    with pytest.raises(ConfigError) as error:
        parse_config(src)
    assert str(error.value) == message


@pytest.mark.parametrize("changes", [
    {"trials": 0},
    {"n_antennas": 0},
    {"n_antennas": 21},
    {"irs.m_y_count": 0},
    {"tx_region.delta_s": 0.0},
    {"frequency_hz": -1.0},
    {"multipath.n_paths": -1},
    {"multipath.box_min": (5.0, 1.0, -1.0)},
    {"user.position": (0.0, 30.0, 0.0)},
    {"solver.ao_max_iters": 0},
])
def test_invalid_scenarios(changes):
    with pytest.raises(ConfigError):
        ScenarioConfig().with_changes(**changes)


def test_max_antennas_fits():
    assert ScenarioConfig(n_antennas=20).n_antennas == 20


def test_with_changes_keeps_original():
    config = ScenarioConfig()
    changed = config.with_changes(**{"irs.m_y_count": 9, "n_antennas": 2})
    assert (changed.irs.m_y_count, changed.n_antennas) == (9, 2)
    assert (config.irs.m_y_count, config.n_antennas) == (15, 4)


def test_resolved():
    resolved = ScenarioConfig().resolved()
    assert resolved["irs.m_y_count"] == 15
    assert resolved["tx_region.center"] == [5.0, 5.0, 0.0]
    assert resolved["irs.spacing"] is None
    assert resolved["derived.irs_spacing"] == pytest.approx(0.03)
    assert resolved["derived.sample_count"] == 61
    assert "derived.path_loss_amplitude" in resolved


def test_load_config(tmp_path):
    path = tmp_path / "scenario.cfg"
    path.write_text("n_antennas = 2\nfading.kappa = 3.0\n")
    config = load_config(str(path))
    assert config.n_antennas == 2
    assert config.fading.kappa == 3.0


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="Cannot read config file"):
        load_config(str(tmp_path / "missing.cfg"))
    path = tmp_path / "bad.cfg"
    path.write_text("trials 3\n")
    with pytest.raises(ConfigError) as error:
        load_config(str(path))
    assert str(error.value) == f"{path}: Syntax error (line 1)"
