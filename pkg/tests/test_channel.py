# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from irsma.channel import (ChannelRealization, FadingParams, FarFieldModel, NearFieldModel,
                           ScatterSet, direct_bu_channel, draw_scatterers, farfield_channel,
                           multipath_channel, nf_array_response_irs, nf_array_response_tx,
                           nf_los_matrix, nf_los_vector, reference_gain, rician_irs_user,
                           wavelength)
from irsma.geometry import (Apv, DegenerateDistanceError, GeometryError, IrsGeometry,
                            irs_element_positions, symmetric_apv)


def test_wavelength():
    assert wavelength(5e9) == pytest.approx(0.06)
    with pytest.raises(ValueError):
        wavelength(0)


def test_los_vector_single_element(wl):
    h = nf_los_vector([5, 5, 0], IrsGeometry(1, 1, 0.03), wl)
    dist = np.sqrt(50)
    assert abs(h[0]) == pytest.approx(6.752e-4, rel=1e-3)
    assert_allclose(h[0], wl / (4 * np.pi * dist) * np.exp(1j * 2 * np.pi / wl * dist),
                    rtol=1e-12)


def test_los_vector_amplitude_law(wl):
    one = IrsGeometry(1, 1, 0.03)
    near = nf_los_vector([5, 5, 0], one, wl)
    far = nf_los_vector([10, 10, 0], one, wl)
    assert abs(far[0]) == pytest.approx(abs(near[0]) / 2, rel=1e-12)


def test_los_vector_boresight_symmetry(wl):
    geom = IrsGeometry(4, 4, wl / 2)
    h = nf_los_vector([3, 0, 0], geom, wl).reshape(4, 4)
    assert_allclose(h, h[:, ::-1], rtol=1e-12)
    assert_allclose(h, h[::-1, :], rtol=1e-12)


def test_los_vector_degenerate(wl):
    geom = IrsGeometry(2, 2, 0.03)
    with pytest.raises(DegenerateDistanceError):
        nf_los_vector(irs_element_positions(geom)[3], geom, wl)


def test_los_matrix_columns(geom, region, wl):
    single = Apv([[5, 5, 0]])
    assert_allclose(nf_los_matrix(single, geom, wl)[:, 0], nf_los_vector([5, 5, 0], geom, wl),
                    rtol=1e-14)
    apv = symmetric_apv(region, 4)
    h = nf_los_matrix(apv, geom, wl)
    assert h.shape == (225, 4)
    elements = irs_element_positions(geom)
    for n, t in enumerate(apv.positions):
        for m, e in enumerate(elements):
            d = np.sqrt(sum((t[i] - e[i]) ** 2 for i in range(3)))
            expected = wl / (4 * np.pi * d) * np.exp(1j * 2 * np.pi * d / wl)
            assert h[m, n] == pytest.approx(expected, rel=1e-10)


def test_identical_positions_identical_columns(geom, wl):
    h = nf_los_matrix(Apv([[5, 5, 0], [5, 5, 0]]), geom, wl)
    assert_array_equal(h[:, 0], h[:, 1])


def test_array_responses(geom, region, wl):
    s = [2.0, 3.0, 0.5]
    a = nf_array_response_irs(s, geom, wl)
    b = nf_array_response_tx(symmetric_apv(region, 4), s, wl)
    assert_allclose(np.abs(a), 1, rtol=1e-15)
    assert_allclose(np.abs(b), 1, rtol=1e-15)
    # every element one wavelength away
    unit = nf_array_response_irs([wl, 0, 0], IrsGeometry(1, 1, 0.03), wl)
    assert_allclose(unit, [1], atol=1e-12)


def test_array_response_equidistant(wl):
    geom = IrsGeometry(2, 1, 0.03)
    a = nf_array_response_irs([2, 0, 1], geom, wl)
    assert a[0] == pytest.approx(a[1], rel=1e-12)


def test_multipath_without_scatterers(small_geom, region, wl):
    apv = symmetric_apv(region, 4)
    los = nf_los_matrix(apv, small_geom, wl)
    assert_array_equal(multipath_channel(apv, small_geom, ScatterSet(), wl), los)
    zero_gain = ScatterSet([[2, 2, 0]], [0])
    assert_array_equal(multipath_channel(apv, small_geom, zero_gain, wl), los)


def test_multipath_against_loops(rng, wl):
    geom = IrsGeometry(3, 2, wl / 2)
    apv = Apv([[5, 5, 0], [5.05, 5, 0]])
    scatterers = draw_scatterers(2, [1, 1, -1], [4, 4, 1], 1e-6, rng)
    h = multipath_channel(apv, geom, scatterers, wl)
    k = 2 * np.pi / wl
    for m, e in enumerate(irs_element_positions(geom)):
        for n, t in enumerate(apv.positions):
            d = np.linalg.norm(t - e)
            expected = wl / (4 * np.pi * d) * np.exp(1j * k * d)
            for s, beta in zip(scatterers.positions, scatterers.gains):
                expected += beta * np.exp(1j * k * np.linalg.norm(s - e)) \
                    * np.exp(1j * k * np.linalg.norm(s - t))
            assert h[m, n] == pytest.approx(expected, rel=1e-10)


def test_multipath_linear_in_gain(small_geom, region, wl):
    apv = symmetric_apv(region, 2)
    positions = [[2, 2, 0], [3, 1, 0.5]]
    base = multipath_channel(apv, small_geom, ScatterSet(positions, [1e-4, 2e-4j]), wl)
    scaled = multipath_channel(apv, small_geom, ScatterSet(positions, [3e-4, 2e-4j]), wl)
    only_first = multipath_channel(apv, small_geom, ScatterSet(positions[:1], [1e-4]), wl)
    los = nf_los_matrix(apv, small_geom, wl)
    assert_allclose(scaled - base, 2 * (only_first - los), rtol=1e-9, atol=1e-18)


def test_draw_scatterers(rng):
    s = draw_scatterers(1000, [1, 1, -1], [4, 4, 1], 2.0, 7)
    assert len(s) == 1000
    assert np.all(s.positions >= [1, 1, -1]) and np.all(s.positions <= [4, 4, 1])
    assert np.mean(np.abs(s.gains) ** 2) == pytest.approx(2.0 / 1000, rel=0.15)
    again = draw_scatterers(1000, [1, 1, -1], [4, 4, 1], 2.0, 7)
    assert_array_equal(s.gains, again.gains)
    assert len(draw_scatterers(0, [1, 1, -1], [4, 4, 1], 2.0, 7)) == 0
    with pytest.raises(GeometryError):
        draw_scatterers(2, [4, 4, 1], [1, 1, -1], 1.0, 7)


def test_farfield_rank_one(small_geom, region, wl):
    apv = symmetric_apv(region, 4)
    h = farfield_channel(apv, small_geom, 1e-3 * np.exp(0.4j), [5, 5, 0], wl)
    sv = np.linalg.svd(h, compute_uv=False)
    assert sv[1] < 1e-10 * sv[0]
    assert_allclose(np.abs(h), 1e-3, rtol=1e-12)


def test_farfield_column_space(small_geom, region, wl):
    direction = [5, 5, 0]
    h1 = farfield_channel(symmetric_apv(region, 4), small_geom, 1e-3, direction, wl)
    h2 = farfield_channel(Apv([[4.7, 5, 0], [5.1, 5, 0]]), small_geom, 1e-3, direction, wl)
    sv = np.linalg.svd(np.hstack([h1, h2]), compute_uv=False)
    assert sv[1] < 1e-10 * sv[0]


def test_farfield_boresight(small_geom, region, wl):
    model = FarFieldModel(small_geom, wl, 1.0, [1, 0, 0])
    u = model.bs_irs(np.array([[5, 0, 0]]))[:, 0]
    assert_allclose(u, u[0], rtol=1e-12)
    v_norm = [np.sum(np.abs(model.bs_irs(symmetric_apv(region, n).positions)[0]) ** 2)
              for n in (1, 3, 4)]
    assert_allclose(v_norm, [1, 3, 4], rtol=1e-12)


def test_rician_pure_los(geom, wl):
    fading = FadingParams(1e12, 2.8, 30, reference_gain(wl))
    h = rician_irs_user(geom, [3, 30, -2], fading, 5, wl)
    assert_allclose(np.abs(h), fading.path_loss_amplitude, rtol=1e-4)


def test_rician_deterministic(geom, wl):
    fading = FadingParams(10 ** 0.3, 2.8, 30, reference_gain(wl))
    a = rician_irs_user(geom, [3, 30, -2], fading, 42, wl)
    b = rician_irs_user(geom, [3, 30, -2], fading, 42, wl)
    c = rician_irs_user(geom, [3, 30, -2], fading, 43, wl)
    assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_rician_second_moment(geom, wl):
    fading = FadingParams(10 ** 0.3, 2.8, 30, reference_gain(wl))
    power = np.mean([np.mean(np.abs(rician_irs_user(geom, [3, 30, -2], fading, seed, wl)) ** 2)
                     for seed in range(10000)])
    assert power == pytest.approx(fading.path_loss_amplitude ** 2, rel=0.02)


def test_rician_rejects_irs_plane(geom, wl):
    fading = FadingParams(2.0, 2.8, 30, reference_gain(wl))
    with pytest.raises(GeometryError):
        rician_irs_user(geom, [0, 30, 0], fading, 0, wl)


def test_fading_params_validation(wl):
    with pytest.raises(ValueError):
        FadingParams(0, 2.8, 30, reference_gain(wl))
    assert FadingParams(1, 2, 10, 1.0).path_loss_amplitude == pytest.approx(0.1)


def test_direct_channel(wl):
    h = direct_bu_channel([0, 0, 0], [1, 0, 0], wl)
    assert abs(h) == pytest.approx(4.775e-3, rel=1e-3)
    magnitudes = [abs(direct_bu_channel([0, 0, 0], [d, 0, 0], wl)) for d in (1, 2, 3)]
    assert magnitudes[0] > magnitudes[1] > magnitudes[2]
    h1 = direct_bu_channel([0, 0, 0], [1, 0, 0], wl)
    h2 = direct_bu_channel([0, 0, 0], [1 + wl, 0, 0], wl)
    assert h1 / abs(h1) == pytest.approx(h2 / abs(h2), abs=1e-9)
    with pytest.raises(DegenerateDistanceError):
        direct_bu_channel([1, 1, 1], [1, 1, 1], wl)


def test_models_and_checksum(small_geom, region, wl, cn):
    scatterers = draw_scatterers(3, [1, 1, -1], [4, 4, 1], 1e-6, 1)
    model = NearFieldModel(small_geom, wl, scatterers)
    apv = symmetric_apv(region, 4)
    assert_array_equal(model.bs_irs(apv.positions),
                       multipath_channel(apv, small_geom, scatterers, wl))
    assert_allclose(model.los_column([5, 5, 0]), nf_los_vector([5, 5, 0], small_geom, wl))
    h_iu = cn(small_geom.element_count)
    realization = ChannelRealization(model, h_iu)
    assert realization.checksum() == ChannelRealization(model, h_iu.copy()).checksum()
    assert realization.checksum() != ChannelRealization(model, 2 * h_iu).checksum()
    with pytest.raises(GeometryError):
        ChannelRealization(model, h_iu[:-1])
