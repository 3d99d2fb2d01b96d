from __future__ import annotations

import math

import numpy as np
import pytest

from pyrafuse import (
    AttributeKind,
    AttributeMap,
    AttributeStack,
    BoundsError,
    ConfigError,
    DipField,
    Grid2,
    ParameterError,
    SeismicSection,
    SeismicVolume,
    ShapeError,
    SizeError,
    attribute_stack,
    curvature,
    dip_angle,
    dip_slice_fields,
    dip_stack,
    phase_dip,
    worker_count,
)


def _plane_wave_section(n=128, m=48, k=6, p=0.5, dt=0.004, dx=25.0):
    """cos(w*(t - p*x)) with w on an exact DFT bin, so quadrature is exact."""
    w = 2.0 * math.pi * k / n
    t = np.arange(n, dtype=np.float64)[:, None]
    x = np.arange(m, dtype=np.float64)[None, :]
    return SeismicSection(Grid2(np.cos(w * (t - p * x))), dt=dt, dx=dx), w


class TestPhaseDip:
    def test_positive_dip_for_events_arriving_later_with_x(self):
        section, w = _plane_wave_section(p=0.5)
        m = phase_dip(section)
        # the discrete quotient reports sin(w*p)/sin(w) for a pure carrier
        expected = math.sin(w * 0.5) / math.sin(w)
        interior = m.grid.data[1:-1, 1:-1]
        assert np.max(np.abs(interior - expected)) < 1e-9
        assert expected > 0.0

    def test_negative_dip_for_events_arriving_earlier_with_x(self):
        section, w = _plane_wave_section(p=-0.7)
        m = phase_dip(section)
        expected = -math.sin(w * 0.7) / math.sin(w)
        interior = m.grid.data[1:-1, 1:-1]
        assert np.max(np.abs(interior - expected)) < 1e-9

    def test_flat_events_give_zero_dip(self):
        section, _ = _plane_wave_section(p=0.0)
        m = phase_dip(section)
        assert np.max(np.abs(m.grid.data[1:-1, :])) < 1e-9

    def test_clamped_to_p_max(self):
        section, _ = _plane_wave_section(p=3.0, k=2)
        m = phase_dip(section, p_max=1.5)
        assert np.max(m.grid.data) <= 1.5
        assert np.min(m.grid.data) >= -1.5
        assert np.any(np.abs(m.grid.data[1:-1, 1:-1]) == 1.5)

    def test_slow_cells_are_zeroed_with_zero_quality(self):
        section, w = _plane_wave_section(p=0.5)
        m = phase_dip(section, eps_freq=10.0)  # every cell is "too slow"
        assert np.array_equal(m.grid.data, np.zeros(m.grid.shape))
        assert np.array_equal(m.quality.data, np.zeros(m.grid.shape))

    def test_quality_is_binary_and_marks_live_cells(self):
        section, _ = _plane_wave_section(p=0.5)
        m = phase_dip(section)
        assert set(np.unique(m.quality.data)) <= {0.0, 1.0}
        assert m.quality.data[1:-1, 1:-1].all()

    def test_map_metadata(self):
        section, _ = _plane_wave_section()
        m = phase_dip(section, scale=3)
        assert m.kind is AttributeKind.PHASE_DIP
        assert m.scale == 3
        assert m.dt == section.dt and m.dx == section.dx

    def test_minimum_dims(self):
        with pytest.raises(SizeError):
            phase_dip(SeismicSection(Grid2(np.zeros((3, 8))), dt=1.0, dx=1.0))
        with pytest.raises(SizeError):
            phase_dip(SeismicSection(Grid2(np.zeros((8, 2))), dt=1.0, dx=1.0))

    def test_parameter_validation(self):
        section, _ = _plane_wave_section()
        with pytest.raises(ParameterError):
            phase_dip(section, p_max=0.0)
        with pytest.raises(ParameterError):
            phase_dip(section, eps_freq=-1.0)


class TestWorkerCount:
    def test_defaults_to_auto(self, monkeypatch):
        monkeypatch.delenv("PYRAFUSE_THREADS", raising=False)
        assert worker_count() >= 1

    def test_reads_env(self, monkeypatch):
        monkeypatch.setenv("PYRAFUSE_THREADS", "3")
        assert worker_count() == 3

    def test_zero_means_auto(self, monkeypatch):
        monkeypatch.setenv("PYRAFUSE_THREADS", "0")
        assert worker_count() >= 1

    def test_rejects_garbage(self, monkeypatch):
        monkeypatch.setenv("PYRAFUSE_THREADS", "many")
        with pytest.raises(ParameterError):
            worker_count()


class TestDipAngle:
    def _maps(self, p_val, q_val, shape=(6, 5)):
        p = AttributeMap(Grid2(np.full(shape, p_val)), AttributeKind.PHASE_DIP, scale=1)
        q = AttributeMap(Grid2(np.full(shape, q_val)), AttributeKind.PHASE_DIP, scale=1)
        return p, q

    def test_matches_closed_form(self):
        p, q = self._maps(0.5, -0.25)
        out = dip_angle(p, q, dt=0.004, dx=25.0, dy=12.5, velocity=2000.0)
        s_x = 0.5 * (2000.0 * 0.004 / 2.0) / 25.0
        s_y = -0.25 * (2000.0 * 0.004 / 2.0) / 12.5
        want = math.atan(math.hypot(s_x, s_y))
        assert np.allclose(out.grid.data, want, atol=1e-12)
        assert out.kind is AttributeKind.DIP_ANGLE

    def test_flat_gives_zero_angle(self):
        p, q = self._maps(0.0, 0.0)
        out = dip_angle(p, q, dt=0.004, dx=25.0, dy=25.0)
        assert np.array_equal(out.grid.data, np.zeros((6, 5)))

    def test_angle_is_bounded_below_right_angle(self):
        p, q = self._maps(100.0, 100.0)
        out = dip_angle(p, q, dt=0.004, dx=25.0, dy=25.0)
        assert np.max(out.grid.data) < math.pi / 2.0

    def test_records_convention_metadata(self):
        p, q = self._maps(0.1, 0.2)
        out = dip_angle(p, q, dt=0.004, dx=25.0, dy=25.0, velocity=1500.0)
        assert out.meta["velocity"] == repr(1500.0)
        assert out.meta["convention"] == "time-dip"

    def test_rejects_wrong_kinds_and_shapes(self):
        p, q = self._maps(0.1, 0.2)
        raw = AttributeMap(Grid2(np.zeros((6, 5))), AttributeKind.RAW)
        with pytest.raises(ParameterError):
            dip_angle(p, raw, dt=0.004, dx=25.0, dy=25.0)
        small = AttributeMap(Grid2(np.zeros((3, 3))), AttributeKind.PHASE_DIP)
        with pytest.raises(ShapeError):
            dip_angle(p, small, dt=0.004, dx=25.0, dy=25.0)


class TestCurvature:
    def test_constant_dip_field_has_exactly_zero_curvature(self):
        field = DipField(
            Grid2(np.full((8, 7), 0.3)),
            Grid2(np.full((8, 7), -0.2)),
            dt=0.004,
            dx=25.0,
            dy=12.5,
        )
        pair = curvature(field)
        assert np.array_equal(pair.k_pos.grid.data, np.zeros((8, 7)))
        assert np.array_equal(pair.k_neg.grid.data, np.zeros((8, 7)))

    def test_cylindrical_ramp_recovers_kappa(self):
        # s_x = kappa * X (lateral meters): a linear slope field whose
        # half-gradient is kappa/2, so k_pos = kappa and k_neg = 0
        kappa, dx, dt, v = 2e-4, 25.0, 0.004, 2000.0
        nx, ny = 9, 6
        lateral = (np.arange(nx, dtype=np.float64) - 4.0) * dx
        s_x = kappa * lateral
        p = s_x[:, None] * np.ones(ny) / ((v * dt / 2.0) / dx)
        field = DipField(Grid2(p), Grid2(np.zeros((nx, ny))), dt=dt, dx=dx, dy=dx)
        pair = curvature(field, velocity=v)
        assert np.allclose(pair.k_pos.grid.data, kappa, atol=1e-15)
        assert np.allclose(pair.k_neg.grid.data, 0.0, atol=1e-15)

    def test_ordering_holds_on_random_fields(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            p = Grid2(rng.standard_normal((10, 9)))
            q = Grid2(rng.standard_normal((10, 9)))
            field = DipField(p, q, dt=0.004, dx=25.0, dy=25.0)
            pair = curvature(field)
            assert np.all(pair.k_pos.grid.data >= pair.k_neg.grid.data)

    def test_requires_crossline_dip_and_min_size(self):
        p = Grid2(np.zeros((8, 8)))
        with pytest.raises(ConfigError):
            curvature(DipField(p, None, dt=0.004, dx=25.0, dy=None))
        with pytest.raises(SizeError):
            curvature(
                DipField(Grid2(np.zeros((2, 8))), Grid2(np.zeros((2, 8))),
                         dt=0.004, dx=25.0, dy=25.0)
            )


class TestDipStack:
    def test_levels_are_tagged_and_expanded(self):
        section, _ = _plane_wave_section(n=128, m=64)
        stack = dip_stack(section, 3)
        assert stack.scales == 3
        assert [m.scale for m in stack.maps] == [0, 1, 2]
        for m in stack.maps:
            assert m.grid.shape == (128, 64)
            assert m.kind is AttributeKind.PHASE_DIP
            assert set(np.unique(m.quality.data)) <= {0.0, 1.0}
        assert stack.maps[0].meta["radius"] == "2"

    def test_plane_wave_dip_consistent_across_scales(self):
        # low-frequency carrier: the same dip must be seen at every level
        section, _ = _plane_wave_section(n=256, m=96, k=3, p=0.5)
        stack = dip_stack(section, 3)
        vals = stack.values()
        for i in range(3):
            mt, mx = 8 * 2**i, 4 * 2**i
            interior = vals[i][mt:-mt, mx:-mx]
            assert abs(float(np.median(interior)) - 0.5) < 0.02

    def test_stack_values_and_validity_shapes(self):
        section, _ = _plane_wave_section(n=64, m=32)
        stack = dip_stack(section, 2)
        assert stack.values().shape == (2, 64, 32)
        assert stack.validity().shape == (2, 64, 32)
        assert stack.validity().dtype == bool

    def test_rejects_oversized_scale_count(self):
        section, _ = _plane_wave_section(n=32, m=16)
        with pytest.raises(SizeError):
            dip_stack(section, 6)


def _plane_wave_volume(nt=96, nx=28, ny=24, k=4, px=0.4, py=-0.3):
    w = 2.0 * math.pi * k / nt
    t = np.arange(nt, dtype=np.float64)[:, None, None]
    x = np.arange(nx, dtype=np.float64)[None, :, None]
    y = np.arange(ny, dtype=np.float64)[None, None, :]
    data = np.cos(w * (t - px * x - py * y))
    return SeismicVolume(data, dt=0.004, dx=25.0, dy=25.0), w


class TestVolumeDips:
    def test_slice_fields_recover_both_lateral_dips(self):
        vol, w = _plane_wave_volume()
        fields = dip_slice_fields(vol, 48, 2)
        assert len(fields) == 2
        f0 = fields[0]
        assert f0.p.shape == (28, 24)
        expected_p = math.sin(w * 0.4) / math.sin(w)
        expected_q = -math.sin(w * 0.3) / math.sin(w)
        assert abs(float(np.median(f0.p.data[2:-2, 2:-2])) - expected_p) < 1e-6
        assert abs(float(np.median(f0.q.data[2:-2, 2:-2])) - expected_q) < 1e-6

    def test_bad_time_index(self):
        vol, _ = _plane_wave_volume(nt=32)
        with pytest.raises(BoundsError):
            dip_slice_fields(vol, 32, 1)

    def test_thread_count_does_not_change_results(self, monkeypatch):
        vol, _ = _plane_wave_volume(nt=48, nx=16, ny=12)
        outs = []
        for threads in ("1", "5"):
            monkeypatch.setenv("PYRAFUSE_THREADS", threads)
            fields = dip_slice_fields(vol, 24, 2)
            outs.append((fields[0].p.data, fields[0].q.data))
        assert np.array_equal(outs[0][0], outs[1][0])
        assert np.array_equal(outs[0][1], outs[1][1])


class TestAttributeStackDispatch:
    def test_section_dip_stack(self):
        section, _ = _plane_wave_section(n=64, m=32)
        stack = attribute_stack(section, AttributeKind.PHASE_DIP, 2)
        assert stack.kind is AttributeKind.PHASE_DIP
        assert stack.scales == 2

    def test_volume_angle_and_curvature_stacks(self):
        vol, _ = _plane_wave_volume(nt=64, nx=20, ny=16)
        for kind in (AttributeKind.DIP_ANGLE, AttributeKind.CURV_POS, AttributeKind.CURV_NEG):
            stack = attribute_stack(vol, kind, 2, time_index=32)
            assert stack.kind is kind
            assert [m.scale for m in stack.maps] == [0, 1]
            assert stack.maps[0].grid.shape == (20, 16)
            assert stack.maps[0].meta["time_index"] == "32"

    def test_wrong_combinations_raise(self):
        section, _ = _plane_wave_section(n=64, m=32)
        vol, _ = _plane_wave_volume(nt=64, nx=20, ny=16)
        with pytest.raises(ConfigError):
            attribute_stack(section, AttributeKind.DIP_ANGLE, 2)
        with pytest.raises(ConfigError):
            attribute_stack(vol, AttributeKind.PHASE_DIP, 2, time_index=32)
        with pytest.raises(ConfigError):
            attribute_stack(vol, AttributeKind.DIP_ANGLE, 2)  # no time_index
        with pytest.raises(ParameterError):
            attribute_stack(section, AttributeKind.RAW, 2)


class TestStackContainer:
    def test_rejects_mixed_kinds_and_shapes(self):
        a = AttributeMap(Grid2(np.zeros((4, 4))), AttributeKind.PHASE_DIP)
        b = AttributeMap(Grid2(np.zeros((4, 4))), AttributeKind.DIP_ANGLE)
        c = AttributeMap(Grid2(np.zeros((5, 4))), AttributeKind.PHASE_DIP)
        with pytest.raises(ShapeError):
            AttributeStack((a, b))
        with pytest.raises(ShapeError):
            AttributeStack((a, c))
        with pytest.raises(ShapeError):
            AttributeStack(())
