from __future__ import annotations

import numpy as np
import pytest

from pyrafuse import (
    AttributeKind,
    AttributeMap,
    BoundsError,
    Grid2,
    ParameterError,
    SeismicSection,
    SeismicVolume,
    ShapeError,
    Units,
    reassemble_volume,
)


class TestGrid2:
    def test_copies_and_freezes_input(self):
        values = np.zeros((3, 4))
        grid = Grid2(values)
        values[0, 0] = 9.0
        assert grid.data[0, 0] == 0.0
        with pytest.raises(ValueError):
            grid.data[0, 0] = 1.0

    def test_shape_properties(self):
        grid = Grid2(np.zeros((5, 7)))
        assert (grid.rows, grid.cols) == (5, 7)
        assert grid.shape == (5, 7)

    def test_rejects_non_finite_and_wrong_rank(self):
        with pytest.raises(ParameterError):
            Grid2(np.array([[1.0, np.nan]]))
        with pytest.raises(ParameterError):
            Grid2(np.array([[np.inf, 1.0]]))
        with pytest.raises(ShapeError):
            Grid2(np.zeros(4))
        with pytest.raises(ShapeError):
            Grid2(np.zeros((2, 2, 2)))

    def test_accepts_lists_and_casts_to_float(self):
        grid = Grid2([[1, 2], [3, 4]])
        assert grid.data.dtype == np.float64
        assert grid.data[1, 1] == 4.0


class TestSeismicSection:
    def test_basic_properties(self):
        section = SeismicSection(Grid2(np.zeros((100, 40))), dt=0.004, dx=25.0)
        assert section.n_samples == 100
        assert section.n_traces == 40

    def test_rejects_non_positive_intervals(self):
        grid = Grid2(np.zeros((8, 8)))
        with pytest.raises(ParameterError):
            SeismicSection(grid, dt=0.0, dx=25.0)
        with pytest.raises(ParameterError):
            SeismicSection(grid, dt=0.004, dx=-1.0)


class TestSeismicVolume:
    def _volume(self):
        data = np.arange(4 * 3 * 2, dtype=np.float64).reshape(4, 3, 2)
        return SeismicVolume(data, dt=0.004, dx=25.0, dy=12.5), data

    def test_time_slice_layout(self):
        vol, data = self._volume()
        s = vol.time_slice(2)
        assert s.shape == (3, 2)  # rows = x, cols = y
        assert np.array_equal(s.data, data[2])

    def test_inline_section_fixes_x(self):
        vol, data = self._volume()
        s = vol.inline_section(1)
        assert s.grid.shape == (4, 2)
        assert np.array_equal(s.grid.data, data[:, 1, :])
        assert s.dx == 12.5  # traces step along y
        assert "1" in s.label

    def test_crossline_section_fixes_y(self):
        vol, data = self._volume()
        s = vol.crossline_section(0)
        assert s.grid.shape == (4, 3)
        assert np.array_equal(s.grid.data, data[:, :, 0])
        assert s.dx == 25.0

    def test_out_of_range_indices(self):
        vol, _ = self._volume()
        for bad in (-1, 99):
            with pytest.raises(BoundsError):
                vol.time_slice(bad)
            with pytest.raises(BoundsError):
                vol.inline_section(bad)
            with pytest.raises(BoundsError):
                vol.crossline_section(bad)

    def test_reassemble_from_inline_sections(self):
        vol, data = self._volume()
        sections = [vol.inline_section(x) for x in range(3)]
        back = reassemble_volume(sections, dx=25.0)
        assert np.array_equal(back.data, data)
        assert back.dx == 25.0
        assert back.dy == 12.5  # lateral step carried by the sections


class TestAttributeMap:
    def test_units_follow_kind(self):
        grid = Grid2(np.zeros((4, 4)))
        assert AttributeMap(grid, AttributeKind.PHASE_DIP).units is Units.SAMPLES_PER_TRACE
        assert AttributeMap(grid, AttributeKind.DIP_ANGLE).units is Units.RADIANS
        assert AttributeMap(grid, AttributeKind.CURV_POS).units is Units.PER_METER
        assert AttributeMap(grid, AttributeKind.CURV_NEG).units is Units.PER_METER
        assert AttributeMap(grid, AttributeKind.RAW).units is Units.DIMENSIONLESS

    def test_fused_flag(self):
        grid = Grid2(np.zeros((4, 4)))
        assert AttributeMap(grid, AttributeKind.PHASE_DIP, scale=None).is_fused
        assert not AttributeMap(grid, AttributeKind.PHASE_DIP, scale=2).is_fused

    def test_scale_validation(self):
        grid = Grid2(np.zeros((4, 4)))
        with pytest.raises(ParameterError):
            AttributeMap(grid, AttributeKind.PHASE_DIP, scale=-1)

    def test_quality_shape_must_match(self):
        grid = Grid2(np.zeros((4, 4)))
        with pytest.raises(ShapeError):
            AttributeMap(grid, AttributeKind.PHASE_DIP, quality=Grid2(np.zeros((3, 4))))

    def test_meta_is_copied(self):
        meta = {"a": "1"}
        m = AttributeMap(Grid2(np.zeros((4, 4))), AttributeKind.RAW, meta=meta)
        meta["a"] = "2"
        assert m.meta["a"] == "1"

    def test_interval_validation(self):
        grid = Grid2(np.zeros((4, 4)))
        with pytest.raises(ParameterError):
            AttributeMap(grid, AttributeKind.RAW, dt=-0.004)
        with pytest.raises(ParameterError):
            AttributeMap(grid, AttributeKind.RAW, dy=0.0)
