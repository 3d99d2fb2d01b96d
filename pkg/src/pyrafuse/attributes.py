"""Geometric attributes and their per-scale stacks.

Phase dip is the ratio of the lateral to the temporal instantaneous phase
derivative, signed so that an event whose time increases with trace index
has positive dip (the slope of constant-phase contours: dt/dx along theta =
const is -(dtheta/dx)/(dtheta/dt)). It stays in sample units
(samples/trace), which makes it invariant under dyadic downsampling; the
conversion to physical units happens only in dip angle and curvature, via
the time-to-depth convention s = p * (v * dt / 2) / dx with a user-supplied
constant velocity.

A stack gathers the same attribute at every pyramid scale, resized back to
base resolution, ready for fusion. Scale 0 of a stack is bit-for-bit the
conventional single-scale attribute. Volumes have no 3D pyramid: dips come
from per-section 2D pyramids in each orientation (fixed-y sections give dip
along x, fixed-x sections give dip along y), are expanded to the base
lattice, and only then combined into dip angle or curvature per scale.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import Axis, analytic_section, phase_derivative
from .errors import BoundsError, ConfigError, ParameterError, ShapeError, SizeError
from .grid import AttributeKind, AttributeMap, Grid2, SeismicSection, SeismicVolume
from .pyramid import GaussianKernel, build_pyramid, expand_to, make_kernel

# Temporal phase derivatives below this (rad/sample) make the dip quotient
# unstable; such cells output 0 with quality 0.
EPS_FREQ_DEFAULT = 1e-3
# Dips are clamped to this magnitude (samples/trace).
P_MAX_DEFAULT = 5.0
VELOCITY_DEFAULT = 2000.0  # m/s

_MIN_DIP_ROWS = 4
_MIN_DIP_COLS = 3


def worker_count() -> int:
    """Worker cap from PYRAFUSE_THREADS (unset or 0 means automatic)."""
    raw = os.environ.get("PYRAFUSE_THREADS", "0").strip()
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"PYRAFUSE_THREADS must be an integer, got {raw!r}") from None
    if n <= 0:
        return min(8, os.cpu_count() or 1)
    return n


def phase_dip(
    section: SeismicSection,
    *,
    p_max: float = P_MAX_DEFAULT,
    eps_freq: float = EPS_FREQ_DEFAULT,
    scale: int = 0,
) -> AttributeMap:
    """Phase dip of a section in samples/trace, with a quality mask.

    Cells where the envelope guard fires or |dtheta/dt| < eps_freq are 0
    with quality 0; everything else is clamped to [-p_max, p_max].

    Raises:
        SizeError: section smaller than 4 samples x 3 traces.
        ParameterError: p_max or eps_freq not positive.
    """
    if p_max <= 0.0 or not np.isfinite(p_max):
        raise ParameterError(f"p_max must be positive, got {p_max!r}")
    if eps_freq <= 0.0 or not np.isfinite(eps_freq):
        raise ParameterError(f"eps_freq must be positive, got {eps_freq!r}")
    rows, cols = section.grid.shape
    if rows < _MIN_DIP_ROWS or cols < _MIN_DIP_COLS:
        raise SizeError(
            f"phase dip needs at least {_MIN_DIP_ROWS}x{_MIN_DIP_COLS}, "
            f"got {rows}x{cols}"
        )
    a = analytic_section(section)
    d_time = phase_derivative(a, Axis.TIME).data
    d_trace = phase_derivative(a, Axis.TRACE).data
    ok = np.abs(d_time) >= eps_freq  # also false wherever the envelope guard fired
    dip = np.zeros_like(d_time)
    np.divide(d_trace, d_time, out=dip, where=ok)
    np.negative(dip, out=dip)
    np.clip(dip, -p_max, p_max, out=dip)
    dip[~ok] = 0.0
    return AttributeMap(
        grid=Grid2(dip),
        kind=AttributeKind.PHASE_DIP,
        scale=scale,
        dt=section.dt,
        dx=section.dx,
        quality=Grid2(ok.astype(np.float64)),
    )


@dataclass(frozen=True, eq=False)
class DipField:
    """Inline dip p (and crossline dip q for volumes) on one lateral lattice.

    For time-slice fields the grid rows index x and the columns index y.
    ``quality`` is 1.0 where both dips are trusted.
    """

    p: Grid2
    q: Grid2 | None
    dt: float
    dx: float
    dy: float | None = None
    quality: Grid2 | None = None

    def __post_init__(self):
        if self.q is not None and self.q.shape != self.p.shape:
            raise ShapeError(f"q shape {self.q.shape} != p shape {self.p.shape}")
        if self.quality is not None and self.quality.shape != self.p.shape:
            raise ShapeError("quality shape differs from dip shape")


def dip_angle(
    p: AttributeMap,
    q: AttributeMap,
    dt: float,
    dx: float,
    dy: float,
    velocity: float = VELOCITY_DEFAULT,
) -> AttributeMap:
    """Combine inline and crossline dip into an angle map (radians).

    angle = atan(sqrt(s_x^2 + s_y^2)) with s_x = p*(v*dt/2)/dx and
    s_y = q*(v*dt/2)/dy. Output is in [0, pi/2).

    Raises:
        ShapeError: p and q dims differ.
        ParameterError: inputs are not dip maps, or velocity <= 0.
    """
    if p.kind is not AttributeKind.PHASE_DIP or q.kind is not AttributeKind.PHASE_DIP:
        raise ParameterError("dip_angle expects two phase-dip maps")
    if p.grid.shape != q.grid.shape:
        raise ShapeError(f"p dims {p.grid.shape} != q dims {q.grid.shape}")
    if velocity <= 0.0 or not np.isfinite(velocity):
        raise ParameterError(f"velocity must be positive, got {velocity!r}")
    half_step = velocity * dt / 2.0
    s_x = p.grid.data * (half_step / dx)
    s_y = q.grid.data * (half_step / dy)
    angle = np.arctan(np.hypot(s_x, s_y))
    quality = None
    if p.quality is not None and q.quality is not None:
        quality = Grid2(np.minimum(p.quality.data, q.quality.data))
    else:
        quality = p.quality or q.quality
    return AttributeMap(
        grid=Grid2(angle),
        kind=AttributeKind.DIP_ANGLE,
        scale=p.scale if p.scale == q.scale else None,
        dt=dt,
        dx=dx,
        dy=dy,
        quality=quality,
        meta={"velocity": repr(float(velocity)), "convention": "time-dip"},
    )


@dataclass(frozen=True, eq=False)
class CurvaturePair:
    k_pos: AttributeMap
    k_neg: AttributeMap


def curvature(dips: DipField, velocity: float = VELOCITY_DEFAULT) -> CurvaturePair:
    """Most-positive / most-negative curvature of a time-slice dip field.

    With physical slopes s_x, s_y (same convention as :func:`dip_angle`):

        a = (1/2) ds_x/dx,  b = (1/2) ds_y/dy,
        c = (1/2) (ds_x/dy + ds_y/dx),
        k_pos/k_neg = (a + b) +/- sqrt((a - b)^2 + c^2)

    so k_pos >= k_neg everywhere; units are 1/m.

    Raises:
        ConfigError: no crossline dip (section-derived field).
        SizeError: lattice smaller than 3x3.
    """
    if dips.q is None:
        raise ConfigError("curvature needs a volume-derived dip field (crossline dip missing)")
    if dips.dy is None:
        raise ConfigError("curvature needs the crossline interval dy")
    rows, cols = dips.p.shape
    if rows < 3 or cols < 3:
        raise SizeError(f"curvature needs at least a 3x3 lattice, got {rows}x{cols}")
    if velocity <= 0.0 or not np.isfinite(velocity):
        raise ParameterError(f"velocity must be positive, got {velocity!r}")
    half_step = velocity * dips.dt / 2.0
    s_x = dips.p.data * (half_step / dips.dx)
    s_y = dips.q.data * (half_step / dips.dy)
    a = 0.5 * np.gradient(s_x, dips.dx, axis=0, edge_order=1)
    b = 0.5 * np.gradient(s_y, dips.dy, axis=1, edge_order=1)
    c = 0.5 * (
        np.gradient(s_x, dips.dy, axis=1, edge_order=1)
        + np.gradient(s_y, dips.dx, axis=0, edge_order=1)
    )
    fold = np.hypot(a - b, c)
    mean2 = a + b
    common = dict(
        dt=dips.dt,
        dx=dips.dx,
        dy=dips.dy,
        quality=dips.quality,
        meta={"velocity": repr(float(velocity)), "convention": "time-dip"},
    )
    return CurvaturePair(
        k_pos=AttributeMap(Grid2(mean2 + fold), AttributeKind.CURV_POS, **common),
        k_neg=AttributeMap(Grid2(mean2 - fold), AttributeKind.CURV_NEG, **common),
    )


@dataclass(frozen=True, eq=False)
class AttributeStack:
    """K same-kind maps on one base lattice, ordered by source scale."""

    maps: tuple[AttributeMap, ...]

    def __post_init__(self):
        if len(self.maps) < 1:
            raise ShapeError("a stack needs at least one map")
        first = self.maps[0]
        for m in self.maps[1:]:
            if m.grid.shape != first.grid.shape:
                raise ShapeError(
                    f"stack dims disagree: {m.grid.shape} vs {first.grid.shape}"
                )
            if m.kind is not first.kind:
                raise ShapeError(f"stack kinds disagree: {m.kind} vs {first.kind}")
        object.__setattr__(self, "maps", tuple(self.maps))

    @property
    def scales(self) -> int:
        return len(self.maps)

    @property
    def kind(self) -> AttributeKind:
        return self.maps[0].kind

    def values(self) -> np.ndarray:
        """(K, rows, cols) float array of the stacked maps."""
        return np.stack([m.grid.data for m in self.maps])

    def validity(self) -> np.ndarray:
        """(K, rows, cols) bool array; maps without a mask count as all-valid."""
        return np.stack(
            [
                np.ones(m.grid.shape, dtype=bool)
                if m.quality is None
                else m.quality.data > 0.5
                for m in self.maps
            ]
        )


def _dip_max_scales(rows: int, cols: int, kernel: GaussianKernel) -> int:
    min_rows = max(kernel.support, _MIN_DIP_ROWS)
    min_cols = max(kernel.support, _MIN_DIP_COLS)
    count = 0
    r, c = rows, cols
    while r >= min_rows and c >= min_cols:
        count += 1
        r = (r + 1) // 2
        c = (c + 1) // 2
    return count


def _dip_levels_expanded(
    section: SeismicSection,
    scales: int,
    kernel: GaussianKernel,
    *,
    p_max: float,
    eps_freq: float,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per scale: (dip values, trust mask), both at the section's base dims."""
    feasible = _dip_max_scales(section.grid.rows, section.grid.cols, kernel)
    if int(scales) > feasible:
        raise SizeError(
            f"section {section.grid.rows}x{section.grid.cols} supports at most "
            f"{feasible} dip scale(s), requested {scales}"
        )
    pyr = build_pyramid(section.grid, scales, kernel)
    rows, cols = section.grid.shape
    out: list[tuple[np.ndarray, np.ndarray]] = []
    for i, level in enumerate(pyr.levels):
        level_section = SeismicSection(
            level,
            dt=section.dt * 2**i,
            dx=section.dx * 2**i,
            label=section.label,
        )
        m = phase_dip(level_section, p_max=p_max, eps_freq=eps_freq, scale=i)
        values = expand_to(m.grid, rows, cols).data
        trust = expand_to(m.quality, rows, cols).data > 0.5
        out.append((values, trust))
    return out


def dip_stack(
    section: SeismicSection,
    scales: int,
    kernel: GaussianKernel | None = None,
    *,
    p_max: float = P_MAX_DEFAULT,
    eps_freq: float = EPS_FREQ_DEFAULT,
) -> AttributeStack:
    """Phase dip at every pyramid scale, expanded to base resolution."""
    kernel = kernel if kernel is not None else make_kernel()
    levels = _dip_levels_expanded(
        section, scales, kernel, p_max=p_max, eps_freq=eps_freq
    )
    maps = tuple(
        AttributeMap(
            grid=Grid2(values),
            kind=AttributeKind.PHASE_DIP,
            scale=i,
            dt=section.dt,
            dx=section.dx,
            quality=Grid2(trust.astype(np.float64)),
            meta={"sigma": repr(kernel.sigma), "radius": str(kernel.radius)},
        )
        for i, (values, trust) in enumerate(levels)
    )
    return AttributeStack(maps)


def dip_slice_fields(
    volume: SeismicVolume,
    t_index: int,
    scales: int,
    kernel: GaussianKernel | None = None,
    *,
    p_max: float = P_MAX_DEFAULT,
    eps_freq: float = EPS_FREQ_DEFAULT,
) -> list[DipField]:
    """Per-scale inline+crossline dip fields at one time slice.

    Work across sections runs on a thread pool sized by
    :func:`worker_count`; results are deterministic regardless of the pool
    size because each section owns disjoint output cells.
    """
    kernel = kernel if kernel is not None else make_kernel()
    t = int(t_index)
    if t < 0 or t >= volume.nt:
        raise BoundsError(f"time index {t} outside [0, {volume.nt - 1}]")
    scales = int(scales)
    nx, ny = volume.nx, volume.ny
    p_vals = np.empty((scales, nx, ny))
    p_ok = np.empty((scales, nx, ny), dtype=bool)
    q_vals = np.empty((scales, nx, ny))
    q_ok = np.empty((scales, nx, ny), dtype=bool)

    def dip_rows(section: SeismicSection) -> list[tuple[np.ndarray, np.ndarray]]:
        levels = _dip_levels_expanded(
            section, scales, kernel, p_max=p_max, eps_freq=eps_freq
        )
        return [(values[t, :], trust[t, :]) for values, trust in levels]

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        along_x = pool.map(lambda y: dip_rows(volume.crossline_section(y)), range(ny))
        for y, rows in enumerate(along_x):
            for i, (values, trust) in enumerate(rows):
                p_vals[i, :, y] = values
                p_ok[i, :, y] = trust
        along_y = pool.map(lambda x: dip_rows(volume.inline_section(x)), range(nx))
        for x, rows in enumerate(along_y):
            for i, (values, trust) in enumerate(rows):
                q_vals[i, x, :] = values
                q_ok[i, x, :] = trust

    return [
        DipField(
            p=Grid2(p_vals[i]),
            q=Grid2(q_vals[i]),
            dt=volume.dt,
            dx=volume.dx,
            dy=volume.dy,
            quality=Grid2((p_ok[i] & q_ok[i]).astype(np.float64)),
        )
        for i in range(scales)
    ]


def attribute_stack(
    data: SeismicSection | SeismicVolume,
    kind: AttributeKind,
    scales: int,
    kernel: GaussianKernel | None = None,
    *,
    time_index: int | None = None,
    velocity: float = VELOCITY_DEFAULT,
    p_max: float = P_MAX_DEFAULT,
    eps_freq: float = EPS_FREQ_DEFAULT,
) -> AttributeStack:
    """K aligned maps of ``kind``, one per pyramid scale.

    Sections support phase dip; volumes support dip angle and curvature at a
    required ``time_index``.

    Raises:
        ConfigError: kind/input combination unsupported, or missing
            time_index for a volume attribute.
    """
    kernel = kernel if kernel is not None else make_kernel()
    if kind is AttributeKind.RAW:
        raise ParameterError("raw data is not a computable attribute")
    if isinstance(data, SeismicSection):
        if kind is not AttributeKind.PHASE_DIP:
            raise ConfigError(
                f"{kind.value} needs a volume; a section only supports phase dip"
            )
        return dip_stack(data, scales, kernel, p_max=p_max, eps_freq=eps_freq)
    if not isinstance(data, SeismicVolume):
        raise ConfigError(f"unsupported input type {type(data).__name__}")
    if kind is AttributeKind.PHASE_DIP:
        raise ConfigError("phase dip runs on sections; extract one from the volume first")
    if kind not in (AttributeKind.DIP_ANGLE, AttributeKind.CURV_POS, AttributeKind.CURV_NEG):
        raise ConfigError(f"unsupported attribute kind {kind.value}")
    if time_index is None:
        raise ConfigError(f"{kind.value} on a volume needs a time index")
    fields = dip_slice_fields(
        volume=data,
        t_index=time_index,
        scales=scales,
        kernel=kernel,
        p_max=p_max,
        eps_freq=eps_freq,
    )
    maps: list[AttributeMap] = []
    for i, field in enumerate(fields):
        if kind is AttributeKind.DIP_ANGLE:
            p_map = AttributeMap(
                field.p, AttributeKind.PHASE_DIP, scale=i,
                dt=data.dt, dx=data.dx, quality=field.quality,
            )
            q_map = AttributeMap(
                field.q, AttributeKind.PHASE_DIP, scale=i,
                dt=data.dt, dx=data.dx, quality=field.quality,
            )
            m = dip_angle(p_map, q_map, data.dt, data.dx, data.dy, velocity)
        else:
            pair = curvature(field, velocity)
            picked = pair.k_pos if kind is AttributeKind.CURV_POS else pair.k_neg
            m = AttributeMap(
                picked.grid, picked.kind, scale=i,
                dt=picked.dt, dx=picked.dx, dy=picked.dy,
                quality=picked.quality, meta=picked.meta,
            )
        m.meta.update(
            {"sigma": repr(kernel.sigma), "radius": str(kernel.radius),
             "time_index": str(int(time_index))}
        )
        maps.append(m)
    return AttributeStack(tuple(maps))
