"""SEG-Y import: the fixed-trace-length subset with IBM or IEEE samples.

Layout handled here: 3200-byte textual header, 400-byte binary header,
then fixed-size trace records (240-byte trace header + ns samples). From
the binary header only three big-endian words are read (absolute offsets
from the start of the file):

    3216  uint16  sample interval, microseconds
    3220  uint16  samples per trace
    3224  uint16  sample format code (1 = IBM float, 5 = IEEE float32)

Traces are organized into a volume when the inline/crossline trace-header
words (offsets 188 and 192 inside each trace header) form a complete
regular grid with at least two distinct values on each axis; anything else
imports as a single 2D section in file order. Lateral spacings are not
stored in this header subset, so the importer takes them as options.

IBM single precision: sign bit, 7-bit base-16 exponent biased by 64,
24-bit fraction in [0, 1):

    value = (1 - 2*sign) * (fraction / 2**24) * 16**(exponent - 64)

so 0x42640000 decodes to +0.390625 * 16**2 = 100.0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ParameterError, UnsupportedFormatError
from .grid import Grid2, SeismicSection, SeismicVolume

TEXT_HEADER_BYTES = 3200
BINARY_HEADER_BYTES = 400
HEADER_BYTES = TEXT_HEADER_BYTES + BINARY_HEADER_BYTES
TRACE_HEADER_BYTES = 240

_OFF_SAMPLE_INTERVAL = 3216
_OFF_SAMPLES_PER_TRACE = 3220
_OFF_FORMAT_CODE = 3224
_OFF_INLINE = 188  # within the trace header
_OFF_CROSSLINE = 192

FORMAT_IBM = 1
FORMAT_IEEE = 5
SUPPORTED_FORMATS = (FORMAT_IBM, FORMAT_IEEE)


def decode_ibm32(words) -> np.ndarray:
    """Decode IBM System/360 single-precision words (uint32) to float64."""
    w = np.asarray(words, dtype=np.uint64)
    sign = 1.0 - 2.0 * ((w >> 31) & 1).astype(np.float64)
    exponent = ((w >> 24) & 0x7F).astype(np.int64) - 64
    fraction = (w & 0xFFFFFF).astype(np.float64) / float(1 << 24)
    return sign * fraction * np.power(16.0, exponent.astype(np.float64))


def encode_ibm32(values) -> np.ndarray:
    """Encode floats as IBM single-precision words (uint32).

    Round-trips IEEE float32 values within float32 precision; used to build
    fixtures and to verify the decoder.

    Raises:
        ParameterError: magnitude outside the representable IBM range.
    """
    vals = np.asarray(values, dtype=np.float64)
    out = np.zeros(vals.shape, dtype=np.uint32)
    flat = vals.ravel()
    out_flat = out.ravel()
    for i, v in enumerate(flat):
        if v == 0.0 or not np.isfinite(v):
            if not np.isfinite(v):
                raise ParameterError(f"cannot encode non-finite value {v!r}")
            continue
        sign = 1 if v < 0 else 0
        mag = abs(v)
        # choose e with mag / 16**e in [1/16, 1)
        e = int(np.floor(np.log2(mag) / 4.0)) + 1
        frac = mag / 16.0**e
        while frac >= 1.0:
            e += 1
            frac /= 16.0
        while frac < 1.0 / 16.0:
            e -= 1
            frac *= 16.0
        mantissa = int(round(frac * (1 << 24)))
        if mantissa == 1 << 24:
            e += 1
            mantissa = 1 << 20
        if not -64 <= e <= 63:
            raise ParameterError(f"value {v!r} outside the IBM float range")
        out_flat[i] = (sign << 31) | ((e + 64) << 24) | mantissa
    return out


@dataclass(frozen=True)
class SegyImportOptions:
    """Knobs for :func:`read_segy`.

    format_code overrides the binary-header value (1 or 5); big_endian
    False flips the byte order of header words and samples for
    nonstandard little-endian writers; max_traces caps how many traces are
    read; dx/dy supply the lateral spacings SEG-Y does not carry here.
    """

    format_code: int | None = None
    big_endian: bool = True
    max_traces: int | None = None
    dx: float = 25.0
    dy: float = 25.0

    def __post_init__(self):
        if self.format_code is not None and self.format_code not in SUPPORTED_FORMATS:
            raise UnsupportedFormatError(
                f"format code {self.format_code} unsupported; "
                f"supported: {SUPPORTED_FORMATS}"
            )
        if self.max_traces is not None and int(self.max_traces) < 1:
            raise ParameterError(f"max_traces must be >= 1, got {self.max_traces}")


def _read_u16(blob: bytes, offset: int, big_endian: bool) -> int:
    order = ">u2" if big_endian else "<u2"
    return int(np.frombuffer(blob, dtype=order, count=1, offset=offset)[0])


def read_segy(path: str, options: SegyImportOptions | None = None):
    """Import a SEG-Y file as a SeismicSection or SeismicVolume.

    Raises:
        FormatError: file shorter than its headers, zero sample interval
            or trace length, or trailing bytes that do not divide into
            whole trace records.
        UnsupportedFormatError: sample format other than 1 or 5.
    """
    options = options or SegyImportOptions()
    with open(path, "rb") as handle:
        blob = handle.read()
    if len(blob) < HEADER_BYTES:
        raise FormatError(
            f"{path}: file holds {len(blob)} bytes, SEG-Y headers need {HEADER_BYTES}",
            offset=len(blob),
        )
    big = options.big_endian
    dt_us = _read_u16(blob, _OFF_SAMPLE_INTERVAL, big)
    ns = _read_u16(blob, _OFF_SAMPLES_PER_TRACE, big)
    fmt = options.format_code or _read_u16(blob, _OFF_FORMAT_CODE, big)
    if dt_us == 0:
        raise FormatError(f"{path}: sample interval is 0", offset=_OFF_SAMPLE_INTERVAL)
    if ns == 0:
        raise FormatError(f"{path}: samples per trace is 0", offset=_OFF_SAMPLES_PER_TRACE)
    if fmt not in SUPPORTED_FORMATS:
        raise UnsupportedFormatError(
            f"{path}: sample format {fmt} unsupported (supported: "
            f"{FORMAT_IBM} = IBM float, {FORMAT_IEEE} = IEEE float32)",
        )

    record = TRACE_HEADER_BYTES + 4 * ns
    body = len(blob) - HEADER_BYTES
    n_traces = body // record
    if n_traces < 1:
        raise FormatError(f"{path}: no complete trace records", offset=HEADER_BYTES)
    if body % record != 0:
        raise FormatError(
            f"{path}: {body} bytes of traces is not a whole number of "
            f"{record}-byte records",
            offset=HEADER_BYTES + n_traces * record,
        )
    if options.max_traces is not None:
        n_traces = min(n_traces, int(options.max_traces))

    word_order = ">u4" if big else "<u4"
    ieee_order = ">f4" if big else "<f4"
    int_order = ">i4" if big else "<i4"
    traces = np.empty((ns, n_traces), dtype=np.float64)
    inlines = np.empty(n_traces, dtype=np.int64)
    crosslines = np.empty(n_traces, dtype=np.int64)
    for j in range(n_traces):
        start = HEADER_BYTES + j * record
        inlines[j] = np.frombuffer(blob, dtype=int_order, count=1, offset=start + _OFF_INLINE)[0]
        crosslines[j] = np.frombuffer(blob, dtype=int_order, count=1, offset=start + _OFF_CROSSLINE)[0]
        sample_start = start + TRACE_HEADER_BYTES
        if fmt == FORMAT_IEEE:
            traces[:, j] = np.frombuffer(blob, dtype=ieee_order, count=ns, offset=sample_start)
        else:
            words = np.frombuffer(blob, dtype=word_order, count=ns, offset=sample_start)
            traces[:, j] = decode_ibm32(words)
    if not np.isfinite(traces).all():
        raise FormatError(f"{path}: non-finite samples after decode", offset=HEADER_BYTES)

    dt = dt_us * 1e-6
    volume = _try_volume(traces, inlines, crosslines, dt, options)
    if volume is not None:
        return volume
    return SeismicSection(Grid2(traces), dt=dt, dx=options.dx, label="segy import")


def _try_volume(traces, inlines, crosslines, dt, options):
    unique_il = np.unique(inlines)
    unique_xl = np.unique(crosslines)
    if len(unique_il) < 2 or len(unique_xl) < 2:
        return None
    if len(unique_il) * len(unique_xl) != traces.shape[1]:
        return None
    il_index = {v: i for i, v in enumerate(unique_il)}
    xl_index = {v: i for i, v in enumerate(unique_xl)}
    data = np.full((traces.shape[0], len(unique_il), len(unique_xl)), np.nan)
    for j in range(traces.shape[1]):
        data[:, il_index[inlines[j]], xl_index[crosslines[j]]] = traces[:, j]
    if np.isnan(data).any():  # duplicate pair left a hole: irregular geometry
        return None
    return SeismicVolume(data, dt=dt, dx=options.dx, dy=options.dy)
