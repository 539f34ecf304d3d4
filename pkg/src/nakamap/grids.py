"""2-D sample grids, their on-disk format, and grayscale rendering.

An image travels as a pair of files: ``<name>.json`` (header) next to
``<name>.bin`` (raw little-endian float32, row-major).  In memory values are
kept as float64 so downstream estimation runs at full precision; the float32
payload is a storage format, not a compute format.
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateRange,
    IoFailure,
    MalformedHeader,
    MissingFile,
    NonFiniteValue,
    PayloadSizeMismatch,
)

FORMAT_VERSION = 1


class Kind(str, Enum):
    """What the scalar field means. Kinds below RF must be nonnegative."""

    RF = "RF"
    ENVELOPE = "Envelope"
    MU_MAP = "MuMap"
    OMEGA_MAP = "OmegaMap"
    SCALE_MAP = "ScaleMap"
    FIT_MAP = "FitMap"
    LABEL = "Label"


# RF is the only signed kind: raw echo amplitude oscillates around zero.
# Everything else is an envelope, a parameter, or a region index.
_SIGNED_KINDS = frozenset({Kind.RF})


@dataclass(frozen=True)
class Image2D:
    """Immutable 2-D scalar field.

    Parameters
    ----------
    width, height : int
        Grid dimensions, both >= 1.
    kind : Kind
        Semantic tag; decides the value-range invariant.
    data : array_like
        Either a flat sequence of length width*height in row-major order or
        a (height, width) array.  Stored as a read-only float64 copy.
    """

    width: int
    height: int
    kind: Kind
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("width and height must be >= 1")
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        arr = np.array(self.data, dtype=np.float64, order="C", copy=True)
        if arr.ndim == 1:
            if arr.size != self.width * self.height:
                raise ValueError(
                    f"flat data length {arr.size} != width*height "
                    f"{self.width * self.height}"
                )
            arr = arr.reshape(self.height, self.width)
        elif arr.shape != (self.height, self.width):
            raise ValueError(f"data shape {arr.shape} != (height, width)")
        if not np.isfinite(arr).all():
            raise NonFiniteValue(f"non-finite value in {kind.value} image")
        if kind not in _SIGNED_KINDS and (arr < 0.0).any():
            raise NonFiniteValue(f"negative value in {kind.value} image")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, arr, kind):
        """Build from a (height, width) array."""
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise ValueError("from_array expects a 2-D array")
        return cls(width=arr.shape[1], height=arr.shape[0], kind=kind, data=arr)

    @property
    def shape(self):
        return self.data.shape


def _payload_path(header_path):
    return Path(header_path).with_suffix(".bin")


def read_image(path):
    """Read an :class:`Image2D` from its ``.json`` header path.

    Raises
    ------
    MissingFile, MalformedHeader, PayloadSizeMismatch, NonFiniteValue, IoFailure
    """
    header_path = Path(path)
    payload_path = _payload_path(header_path)
    if not header_path.is_file():
        raise MissingFile(str(header_path))
    if not payload_path.is_file():
        raise MissingFile(str(payload_path))
    try:
        with open(header_path, "r", encoding="utf-8") as fh:
            header = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedHeader(f"{header_path}: {exc}") from exc
    except OSError as exc:
        raise IoFailure(str(exc)) from exc

    if not isinstance(header, dict):
        raise MalformedHeader(f"{header_path}: header is not an object")
    for key in ("version", "width", "height", "kind", "dtype", "layout"):
        if key not in header:
            raise MalformedHeader(f"{header_path}: missing key {key!r}")
    if header["version"] != FORMAT_VERSION:
        raise MalformedHeader(f"unsupported version {header['version']!r}")
    if header["dtype"] != "f32le":
        raise MalformedHeader(f"unsupported dtype {header['dtype']!r}")
    if header["layout"] != "row-major":
        raise MalformedHeader(f"unsupported layout {header['layout']!r}")
    width, height = header["width"], header["height"]
    if not isinstance(width, int) or not isinstance(height, int) \
            or isinstance(width, bool) or isinstance(height, bool) \
            or width < 1 or height < 1:
        raise MalformedHeader(f"bad dimensions {width!r} x {height!r}")
    try:
        kind = Kind(header["kind"])
    except ValueError:
        raise MalformedHeader(f"unknown kind {header['kind']!r}") from None

    try:
        raw = payload_path.read_bytes()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    expected = 4 * width * height
    if len(raw) != expected:
        raise PayloadSizeMismatch(
            f"{payload_path}: {len(raw)} bytes, expected {expected}"
        )
    values = np.frombuffer(raw, dtype="<f4").astype(np.float64)
    return Image2D(width=width, height=height, kind=kind, data=values)


def write_image(img, path):
    """Write ``img`` as a ``<path>.json`` / ``.bin`` pair.

    Data is quantized to little-endian float32.  Returns the header path.
    """
    header_path = Path(path)
    if header_path.suffix != ".json":
        header_path = header_path.with_suffix(".json")
    payload_path = _payload_path(header_path)
    header = {
        "version": FORMAT_VERSION,
        "width": img.width,
        "height": img.height,
        "kind": img.kind.value,
        "dtype": "f32le",
        "layout": "row-major",
    }
    try:
        with open(header_path, "w", encoding="utf-8") as fh:
            json.dump(header, fh)
            fh.write("\n")
        payload_path.write_bytes(
            np.ascontiguousarray(img.data, dtype="<f4").tobytes()
        )
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return header_path


def render_gray(img, lo, hi):
    """Render to 8-bit grayscale PGM (binary ``P5``) bytes.

    Values map affinely: ``lo -> 0``, ``hi -> 255``, rounding half up, then
    clamping to [0, 255] (so out-of-window values saturate).

    Raises
    ------
    DegenerateRange
        If ``lo >= hi``.
    """
    lo = float(lo)
    hi = float(hi)
    if not (lo < hi):
        raise DegenerateRange(f"lo={lo!r} must be < hi={hi!r}")
    g = (img.data - lo) / (hi - lo) * 255.0
    g = np.clip(np.floor(g + 0.5), 0.0, 255.0).astype(np.uint8)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + g.tobytes()
