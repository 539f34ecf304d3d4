"""Analytic-signal envelope detection for RF frames."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import AxialTooShort
from .grids import Image2D, Kind


class Axis(str, Enum):
    """Direction the RF lines run in the grid."""

    COLUMNS = "columns"  # each image column is one RF line (axial = y)
    ROWS = "rows"


@dataclass(frozen=True)
class RFFrame:
    """An RF image plus the axis convention of its scan lines."""

    image: Image2D
    axis: Axis = Axis.COLUMNS

    def __post_init__(self):
        if self.image.kind is not Kind.RF:
            raise ValueError(f"RFFrame needs an RF image, got {self.image.kind}")
        object.__setattr__(self, "axis", Axis(self.axis))
        n = self.image.height if self.axis is Axis.COLUMNS else self.image.width
        if n < 4:
            raise AxialTooShort(f"axial length {n} < 4")


def analytic_envelope(frame):
    """Detect the envelope of each RF line via the analytic signal.

    Per line: FFT, zero the negative-frequency bins, double the positive
    ones (DC and, for even lengths, Nyquist keep weight 1), inverse FFT,
    magnitude.  Output is a nonnegative ``Envelope`` image of the same
    shape; an all-zero line maps to an all-zero line.
    """
    ax = 0 if frame.axis is Axis.COLUMNS else 1
    data = frame.image.data
    n = data.shape[ax]
    spec = np.fft.fft(data, axis=ax)
    w = np.zeros(n)
    w[0] = 1.0
    if n % 2 == 0:
        w[n // 2] = 1.0
        w[1:n // 2] = 2.0
    else:
        w[1:(n + 1) // 2] = 2.0
    shape = [1, 1]
    shape[ax] = n
    env = np.abs(np.fft.ifft(spec * w.reshape(shape), axis=ax))
    return Image2D.from_array(env, Kind.ENVELOPE)
