"""Speckle phantoms with known ground truth.

Two families:

* distribution phantoms draw every voxel's envelope amplitude directly
  from a region's Nakagami law (sqrt of a gamma variate), so the truth
  maps are exact by construction;
* scatterer phantoms build a point-scatterer field, convolve it with a
  separable cosine-modulated Gaussian pulse, and envelope-detect the
  resulting RF, so the truth is defined as the whole-region MLE fit of
  the generated envelope ("regional-mle").

Reproducibility: every random quantity comes from a counter-based Philox
stream.  Distribution phantoms key one stream per voxel with
(seed, x, y), so any two runs -- and any two voxels -- are independent and
bit-reproducible regardless of evaluation order.  Scatterer phantoms use
two streams, (seed, 101) for positions and (seed, 102) for amplitudes.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.ndimage import convolve1d

from .envelope import Axis, RFFrame, analytic_envelope
from .errors import DensityOutOfRange, InvalidSpec
from .grids import Image2D, Kind
from .nakagami import SampleSet, estimate_mle

_MASK64 = (1 << 64) - 1


class Layout(str, Enum):
    HOMOGENEOUS = "homogeneous"
    DISK = "disk"            # background + circular inclusion
    QUADRANTS = "quadrants"  # four equal rectangles
    SCATTERERS = "scatterers"


class Arrangement(str, Enum):
    RANDOM = "random"
    PERIODIC = "periodic"


_REGION_COUNT = {
    Layout.HOMOGENEOUS: 1,
    Layout.DISK: 2,
    Layout.QUADRANTS: 4,
    Layout.SCATTERERS: 0,
}


@dataclass(frozen=True)
class PhantomSpec:
    """Geometry, regions, and generator knobs for one phantom.

    regions: one NakagamiParams per region, ordered by label (disk:
    background then inclusion; quadrants: top-left, top-right,
    bottom-left, bottom-right).  Scatterer phantoms take no regions;
    density is the expected scatterer count per voxel and the pulse is a
    cosine at psf_freq cycles/voxel under a Gaussian with the given axial
    and lateral sigmas.
    """

    width: int
    height: int
    layout: Layout
    regions: tuple = ()
    disk_center: tuple = None
    disk_radius: float = None
    density: float = 0.1
    arrangement: Arrangement = Arrangement.RANDOM
    psf_freq: float = 0.25
    psf_axial_sigma: float = 2.0
    psf_lateral_sigma: float = 1.5
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "layout", Layout(self.layout))
        object.__setattr__(self, "arrangement", Arrangement(self.arrangement))
        object.__setattr__(self, "regions", tuple(self.regions))
        if self.width < 1 or self.height < 1:
            raise InvalidSpec("width and height must be >= 1")
        want = _REGION_COUNT[self.layout]
        if len(self.regions) != want:
            raise InvalidSpec(
                f"{self.layout.value} layout needs {want} region(s), "
                f"got {len(self.regions)}"
            )
        if self.layout is Layout.DISK:
            if self.disk_center is None:
                object.__setattr__(
                    self,
                    "disk_center",
                    ((self.width - 1) / 2.0, (self.height - 1) / 2.0),
                )
            r = self.disk_radius
            if r is None:
                r = min(self.width, self.height) / 4.0
                object.__setattr__(self, "disk_radius", r)
            if not (0.0 < r < min(self.width, self.height) / 2.0):
                raise InvalidSpec(f"disk radius {r} out of range")
        if self.layout is Layout.SCATTERERS:
            if not (0.001 <= self.density <= 1.0):
                raise DensityOutOfRange(f"density {self.density} not in [0.001, 1]")


@dataclass(frozen=True)
class PhantomTruth:
    """Generated envelope plus its ground truth.

    truth_kind is "exact" for distribution phantoms and "regional-mle"
    for scatterer phantoms (truth maps carry the whole-region fit there).
    """

    envelope: Image2D
    truth_mu: Image2D
    truth_omega: Image2D
    labels: Image2D
    truth_kind: str


def _label_array(spec):
    h, w = spec.height, spec.width
    if spec.layout is Layout.HOMOGENEOUS or spec.layout is Layout.SCATTERERS:
        return np.zeros((h, w), dtype=np.int64)
    if spec.layout is Layout.DISK:
        cx, cy = spec.disk_center
        yy, xx = np.mgrid[0:h, 0:w]
        inside = (xx - cx) ** 2 + (yy - cy) ** 2 <= spec.disk_radius ** 2
        return inside.astype(np.int64)
    # quadrants: split at floor(w/2), floor(h/2)
    yy, xx = np.mgrid[0:h, 0:w]
    return ((xx >= w // 2) + 2 * (yy >= h // 2)).astype(np.int64)


def _voxel_rng(seed, x, y):
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=[seed & _MASK64, x, y]))
    )


def generate_distribution_phantom(spec):
    """Draw each voxel straight from its region's Nakagami law."""
    if spec.layout is Layout.SCATTERERS:
        raise InvalidSpec("scatterers layout needs generate_scatterer_phantom")
    labels = _label_array(spec)
    h, w = spec.height, spec.width
    env = np.empty((h, w))
    tmu = np.empty((h, w))
    tom = np.empty((h, w))
    for y in range(h):
        for x in range(w):
            p = spec.regions[labels[y, x]]
            rng = _voxel_rng(spec.seed, x, y)
            env[y, x] = math.sqrt(rng.gamma(shape=p.mu, scale=p.omega / p.mu))
            tmu[y, x] = p.mu
            tom[y, x] = p.omega
    return PhantomTruth(
        envelope=Image2D.from_array(env, Kind.ENVELOPE),
        truth_mu=Image2D.from_array(tmu, Kind.MU_MAP),
        truth_omega=Image2D.from_array(tom, Kind.OMEGA_MAP),
        labels=Image2D.from_array(labels.astype(np.float64), Kind.LABEL),
        truth_kind="exact",
    )


def _pulse(freq, sigma_ax, sigma_lat):
    t = np.arange(-int(math.ceil(4.0 * sigma_ax)), int(math.ceil(4.0 * sigma_ax)) + 1)
    h_ax = np.exp(-(t * t) / (2.0 * sigma_ax * sigma_ax)) * np.cos(
        2.0 * math.pi * freq * t
    )
    s = np.arange(-int(math.ceil(4.0 * sigma_lat)), int(math.ceil(4.0 * sigma_lat)) + 1)
    h_lat = np.exp(-(s * s) / (2.0 * sigma_lat * sigma_lat))
    return h_ax, h_lat


def generate_scatterer_phantom(spec):
    """Point scatterers convolved with a pulse, then envelope-detected.

    Random arrangement places round(density * W * H) scatterers uniformly
    (collisions accumulate); periodic arrangement puts them on a square
    lattice of period round(1 / sqrt(density)).  Amplitudes are unit
    strength jittered uniformly by +-20% in both cases.
    """
    if spec.layout is not Layout.SCATTERERS:
        raise InvalidSpec("generate_scatterer_phantom needs the scatterers layout")
    h, w = spec.height, spec.width
    field = np.zeros((h, w))
    rng_pos = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=[spec.seed & _MASK64, 101]))
    )
    rng_amp = np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=[spec.seed & _MASK64, 102]))
    )
    if spec.arrangement is Arrangement.RANDOM:
        count = int(round(spec.density * w * h))
        xs = rng_pos.integers(0, w, size=count)
        ys = rng_pos.integers(0, h, size=count)
        amps = rng_amp.uniform(0.8, 1.2, size=count)
        np.add.at(field, (ys, xs), amps)
    else:
        period = max(1, int(round(1.0 / math.sqrt(spec.density))))
        ys = np.arange(period // 2, h, period)
        xs = np.arange(period // 2, w, period)
        amps = rng_amp.uniform(0.8, 1.2, size=ys.size * xs.size)
        field[np.ix_(ys, xs)] = amps.reshape(ys.size, xs.size)
    h_ax, h_lat = _pulse(spec.psf_freq, spec.psf_axial_sigma, spec.psf_lateral_sigma)
    rf = convolve1d(field, h_ax, axis=0, mode="constant", cval=0.0)
    rf = convolve1d(rf, h_lat, axis=1, mode="constant", cval=0.0)
    env = analytic_envelope(RFFrame(Image2D.from_array(rf, Kind.RF), Axis.COLUMNS))
    params, _ = estimate_mle(SampleSet(env.data.ravel()))
    return PhantomTruth(
        envelope=env,
        truth_mu=Image2D.from_array(np.full((h, w), params.mu), Kind.MU_MAP),
        truth_omega=Image2D.from_array(np.full((h, w), params.omega), Kind.OMEGA_MAP),
        labels=Image2D.from_array(np.zeros((h, w)), Kind.LABEL),
        truth_kind="regional-mle",
    )
