"""Localized parameter maps over an envelope image.

Three estimators share one per-window fit (gamma-shape MLE with a moment
fallback, see :mod:`nakamap.nakagami`):

``estimate_fixed``
    One square kernel of odd side ``size``; the classic fixed-window map.
``estimate_wmc``
    Window-size compounding: voxelwise mean of several fixed-size maps.
``estimate_mkl``
    Multiscale kernel selection: per voxel, every candidate size is fitted
    and the size whose model CDF tracks the window's empirical CDF best
    (smallest RMS distance) wins; ties keep the smaller size.

Windows around (x, y) extend a = ceil((size + 2) / 2) voxels each way and
truncate at the image border, so an interior kernel of size m actually
covers (m + 4)^2 samples.  Defect voxels (both estimators failed) take mu,
fit, and scale from the nearest valid voxel (Euclidean distance, row-major
scan order breaking ties) while keeping their own window's omega; an image
with no valid voxel at all falls back to mu = MU_MAX where the window
carries energy and MU_MIN where it does not.

The mu and fit channels are snapped to float32 precision when maps are
assembled (matching the file format's payload precision); omega stays full
float64 in memory.  This makes the shape maps bitwise invariant under
envelope rescaling, which only touches omega.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from ._backend import kernels
from .errors import EmptyKernelSet, ImageTooSmall, OutOfBounds
from .grids import Image2D, Kind
from .nakagami import MU_MAX, MU_MIN, SampleSet


@dataclass(frozen=True)
class KernelSpec:
    """An ascending tuple of odd square kernel sizes.

    ``min_size``, ``step``, and ``kmax`` record how the ladder was built;
    when omitted they are derived from ``sizes``.  :meth:`auto` builds the
    default ladder 3, 5, ..., up to the largest odd size not exceeding
    min(width, height) / 8.
    """

    sizes: tuple
    min_size: int = None
    step: int = None
    kmax: int = None

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes:
            raise EmptyKernelSet("no kernel sizes")
        for s in sizes:
            if s < 3 or s % 2 == 0:
                raise ValueError(f"kernel size {s} must be odd and >= 3")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError(f"kernel sizes must be strictly ascending: {sizes}")
        object.__setattr__(self, "sizes", sizes)
        if self.min_size is None:
            object.__setattr__(self, "min_size", sizes[0])
        if self.kmax is None:
            object.__setattr__(self, "kmax", sizes[-1])
        if self.step is None:
            object.__setattr__(self, "step", sizes[1] - sizes[0] if len(sizes) > 1 else 2)

    @classmethod
    def auto(cls, width, height, min_size=3, step=2, kmax=None):
        """Default ladder for a width x height image.

        Raises ImageTooSmall if the bound (min(M, N) / 8 unless overridden)
        leaves no room for ``min_size``.
        """
        if step < 2 or step % 2 != 0:
            raise ValueError(f"step {step} must be a positive even number")
        if kmax is None:
            k = min(int(width), int(height)) // 8
            if k % 2 == 0:
                k -= 1
            kmax = k
        if kmax < min_size:
            raise ImageTooSmall(
                f"kernel bound {kmax} below minimum size {min_size} "
                f"for a {width}x{height} image"
            )
        sizes = tuple(range(int(min_size), int(kmax) + 1, int(step)))
        return cls(sizes=sizes, min_size=int(min_size), step=int(step), kmax=int(kmax))


@dataclass(frozen=True)
class ParametricResult:
    """Output maps of one estimator run.

    defect_count counts voxels where the MLE failed (moment fallback or
    worse); filled_count counts the subset where the moment estimator
    failed too and the voxel was neighbor-filled.
    """

    mu_map: Image2D
    omega_map: Image2D
    scale_map: Image2D
    fit_map: Image2D
    method: str
    spec: KernelSpec
    defect_count: int
    filled_count: int


def _require_envelope(img):
    if img.kind is not Kind.ENVELOPE:
        raise ValueError(f"estimation needs an Envelope image, got {img.kind}")


def _validate_size(size, img):
    if size < 3 or size % 2 == 0:
        raise ValueError(f"kernel size {size} must be odd and >= 3")
    if size > min(img.width, img.height):
        raise ImageTooSmall(
            f"kernel size {size} exceeds image extent "
            f"{img.width}x{img.height}"
        )


def window_samples(img, center, size):
    """Samples of the square kernel centered at ``center = (x, y)``.

    Half-extent is ceil((size + 2) / 2) per direction, truncated at the
    borders; values are returned row-major as a SampleSet.
    """
    x, y = int(center[0]), int(center[1])
    if not (0 <= x < img.width and 0 <= y < img.height):
        raise OutOfBounds(f"center {center} outside {img.width}x{img.height}")
    _validate_size(size, img)
    a = (size + 3) // 2
    xlo, xhi = max(0, x - a), min(img.width - 1, x + a)
    ylo, yhi = max(0, y - a), min(img.height - 1, y + a)
    return SampleSet(img.data[ylo:yhi + 1, xlo:xhi + 1].ravel())


def _resolve_threads(threads):
    t = int(threads)
    if t <= 0:
        env = os.environ.get("NAKAMAP_THREADS", "").strip()
        if env:
            t = int(env)
    if t <= 0:
        t = os.cpu_count() or 1
    return t


def _run_rows(height, threads, fn):
    """Run fn(y0, y1) over disjoint row ranges, threaded when it can help.

    The compiled kernels release the GIL, so chunked rows actually run in
    parallel there; the pure backend holds the GIL and gets one call.
    Either way every voxel is written exactly once, so results do not
    depend on the thread count.
    """
    if threads <= 1 or not _backend.COMPILED or height < 2:
        fn(0, height)
        return
    nchunks = min(threads * 4, height)
    bounds = [height * i // nchunks for i in range(nchunks + 1)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(fn, bounds[i], bounds[i + 1])
            for i in range(nchunks)
            if bounds[i] < bounds[i + 1]
        ]
        for fut in futures:
            fut.result()


def _fill_defects(mu, omega, scale, fit, status):
    """Neighbor-fill voxels where both estimators failed (in place)."""
    holes = status == kernels.VOXEL_DEFECT
    filled = int(np.count_nonzero(holes))
    if not filled:
        return 0
    vy, vx = np.nonzero(~holes)
    hy, hx = np.nonzero(holes)
    if vy.size == 0:
        # Nothing valid anywhere: zero-variance windows. Energy without
        # variance is the post-Rayleigh extreme; no energy means no signal.
        mu[holes] = np.where(omega[holes] > 0.0, MU_MAX, MU_MIN)
        return filled
    for y, x in zip(hy.tolist(), hx.tolist()):
        d2 = (vy - y) ** 2 + (vx - x) ** 2
        j = int(np.argmin(d2))  # first minimum == row-major tie-break
        mu[y, x] = mu[vy[j], vx[j]]
        fit[y, x] = fit[vy[j], vx[j]]
        scale[y, x] = scale[vy[j], vx[j]]
    return filled


def _snap32(arr):
    # Quantize to the file payload's float32 grid (kept as float64).
    return arr.astype(np.float32).astype(np.float64)


def _assemble(method, spec, mu, omega, scale, fit, status):
    defect_count = int(np.count_nonzero(status != kernels.VOXEL_MLE))
    filled_count = _fill_defects(mu, omega, scale, fit, status)
    return ParametricResult(
        mu_map=Image2D.from_array(_snap32(mu), Kind.MU_MAP),
        omega_map=Image2D.from_array(omega, Kind.OMEGA_MAP),
        scale_map=Image2D.from_array(scale, Kind.SCALE_MAP),
        fit_map=Image2D.from_array(_snap32(fit), Kind.FIT_MAP),
        method=method,
        spec=spec,
        defect_count=defect_count,
        filled_count=filled_count,
    )


def estimate_fixed(img, size, threads=0):
    """Parameter maps with one fixed kernel size."""
    _require_envelope(img)
    size = int(size)
    _validate_size(size, img)
    height, width = img.height, img.width
    mu = np.zeros((height, width))
    omega = np.zeros((height, width))
    fit = np.zeros((height, width))
    status = np.zeros((height, width), dtype=np.int8)
    env = img.data
    _run_rows(
        height,
        _resolve_threads(threads),
        lambda y0, y1: kernels.map_fixed(env, size, y0, y1, mu, omega, fit, status),
    )
    scale = np.full((height, width), float(size))
    return _assemble("fixed", KernelSpec(sizes=(size,)), mu, omega, scale, fit, status)


def estimate_wmc(img, sizes, threads=0):
    """Window-size compounding: voxelwise mean of fixed-size maps.

    Each constituent map is computed exactly as estimate_fixed computes it
    (snapping included), then the mu, omega, scale, and fit channels are
    averaged in float64.  A single size therefore reproduces
    estimate_fixed bitwise.
    """
    _require_envelope(img)
    spec = KernelSpec(sizes=tuple(int(s) for s in sizes))
    results = [estimate_fixed(img, s, threads=threads) for s in spec.sizes]
    k = len(results)
    mu = results[0].mu_map.data.copy()
    omega = results[0].omega_map.data.copy()
    scale = results[0].scale_map.data.copy()
    fit = results[0].fit_map.data.copy()
    for r in results[1:]:
        mu += r.mu_map.data
        omega += r.omega_map.data
        scale += r.scale_map.data
        fit += r.fit_map.data
    if k > 1:
        mu /= k
        omega /= k
        scale /= k
        fit /= k
    return ParametricResult(
        mu_map=Image2D.from_array(mu, Kind.MU_MAP),
        omega_map=Image2D.from_array(omega, Kind.OMEGA_MAP),
        scale_map=Image2D.from_array(scale, Kind.SCALE_MAP),
        fit_map=Image2D.from_array(fit, Kind.FIT_MAP),
        method="wmc",
        spec=spec,
        defect_count=sum(r.defect_count for r in results),
        filled_count=sum(r.filled_count for r in results),
    )


def estimate_mkl(img, spec=None, threads=0, rectangular=False):
    """Multiscale kernel maps: per-voxel best size by CDF-distance rmse.

    With no spec the default ladder KernelSpec.auto(width, height) is used.
    The scale map records the winning size per voxel.
    """
    _require_envelope(img)
    if rectangular:
        raise NotImplementedError(
            "rectangular kernel search is not implemented; square kernels only"
        )
    if spec is None:
        spec = KernelSpec.auto(img.width, img.height)
    _validate_size(spec.sizes[-1], img)
    height, width = img.height, img.width
    mu = np.zeros((height, width))
    omega = np.zeros((height, width))
    scale = np.zeros((height, width))
    fit = np.zeros((height, width))
    status = np.zeros((height, width), dtype=np.int8)
    env = img.data
    sizes64 = np.asarray(spec.sizes, dtype=np.int64)
    _run_rows(
        height,
        _resolve_threads(threads),
        lambda y0, y1: kernels.map_multiscale(
            env, sizes64, y0, y1, mu, omega, scale, fit, status
        ),
    )
    return _assemble("mkl", spec, mu, omega, scale, fit, status)
