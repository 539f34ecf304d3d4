"""Localized estimators: windows, kernel ladders, and the three map types."""

import numpy as np
import pytest

from nakamap.errors import EmptyKernelSet, ImageTooSmall, OutOfBounds
from nakamap.grids import Image2D, Kind
from nakamap.mapping import (
    KernelSpec,
    estimate_fixed,
    estimate_mkl,
    estimate_wmc,
    window_samples,
)
from nakamap.nakagami import (
    MU_MAX,
    NakagamiParams,
    estimate_mle,
    estimate_moments,
    fit_quality,
)
from nakamap.errors import NakamapError
from nakamap.phantom import Layout, PhantomSpec, generate_distribution_phantom


def _phantom(width, height, regions, seed, layout=Layout.HOMOGENEOUS, **kw):
    spec = PhantomSpec(width=width, height=height, layout=layout,
                       regions=regions, seed=seed, **kw)
    return generate_distribution_phantom(spec)


def _disk(width, height, seed):
    return _phantom(width, height,
                    (NakagamiParams(0.8, 1.0), NakagamiParams(1.5, 1.0)),
                    seed, layout=Layout.DISK)


class TestWindowSamples:
    def test_interior_count_is_size_plus_4_squared(self):
        img = Image2D.from_array(np.arange(400.0).reshape(20, 20), Kind.ENVELOPE)
        s = window_samples(img, (10, 10), 3)
        assert s.n == 49  # (3 + 4)^2: half-extent ceil(5/2) = 3 each way

    def test_corner_truncates(self):
        img = Image2D.from_array(np.arange(400.0).reshape(20, 20), Kind.ENVELOPE)
        s = window_samples(img, (0, 0), 3)
        assert s.n == 16  # 4 x 4 after clipping at the border

    def test_row_major_content(self):
        img = Image2D.from_array(np.arange(64.0).reshape(8, 8), Kind.ENVELOPE)
        s = window_samples(img, (0, 0), 3)
        expect = img.data[0:4, 0:4].ravel()
        assert s.values.tolist() == expect.tolist()

    def test_out_of_bounds(self):
        img = Image2D.from_array(np.ones((8, 8)), Kind.ENVELOPE)
        with pytest.raises(OutOfBounds):
            window_samples(img, (8, 0), 3)
        with pytest.raises(OutOfBounds):
            window_samples(img, (0, -1), 3)


class TestKernelSpec:
    def test_auto_ladder_96(self):
        spec = KernelSpec.auto(96, 96)
        assert spec.sizes == (3, 5, 7, 9, 11)  # largest odd <= 96/8
        assert spec.kmax == 11

    def test_auto_uses_smaller_dimension(self):
        assert KernelSpec.auto(256, 40).sizes == (3, 5)

    def test_auto_too_small(self):
        with pytest.raises(ImageTooSmall):
            KernelSpec.auto(16, 16)

    def test_explicit_validation(self):
        with pytest.raises(EmptyKernelSet):
            KernelSpec(sizes=())
        with pytest.raises(ValueError):
            KernelSpec(sizes=(4,))
        with pytest.raises(ValueError):
            KernelSpec(sizes=(5, 3))
        with pytest.raises(ValueError):
            KernelSpec.auto(96, 96, step=3)

    def test_derived_fields(self):
        spec = KernelSpec(sizes=(3, 7, 11))
        assert (spec.min_size, spec.step, spec.kmax) == (3, 4, 11)


class TestFixed:
    def test_maps_recover_truth_roughly(self):
        t = _phantom(40, 40, (NakagamiParams(1.0, 2.0),), seed=1)
        r = estimate_fixed(t.envelope, 9)
        assert r.mu_map.kind is Kind.MU_MAP
        assert abs(float(np.mean(r.mu_map.data)) - 1.0) < 0.1
        assert abs(float(np.mean(r.omega_map.data)) - 2.0) < 0.1
        assert np.all(r.scale_map.data == 9.0)
        assert r.method == "fixed"

    def test_size_exceeding_image(self):
        t = _phantom(12, 12, (NakagamiParams(1.0, 1.0),), seed=2)
        with pytest.raises(ImageTooSmall):
            estimate_fixed(t.envelope, 13)

    def test_even_size_rejected(self):
        t = _phantom(12, 12, (NakagamiParams(1.0, 1.0),), seed=2)
        with pytest.raises(ValueError):
            estimate_fixed(t.envelope, 4)

    def test_requires_envelope_kind(self):
        img = Image2D.from_array(np.ones((12, 12)), Kind.MU_MAP)
        with pytest.raises(ValueError):
            estimate_fixed(img, 3)

    def test_constant_image_all_defect(self):
        img = Image2D.from_array(np.full((8, 8), 2.5), Kind.ENVELOPE)
        r = estimate_fixed(img, 3)
        assert r.defect_count == 64
        assert r.filled_count == 64
        # energy without variance: post-Rayleigh extreme, own window scale
        assert np.all(r.mu_map.data == np.float64(np.float32(MU_MAX)))
        assert np.all(r.omega_map.data == 6.25)
        assert np.all(r.fit_map.data == 1.0)

    def test_zero_image_floors_mu(self):
        img = Image2D.from_array(np.zeros((8, 8)), Kind.ENVELOPE)
        r = estimate_fixed(img, 3)
        assert r.defect_count == 64
        assert np.all(r.omega_map.data == 0.0)
        assert np.all(r.mu_map.data == np.float64(np.float32(0.02)))

    def test_degenerate_patch_neighbor_filled(self):
        rng = np.random.default_rng(8)
        arr = rng.random((16, 16)) + 0.5
        arr[4:12, 4:12] = 2.0  # flat patch: interior windows are constant
        img = Image2D.from_array(arr, Kind.ENVELOPE)
        r = estimate_fixed(img, 3)
        assert r.filled_count > 0
        assert r.defect_count >= r.filled_count
        filled_vals = r.mu_map.data[7:9, 7:9]
        # filled from a valid neighbor, not the whole-image fallback
        assert np.all(filled_vals < MU_MAX)
        assert np.all(r.mu_map.data > 0.0)
        # omega stays the voxel's own window energy
        assert r.omega_map.data[8, 8] == pytest.approx(4.0, rel=0.3)

    def test_threads_do_not_change_results(self):
        t = _disk(24, 24, seed=3)
        a = estimate_fixed(t.envelope, 5, threads=1)
        b = estimate_fixed(t.envelope, 5, threads=4)
        for x, y in [(a.mu_map, b.mu_map), (a.omega_map, b.omega_map),
                     (a.fit_map, b.fit_map)]:
            assert x.data.tobytes() == y.data.tobytes()


class TestWMC:
    def test_single_size_equals_fixed_bitwise(self):
        t = _disk(24, 24, seed=5)
        f = estimate_fixed(t.envelope, 7)
        w = estimate_wmc(t.envelope, (7,))
        assert w.mu_map.data.tobytes() == f.mu_map.data.tobytes()
        assert w.omega_map.data.tobytes() == f.omega_map.data.tobytes()

    def test_mean_identity(self):
        t = _disk(24, 24, seed=6)
        f7 = estimate_fixed(t.envelope, 7)
        f9 = estimate_fixed(t.envelope, 9)
        w = estimate_wmc(t.envelope, (7, 9))
        expect = (f7.mu_map.data + f9.mu_map.data) / 2
        assert w.mu_map.data.tobytes() == expect.tobytes()
        assert np.all(w.scale_map.data == 8.0)

    def test_compounding_not_worse_than_worst_constituent(self):
        t = _disk(48, 48, seed=3)
        mads = []
        for s in (7, 9):
            r = estimate_fixed(t.envelope, s)
            mads.append(float(np.mean(np.abs(r.mu_map.data - t.truth_mu.data))))
        w = estimate_wmc(t.envelope, (7, 9))
        mad_w = float(np.mean(np.abs(w.mu_map.data - t.truth_mu.data)))
        assert mad_w <= max(mads)

    def test_empty_sizes(self):
        t = _disk(24, 24, seed=5)
        with pytest.raises(EmptyKernelSet):
            estimate_wmc(t.envelope, ())


class TestMKL:
    def test_scale_map_takes_only_candidate_sizes(self):
        t = _disk(24, 24, seed=7)
        r = estimate_mkl(t.envelope, spec=KernelSpec(sizes=(3, 5)))
        assert set(np.unique(r.scale_map.data)) <= {3.0, 5.0}
        assert r.method == "mkl"

    def test_per_voxel_choice_is_optimal(self):
        # brute-force recomputation through the public scalar API
        t = _disk(12, 12, seed=9)
        sizes = (3, 5)
        r = estimate_mkl(t.envelope, spec=KernelSpec(sizes=sizes))
        for y in range(12):
            for x in range(12):
                best = None
                for size in sizes:
                    s = window_samples(t.envelope, (x, y), size)
                    try:
                        params, _ = estimate_mle(s)
                    except NakamapError:
                        try:
                            params = estimate_moments(s)
                        except NakamapError:
                            continue
                    rmse = fit_quality(params, s).rmse
                    if best is None or rmse < best[0]:
                        best = (rmse, params, size)
                assert best is not None
                rmse, params, size = best
                assert r.fit_map.data[y, x] == np.float64(np.float32(rmse))
                assert r.mu_map.data[y, x] == np.float64(np.float32(params.mu))
                assert r.omega_map.data[y, x] == params.omega
                assert r.scale_map.data[y, x] == float(size)

    def test_outperforms_smallest_fixed_window(self):
        t = _disk(48, 48, seed=2)
        m = estimate_mkl(t.envelope, spec=KernelSpec(sizes=(3, 5)))
        f = estimate_fixed(t.envelope, 3)
        mad_m = float(np.mean(np.abs(m.mu_map.data - t.truth_mu.data)))
        mad_f = float(np.mean(np.abs(f.mu_map.data - t.truth_mu.data)))
        assert mad_m <= mad_f

    def test_auto_spec_too_small_image(self):
        t = _phantom(16, 16, (NakagamiParams(1.0, 1.0),), seed=4)
        with pytest.raises(ImageTooSmall):
            estimate_mkl(t.envelope)

    def test_rectangular_stub(self):
        t = _disk(24, 24, seed=5)
        with pytest.raises(NotImplementedError):
            estimate_mkl(t.envelope, spec=KernelSpec(sizes=(3,)), rectangular=True)

    def test_threads_do_not_change_results(self):
        t = _disk(24, 24, seed=10)
        a = estimate_mkl(t.envelope, spec=KernelSpec(sizes=(3, 5)), threads=1)
        b = estimate_mkl(t.envelope, spec=KernelSpec(sizes=(3, 5)), threads=3)
        assert a.mu_map.data.tobytes() == b.mu_map.data.tobytes()
        assert a.scale_map.data.tobytes() == b.scale_map.data.tobytes()
        assert a.fit_map.data.tobytes() == b.fit_map.data.tobytes()
