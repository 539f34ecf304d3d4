"""Acceptance gate: ten criteria, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdicts.
Every test prints its line before asserting, so a red criterion still
reports its measured numbers.
"""

import math
import time

import numpy as np
import scipy.integrate
import scipy.special
import pytest

from nakamap.cli import main as cli_main
from nakamap.grids import Image2D, Kind
from nakamap.mapping import KernelSpec, estimate_fixed, estimate_mkl, estimate_wmc
from nakamap.envelope import RFFrame, analytic_envelope
from nakamap.nakagami import (
    NakagamiParams,
    cdf,
    estimate_mle,
    estimate_moments,
    log_likelihood,
    pdf,
    sample,
)
from nakamap.phantom import (
    Arrangement,
    Layout,
    PhantomSpec,
    generate_distribution_phantom,
    generate_scatterer_phantom,
)


def _verdict(num, name, ok, detail):
    print(f"criterion {num} {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


def test_criterion_01_distribution_math():
    t0 = time.perf_counter()
    p_ref = abs(pdf(NakagamiParams(1.0, 1.0), 1.0) - 2.0 * math.exp(-1.0))

    combos = [(0.5, 1.0), (1.0, 1.0), (2.0, 1.0), (4.0, 2.0), (0.8, 0.5), (3.0, 2.5)]
    worst_mass = 0.0
    for mu, om in combos:
        params = NakagamiParams(mu, om)
        mass, _ = scipy.integrate.quad(lambda x: pdf(params, x), 0.0, np.inf)
        worst_mass = max(worst_mass, abs(mass - 1.0))

    params = NakagamiParams(1.7, 1.3)
    worst_cdf = 0.0
    for x in np.linspace(0.05, 3.0, 20):
        part, _ = scipy.integrate.quad(lambda t: pdf(params, t), 0.0, x)
        worst_cdf = max(worst_cdf, abs(cdf(params, x) - part))

    dt = time.perf_counter() - t0
    ok = p_ref <= 1e-12 and worst_mass <= 1e-8 and worst_cdf <= 1e-8 and dt < 1.0
    assert _verdict(
        1, "distribution math", ok,
        f"pdf point err {p_ref:.2e}, mass err {worst_mass:.2e}, "
        f"cdf err {worst_cdf:.2e}, {dt:.2f}s",
    )


def test_criterion_02_mle_consistency():
    t0 = time.perf_counter()
    worst_mu = 0.0
    worst_om = 0.0
    for i, mu in enumerate((0.5, 1.0, 2.0, 4.0)):
        for j, om in enumerate((0.5, 2.0)):
            ss = sample(NakagamiParams(mu, om), 100_000, seed=1000 + 10 * i + j)
            est, _ = estimate_mle(ss)
            worst_mu = max(worst_mu, abs(est.mu - mu) / mu)
            worst_om = max(worst_om, abs(est.omega - om) / om)
    dt = time.perf_counter() - t0
    ok = worst_mu <= 0.03 and worst_om <= 0.02 and dt < 10.0
    assert _verdict(
        2, "MLE consistency", ok,
        f"worst rel mu {worst_mu:.4f} <= 0.03, worst rel omega {worst_om:.4f} "
        f"<= 0.02, {dt:.2f}s",
    )


def test_criterion_03_mle_dominance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2026)
    failures = 0
    for k in range(100):
        mu = float(rng.uniform(0.4, 4.0))
        om = float(rng.uniform(0.5, 3.0))
        ss = sample(NakagamiParams(mu, om), 64, seed=5000 + k)
        fit_mle, _ = estimate_mle(ss)
        fit_mom = estimate_moments(ss)
        if log_likelihood(fit_mle, ss) < log_likelihood(fit_mom, ss):
            failures += 1
    dt = time.perf_counter() - t0
    ok = failures == 0 and dt < 5.0
    assert _verdict(
        3, "MLE dominance", ok, f"{failures}/100 likelihood reversals, {dt:.2f}s"
    )


# --- criterion 4: independent per-voxel reimplementation -------------------
# Deliberately shares no code with nakamap._kernels*: its own trigamma,
# Newton/bisection solver, moment fallback, CDF-distance scan, window
# arithmetic and size selection, written as plain per-voxel loops.  Only the
# scipy special-function scalars are common ground (both backends build on
# them, and equality across independent transcendental implementations is
# not a meaningful target).

_ORACLE_B = (1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
             5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0)


def _oracle_trigamma(z):
    acc = 0.0
    while z < 10.0:
        acc += 1.0 / (z * z)
        z += 1.0
    iz = 1.0 / z
    iz2 = iz * iz
    b2, b4, b6, b8, b10, b12, b14 = _ORACLE_B
    tail = b2 + iz2 * (b4 + iz2 * (b6 + iz2 * (b8 + iz2 * (b10 + iz2 * (b12 + iz2 * b14)))))
    return acc + iz + 0.5 * iz2 + iz * iz2 * tail


def _oracle_score(mu, s):
    return math.log(mu) - float(scipy.special.psi(mu)) - s


def _oracle_solve(s):
    mu = (3.0 - s + math.sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s)

    def bisect():
        lo, hi = 1e-3, 1e3
        if _oracle_score(lo, s) < 0.0:
            return lo
        if _oracle_score(hi, s) > 0.0:
            return hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _oracle_score(mid, s) > 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-10 * hi:
                break
        return 0.5 * (lo + hi)

    if not 0.0 < mu < 1000.0:
        return bisect()
    for _ in range(50):
        nxt = mu - _oracle_score(mu, s) / (1.0 / mu - _oracle_trigamma(mu))
        if not 0.0 < nxt < 1000.0:
            return bisect()
        if abs(nxt - mu) <= 1e-10 * nxt:
            return nxt
        mu = nxt
    return mu


def _oracle_fit(vals):
    """Returns (ok, mu, omega) for one window's sample list."""
    n = len(vals)
    s1 = 0.0
    for v in vals:
        s1 += v * v
    omega = s1 / n
    # likelihood route
    npos = 0
    s1p = 0.0
    slog = 0.0
    for v in vals:
        if v > 0.0:
            y = v * v
            npos += 1
            s1p += y
            slog += math.log(y)
    if n >= 2 and npos > 0 and 10 * (n - npos) <= n:
        s = math.log(s1p / npos) - slog / npos
        if s > 1e-14:
            mu = _oracle_solve(s)
            return True, min(max(mu, 0.02), 100.0), omega
    # moment route
    if n < 2:
        return False, 0.0, omega
    acc = 0.0
    for v in vals:
        d = v * v - omega
        acc += d * d
    var = acc / n
    if var <= omega * omega * 1e-20:
        return False, 0.0, omega
    return True, min(max(omega * omega / var, 0.02), 100.0), omega


def _oracle_rmse(vals, mu, omega):
    xs = sorted(vals)
    n = len(xs)
    acc = 0.0
    for i in range(1, n):
        c = float(scipy.special.gammainc(mu, mu * xs[i] * xs[i] / omega))
        d = c - ((i + 1) - 0.5) / float(n)
        acc += d * d
    return math.sqrt(acc / float(n))


def _oracle_mkl(rows, height, width, sizes):
    mu = np.zeros((height, width))
    omega = np.zeros((height, width))
    scale = np.zeros((height, width))
    fit = np.zeros((height, width))
    for y in range(height):
        for x in range(width):
            best = math.inf
            for size in sizes:
                a = (size + 3) // 2
                vals = [
                    rows[yy][xx]
                    for yy in range(max(0, y - a), min(height - 1, y + a) + 1)
                    for xx in range(max(0, x - a), min(width - 1, x + a) + 1)
                ]
                ok, m, om = _oracle_fit(vals)
                if not ok:
                    continue
                r = _oracle_rmse(vals, m, om)
                if r < best:
                    best = r
                    mu[y, x] = m
                    omega[y, x] = om
                    scale[y, x] = float(size)
                    fit[y, x] = r
            assert best < math.inf, "oracle never expects a defect voxel here"
    snap = lambda arr: arr.astype(np.float32).astype(np.float64)
    return snap(mu), omega, scale, snap(fit)


def test_criterion_04_oracle_equivalence():
    t0 = time.perf_counter()
    spec = PhantomSpec(width=16, height=16, layout=Layout.HOMOGENEOUS,
                       regions=(NakagamiParams(0.9, 1.3),), seed=21)
    env = generate_distribution_phantom(spec).envelope
    result = estimate_mkl(env, spec=KernelSpec(sizes=(3, 5)), threads=1)
    assert result.defect_count == 0
    o_mu, o_om, o_sc, o_ft = _oracle_mkl(env.data.tolist(), 16, 16, (3, 5))
    same = [
        result.mu_map.data.tobytes() == o_mu.tobytes(),
        result.omega_map.data.tobytes() == o_om.tobytes(),
        result.scale_map.data.tobytes() == o_sc.tobytes(),
        result.fit_map.data.tobytes() == o_ft.tobytes(),
    ]
    dt = time.perf_counter() - t0
    ok = all(same) and dt < 5.0
    assert _verdict(
        4, "brute-force oracle equivalence", ok,
        f"bitwise mu/omega/scale/fit = {same}, {dt:.2f}s",
    )


def test_criterion_05_disk_phantom_accuracy():
    t0 = time.perf_counter()
    spec = PhantomSpec(width=96, height=96, layout=Layout.DISK,
                       regions=(NakagamiParams(0.8, 1.0), NakagamiParams(1.5, 1.0)),
                       seed=0)
    truth = generate_distribution_phantom(spec)
    mkl_mad = float(np.mean(np.abs(
        estimate_mkl(truth.envelope).mu_map.data - truth.truth_mu.data)))
    fixed_mad = float(np.mean(np.abs(
        estimate_fixed(truth.envelope, 3).mu_map.data - truth.truth_mu.data)))
    dt = time.perf_counter() - t0
    ok = mkl_mad <= fixed_mad and mkl_mad <= 0.25 and dt < 120.0
    assert _verdict(
        5, "disk-phantom accuracy", ok,
        f"MKL MAD {mkl_mad:.4f} <= fixed(3) MAD {fixed_mad:.4f} and <= 0.25, "
        f"{dt:.1f}s",
    )


def test_criterion_06_wmc_identity():
    t0 = time.perf_counter()
    spec = PhantomSpec(width=64, height=64, layout=Layout.HOMOGENEOUS,
                       regions=(NakagamiParams(1.0, 1.0),), seed=6)
    env = generate_distribution_phantom(spec).envelope
    wmc = estimate_wmc(env, (7, 9))
    f7 = estimate_fixed(env, 7)
    f9 = estimate_fixed(env, 9)
    mean_ok = (
        np.array_equal(wmc.mu_map.data, (f7.mu_map.data + f9.mu_map.data) / 2.0)
        and np.array_equal(wmc.omega_map.data,
                           (f7.omega_map.data + f9.omega_map.data) / 2.0)
        and np.array_equal(wmc.fit_map.data,
                           (f7.fit_map.data + f9.fit_map.data) / 2.0)
        and np.all(wmc.scale_map.data == 8.0)
    )
    single = estimate_wmc(env, (7,))
    single_ok = all(
        getattr(single, f).data.tobytes() == getattr(f7, f).data.tobytes()
        for f in ("mu_map", "omega_map", "scale_map", "fit_map")
    )
    dt = time.perf_counter() - t0
    ok = mean_ok and single_ok and dt < 30.0
    assert _verdict(
        6, "WMC identity", ok,
        f"mean identity {mean_ok}, single-size bitwise {single_ok}, {dt:.1f}s",
    )


def test_criterion_07_envelope():
    t0 = time.perf_counter()
    n = np.arange(256, dtype=np.float64)
    tone = np.cos(2.0 * np.pi * 32.0 * n / 256.0)[:, None]
    env_tone = analytic_envelope(
        RFFrame(image=Image2D.from_array(tone, Kind.RF))).data
    tone_err = float(np.max(np.abs(env_tone - 1.0)))

    rng = np.random.default_rng(7)
    rf = rng.standard_normal((256, 50))
    env = analytic_envelope(RFFrame(image=Image2D.from_array(rf, Kind.RF))).data
    worst_gap = float(np.min(env - np.abs(rf)))

    dt = time.perf_counter() - t0
    ok = tone_err <= 1e-9 and worst_gap >= 0.0 and dt < 1.0
    assert _verdict(
        7, "envelope detection", ok,
        f"tone flatness {tone_err:.2e} <= 1e-9, min(env-|rf|) {worst_gap:.2e} "
        f">= 0, {dt:.2f}s",
    )


def test_criterion_08_scale_equivariance():
    t0 = time.perf_counter()
    spec = PhantomSpec(width=32, height=32, layout=Layout.DISK,
                       regions=(NakagamiParams(0.9, 1.0), NakagamiParams(1.8, 1.0)),
                       seed=11)
    env = generate_distribution_phantom(spec).envelope
    c = 3.7
    scaled = Image2D.from_array(env.data * c, Kind.ENVELOPE)
    runs = (
        ("fixed", lambda img: estimate_fixed(img, 5)),
        ("wmc", lambda img: estimate_wmc(img, (3, 5))),
        ("mkl", lambda img: estimate_mkl(img, spec=KernelSpec(sizes=(3, 5)))),
    )
    details = []
    ok = True
    for name, run in runs:
        a = run(env)
        b = run(scaled)
        mu_same = a.mu_map.data.tobytes() == b.mu_map.data.tobytes()
        sc_same = a.scale_map.data.tobytes() == b.scale_map.data.tobytes()
        rel = float(np.max(np.abs(b.omega_map.data / (a.omega_map.data * c * c) - 1.0)))
        ok = ok and mu_same and sc_same and rel <= 1e-9
        details.append(f"{name}: mu {mu_same}, scale {sc_same}, omega rel {rel:.1e}")
    dt = time.perf_counter() - t0
    ok = ok and dt < 10.0
    assert _verdict(8, "scale equivariance", ok, "; ".join(details) + f", {dt:.1f}s")


def test_criterion_09_bench_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    for sub, threads in (("a", "1"), ("b", "3")):
        rc = cli_main(["bench", "--out-dir", str(tmp_path / sub),
                       "--threads", threads])
        assert rc == 0
    capsys.readouterr()
    csv_a = (tmp_path / "a" / "bench.csv").read_bytes()
    csv_b = (tmp_path / "b" / "bench.csv").read_bytes()
    dt = time.perf_counter() - t0
    ok = csv_a == csv_b and dt < 240.0
    with capsys.disabled():
        assert _verdict(
            9, "bench determinism across threads", ok,
            f"byte-identical CSV {csv_a == csv_b} ({len(csv_a)} bytes), {dt:.1f}s",
        )


def test_criterion_10_scatterer_ordering():
    t0 = time.perf_counter()

    def regional_mu(density, arrangement, seed):
        spec = PhantomSpec(width=96, height=96, layout=Layout.SCATTERERS,
                           density=density, arrangement=arrangement, seed=seed)
        return float(generate_scatterer_phantom(spec).truth_mu.data[0, 0])

    votes = {"dense": 0, "sparse": 0, "periodic": 0}
    seeds = range(5)
    for s in seeds:
        dense = regional_mu(0.5, Arrangement.RANDOM, s)
        sparse = regional_mu(0.005, Arrangement.RANDOM, s)
        periodic = regional_mu(0.0625, Arrangement.PERIODIC, s)
        random = regional_mu(0.0625, Arrangement.RANDOM, s)
        votes["dense"] += 0.7 <= dense <= 1.3
        votes["sparse"] += sparse < dense
        votes["periodic"] += periodic > random
    need = len(seeds) // 2 + 1
    dt = time.perf_counter() - t0
    ok = all(v >= need for v in votes.values()) and dt < 60.0
    assert _verdict(
        10, "scatterer regime ordering", ok,
        f"votes/5: dense-in-band {votes['dense']}, sparse<dense {votes['sparse']}, "
        f"periodic>random {votes['periodic']}, {dt:.1f}s",
    )
