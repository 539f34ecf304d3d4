"""Pure-Python estimation kernels.

This module is the reference implementation of the hot numeric loops; the
Cython extension ``nakamap._kernels`` transcribes it operation for operation
(same expressions, same association, same summation order, scipy's cephes
special functions on both sides), so the two backends produce bitwise
identical float64 results.  Keep the two files in lockstep when editing.

Shape estimation follows the gamma-shape maximum-likelihood route: for
envelope samples x, the squared samples y = x^2 are gamma distributed with
shape mu and scale omega/mu, so

    omega_hat = mean(x^2)                    (exact ML for the scale)
    mu_hat    solves log(mu) - psi(mu) = s*  (profile-likelihood score)

with s* = log(mean_pos(x^2)) - mean_pos(log(x^2)) taken over the strictly
positive samples (exact zeros carry no log information).  The solver is
Newton on f(mu) = log(mu) - psi(mu) - s*, started from the standard
second-order approximation

    mu0 = (3 - s* + sqrt((s* - 3)^2 + 24 s*)) / (12 s*),

declared converged when the relative step |mu_new - mu| <= 1e-10 * mu_new,
capped at 50 iterations, with a guarded bisection fallback on [1e-3, 1e3]
(up to 200 halvings to the same relative width) whenever an iterate leaves
(0, 1000).  Estimates are clamped to [MU_MIN, MU_MAX].

Goodness of fit is the RMS distance between model CDF and the empirical
plotting positions over the sorted sample, skipping the smallest point:

    rmse = sqrt( sum_{i=2..n} (cdf(x_(i)) - (i - 0.5)/n)^2 / n ).

Windows around (x, y) use half-extent a = ceil((size + 2) / 2) in both
directions and truncate at the borders (no padding).
"""

import math

from scipy.special import gammainc as _sp_gammainc, psi as _sp_psi

MU_MIN = 0.02
MU_MAX = 100.0

# Sample-statistics status codes shared by both backends.
OK = 0
TOO_FEW = 1
ZERO_ONLY = 2
EXCESS_ZEROS = 3
DEGENERATE = 4

# Voxel status in the output maps.
VOXEL_MLE = 0
VOXEL_MOMENTS = 1
VOXEL_DEFECT = 2

# Bernoulli coefficients of the trigamma asymptotic series, written as
# quotients so both backends round them identically.
_B2 = 1.0 / 6.0
_B4 = -1.0 / 30.0
_B6 = 1.0 / 42.0
_B8 = -1.0 / 30.0
_B10 = 5.0 / 66.0
_B12 = -691.0 / 2730.0
_B14 = 7.0 / 6.0


def _psi(z):
    return float(_sp_psi(z))


def _gammainc(a, x):
    return float(_sp_gammainc(a, x))


def _trigamma(z):
    # Recurrence up to z >= 10, then the asymptotic series through z**-15;
    # truncation there is below 1e-15 relative.
    acc = 0.0
    w = z
    while w < 10.0:
        acc += 1.0 / (w * w)
        w += 1.0
    iw = 1.0 / w
    iw2 = iw * iw
    s = iw + 0.5 * iw2
    s += iw * iw2 * (
        _B2
        + iw2 * (_B4 + iw2 * (_B6 + iw2 * (_B8 + iw2 * (_B10 + iw2 * (_B12 + iw2 * _B14)))))
    )
    return acc + s


def _bisect_mu(s_star, iters):
    lo = 1e-3
    hi = 1e3
    if math.log(lo) - _psi(lo) - s_star < 0.0:
        return lo, iters
    if math.log(hi) - _psi(hi) - s_star > 0.0:
        return hi, iters
    for _ in range(200):
        iters += 1
        mid = 0.5 * (lo + hi)
        if math.log(mid) - _psi(mid) - s_star > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10 * hi:
            break
    return 0.5 * (lo + hi), iters


def _solve_mu(s_star):
    mu = (3.0 - s_star + math.sqrt((s_star - 3.0) * (s_star - 3.0) + 24.0 * s_star)) / (
        12.0 * s_star
    )
    iters = 0
    if not 0.0 < mu < 1000.0:
        return _bisect_mu(s_star, iters)
    for _ in range(50):
        iters += 1
        fval = math.log(mu) - _psi(mu) - s_star
        fder = 1.0 / mu - _trigamma(mu)
        nxt = mu - fval / fder
        if not 0.0 < nxt < 1000.0:
            return _bisect_mu(s_star, iters)
        if abs(nxt - mu) <= 1e-10 * nxt:
            return nxt, iters
        mu = nxt
    return mu, iters


def _clamp_mu(mu):
    if mu < MU_MIN:
        return MU_MIN
    if mu > MU_MAX:
        return MU_MAX
    return mu


def _mle_core(vals, n):
    """Gamma-shape MLE over vals[:n]. Returns (status, mu, omega, iters).

    omega = mean(x^2) over *all* samples is returned even on failure, so
    callers always have the scale of the window.
    """
    s1 = 0.0
    for i in range(n):
        v = vals[i]
        s1 += v * v
    omega = s1 / n
    if n < 2:
        return TOO_FEW, 0.0, omega, 0
    npos = 0
    s1p = 0.0
    slog = 0.0
    for i in range(n):
        v = vals[i]
        if v > 0.0:
            y = v * v
            npos += 1
            s1p += y
            slog += math.log(y)
    if npos == 0:
        return ZERO_ONLY, 0.0, omega, 0
    if 10 * (n - npos) > n:
        return EXCESS_ZEROS, 0.0, omega, 0
    s_star = math.log(s1p / npos) - slog / npos
    if s_star <= 1e-14:
        return DEGENERATE, 0.0, omega, 0
    mu, iters = _solve_mu(s_star)
    return OK, _clamp_mu(mu), omega, iters


def _moments_core(vals, n):
    """Gamma method of moments over vals[:n]: mu = mean(y)^2 / popvar(y)."""
    s1 = 0.0
    for i in range(n):
        v = vals[i]
        s1 += v * v
    omega = s1 / n
    if n < 2:
        return TOO_FEW, 0.0, omega
    acc = 0.0
    for i in range(n):
        v = vals[i]
        d = v * v - omega
        acc += d * d
    var = acc / n
    # Relative floor: catches exact-constant windows whose summed mean
    # picked up rounding, without touching any realistic sample.
    if var <= omega * omega * 1e-20:
        return DEGENERATE, 0.0, omega
    return OK, _clamp_mu(omega * omega / var), omega


def _cdf_rmse_core(xs, n, mu, omega):
    """RMS CDF distance over the ascending-sorted xs[:n] (smallest skipped)."""
    acc = 0.0
    nf = float(n)
    for i in range(1, n):
        xv = xs[i]
        z = xv * xv
        c = _gammainc(mu, mu * z / omega)
        d = c - ((i + 1) - 0.5) / nf
        acc += d * d
    return math.sqrt(acc / nf)


# --- public entry points (same signatures as the compiled twin) -----------

def backend_name():
    return "python"


def mle_fit(values):
    """values: 1-D float64 array. Returns (status, mu, omega, iters)."""
    vals = values.tolist()
    return _mle_core(vals, len(vals))


def moments_fit(values):
    """values: 1-D float64 array. Returns (status, mu, omega)."""
    vals = values.tolist()
    return _moments_core(vals, len(vals))


def fit_rmse(values, mu, omega):
    """CDF-distance rmse of (mu, omega) against a 1-D float64 sample."""
    xs = sorted(values.tolist())
    return _cdf_rmse_core(xs, len(xs), mu, omega)


def _window_bounds(c, a, limit):
    lo = c - a
    if lo < 0:
        lo = 0
    hi = c + a
    if hi > limit - 1:
        hi = limit - 1
    return lo, hi


def map_fixed(env, size, y0, y1, out_mu, out_omega, out_fit, out_status):
    """Fixed-size parameter maps over rows [y0, y1) of a 2-D float64 env."""
    height, width = env.shape
    rows = env.tolist()
    a = (size + 3) // 2
    buf = [0.0] * ((2 * a + 1) * (2 * a + 1))
    for y in range(y0, y1):
        ylo, yhi = _window_bounds(y, a, height)
        for x in range(width):
            xlo, xhi = _window_bounds(x, a, width)
            n = 0
            for yy in range(ylo, yhi + 1):
                row = rows[yy]
                for xx in range(xlo, xhi + 1):
                    buf[n] = row[xx]
                    n += 1
            status, mu, omega, _ = _mle_core(buf, n)
            used = VOXEL_MLE
            if status != OK:
                status2, mu, omega = _moments_core(buf, n)
                if status2 != OK:
                    out_mu[y, x] = 0.0
                    out_omega[y, x] = omega
                    out_fit[y, x] = 1.0
                    out_status[y, x] = VOXEL_DEFECT
                    continue
                used = VOXEL_MOMENTS
            xs = sorted(buf[:n])
            out_mu[y, x] = mu
            out_omega[y, x] = omega
            out_fit[y, x] = _cdf_rmse_core(xs, n, mu, omega)
            out_status[y, x] = used


def map_multiscale(env, sizes, y0, y1, out_mu, out_omega, out_scale, out_fit,
                   out_status):
    """Per-voxel argmin over kernel sizes of the CDF-distance rmse.

    sizes: ascending odd int64 array.  Ties keep the smaller size (strict
    ``<`` while scanning ascending).  A voxel where every size fails both
    estimators is marked defect; its omega comes from the smallest window.
    """
    height, width = env.shape
    rows = env.tolist()
    nsizes = len(sizes)
    amax = (int(sizes[nsizes - 1]) + 3) // 2
    buf = [0.0] * ((2 * amax + 1) * (2 * amax + 1))
    for y in range(y0, y1):
        for x in range(width):
            best = math.inf
            best_mu = 0.0
            best_omega = 0.0
            best_scale = 0.0
            best_status = VOXEL_DEFECT
            omega_first = 0.0
            found = False
            for k in range(nsizes):
                size = int(sizes[k])
                a = (size + 3) // 2
                ylo, yhi = _window_bounds(y, a, height)
                xlo, xhi = _window_bounds(x, a, width)
                n = 0
                for yy in range(ylo, yhi + 1):
                    row = rows[yy]
                    for xx in range(xlo, xhi + 1):
                        buf[n] = row[xx]
                        n += 1
                status, mu, omega, _ = _mle_core(buf, n)
                if k == 0:
                    omega_first = omega
                used = VOXEL_MLE
                if status != OK:
                    status2, mu, omega = _moments_core(buf, n)
                    if status2 != OK:
                        continue
                    used = VOXEL_MOMENTS
                xs = sorted(buf[:n])
                rmse = _cdf_rmse_core(xs, n, mu, omega)
                if rmse < best:
                    best = rmse
                    best_mu = mu
                    best_omega = omega
                    best_scale = float(size)
                    best_status = used
                    found = True
            if found:
                out_mu[y, x] = best_mu
                out_omega[y, x] = best_omega
                out_scale[y, x] = best_scale
                out_fit[y, x] = best
                out_status[y, x] = best_status
            else:
                out_mu[y, x] = 0.0
                out_omega[y, x] = omega_first
                out_scale[y, x] = float(int(sizes[0]))
                out_fit[y, x] = 1.0
                out_status[y, x] = VOXEL_DEFECT
