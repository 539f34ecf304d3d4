# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled estimation kernels.

Operation-for-operation transcription of ``nakamap._kernels_py`` (see that
module's docstring for the numeric contracts).  Both backends call scipy's
cephes special functions and perform identical IEEE-754 double steps in the
same order, so outputs are bitwise identical; the extension is built with
-ffp-contract=off to keep it that way.  Keep the two files in lockstep.
"""

from libc.math cimport INFINITY, fabs, log, sqrt
from libc.stdint cimport int64_t
from libc.stdlib cimport free, malloc, qsort

from scipy.special.cython_special cimport gammainc as _gammainc, psi as _psi

MU_MIN = 0.02
MU_MAX = 100.0

OK = 0
TOO_FEW = 1
ZERO_ONLY = 2
EXCESS_ZEROS = 3
DEGENERATE = 4

VOXEL_MLE = 0
VOXEL_MOMENTS = 1
VOXEL_DEFECT = 2

cdef double _MU_MIN = 0.02
cdef double _MU_MAX = 100.0

cdef int _OK = 0
cdef int _TOO_FEW = 1
cdef int _ZERO_ONLY = 2
cdef int _EXCESS_ZEROS = 3
cdef int _DEGENERATE = 4

cdef signed char _V_MLE = 0
cdef signed char _V_MOMENTS = 1
cdef signed char _V_DEFECT = 2

cdef double _B2 = 1.0 / 6.0
cdef double _B4 = -1.0 / 30.0
cdef double _B6 = 1.0 / 42.0
cdef double _B8 = -1.0 / 30.0
cdef double _B10 = 5.0 / 66.0
cdef double _B12 = -691.0 / 2730.0
cdef double _B14 = 7.0 / 6.0


cdef double _trigamma(double z) noexcept nogil:
    cdef double acc = 0.0
    cdef double w = z
    cdef double iw, iw2, s
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


cdef double _bisect_mu(double s_star, int* iters) noexcept nogil:
    cdef double lo = 1e-3
    cdef double hi = 1e3
    cdef double mid
    cdef int k
    if log(lo) - _psi(lo) - s_star < 0.0:
        return lo
    if log(hi) - _psi(hi) - s_star > 0.0:
        return hi
    for k in range(200):
        iters[0] += 1
        mid = 0.5 * (lo + hi)
        if log(mid) - _psi(mid) - s_star > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10 * hi:
            break
    return 0.5 * (lo + hi)


cdef double _solve_mu(double s_star, int* iters) noexcept nogil:
    cdef double mu, fval, fder, nxt
    cdef int k
    mu = (3.0 - s_star + sqrt((s_star - 3.0) * (s_star - 3.0) + 24.0 * s_star)) / (
        12.0 * s_star
    )
    if not 0.0 < mu < 1000.0:
        return _bisect_mu(s_star, iters)
    for k in range(50):
        iters[0] += 1
        fval = log(mu) - _psi(mu) - s_star
        fder = 1.0 / mu - _trigamma(mu)
        nxt = mu - fval / fder
        if not 0.0 < nxt < 1000.0:
            return _bisect_mu(s_star, iters)
        if fabs(nxt - mu) <= 1e-10 * nxt:
            return nxt
        mu = nxt
    return mu


cdef double _clamp_mu(double mu) noexcept nogil:
    if mu < _MU_MIN:
        return _MU_MIN
    if mu > _MU_MAX:
        return _MU_MAX
    return mu


cdef int _mle_core(const double* vals, int n, double* mu_out, double* omega_out,
                   int* iters_out) noexcept nogil:
    cdef double s1 = 0.0
    cdef double s1p = 0.0
    cdef double slog = 0.0
    cdef double v, y, s_star, mu
    cdef int i, npos
    cdef int iters = 0
    for i in range(n):
        v = vals[i]
        s1 += v * v
    omega_out[0] = s1 / n
    mu_out[0] = 0.0
    iters_out[0] = 0
    if n < 2:
        return _TOO_FEW
    npos = 0
    for i in range(n):
        v = vals[i]
        if v > 0.0:
            y = v * v
            npos += 1
            s1p += y
            slog += log(y)
    if npos == 0:
        return _ZERO_ONLY
    if 10 * (n - npos) > n:
        return _EXCESS_ZEROS
    s_star = log(s1p / npos) - slog / npos
    if s_star <= 1e-14:
        return _DEGENERATE
    mu = _solve_mu(s_star, &iters)
    mu_out[0] = _clamp_mu(mu)
    iters_out[0] = iters
    return _OK


cdef int _moments_core(const double* vals, int n, double* mu_out,
                       double* omega_out) noexcept nogil:
    cdef double s1 = 0.0
    cdef double acc = 0.0
    cdef double v, d, omega, var
    cdef int i
    for i in range(n):
        v = vals[i]
        s1 += v * v
    omega = s1 / n
    omega_out[0] = omega
    mu_out[0] = 0.0
    if n < 2:
        return _TOO_FEW
    for i in range(n):
        v = vals[i]
        d = v * v - omega
        acc += d * d
    var = acc / n
    if var <= omega * omega * 1e-20:
        return _DEGENERATE
    mu_out[0] = _clamp_mu(omega * omega / var)
    return _OK


cdef double _cdf_rmse_core(const double* xs, int n, double mu,
                           double omega) noexcept nogil:
    cdef double acc = 0.0
    cdef double nf = <double> n
    cdef double xv, z, c, d
    cdef int i
    for i in range(1, n):
        xv = xs[i]
        z = xv * xv
        c = _gammainc(mu, mu * z / omega)
        d = c - (<double> (i + 1) - 0.5) / nf
        acc += d * d
    return sqrt(acc / nf)


cdef int _cmp_double(const void* pa, const void* pb) noexcept nogil:
    cdef double a = (<const double*> pa)[0]
    cdef double b = (<const double*> pb)[0]
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


cdef inline int _lo_bound(int c, int a) noexcept nogil:
    cdef int lo = c - a
    if lo < 0:
        lo = 0
    return lo


cdef inline int _hi_bound(int c, int a, int limit) noexcept nogil:
    cdef int hi = c + a
    if hi > limit - 1:
        hi = limit - 1
    return hi


# --- public entry points (same signatures as the pure-Python twin) --------

def backend_name():
    return "compiled"


def mle_fit(const double[::1] values):
    """values: 1-D float64 array. Returns (status, mu, omega, iters)."""
    cdef int n = <int> values.shape[0]
    cdef double mu = 0.0
    cdef double omega = 0.0
    cdef int iters = 0
    cdef int status
    if n == 0:
        raise ValueError("empty sample")
    with nogil:
        status = _mle_core(&values[0], n, &mu, &omega, &iters)
    return status, mu, omega, iters


def moments_fit(const double[::1] values):
    """values: 1-D float64 array. Returns (status, mu, omega)."""
    cdef int n = <int> values.shape[0]
    cdef double mu = 0.0
    cdef double omega = 0.0
    cdef int status
    if n == 0:
        raise ValueError("empty sample")
    with nogil:
        status = _moments_core(&values[0], n, &mu, &omega)
    return status, mu, omega


def fit_rmse(const double[::1] values, double mu, double omega):
    """CDF-distance rmse of (mu, omega) against a 1-D float64 sample."""
    cdef int n = <int> values.shape[0]
    cdef double out
    cdef double* buf
    cdef int i
    if n == 0:
        raise ValueError("empty sample")
    buf = <double*> malloc(n * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(n):
                buf[i] = values[i]
            qsort(buf, n, sizeof(double), _cmp_double)
            out = _cdf_rmse_core(buf, n, mu, omega)
    finally:
        free(buf)
    return out


def map_fixed(const double[:, ::1] env, int size, int y0, int y1,
              double[:, ::1] out_mu, double[:, ::1] out_omega,
              double[:, ::1] out_fit, signed char[:, ::1] out_status):
    """Fixed-size parameter maps over rows [y0, y1)."""
    cdef int height = <int> env.shape[0]
    cdef int width = <int> env.shape[1]
    cdef int a = (size + 3) // 2
    cdef int side = 2 * a + 1
    cdef double* buf = <double*> malloc(side * side * sizeof(double))
    cdef double* xs = <double*> malloc(side * side * sizeof(double))
    cdef double mu, omega
    cdef int x, y, xx, yy, xlo, xhi, ylo, yhi, n, i, status, status2, iters
    cdef signed char used
    if buf == NULL or xs == NULL:
        free(buf)
        free(xs)
        raise MemoryError()
    try:
        with nogil:
            for y in range(y0, y1):
                ylo = _lo_bound(y, a)
                yhi = _hi_bound(y, a, height)
                for x in range(width):
                    xlo = _lo_bound(x, a)
                    xhi = _hi_bound(x, a, width)
                    n = 0
                    for yy in range(ylo, yhi + 1):
                        for xx in range(xlo, xhi + 1):
                            buf[n] = env[yy, xx]
                            n += 1
                    status = _mle_core(buf, n, &mu, &omega, &iters)
                    used = _V_MLE
                    if status != _OK:
                        status2 = _moments_core(buf, n, &mu, &omega)
                        if status2 != _OK:
                            out_mu[y, x] = 0.0
                            out_omega[y, x] = omega
                            out_fit[y, x] = 1.0
                            out_status[y, x] = _V_DEFECT
                            continue
                        used = _V_MOMENTS
                    for i in range(n):
                        xs[i] = buf[i]
                    qsort(xs, n, sizeof(double), _cmp_double)
                    out_mu[y, x] = mu
                    out_omega[y, x] = omega
                    out_fit[y, x] = _cdf_rmse_core(xs, n, mu, omega)
                    out_status[y, x] = used
    finally:
        free(buf)
        free(xs)


def map_multiscale(const double[:, ::1] env, const int64_t[::1] sizes,
                   int y0, int y1,
                   double[:, ::1] out_mu, double[:, ::1] out_omega,
                   double[:, ::1] out_scale, double[:, ::1] out_fit,
                   signed char[:, ::1] out_status):
    """Per-voxel argmin over kernel sizes of the CDF-distance rmse.

    Semantics identical to the pure twin: ascending sizes, strict ``<`` so
    ties keep the smaller size, defect voxels carry the smallest window's
    omega.
    """
    cdef int height = <int> env.shape[0]
    cdef int width = <int> env.shape[1]
    cdef int nsizes = <int> sizes.shape[0]
    cdef int amax = (<int> sizes[nsizes - 1] + 3) // 2
    cdef int side = 2 * amax + 1
    cdef double* buf = <double*> malloc(side * side * sizeof(double))
    cdef double* xs = <double*> malloc(side * side * sizeof(double))
    cdef double mu, omega, rmse, best, best_mu, best_omega, best_scale
    cdef double omega_first
    cdef int x, y, xx, yy, xlo, xhi, ylo, yhi, n, i, k, size
    cdef int a, status, status2, iters
    cdef signed char used, best_status
    cdef bint found
    if buf == NULL or xs == NULL:
        free(buf)
        free(xs)
        raise MemoryError()
    try:
        with nogil:
            for y in range(y0, y1):
                for x in range(width):
                    best = INFINITY
                    best_mu = 0.0
                    best_omega = 0.0
                    best_scale = 0.0
                    best_status = _V_DEFECT
                    omega_first = 0.0
                    found = False
                    for k in range(nsizes):
                        size = <int> sizes[k]
                        a = (size + 3) // 2
                        ylo = _lo_bound(y, a)
                        yhi = _hi_bound(y, a, height)
                        xlo = _lo_bound(x, a)
                        xhi = _hi_bound(x, a, width)
                        n = 0
                        for yy in range(ylo, yhi + 1):
                            for xx in range(xlo, xhi + 1):
                                buf[n] = env[yy, xx]
                                n += 1
                        status = _mle_core(buf, n, &mu, &omega, &iters)
                        if k == 0:
                            omega_first = omega
                        used = _V_MLE
                        if status != _OK:
                            status2 = _moments_core(buf, n, &mu, &omega)
                            if status2 != _OK:
                                continue
                            used = _V_MOMENTS
                        for i in range(n):
                            xs[i] = buf[i]
                        qsort(xs, n, sizeof(double), _cmp_double)
                        rmse = _cdf_rmse_core(xs, n, mu, omega)
                        if rmse < best:
                            best = rmse
                            best_mu = mu
                            best_omega = omega
                            best_scale = <double> size
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
                        out_scale[y, x] = <double> (<int> sizes[0])
                        out_fit[y, x] = 1.0
                        out_status[y, x] = _V_DEFECT
    finally:
        free(buf)
        free(xs)
