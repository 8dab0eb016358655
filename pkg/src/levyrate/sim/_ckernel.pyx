# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled cycle kernel; mirrors _pykernel.simulate_block operation for operation."""

from libc.math cimport exp, expm1, log, INFINITY, isinf
from libc.stdint cimport uint64_t

cdef enum:
    NCOL = 8
    MAX_ALPHA = 64


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double unif(uint64_t* st) noexcept nogil:
    st[0] = st[0] + <uint64_t>0x9E3779B97F4A7C15ULL
    return (<double>(mix64(st[0]) >> 11) + 0.5) * (1.0 / 9007199254740992.0)


cdef inline double draw_jump(uint64_t* st, int kind, const double[::1] jpar,
                             const double[::1] jvals, const double[::1] jcum) noexcept nogil:
    cdef double u
    cdef Py_ssize_t lo, hi, mid
    if kind == 1:
        return -log(unif(st)) / jpar[0]
    if kind == 2:
        return jpar[0] + (jpar[1] - jpar[0]) * unif(st)
    u = unif(st)
    lo = 0
    hi = jvals.shape[0] - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if jcum[mid] < u:
            lo = mid + 1
        else:
            hi = mid
    return jvals[lo]


cdef inline double draw_arrival(uint64_t* st, double nu) noexcept nogil:
    if nu > 0.0:
        return -log(unif(st)) / nu
    return INFINITY


def simulate_block(double[:, ::1] out, uint64_t state, double drift, double nu,
                   int jump_kind, const double[::1] jpar, const double[::1] jvals,
                   const double[::1] jcum, int tau_kind, double tau_par,
                   int pol_kind, const double[::1] ppar, double K, double h, double d,
                   const double[::1] alphas):
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t na = alphas.shape[0]
    cdef Py_ssize_t i, j
    cdef uint64_t st = state
    cdef double ie_off[MAX_ALPHA]
    cdef double ie_on[MAX_ALPHA]
    cdef double w, el, iw_off, t_end, ta, t, v, R, on_len, iw_on, cap_cost, gap, g, s, tz, w1
    cdef double njumps
    cdef bint last
    cdef int status = 0
    if na > MAX_ALPHA:
        raise ValueError("too many alpha values for the compiled kernel")
    with nogil:
        for i in range(n):
            for j in range(na):
                ie_off[j] = 0.0
                ie_on[j] = 0.0
            w = 0.0
            el = 0.0
            iw_off = 0.0
            if tau_kind == 0:
                t_end = INFINITY
            elif tau_kind == 1:
                t_end = tau_par
            else:
                t_end = -log(unif(&st)) / tau_par
            while True:
                ta = draw_arrival(&st, nu)
                if tau_kind != 0 and el + ta >= t_end:
                    t = t_end - el
                    last = True
                else:
                    t = ta
                    last = False
                iw_off += w * t + drift * t * t / 2.0
                for j in range(na):
                    if drift > 0.0:
                        ie_off[j] += exp(-alphas[j] * w) * (-expm1(-alphas[j] * drift * t)) / (alphas[j] * drift)
                    else:
                        ie_off[j] += exp(-alphas[j] * w) * t
                w += drift * t
                el += t
                if last:
                    break
                w += draw_jump(&st, jump_kind, jpar, jvals, jcum)
                if tau_kind == 0:
                    break
            v = w
            R = 0.0
            on_len = 0.0
            iw_on = 0.0
            cap_cost = 0.0
            njumps = 0.0
            if v > 0.0:
                if pol_kind == 0:
                    R = ppar[0]
                elif pol_kind == 1:
                    R = ppar[0] + ppar[1] * v
                else:
                    gap = ppar[0] - v / 2.0
                    if gap < 0.0:
                        gap = 0.0
                    g = ppar[3] + gap / (2.0 * ppar[1])
                    if g > ppar[4]:
                        g = ppar[4]
                    if g == 0.0:
                        R = INFINITY
                    else:
                        R = ppar[2] + 1.0 / g
                if isinf(R):
                    cap_cost = d * v
                else:
                    if R <= drift:
                        status = 1
                        break
                    s = R - drift
                    while True:
                        ta = draw_arrival(&st, nu)
                        tz = w / s
                        if tz <= ta:
                            t = tz
                            w1 = 0.0
                        else:
                            t = ta
                            w1 = w - s * ta
                        iw_on += (w + w1) / 2.0 * t
                        for j in range(na):
                            ie_on[j] += exp(-alphas[j] * w1) * (-expm1(-alphas[j] * s * t)) / (alphas[j] * s)
                        on_len += t
                        if tz <= ta:
                            break
                        w = w1 + draw_jump(&st, jump_kind, jpar, jvals, jcum)
                        njumps += 1.0
                    cap_cost = d * R * on_len
            out[i, 0] = el
            out[i, 1] = on_len
            out[i, 2] = v
            out[i, 3] = R
            out[i, 4] = iw_off
            out[i, 5] = iw_on
            out[i, 6] = K + h * (iw_off + iw_on) + cap_cost
            out[i, 7] = njumps
            for j in range(na):
                out[i, NCOL + 2 * j] = ie_off[j]
                out[i, NCOL + 2 * j + 1] = ie_on[j]
    if status:
        return status, i
    return 0, n
