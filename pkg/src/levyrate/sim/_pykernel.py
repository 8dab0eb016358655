"""Pure-Python cycle kernel.  Must stay arithmetic-for-arithmetic identical to _ckernel.pyx."""

import math

MASK = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
TWO_M53 = 1.0 / 9007199254740992.0

# output columns
OFF_LEN, ON_LEN, V_COL, R_COL, INTW_OFF, INTW_ON, COST, N_ON_JUMPS = range(8)
NCOL = 8

OK, ERR_UNSTABLE = 0, 1


def mix64(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def simulate_block(
    out,
    state,
    drift,
    nu,
    jump_kind,
    jpar,
    jvals,
    jcum,
    tau_kind,
    tau_par,
    pol_kind,
    ppar,
    K,
    h,
    d,
    alphas,
):
    """Fill ``out`` (n x (8 + 2*len(alphas))) with per-cycle statistics.

    Returns (status, row index reached).
    """
    n = out.shape[0]
    na = len(alphas)
    al = [float(a) for a in alphas]
    njv = len(jvals)
    st = state & MASK

    def unif():
        nonlocal st
        st = (st + GOLDEN) & MASK
        return ((mix64(st) >> 11) + 0.5) * TWO_M53

    def jump():
        if jump_kind == 1:
            return -math.log(unif()) / jpar[0]
        if jump_kind == 2:
            return jpar[0] + (jpar[1] - jpar[0]) * unif()
        u = unif()
        lo, hi = 0, njv - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if jcum[mid] < u:
                lo = mid + 1
            else:
                hi = mid
        return jvals[lo]

    def arrival():
        if nu > 0.0:
            return -math.log(unif()) / nu
        return math.inf

    ie_off = [0.0] * na
    ie_on = [0.0] * na
    for i in range(n):
        for j in range(na):
            ie_off[j] = 0.0
            ie_on[j] = 0.0
        # off period: workload rises at rate drift between jumps
        w = 0.0
        el = 0.0
        iw_off = 0.0
        if tau_kind == 0:
            t_end = math.inf
        elif tau_kind == 1:
            t_end = tau_par
        else:
            t_end = -math.log(unif()) / tau_par
        while True:
            ta = arrival()
            if tau_kind != 0 and el + ta >= t_end:
                t = t_end - el
                last = True
            else:
                t = ta
                last = False
            iw_off += w * t + drift * t * t / 2.0
            for j in range(na):
                if drift > 0.0:
                    ie_off[j] += math.exp(-al[j] * w) * (-math.expm1(-al[j] * drift * t)) / (al[j] * drift)
                else:
                    ie_off[j] += math.exp(-al[j] * w) * t
            w += drift * t
            el += t
            if last:
                break
            w += jump()
            if tau_kind == 0:
                break
        v = w
        # on period
        R = 0.0
        on_len = 0.0
        iw_on = 0.0
        cap_cost = 0.0
        njumps = 0
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
                R = math.inf if g == 0.0 else ppar[2] + 1.0 / g
            if math.isinf(R):
                cap_cost = d * v
            else:
                if R <= drift:
                    return ERR_UNSTABLE, i
                s = R - drift
                while True:
                    ta = arrival()
                    tz = w / s
                    if tz <= ta:
                        t = tz
                        w1 = 0.0
                    else:
                        t = ta
                        w1 = w - s * ta
                    iw_on += (w + w1) / 2.0 * t
                    for j in range(na):
                        ie_on[j] += math.exp(-al[j] * w1) * (-math.expm1(-al[j] * s * t)) / (al[j] * s)
                    on_len += t
                    if tz <= ta:
                        break
                    w = w1 + jump()
                    njumps += 1
                cap_cost = d * R * on_len
        row = out[i]
        row[OFF_LEN] = el
        row[ON_LEN] = on_len
        row[V_COL] = v
        row[R_COL] = R
        row[INTW_OFF] = iw_off
        row[INTW_ON] = iw_on
        row[COST] = K + h * (iw_off + iw_on) + cap_cost
        row[N_ON_JUMPS] = njumps
        for j in range(na):
            row[NCOL + 2 * j] = ie_off[j]
            row[NCOL + 2 * j + 1] = ie_on[j]
    return OK, n
