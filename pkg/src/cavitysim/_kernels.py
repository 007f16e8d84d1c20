"""Numba propagation kernels.

One segment runner integrates psi under H(t) = H_static + sum_m c_m(t) A_m +
c_m*(t) A_m^dag with diagonal decay K(t) = sum_c rate_c(t) diag_c, using a
midpoint Lanczos exponential step wrapped in Strang decay half-steps.  The
step size is a deterministic function of time only, so restarted segments
re-trace the same grid.  Falls back to plain Python when numba is missing.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def deco(f):
            return f

        return deco


# envelope kinds
ENV_CONST = 0
ENV_LINEAR = 1
ENV_TANH = 2
ENV_SAMPLED = 3
ENV_GATE = 4

# return codes
OK = 0
ERR_ZERO_NORM_COLLAPSE = 1
ERR_MAX_STEPS = 2
ERR_JUMP_OVERFLOW = 3


@njit(cache=True)
def _env_value(kind, a, b, t0, dur, off, length, pool, t):
    if kind == ENV_CONST:
        return a
    if kind == ENV_LINEAR or kind == ENV_TANH:
        x = (t - t0) / dur
        if x < 0.0:
            x = 0.0
        elif x > 1.0:
            x = 1.0
        if kind == ENV_LINEAR:
            s = x
        else:
            aa = 2.5
            s = (np.tanh(aa * (2.0 * x - 1.0)) + np.tanh(aa)) \
                / (2.0 * np.tanh(aa))
        return a + (b - a) * s
    if kind == ENV_SAMPLED:
        x = (t - t0) / dur
        i = int(x)
        if x < 0.0:
            return pool[off]
        if i >= length - 1:
            return pool[off + length - 1]
        f = x - i
        return pool[off + i] * (1.0 - f) + pool[off + i + 1] * f
    # gate: value a during slices of parity int(b), else 0
    if t < t0:
        return 0.0
    i = int((t - t0) / dur)
    return a if (i % 2) == int(b) else 0.0


@njit(cache=True)
def _tql2(d, e, z):
    """Symmetric tridiagonal eigendecomposition (EISPACK tql2 port).

    d: diagonal, overwritten with ascending eigenvalues; e: subdiagonal in
    e[0..n-2]; z: identity in, eigenvectors in columns out.
    """
    n = d.shape[0]
    if n == 1:
        return
    ee = np.empty(n)
    for i in range(1, n):
        ee[i - 1] = e[i - 1]
    ee[n - 1] = 0.0
    f = 0.0
    tst1 = 0.0
    eps = 2.220446049250313e-16
    for l in range(n):
        h = abs(d[l]) + abs(ee[l])
        if tst1 < h:
            tst1 = h
        m = l
        while m < n:
            if abs(ee[m]) <= eps * tst1:
                break
            m += 1
        if m > l:
            it = 0
            while True:
                it += 1
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * ee[l])
                r = np.hypot(p, 1.0)
                if p < 0.0:
                    r = -r
                d[l] = ee[l] / (p + r)
                d[l + 1] = ee[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] -= h
                f += h
                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = ee[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * ee[i]
                    h = c * p
                    r = np.hypot(p, ee[i])
                    ee[i + 1] = s * r
                    s = ee[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    for k in range(n):
                        h = z[k, i + 1]
                        z[k, i + 1] = s * z[k, i] + c * h
                        z[k, i] = c * z[k, i] - s * h
                p = -s * s2 * c3 * el1 * ee[l] / dl1
                ee[l] = s * p
                d[l] = c * p
                if abs(ee[l]) <= eps * tst1:
                    break
                if it > 60:
                    break
        d[l] += f
    for i in range(1, n):
        dv = d[i]
        k = i - 1
        while k >= 0 and d[k] > dv:
            d[k + 1] = d[k]
            for r0 in range(n):
                tmp = z[r0, k + 1]
                z[r0, k + 1] = z[r0, k]
                z[r0, k] = tmp
            k -= 1
        d[k + 1] = dv


@njit(cache=True)
def _ham_matvec(t, x, y,
                sp_indptr, sp_indices, sp_data,
                d_rows, d_cols, d_vals, d_off,
                d_env_kind, d_env_a, d_env_b, d_env_t0, d_env_dur,
                d_env_off, d_env_len, env_pool, d_omega, d_scale):
    """y = H(t) x with drive terms applied as c A + c* A^dag."""
    n = x.shape[0]
    for i in range(n):
        acc = 0.0 + 0.0j
        for p in range(sp_indptr[i], sp_indptr[i + 1]):
            acc += sp_data[p] * x[sp_indices[p]]
        y[i] = acc
    n_d = d_off.shape[0] - 1
    for m in range(n_d):
        env = _env_value(d_env_kind[m], d_env_a[m], d_env_b[m], d_env_t0[m],
                         d_env_dur[m], d_env_off[m], d_env_len[m], env_pool, t)
        if env == 0.0:
            continue
        ph = d_omega[m] * t
        c = d_scale[m] * env * complex(np.cos(ph), np.sin(ph))
        cc = np.conj(c)
        for p in range(d_off[m], d_off[m + 1]):
            r = d_rows[p]
            q = d_cols[p]
            v = d_vals[p]
            y[r] += c * v * x[q]
            y[q] += cc * np.conj(v) * x[r]


@njit(cache=True)
def _norm2(psi):
    acc = 0.0
    for i in range(psi.shape[0]):
        acc += psi[i].real ** 2 + psi[i].imag ** 2
    return acc


@njit(cache=True)
def _lanczos_expm(t_mid, tau, psi, work_v, alpha, beta, zmat, coef,
                  sp_indptr, sp_indices, sp_data,
                  d_rows, d_cols, d_vals, d_off,
                  d_env_kind, d_env_a, d_env_b, d_env_t0, d_env_dur,
                  d_env_off, d_env_len, env_pool, d_omega, d_scale,
                  m_max):
    """psi <- exp(-i H(t_mid) tau) psi using an m_max-step Lanczos basis."""
    n = psi.shape[0]
    nrm2 = _norm2(psi)
    if nrm2 == 0.0:
        return
    nrm = np.sqrt(nrm2)
    m_cap = m_max if m_max < n else n
    inv0 = 1.0 / nrm
    for i in range(n):
        work_v[0, i] = psi[i] * inv0
    m_used = m_cap
    for j in range(m_cap):
        _ham_matvec(t_mid, work_v[j], work_v[j + 1],
                    sp_indptr, sp_indices, sp_data,
                    d_rows, d_cols, d_vals, d_off,
                    d_env_kind, d_env_a, d_env_b, d_env_t0, d_env_dur,
                    d_env_off, d_env_len, env_pool, d_omega, d_scale)
        a_j = 0.0
        for i in range(n):
            a_j += (work_v[j, i].real * work_v[j + 1, i].real
                    + work_v[j, i].imag * work_v[j + 1, i].imag)
        alpha[j] = a_j
        if j > 0:
            b_prev = beta[j - 1]
            for i in range(n):
                work_v[j + 1, i] -= a_j * work_v[j, i] \
                    + b_prev * work_v[j - 1, i]
        else:
            for i in range(n):
                work_v[j + 1, i] -= a_j * work_v[j, i]
        b_j = np.sqrt(_norm2(work_v[j + 1]))
        beta[j] = b_j
        if b_j < 1e-13:
            m_used = j + 1
            break
        inv = 1.0 / b_j
        for i in range(n):
            work_v[j + 1, i] *= inv
    m = m_used
    d = alpha[:m].copy()
    e = np.empty(m)
    for i in range(m - 1):
        e[i] = beta[i]
    z = zmat[:m, :m]
    for i in range(m):
        for k in range(m):
            z[i, k] = 1.0 if i == k else 0.0
    _tql2(d, e, z)
    for j in range(m):
        coef[j] = 0.0 + 0.0j
    for k in range(m):
        ph = -d[k] * tau
        ek = complex(np.cos(ph), np.sin(ph)) * z[0, k]
        for j in range(m):
            coef[j] += z[j, k] * ek
    for i in range(n):
        acc = 0.0 + 0.0j
        for j in range(m):
            acc += coef[j] * work_v[j, i]
        psi[i] = nrm * acc


@njit(cache=True)
def _decay_half(t, tau, psi, kdiag, r_kind, r_a, r_b, r_t0, r_dur,
                r_off, r_len, env_pool):
    """psi <- exp(-K(t) tau / 2) psi, K = sum_c rate_c(t) kdiag_c (diagonal)."""
    n_c = kdiag.shape[0]
    if n_c == 0:
        return
    n = psi.shape[0]
    for i in range(n):
        ktot = 0.0
        for c in range(n_c):
            rate = _env_value(r_kind[c], r_a[c], r_b[c], r_t0[c], r_dur[c],
                              r_off[c], r_len[c], env_pool, t)
            ktot += rate * kdiag[c, i]
        if ktot != 0.0:
            psi[i] *= np.exp(-0.5 * ktot * tau)


@njit(cache=True)
def _step_once(t, dt, psi, work_v, alpha, beta, zmat, coef,
               sp_indptr, sp_indices, sp_data,
               d_rows, d_cols, d_vals, d_off,
               d_env_kind, d_env_a, d_env_b, d_env_t0, d_env_dur,
               d_env_off, d_env_len, env_pool, d_omega, d_scale,
               kdiag, r_kind, r_a, r_b, r_t0, r_dur, r_off, r_len,
               m_max):
    t_mid = t + 0.5 * dt
    _decay_half(t_mid, 0.5 * dt, psi, kdiag, r_kind, r_a, r_b, r_t0,
                r_dur, r_off, r_len, env_pool)
    _lanczos_expm(t_mid, dt, psi, work_v, alpha, beta, zmat, coef,
                  sp_indptr, sp_indices, sp_data,
                  d_rows, d_cols, d_vals, d_off,
                  d_env_kind, d_env_a, d_env_b, d_env_t0, d_env_dur,
                  d_env_off, d_env_len, env_pool, d_omega, d_scale,
                  m_max)
    _decay_half(t_mid, 0.5 * dt, psi, kdiag, r_kind, r_a, r_b, r_t0,
                r_dur, r_off, r_len, env_pool)


@njit(cache=True)
def _dt_at(t, dt_phase, kry_budget, bound_t0, bound_dt, bound_vals,
           gate_t0, gate_dur, has_gate):
    dt = dt_phase
    i = int((t - bound_t0) / bound_dt)
    if i < 0:
        i = 0
    if i >= bound_vals.shape[0]:
        i = bound_vals.shape[0] - 1
    b = bound_vals[i]
    if b > 0.0 and kry_budget / b < dt:
        dt = kry_budget / b
    if has_gate:
        k = int((t - gate_t0) / gate_dur)
        edge = gate_t0 + (k + 1) * gate_dur
        while edge <= t + 1e-18 * (abs(t) + gate_dur):
            edge += gate_dur
        if edge - t < dt:
            dt = edge - t
    return dt


@njit(cache=True)
def _apply_jump_op(c, psi, scratch, j_rows, j_cols, j_vals, j_off):
    n = psi.shape[0]
    for i in range(n):
        scratch[i] = 0.0 + 0.0j
    for p in range(j_off[c], j_off[c + 1]):
        scratch[j_rows[p]] += j_vals[p] * psi[j_cols[p]]


@njit(cache=True)
def run_segment(psi, t_start, t_end,
                out_times, out_psi, out_norm2, out_filled,
                sp_indptr, sp_indices, sp_data,
                d_rows, d_cols, d_vals, d_off,
                d_env_kind, d_env_a, d_env_b, d_env_t0, d_env_dur,
                d_env_off, d_env_len, env_pool, d_omega, d_scale,
                kdiag, r_kind, r_a, r_b, r_t0, r_dur, r_off, r_len,
                j_rows, j_cols, j_vals, j_off,
                dt_phase, kry_budget, bound_t0, bound_dt, bound_vals,
                gate_t0, gate_dur, has_gate,
                m_max, max_steps,
                threshold, rng_seed, do_jumps,
                jump_times, jump_channels,
                trace_t, trace_norm2, ckpt_psi, ckpt_t, ckpt_every,
                record_trace,
                work_v, alpha, beta, zmat, coef, psi_save, scratch,
                counts):
    """Evolve psi over [t_start, t_end]; returns a status code.

    counts out-array: [n_jumps, n_trace, n_ckpt, n_steps].
    """
    np.random.seed(rng_seed)
    n = psi.shape[0]
    n_out = out_times.shape[0]
    out_i = 0
    span = t_end - t_start
    eps_t = 1e-12 * max(abs(t_start), abs(t_end), span)
    while out_i < n_out and out_times[out_i] < t_start - eps_t:
        out_i += 1
    while out_i < n_out and out_times[out_i] <= t_start + eps_t:
        for i in range(n):
            out_psi[out_i, i] = psi[i]
        out_norm2[out_i] = _norm2(psi)
        out_filled[out_i] = 1
        out_i += 1

    t = t_start
    r = threshold
    n_jumps = 0
    n_trace = 0
    n_ckpt = 0
    steps = 0
    if record_trace and ckpt_psi.shape[0] > 0:
        for i in range(n):
            ckpt_psi[0, i] = psi[i]
        ckpt_t[0] = t
        n_ckpt = 1

    while t < t_end - eps_t:
        steps += 1
        if steps > max_steps:
            counts[0] = n_jumps
            counts[1] = n_trace
            counts[2] = n_ckpt
            counts[3] = steps
            return ERR_MAX_STEPS
        dt = _dt_at(t, dt_phase, kry_budget, bound_t0, bound_dt, bound_vals,
                    gate_t0, gate_dur, has_gate)
        if out_i < n_out and out_times[out_i] - t < dt:
            dt = out_times[out_i] - t
        if t_end - t < dt:
            dt = t_end - t
        if dt <= 0.0:
            dt = span * 1e-15

        for i in range(n):
            psi_save[i] = psi[i]
        _step_once(t, dt, psi, work_v, alpha, beta, zmat, coef,
                   sp_indptr, sp_indices, sp_data,
                   d_rows, d_cols, d_vals, d_off,
                   d_env_kind, d_env_a, d_env_b, d_env_t0, d_env_dur,
                   d_env_off, d_env_len, env_pool, d_omega, d_scale,
                   kdiag, r_kind, r_a, r_b, r_t0, r_dur, r_off, r_len,
                   m_max)
        t_new = t + dt

        if do_jumps and _norm2(psi) < r:
            lo = 0.0
            hi = dt
            tol_t = 1e-6 * span
            for _ in range(80):
                if hi - lo <= tol_t:
                    break
                mid = 0.5 * (lo + hi)
                for i in range(n):
                    psi[i] = psi_save[i]
                _step_once(t, mid, psi, work_v, alpha, beta, zmat, coef,
                           sp_indptr, sp_indices, sp_data,
                           d_rows, d_cols, d_vals, d_off,
                           d_env_kind, d_env_a, d_env_b, d_env_t0, d_env_dur,
                           d_env_off, d_env_len, env_pool, d_omega, d_scale,
                           kdiag, r_kind, r_a, r_b, r_t0, r_dur, r_off, r_len,
                           m_max)
                if _norm2(psi) < r:
                    hi = mid
                else:
                    lo = mid
            for i in range(n):
                psi[i] = psi_save[i]
            _step_once(t, hi, psi, work_v, alpha, beta, zmat, coef,
                       sp_indptr, sp_indices, sp_data,
                       d_rows, d_cols, d_vals, d_off,
                       d_env_kind, d_env_a, d_env_b, d_env_t0, d_env_dur,
                       d_env_off, d_env_len, env_pool, d_omega, d_scale,
                       kdiag, r_kind, r_a, r_b, r_t0, r_dur, r_off, r_len,
                       m_max)
            t_jump = t + hi
            n_c = j_off.shape[0] - 1
            weights = np.zeros(n_c)
            wsum = 0.0
            for c in range(n_c):
                rate = _env_value(r_kind[c], r_a[c], r_b[c], r_t0[c],
                                  r_dur[c], r_off[c], r_len[c], env_pool,
                                  t_jump)
                _apply_jump_op(c, psi, scratch, j_rows, j_cols, j_vals, j_off)
                weights[c] = rate * _norm2(scratch)
                wsum += weights[c]
            if wsum <= 0.0:
                counts[0] = n_jumps
                counts[1] = n_trace
                counts[2] = n_ckpt
                counts[3] = steps
                return ERR_ZERO_NORM_COLLAPSE
            u = np.random.random() * wsum
            chosen = n_c - 1
            acc_w = 0.0
            for c in range(n_c):
                acc_w += weights[c]
                if u <= acc_w:
                    chosen = c
                    break
            _apply_jump_op(chosen, psi, scratch, j_rows, j_cols, j_vals,
                           j_off)
            nrm = np.sqrt(_norm2(scratch))
            for i in range(n):
                psi[i] = scratch[i] / nrm
            if n_jumps >= jump_times.shape[0]:
                counts[0] = n_jumps
                counts[1] = n_trace
                counts[2] = n_ckpt
                counts[3] = steps
                return ERR_JUMP_OVERFLOW
            jump_times[n_jumps] = t_jump
            jump_channels[n_jumps] = chosen
            n_jumps += 1
            r = np.random.random()
            t = t_jump
            continue

        t = t_new
        if record_trace and n_trace < trace_t.shape[0]:
            trace_t[n_trace] = t
            trace_norm2[n_trace] = _norm2(psi)
            n_trace += 1
            if steps % ckpt_every == 0 and n_ckpt < ckpt_psi.shape[0]:
                for i in range(n):
                    ckpt_psi[n_ckpt, i] = psi[i]
                ckpt_t[n_ckpt] = t
                n_ckpt += 1
        while out_i < n_out and out_times[out_i] <= t + eps_t:
            for i in range(n):
                out_psi[out_i, i] = psi[i]
            out_norm2[out_i] = _norm2(psi)
            out_filled[out_i] = 1
            out_i += 1

    counts[0] = n_jumps
    counts[1] = n_trace
    counts[2] = n_ckpt
    counts[3] = steps
    return OK
