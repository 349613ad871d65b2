"""Pure-numpy backend implementing the same kernel contract as the numba one.

Same packed segment tables, same counter-based draws (so both backends see
identical noise realizations), but vectorized per segment: OU chains run
through scipy.signal.lfilter (the exact update is a first-order IIR filter)
and pulse-step propagators are reduced with a pairwise batched matmul.  The
product order differs from the scalar kernel only in floating-point
association, so backends agree to ~1e-9, not bit-for-bit.

Roughly 10-50x slower than the numba backend; intended for validation,
benchmarking, and environments without a working numba.
"""

import numpy as np
from scipy.signal import lfilter

from . import _rng


def _ou_span(key, counter, x, off, a_f, b_f, a_r, b_r, m, rem):
    """Advance one channel across one segment.

    Returns (values at the m + has_rem step starts, end state, new counter).
    """
    has_rem = 1 if rem > 0.0 else 0
    cnt = m + has_rem
    vals = np.empty(cnt + 1)
    vals[0] = x
    if cnt == 0:
        return vals[:0], x, counter
    draws = _rng.normals(key, counter, cnt)
    counter += cnt
    if m > 0:
        y = lfilter([b_f], [1.0, -a_f], draws[:m], zi=[a_f * (x - off)])[0]
        vals[1:m + 1] = y + off
    if has_rem:
        xm = vals[m]
        vals[m + 1] = off + (xm - off) * a_r + b_r * draws[m]
    return vals[:cnt], vals[cnt], counter


def _ordered_product(mats):
    """M_{m-1} @ ... @ M_0 by pairwise reduction (mats in chronological order)."""
    while mats.shape[0] > 1:
        n2 = mats.shape[0] // 2
        paired = np.matmul(mats[1:2 * n2:2], mats[0:2 * n2:2])
        if mats.shape[0] % 2:
            paired = np.concatenate([paired, mats[-1:]], axis=0)
        mats = paired
    return mats[0]


def _run_span(key_d, key_e, c_d, c_e, x_d, x_e, u,
              fmat, nsteps, pulse, lo, hi, omega, off_d, off_e):
    for s in range(lo, hi):
        dt, rem, cph, sph = fmat[s, 0], fmat[s, 1], fmat[s, 2], fmat[s, 3]
        m = int(nsteps[s])
        d_starts, x_d, c_d = _ou_span(key_d, c_d, x_d, off_d,
                                      fmat[s, 4], fmat[s, 5], fmat[s, 8], fmat[s, 9],
                                      m, rem)
        e_starts, x_e, c_e = _ou_span(key_e, c_e, x_e, off_e,
                                      fmat[s, 6], fmat[s, 7], fmat[s, 10], fmat[s, 11],
                                      m, rem)
        if m + (1 if rem > 0.0 else 0) == 0:
            continue
        widths = np.full(len(d_starts), dt)
        if rem > 0.0:
            widths[-1] = rem
        if pulse[s] != 0:
            weff = omega * (1.0 + e_starts)
            ax = 0.5 * weff * cph
            ay = 0.5 * weff * sph
            az = 0.5 * d_starts
            norm = np.sqrt(ax * ax + ay * ay + az * az)
            theta = norm * widths
            c = np.cos(theta)
            safe = np.where(norm == 0.0, 1.0, norm)
            sc = np.where(norm == 0.0, widths, np.sin(theta) / safe)
            mats = np.empty((len(widths), 2, 2), dtype=complex)
            mats[:, 0, 0] = c - 1j * az * sc
            mats[:, 0, 1] = (-1j * ax - ay) * sc
            mats[:, 1, 0] = (-1j * ax + ay) * sc
            mats[:, 1, 1] = c + 1j * az * sc
            u = _ordered_product(mats) @ u
        else:
            phi = float(d_starts @ widths)
            u = np.array([[np.exp(-0.5j * phi), 0.0],
                          [0.0, np.exp(0.5j * phi)]]) @ u
    return u, x_d, x_e, c_d, c_e


def run_columns(pf, pn, pp, sf, sn, sp, v_start, v_len,
                omega, off_d, sig_d, off_e, sig_e,
                keys_d, keys_e, out, k0, k1):
    eye = np.eye(2, dtype=complex)
    for k in range(k0, k1):
        kd = keys_d[k]
        ke = keys_e[k]
        x_d = off_d + sig_d * _rng.normals(kd, 0, 1)[0]
        x_e = off_e + sig_e * _rng.normals(ke, 0, 1)[0]
        u, x_d, x_e, c_d, c_e = _run_span(kd, ke, 1, 1, x_d, x_e, eye,
                                          pf, pn, pp, 0, len(pn), omega, off_d, off_e)
        for v in range(len(v_start)):
            lo = int(v_start[v])
            hi = lo + int(v_len[v])
            w, _, _, _, _ = _run_span(kd, ke, c_d, c_e, x_d, x_e, u,
                                      sf, sn, sp, lo, hi, omega, off_d, off_e)
            out[k, v, 0] = w[0, 0]
            out[k, v, 1] = w[1, 0]


def run_unitaries(pf, pn, pp,
                  omega, off_d, sig_d, off_e, sig_e,
                  keys_d, keys_e, out, k0, k1):
    eye = np.eye(2, dtype=complex)
    for k in range(k0, k1):
        kd = keys_d[k]
        ke = keys_e[k]
        x_d = off_d + sig_d * _rng.normals(kd, 0, 1)[0]
        x_e = off_e + sig_e * _rng.normals(ke, 0, 1)[0]
        u, _, _, _, _ = _run_span(kd, ke, 1, 1, x_d, x_e, eye,
                                  pf, pn, pp, 0, len(pn), omega, off_d, off_e)
        out[k] = u
