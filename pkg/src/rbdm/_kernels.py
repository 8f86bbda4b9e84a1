"""Compiled FFBS for two-dimensional states with closed-form 2x2 algebra.

Symmetric 2x2 matrices are stored as ``(s11, s12, s22)``. Draw order and the
fallback rules match :func:`rbdm.kalman.ffbs_sample`.
"""
import math

import numpy as np
from numba import njit

JITTER = 1e-12


@njit(cache=True)
def _chol_draw(c11, c12, c22, z0, z1):
    # pivot-clamped Cholesky so singular PSD covariances still give draws
    l11 = math.sqrt(c11) if c11 > 0.0 else 0.0
    l21 = c12 / l11 if l11 > 0.0 else 0.0
    d = c22 - l21 * l21
    l22 = math.sqrt(d) if d > 0.0 else 0.0
    return l11 * z0, l21 * z0 + l22 * z1


@njit(cache=True)
def _inv2(r11, r12, r22):
    """Inverse of a symmetric 2x2; returns (i11, i12, i22, fell_back)."""
    if r11 > 0.0 and r11 * r22 - r12 * r12 > 0.0:
        det = r11 * r22 - r12 * r12
        return r22 / det, -r12 / det, r11 / det, False
    j = JITTER * (r11 + r22)
    s11, s22 = r11 + j, r22 + j
    det = s11 * s22 - r12 * r12
    if s11 > 0.0 and det > 0.0:
        return s22 / det, -r12 / det, s11 / det, False
    # rank <= 1 PSD: pinv(R) = R / trace(R)^2, or zero
    tr = r11 + r22
    if tr > 0.0:
        k = 1.0 / (tr * tr)
        return r11 * k, r12 * k, r22 * k, True
    return 0.0, 0.0, 0.0, True


@njit(cache=True)
def ffbs_2d(y, V, W, F, G, m0, C0, z, theta):
    """Filter forward and sample ``theta`` (T+1, 2) in place.

    Returns ``(status, fallbacks)``; ``status`` is -1 on success or the 1-based
    time index at which the forecast variance stopped being positive.
    """
    T = y.shape[0]
    f0, f1 = F[0], F[1]
    g00, g01, g10, g11 = G[0, 0], G[0, 1], G[1, 0], G[1, 1]
    a = np.empty((T, 2))
    R = np.empty((T, 3))
    m = np.empty((T + 1, 2))
    C = np.empty((T + 1, 3))
    m[0, 0], m[0, 1] = m0[0], m0[1]
    C[0, 0], C[0, 1], C[0, 2] = C0[0, 0], 0.5 * (C0[0, 1] + C0[1, 0]), C0[1, 1]
    for k in range(T):
        c11, c12, c22 = C[k, 0], C[k, 1], C[k, 2]
        a0 = g00 * m[k, 0] + g01 * m[k, 1]
        a1 = g10 * m[k, 0] + g11 * m[k, 1]
        # G C
        h00 = g00 * c11 + g01 * c12
        h01 = g00 * c12 + g01 * c22
        h10 = g10 * c11 + g11 * c12
        h11 = g10 * c12 + g11 * c22
        # G C G' + W
        r11 = h00 * g00 + h01 * g01 + W[k, 0]
        r12 = h00 * g10 + h01 * g11
        r22 = h10 * g10 + h11 * g11 + W[k, 1]
        a[k, 0], a[k, 1] = a0, a1
        R[k, 0], R[k, 1], R[k, 2] = r11, r12, r22
        f = f0 * a0 + f1 * a1
        rf0 = r11 * f0 + r12 * f1
        rf1 = r12 * f0 + r22 * f1
        Q = f0 * rf0 + f1 * rf1 + V[k]
        if not (Q > 0.0 and Q < np.inf):
            return k + 1, 0
        A0, A1 = rf0 / Q, rf1 / Q
        e = y[k] - f
        m[k + 1, 0] = a0 + A0 * e
        m[k + 1, 1] = a1 + A1 * e
        C[k + 1, 0] = r11 - Q * A0 * A0
        C[k + 1, 1] = r12 - Q * A0 * A1
        C[k + 1, 2] = r22 - Q * A1 * A1

    d0, d1 = _chol_draw(C[T, 0], C[T, 1], C[T, 2], z[T, 0], z[T, 1])
    theta[T, 0] = m[T, 0] + d0
    theta[T, 1] = m[T, 1] + d1
    fallbacks = 0
    for t in range(T - 1, -1, -1):
        c11, c12, c22 = C[t, 0], C[t, 1], C[t, 2]
        r11, r12, r22 = R[t, 0], R[t, 1], R[t, 2]
        i11, i12, i22, fb = _inv2(r11, r12, r22)
        if fb:
            fallbacks += 1
        # (C G') = (G C)'
        k00 = c11 * g00 + c12 * g01
        k01 = c11 * g10 + c12 * g11
        k10 = c12 * g00 + c22 * g01
        k11 = c12 * g10 + c22 * g11
        b00 = k00 * i11 + k01 * i12
        b01 = k00 * i12 + k01 * i22
        b10 = k10 * i11 + k11 * i12
        b11 = k10 * i12 + k11 * i22
        dx0 = theta[t + 1, 0] - a[t, 0]
        dx1 = theta[t + 1, 1] - a[t, 1]
        mu0 = m[t, 0] + b00 * dx0 + b01 * dx1
        mu1 = m[t, 1] + b10 * dx0 + b11 * dx1
        # B R B'
        p00 = b00 * r11 + b01 * r12
        p01 = b00 * r12 + b01 * r22
        p10 = b10 * r11 + b11 * r12
        p11 = b10 * r12 + b11 * r22
        s11 = c11 - (p00 * b00 + p01 * b01)
        s12 = c12 - 0.5 * ((p00 * b10 + p01 * b11) + (p10 * b00 + p11 * b01))
        s22 = c22 - (p10 * b10 + p11 * b11)
        d0, d1 = _chol_draw(s11, s12, s22, z[t, 0], z[t, 1])
        theta[t, 0] = mu0 + d0
        theta[t, 1] = mu1 + d1
    return -1, fallbacks
