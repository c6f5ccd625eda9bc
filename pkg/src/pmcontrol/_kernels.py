"""Compiled inner loops for piecewise-constant two-level propagation.

SU(2) propagators are carried as Cayley-Klein pairs (a, b) meaning
``U = [[a, -conj(b)], [b, conj(a)]]``; a step generated by
``H = hx sx + hy sy + hz sz`` over ``dt`` is
``a = cos(th) - i s hz``, ``b = s hy - i s hx`` with ``th = |h| dt`` and
``s = sin(th) / |h|``.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _mul_step(ar, ai, br, bi, hx, hy, hz, dt):
    # left-multiply (a, b) by exp(-i h.sigma dt)
    n = np.sqrt(hx * hx + hy * hy + hz * hz)
    th = n * dt
    co = np.cos(th)
    if n > 0.0:
        s = np.sin(th) / n
    else:
        s = dt
    a2r = co
    a2i = -s * hz
    b2r = s * hy
    b2i = -s * hx
    nar = a2r * ar - a2i * ai - (b2r * br + b2i * bi)
    nai = a2r * ai + a2i * ar - (b2r * bi - b2i * br)
    nbr = b2r * ar - b2i * ai + (a2r * br + a2i * bi)
    nbi = b2r * ai + b2i * ar + (a2r * bi - a2i * br)
    return nar, nai, nbr, nbi


@njit(cache=True)
def su2_ensemble(cx, cy, deltas, alphas, dt):
    """Propagators for many static (delta, alpha) pairs sharing one control path.

    ``cx``/``cy`` are Re/Im of the envelope at the step midpoints.
    Returns an (M, 4) array of (Re a, Im a, Re b, Im b).
    """
    M = deltas.shape[0]
    S = cx.shape[0]
    out = np.empty((M, 4))
    for k in range(M):
        hz = 0.5 * deltas[k]
        scale = 0.5 * alphas[k]
        ar, ai, br, bi = 1.0, 0.0, 0.0, 0.0
        for j in range(S):
            ar, ai, br, bi = _mul_step(ar, ai, br, bi, scale * cx[j], scale * cy[j], hz, dt)
        out[k, 0] = ar
        out[k, 1] = ai
        out[k, 2] = br
        out[k, 3] = bi
    return out


@njit(cache=True)
def su2_path(hx, hy, hz, dts):
    """Propagator of one system with per-step Pauli coefficients and step lengths."""
    ar, ai, br, bi = 1.0, 0.0, 0.0, 0.0
    for j in range(hx.shape[0]):
        ar, ai, br, bi = _mul_step(ar, ai, br, bi, hx[j], hy[j], hz[j], dts[j])
    return np.array([ar, ai, br, bi])


@njit(cache=True)
def _deriv(x, y, z, hx, hy, hz, gamma):
    # dr/dt = 2 h x r  minus transverse decay
    dx = 2.0 * (hy * z - hz * y) - gamma * x
    dy = 2.0 * (hz * x - hx * z) - gamma * y
    dz = 2.0 * (hx * y - hy * x)
    return dx, dy, dz


@njit(cache=True)
def bloch_ensemble(cx, cy, deltas, alphas, gamma, dt, r0):
    """RK4 on the Bloch vector under pure dephasing, H held at its midpoint value per step.

    Returns an (M, 3) array of final Bloch vectors.
    """
    M = deltas.shape[0]
    S = cx.shape[0]
    out = np.empty((M, 3))
    h2 = 0.5 * dt
    for k in range(M):
        hz = 0.5 * deltas[k]
        scale = 0.5 * alphas[k]
        x, y, z = r0[0], r0[1], r0[2]
        for j in range(S):
            hx = scale * cx[j]
            hy = scale * cy[j]
            k1x, k1y, k1z = _deriv(x, y, z, hx, hy, hz, gamma)
            k2x, k2y, k2z = _deriv(x + h2 * k1x, y + h2 * k1y, z + h2 * k1z, hx, hy, hz, gamma)
            k3x, k3y, k3z = _deriv(x + h2 * k2x, y + h2 * k2y, z + h2 * k2z, hx, hy, hz, gamma)
            k4x, k4y, k4z = _deriv(x + dt * k3x, y + dt * k3y, z + dt * k3z, hx, hy, hz, gamma)
            x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            z += dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        out[k, 0] = x
        out[k, 1] = y
        out[k, 2] = z
    return out
