"""Characteristic-wise fifth-order finite-difference WENO for the Euler equations.

The spatial operator uses global Lax-Friedrichs splitting

    f+ = (u + f(u)/alpha) / 2,    f- = (u - f(u)/alpha) / 2,

projects both halves onto the Roe eigenvectors of each interface,
reconstructs every characteristic field with Jiang-Shu WENO5 (the ``f-``
half on the mirrored stencil), maps back and forms
``fhat = alpha * (fhat+ - fhat-)``.  2D is done dimension by dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .grid import Field, directional_states
from .state import PressureFunctional, StateDomainError

WENO_EPS = 1e-6
LINEAR_WEIGHTS = (0.1, 0.6, 0.3)


@dataclass
class EigenSystem:
    """Left/right eigenvectors (``(..., k, k)``) and sorted wave speeds (``(..., k)``)."""

    left: np.ndarray
    right: np.ndarray
    speeds: np.ndarray

    def jacobian(self):
        return self.right @ (self.speeds[..., :, None] * self.left)


@dataclass
class ResidualOutput:
    residual: np.ndarray
    alpha: tuple


def physical_flux(u, f: PressureFunctional, axis: int = 0):
    """Euler flux along ``axis`` for states ``u`` with components on axis 0."""
    u = np.asarray(u, dtype=float)
    d = f.ndim(u.shape[0])
    p = (f.gamma - 1.0) * f.internal_energy(u)
    vn = u[1 + axis] / u[0]
    out = u * vn
    out[1 + axis] += p
    out[d + 1] += p * vn
    return out


def global_alpha(field: Field, f: PressureFunctional):
    """Largest ``|v_a| + c`` per direction over every node a flux stencil reads.

    Ghost layers are filled by the boundary conditions and enter the split
    fluxes, so they count too (an inflow jet is usually the fastest state).
    Ghost layers must be current.
    """
    if field.ndim == 1:
        return _alpha_of(field.u, f)
    g = field.ghost
    nx, ny = field.shape
    wx = directional_states(field, 0)[:, :, g:g + ny]
    wy = directional_states(field, 1)[:, g:g + nx, :]
    if field.mask is not None:
        wx = wx[:, _padded_fluid(field, 0)]
        wy = wy[:, _padded_fluid(field, 1)]
    return (_alpha_of(wx, f)[0], _alpha_of(wy, f)[1])


def _padded_fluid(field, axis):
    """Fluid mask extended over the ghost layers along ``axis`` (mirrored nodes count)."""
    g = field.ghost
    fl = field.fluid
    pad = [(g, g), (0, 0)] if axis == 0 else [(0, 0), (g, g)]
    out = np.pad(fl, pad, constant_values=True)
    ie, je = field.mask.i_end, field.mask.j_end
    if axis == 0:
        out[g + max(ie - g, 0):g + ie, :je] = True
    else:
        out[:ie, g + max(je - g, 0):g + je] = True
    return out


def _alpha_of(w, f):
    rho = w[0]
    if not np.all(np.isfinite(w)):
        raise StateDomainError("non-finite state in wave-speed estimate")
    if np.any(rho <= 0.0):
        raise StateDomainError(f"nonpositive density (min {rho.min():.3e}) in wave-speed estimate")
    p = (f.gamma - 1.0) * f.internal_energy(w)
    if np.any(p <= 0.0):
        raise StateDomainError(f"nonpositive pressure (min {p.min():.3e}) in wave-speed estimate")
    c = np.sqrt(f.gamma * p / rho)
    d = f.ndim(w.shape[0])
    return tuple(float(np.max(np.abs(w[1 + a] / rho) + c)) for a in range(d))


def flux_split(u, flux, alpha):
    """Return ``(f+, f-)`` with ``f+ + f- = u`` and ``alpha (f+ - f-) = flux``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    u = np.asarray(u, dtype=float)
    flux = np.asarray(flux, dtype=float)
    scaled = flux / alpha
    return 0.5 * (u + scaled), 0.5 * (u - scaled)


def roe_eigensystem(uL, uR, f: PressureFunctional, direction: int = 0) -> EigenSystem:
    """Eigen-decomposition of the Roe matrix between ``uL`` and ``uR``.

    Works on single states ``(k,)`` or batches ``(k, ...)``; the returned
    matrices carry the batch shape in front.  Waves are ordered
    ``(v-c, v, [v], [v], v+c)``: acoustic, entropy, shear (2D), species
    (reactive), acoustic.
    """
    L, R, speeds = _roe_arrays(uL, uR, f, direction)
    nb = L.ndim - 2
    L = np.moveaxis(L, (0, 1), (nb, nb + 1))
    R = np.moveaxis(R, (0, 1), (nb, nb + 1))
    return EigenSystem(L, R, np.moveaxis(speeds, 0, -1))


def _roe_arrays(uL, uR, f, direction):
    """Component-major Roe eigenvectors: ``L[row, col, ...]``, ``R[row, col, ...]``."""
    uL = np.asarray(uL, dtype=float)
    uR = np.asarray(uR, dtype=float)
    k = uL.shape[0]
    d = f.ndim(k)
    gm1 = f.gamma - 1.0
    Q = f.heat_release if f.reactive else 0.0
    iE = d + 1

    sL = np.sqrt(uL[0])
    sR = np.sqrt(uR[0])
    wsum = sL + sR

    def avg(qL, qR):
        return (sL * qL + sR * qR) / wsum

    pL = gm1 * f.internal_energy(uL)
    pR = gm1 * f.internal_energy(uR)
    vel = [avg(uL[1 + a] / uL[0], uR[1 + a] / uR[0]) for a in range(d)]
    H = avg((uL[iE] + pL) / uL[0], (uR[iE] + pR) / uR[0])
    Y = avg(uL[iE + 1] / uL[0], uR[iE + 1] / uR[0]) if f.reactive else 0.0
    q2 = sum(v * v for v in vel)
    # gm1 * (H - q2/2 - Q Y) rearranged so no large terms cancel
    jump2 = sum((uR[1 + a] / uR[0] - uL[1 + a] / uL[0]) ** 2 for a in range(d))
    c2 = (avg(f.gamma * pL / uL[0], f.gamma * pR / uR[0])
          + 0.5 * gm1 * sL * sR / (wsum * wsum) * jump2)
    if np.any(~(c2 > 0.0)):
        raise StateDomainError("Roe-averaged sound speed squared is not positive")
    c = np.sqrt(c2)
    inv_c = 1.0 / c
    vn = vel[direction]
    K = gm1 / c2
    Kq = 0.5 * K * q2

    batch = np.shape(c)
    R = np.zeros((k, k) + batch)
    L = np.zeros((k, k) + batch)
    speeds = np.empty((k,) + batch)

    cols = ["minus", "entropy"]
    if d == 2:
        cols.append("shear")
    if f.reactive:
        cols.append("species")
    cols.append("plus")

    for col, kind in enumerate(cols):
        if kind in ("minus", "plus"):
            sgn = -1.0 if kind == "minus" else 1.0
            R[0, col] = 1.0
            for a in range(d):
                R[1 + a, col] = vel[a] + sgn * c if a == direction else vel[a]
            R[iE, col] = H + sgn * vn * c
            if f.reactive:
                R[iE + 1, col] = Y
            L[col, 0] = 0.5 * (Kq - sgn * vn * inv_c)
            for a in range(d):
                L[col, 1 + a] = 0.5 * (-K * vel[a] + (sgn * inv_c if a == direction else 0.0))
            L[col, iE] = 0.5 * K
            if f.reactive:
                L[col, iE + 1] = -0.5 * K * Q
            speeds[col] = vn + sgn * c
        elif kind == "entropy":
            R[0, col] = 1.0
            for a in range(d):
                R[1 + a, col] = vel[a]
            R[iE, col] = 0.5 * q2 + Q * Y
            L[col, 0] = 1.0 - Kq
            for a in range(d):
                L[col, 1 + a] = K * vel[a]
            L[col, iE] = -K
            if f.reactive:
                R[iE + 1, col] = Y
                L[col, iE + 1] = K * Q
            speeds[col] = vn
        elif kind == "shear":
            t = 1 - direction
            R[1 + t, col] = 1.0
            R[iE, col] = vel[t]
            L[col, 0] = -vel[t]
            L[col, 1 + t] = 1.0
            speeds[col] = vn
        else:
            R[iE, col] = Q
            R[iE + 1, col] = 1.0
            L[col, 0] = -Y
            L[col, iE + 1] = 1.0
            speeds[col] = vn
    return L, R, speeds


def weno5_weights(v):
    """Nonlinear Jiang-Shu weights for a stencil on the last axis of ``v``."""
    v = np.asarray(v, dtype=float)
    return _weights(*(v[..., i] for i in range(5)))


def candidate_values(v):
    """Third-order values at the right interface from the three sub-stencils."""
    v = np.asarray(v, dtype=float)
    a, b, c, d, e = (v[..., i] for i in range(5))
    q0 = (2 * a - 7 * b + 11 * c) / 6.0
    q1 = (-b + 5 * c + 2 * d) / 6.0
    q2 = (2 * c + 5 * d - e) / 6.0
    return q0, q1, q2


def weno5_reconstruct(v):
    """Value at ``x_{i+1/2}`` from ``(v_{i-2}, ..., v_{i+2})`` on the last axis."""
    v = np.asarray(v, dtype=float)
    return _reconstruct(*(v[..., i] for i in range(5)))


def _weights(a, b, c, d, e):
    t = a - 2 * b + c
    s = a - 4 * b + 3 * c
    beta0 = 13.0 / 12.0 * t * t + 0.25 * s * s
    t = b - 2 * c + d
    s = b - d
    beta1 = 13.0 / 12.0 * t * t + 0.25 * s * s
    t = c - 2 * d + e
    s = 3 * c - 4 * d + e
    beta2 = 13.0 / 12.0 * t * t + 0.25 * s * s
    beta0 += WENO_EPS
    beta1 += WENO_EPS
    beta2 += WENO_EPS
    a0 = LINEAR_WEIGHTS[0] / (beta0 * beta0)
    a1 = LINEAR_WEIGHTS[1] / (beta1 * beta1)
    a2 = LINEAR_WEIGHTS[2] / (beta2 * beta2)
    s = a0 + a1 + a2
    return a0 / s, a1 / s, a2 / s


def _reconstruct(a, b, c, d, e):
    w0, w1, w2 = _weights(a, b, c, d, e)
    return (w0 * (2 * a - 7 * b + 11 * c) + w1 * (-b + 5 * c + 2 * d)
            + w2 * (2 * c + 5 * d - e)) / 6.0


def _project(mat, vec):
    """``out[a] = sum_b mat[a, b] * vec[b]`` for component-major batches."""
    out = mat[:, 0] * vec[0]
    for b in range(1, vec.shape[0]):
        out += mat[:, b] * vec[b]
    return out


@njit(cache=True)
def _weno5_scalar(a, b, c, d, e):
    t = a - 2.0 * b + c
    s = a - 4.0 * b + 3.0 * c
    beta0 = 13.0 / 12.0 * t * t + 0.25 * s * s + 1e-6
    t = b - 2.0 * c + d
    s = b - d
    beta1 = 13.0 / 12.0 * t * t + 0.25 * s * s + 1e-6
    t = c - 2.0 * d + e
    s = 3.0 * c - 4.0 * d + e
    beta2 = 13.0 / 12.0 * t * t + 0.25 * s * s + 1e-6
    a0 = 0.1 / (beta0 * beta0)
    a1 = 0.6 / (beta1 * beta1)
    a2 = 0.3 / (beta2 * beta2)
    return (a0 * (2.0 * a - 7.0 * b + 11.0 * c) + a1 * (-b + 5.0 * c + 2.0 * d)
            + a2 * (2.0 * c + 5.0 * d - e)) / (6.0 * (a0 + a1 + a2))


@njit(cache=True)
def _characteristic_kernel(L, R, fp, fm, i0, alpha, out):
    k = L.shape[0]
    ni = L.shape[2]
    M = L.shape[3]
    vp = np.empty(5)
    vm = np.empty(5)
    hat = np.empty(k)
    for i in range(ni):
        for m in range(M):
            for a in range(k):
                for s in range(5):
                    accp = 0.0
                    accm = 0.0
                    for b in range(k):
                        la = L[a, b, i, m]
                        accp += la * fp[b, i0 - 2 + s + i, m]
                        accm += la * fm[b, i0 + 3 - s + i, m]
                    vp[s] = accp
                    vm[s] = accm
                hat[a] = (_weno5_scalar(vp[0], vp[1], vp[2], vp[3], vp[4])
                          - _weno5_scalar(vm[0], vm[1], vm[2], vm[3], vm[4]))
            for r in range(k):
                acc = 0.0
                for a in range(k):
                    acc += R[r, a, i, m] * hat[a]
                out[r, i, m] = alpha * acc


def _interface_fluxes(w, f, axis, alpha, g, characteristic=True, compiled=True):
    """Numerical fluxes along array axis 1 of ``w`` (shape ``(k, N, M)``).

    Returns ``(k, n + 1, M)`` fluxes at the interfaces bounding the ``n``
    interior nodes, the first one being ``x_{g - 1/2}``.
    """
    k, N, M = w.shape
    n = N - 2 * g
    ni = n + 1
    i0 = g - 1
    flux = physical_flux(w, f, axis)
    fp, fm = flux_split(w, flux, alpha)
    if characteristic:
        L, R, _ = _roe_arrays(w[:, i0:i0 + ni], w[:, i0 + 1:i0 + 1 + ni], f, axis)
        if compiled:
            out = np.empty((k, ni, M))
            _characteristic_kernel(L, R, np.ascontiguousarray(fp),
                                   np.ascontiguousarray(fm), i0, float(alpha), out)
            return out
    # offset s covers node i - 2 + s around interface i + 1/2
    def window(arr, s):
        part = arr[:, i0 - 2 + s:i0 - 2 + s + ni]
        return _project(L, part) if characteristic else part

    hat = _reconstruct(*(window(fp, s) for s in range(5)))
    hat -= _reconstruct(*(window(fm, s) for s in range(5, 0, -1)))
    if characteristic:
        hat = _project(R, hat)
    return alpha * hat


def compute_residual(field: Field, f: PressureFunctional, alpha=None,
                     characteristic: bool = True) -> ResidualOutput:
    """Semi-discrete right-hand side ``L(u)`` on the interior nodes.

    Ghost layers must already be filled.  ``alpha`` defaults to the global
    wave-speed bound of the current field.  Residuals inside a wall mask
    are zero.
    """
    if alpha is None:
        alpha = global_alpha(field, f)
    alpha = tuple(np.atleast_1d(alpha).tolist())
    g = field.ghost
    if field.ndim == 1:
        w = field.u[:, :, None]
        fh = _interface_fluxes(w, f, 0, alpha[0], g, characteristic)[:, :, 0]
        res = -(fh[:, 1:] - fh[:, :-1]) / field.dx
        return ResidualOutput(res, alpha)
    nx, ny = field.shape
    wx = directional_states(field, 0)[:, :, g:g + ny]
    fx = _interface_fluxes(wx, f, 0, alpha[0], g, characteristic)
    res = -(fx[:, 1:] - fx[:, :-1]) / field.dx
    wy = directional_states(field, 1)[:, g:g + nx, :]
    fy = _interface_fluxes(np.swapaxes(wy, 1, 2), f, 1, alpha[1], g, characteristic)
    fy = np.swapaxes(fy, 1, 2)
    res -= (fy[:, :, 1:] - fy[:, :, :-1]) / field.dy
    if field.mask is not None:
        res[:, ~field.fluid] = 0.0
    return ResidualOutput(res, alpha)


def reactive_source(w, f: PressureFunctional, K: float, Ea: float):
    """Arrhenius source: zero except ``-K rhoY exp(-Ea rho / p)`` in the rhoY slot."""
    w = np.asarray(w, dtype=float)
    d = f.ndim(w.shape[0])
    out = np.zeros_like(w)
    p = (f.gamma - 1.0) * f.internal_energy(w)
    out[d + 2] = -K * w[d + 2] * np.exp(-Ea * w[0] / p)
    return out
