"""Hot inner loops, each in a numba and a pure-numpy flavour.

The public names at the bottom of the module are bound to one flavour at import
time (see :mod:`risimaging._accel`). Both flavours stay importable under their
``*_numpy`` / ``*_numba`` names so tests and the benchmark can compare them.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

TWO_PI = 2.0 * np.pi


# --------------------------------------------------------------------------
# steering phases
# --------------------------------------------------------------------------

def steering_matrix_numpy(offsets, directions, wavelength):
    """exp(+j 2 pi p_n . u_m / lambda) for every element n and direction m."""
    phase = (TWO_PI / wavelength) * (offsets @ directions.T)
    return np.exp(1j * phase)


def _steering_matrix_loop(offsets, directions, wavelength):
    n_el = offsets.shape[0]
    n_dir = directions.shape[0]
    out = np.empty((n_el, n_dir), dtype=np.complex128)
    k = TWO_PI / wavelength
    for n in range(n_el):
        px = offsets[n, 0]
        py = offsets[n, 1]
        pz = offsets[n, 2]
        for m in range(n_dir):
            ph = k * (px * directions[m, 0] + py * directions[m, 1] + pz * directions[m, 2])
            out[n, m] = np.cos(ph) + 1j * np.sin(ph)
    return out


steering_matrix_numba = njit(_steering_matrix_loop)


# --------------------------------------------------------------------------
# reweighted intensity loss
# --------------------------------------------------------------------------

def wf_objective_numpy(H, z, y, w):
    a = H @ z
    r = (a.real * a.real + a.imag * a.imag) - y
    return 0.5 * np.mean(w * r * r)


def wf_objective_grad_numpy(H, z, y, w):
    """Objective and real-coordinate gradient of (1/2m) sum w_i (|H_i z|^2 - y_i)^2."""
    m = H.shape[0]
    a = H @ z
    r = (a.real * a.real + a.imag * a.imag) - y
    f = 0.5 * np.mean(w * r * r)
    grad = (2.0 / m) * (H.conj().T @ (w * r * a))
    return f, grad


def _wf_objective_loop(H, z, y, w):
    m, n = H.shape
    total = 0.0
    for i in range(m):
        acc = 0j
        for j in range(n):
            acc += H[i, j] * z[j]
        r = acc.real * acc.real + acc.imag * acc.imag - y[i]
        total += w[i] * r * r
    return 0.5 * total / m


def _wf_objective_grad_loop(H, z, y, w):
    m, n = H.shape
    grad = np.zeros(n, dtype=np.complex128)
    total = 0.0
    for i in range(m):
        acc = 0j
        for j in range(n):
            acc += H[i, j] * z[j]
        r = acc.real * acc.real + acc.imag * acc.imag - y[i]
        total += w[i] * r * r
        c = w[i] * r * acc
        for j in range(n):
            grad[j] += c * np.conj(H[i, j])
    scale = 2.0 / m
    for j in range(n):
        grad[j] *= scale
    return 0.5 * total / m, grad


wf_objective_numba = njit(_wf_objective_loop)
wf_objective_grad_numba = njit(_wf_objective_grad_loop)


# --------------------------------------------------------------------------
# local SSIM map over valid windows
# --------------------------------------------------------------------------

def ssim_map_numpy(a, b, kernel, c1, c2):
    from numpy.lib.stride_tricks import sliding_window_view

    win = kernel.shape[0]
    pa = sliding_window_view(a, (win, win))
    pb = sliding_window_view(b, (win, win))
    mu_a = np.einsum("ijkl,kl->ij", pa, kernel)
    mu_b = np.einsum("ijkl,kl->ij", pb, kernel)
    da = pa - mu_a[:, :, None, None]
    db = pb - mu_b[:, :, None, None]
    var_a = np.einsum("ijkl,kl->ij", da * da, kernel)
    var_b = np.einsum("ijkl,kl->ij", db * db, kernel)
    cov = np.einsum("ijkl,kl->ij", da * db, kernel)
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def _ssim_map_loop(a, b, kernel, c1, c2):
    win = kernel.shape[0]
    rows = a.shape[0] - win + 1
    cols = a.shape[1] - win + 1
    out = np.empty((rows, cols))
    for i in range(rows):
        for j in range(cols):
            mu_a = 0.0
            mu_b = 0.0
            for k in range(win):
                for l in range(win):
                    mu_a += kernel[k, l] * a[i + k, j + l]
                    mu_b += kernel[k, l] * b[i + k, j + l]
            var_a = 0.0
            var_b = 0.0
            cov = 0.0
            for k in range(win):
                for l in range(win):
                    da = a[i + k, j + l] - mu_a
                    db = b[i + k, j + l] - mu_b
                    var_a += kernel[k, l] * da * da
                    var_b += kernel[k, l] * db * db
                    cov += kernel[k, l] * da * db
            num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
            den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
            out[i, j] = num / den
    return out


ssim_map_numba = njit(_ssim_map_loop)


# --------------------------------------------------------------------------
# near-collinear direction pairs
# --------------------------------------------------------------------------

def collinear_pairs_numpy(u, tol):
    """Index pairs (i < j) of unit vectors whose separation angle is below ``tol``."""
    dots = u @ u.T
    cross = np.linalg.norm(np.cross(u[:, None, :], u[None, :, :]), axis=-1)
    ang = np.arctan2(cross, dots)
    i, j = np.triu_indices(u.shape[0], 1)
    keep = ang[i, j] < tol
    pairs = np.stack([i[keep], j[keep]], axis=1).astype(np.int64)
    return pairs, ang[i[keep], j[keep]]


def _pair_angle(u, i, j):
    cx = u[i, 1] * u[j, 2] - u[i, 2] * u[j, 1]
    cy = u[i, 2] * u[j, 0] - u[i, 0] * u[j, 2]
    cz = u[i, 0] * u[j, 1] - u[i, 1] * u[j, 0]
    d = u[i, 0] * u[j, 0] + u[i, 1] * u[j, 1] + u[i, 2] * u[j, 2]
    return np.arctan2(np.sqrt(cx * cx + cy * cy + cz * cz), d)


_pair_angle_numba = njit(_pair_angle)


def _collinear_pairs_loop(u, tol):
    m = u.shape[0]
    count = 0
    for i in range(m):
        for j in range(i + 1, m):
            if _pair_angle_numba(u, i, j) < tol:
                count += 1
    pairs = np.empty((count, 2), dtype=np.int64)
    angles = np.empty(count)
    k = 0
    for i in range(m):
        for j in range(i + 1, m):
            a = _pair_angle_numba(u, i, j)
            if a < tol:
                pairs[k, 0] = i
                pairs[k, 1] = j
                angles[k] = a
                k += 1
    return pairs, angles


collinear_pairs_numba = njit(_collinear_pairs_loop)


if USE_NUMBA:
    steering_matrix = steering_matrix_numba
    wf_objective = wf_objective_numba
    wf_objective_grad = wf_objective_grad_numba
    ssim_map = ssim_map_numba
    collinear_pairs = collinear_pairs_numba
else:
    steering_matrix = steering_matrix_numpy
    wf_objective = wf_objective_numpy
    wf_objective_grad = wf_objective_grad_numpy
    ssim_map = ssim_map_numpy
    collinear_pairs = collinear_pairs_numpy
