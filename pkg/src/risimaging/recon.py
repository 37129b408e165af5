"""Scene reconstruction.

Two routes:

* :func:`ls_reconstruct` - (optionally Tikhonov-regularised) complex least
  squares from full complex measurements.
* :func:`reweighted_wf` - amplitude-only recovery. Measured amplitudes are
  squared to intensities ``y_i``; the estimate starts from the spectral
  initializer and then alternates weight updates
  ``w_i = 1 / (| |H_i z|^2 - y_i | + eta_i)`` with gradient steps on the
  weighted intensity loss ``(1/2m) sum w_i (|H_i z|^2 - y_i)^2``.

Throughout, ``H_i`` is row i of the imaging matrix, so ``H_i z`` plays the role
of the inner product of sensing vector ``conj(H_i)`` with ``z``.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import lsqr

from . import kernels, rng
from .exceptions import DimensionError, DivergenceError, InitializationError
from .forward import ImagingMatrix, MeasurementSet


@dataclass
class LSOptions:
    regularization: object = 0.0  # float >= 0, or "auto"
    policy: str = "direct"  # "direct" (SVD) or "iterative" (LSQR)
    rtol: float = None  # singular-value cut for the unregularised pseudo-inverse

    def __post_init__(self):
        if self.regularization != "auto" and not float(self.regularization) >= 0:
            raise ValueError("regularization must be >= 0 or 'auto'")
        if self.policy not in ("direct", "iterative"):
            raise ValueError(f"unknown LS policy {self.policy!r}")


@dataclass
class WFOptions:
    max_iter: int = 2000
    inner_steps: int = 1
    line_search: bool = True
    step_size: float = 0.5
    eta_factor: float = 0.1
    eta_schedule: str = "constant"  # or "decay": eta_k = eta_0 / k
    tol: float = 1e-8
    init_norm: float = None
    objective: str = "intensity"  # "intensity" (reweighted) or "amplitude"
    keep_weights: bool = False

    def __post_init__(self):
        if self.max_iter < 1 or self.inner_steps < 1:
            raise ValueError("max_iter and inner_steps must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if not self.eta_factor > 0:
            raise ValueError("eta_factor must be > 0")
        if self.eta_schedule not in ("constant", "decay"):
            raise ValueError(f"unknown eta schedule {self.eta_schedule!r}")
        if self.objective not in ("intensity", "amplitude"):
            raise ValueError(f"unknown objective {self.objective!r}")


@dataclass
class ReconResult:
    estimate: np.ndarray
    objective_history: np.ndarray
    converged: bool
    iterations: int
    method: str
    residual: float = float("nan")
    rank_deficient: bool = False
    regularization: float = 0.0
    initial: np.ndarray = field(default=None, repr=False)
    surrogate_history: np.ndarray = field(default=None, repr=False)
    weights: list = field(default=None, repr=False)


def _matrix(H):
    return H.matrix if isinstance(H, ImagingMatrix) else np.asarray(H)


# --------------------------------------------------------------------------
# least squares
# --------------------------------------------------------------------------

def auto_regularization(H, y, noise_variance):
    """Tikhonov weight rho / sigma_s^2, with the per-cell source power sigma_s^2
    estimated from the data as (||y||^2 - m rho) / ||H||_F^2."""
    if noise_variance <= 0:
        return 0.0
    signal = float(np.vdot(y, y).real) - y.size * noise_variance
    power = signal / float(np.linalg.norm(H) ** 2)
    # all-noise data: fall back to a heavy but finite weight
    power = max(power, noise_variance * 1e-6 / max(np.abs(H).max() ** 2, 1e-300))
    return noise_variance / power


def ls_reconstruct(H, y, opts: LSOptions = None) -> ReconResult:
    opts = opts or LSOptions()
    A = _matrix(H)
    if isinstance(y, MeasurementSet):
        if y.mode != "complex":
            raise ValueError("least squares needs complex measurements")
        rho = y.noise_variance
        y = y.values
    else:
        rho = 0.0
        y = np.asarray(y)
    if A.shape[0] != y.shape[0]:
        raise DimensionError(f"matrix has {A.shape[0]} rows, got {y.shape[0]} measurements")
    reg = auto_regularization(A, y, rho) if opts.regularization == "auto" else float(opts.regularization)

    U, sv, Vh = np.linalg.svd(A, full_matrices=False)
    tau = max(A.shape) * np.finfo(float).eps * sv[0] if opts.rtol is None else opts.rtol * sv[0]
    rank = int(np.count_nonzero(sv > tau))
    deficient = rank < A.shape[1]

    if opts.policy == "direct":
        if reg > 0:
            filt = sv / (sv**2 + reg)
        else:
            filt = np.where(sv > tau, 1.0 / np.where(sv > tau, sv, 1.0), 0.0)
        z = Vh.conj().T @ (filt * (U.conj().T @ y))
    else:
        sol = lsqr(A, y, damp=np.sqrt(reg), atol=1e-15, btol=1e-15, iter_lim=20 * A.shape[1])
        z = sol[0]
    res = float(np.linalg.norm(A @ z - y))
    if deficient and reg == 0:
        warnings.warn(
            f"imaging matrix is rank deficient ({rank} < {A.shape[1]}); returning the minimum-norm solution",
            RuntimeWarning,
            stacklevel=2,
        )
    ynorm = float(np.linalg.norm(y))
    return ReconResult(
        estimate=z,
        objective_history=np.array([res**2]),
        converged=True,
        iterations=1,
        method="ls",
        residual=res / ynorm if ynorm > 0 else res,
        rank_deficient=deficient,
        regularization=reg,
    )


# --------------------------------------------------------------------------
# amplitude-only
# --------------------------------------------------------------------------

def spectral_matrix(H, y):
    """Y = (1/m) sum_i y_i h_i h_i^H with h_i = conj(H_i)."""
    A = _matrix(H)
    return (A.conj().T * y) @ A / A.shape[0]


def init_norm(H, y):
    A = _matrix(H)
    return float(np.sqrt(A.shape[1] * np.sum(y) / np.sum(np.abs(A) ** 2)))


def top_eigenvector(Y, tol=1e-10, max_iter=20000):
    """Power iteration from a fixed pseudo-random start (Y Hermitian PSD)."""
    n = Y.shape[0]
    gen = rng.stream(0, rng.TRIAL, 0)
    v = gen.standard_normal(n) + 1j * gen.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = Y @ v
        lam = float(np.vdot(v, w).real)
        nw = np.linalg.norm(w)
        if nw == 0:
            return v, 0.0
        if np.linalg.norm(w - lam * v) <= tol * max(lam, 1e-300):
            break
        v = w / nw
    else:
        # slow gap: finish with a dense solve rather than return an unconverged vector
        vals, vecs = np.linalg.eigh(Y)
        return vecs[:, -1], float(vals[-1])
    return v, lam


def spectral_initialize(H, y, norm=None, tol=1e-10):
    """Spectral estimate scaled to ``norm`` (default sqrt(n sum y / sum ||h_i||^2))."""
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or np.any(y < 0):
        raise ValueError("intensities must be a 1-D nonnegative array")
    if not np.any(y > 0):
        raise InitializationError("all intensities are zero; spectral matrix has no informative direction")
    v, _ = top_eigenvector(spectral_matrix(H, y), tol=tol)
    return (init_norm(H, y) if norm is None else norm) * v


def compute_weights(H, z, y, eta):
    a = _matrix(H) @ z
    return 1.0 / (np.abs(np.abs(a) ** 2 - y) + eta)


def wf_objective(H, z, y, w):
    return kernels.wf_objective(_matrix(H), np.asarray(z, dtype=complex), y, w)


def wf_gradient(H, z, y, w):
    """Real-coordinate gradient (d/dRe + j d/dIm) of the weighted intensity loss."""
    return kernels.wf_objective_grad(_matrix(H), np.asarray(z, dtype=complex), y, w)[1]


def robust_potential(H, z, y, eta):
    """(1/m) sum phi(r_i), phi(r) = |r| - eta log(1 + |r|/eta).

    With fixed eta, reweighting with w_i = 1/(|r_i| + eta) majorises this function,
    so any step that lowers the weighted loss also lowers it.
    """
    a = _matrix(H) @ z
    r = np.abs(np.abs(a) ** 2 - y)
    return float(np.mean(r - eta * np.log1p(r / eta)))


def amplitude_objective_grad(A, z, b):
    a = A @ z
    mag = np.abs(a)
    f = 0.5 * np.mean((mag - b) ** 2)
    phase = np.divide(a, mag, out=np.zeros_like(a), where=mag > 0)
    grad = (1.0 / A.shape[0]) * (A.conj().T @ ((mag - b) * phase))
    return f, grad


def _amplitude_objective(A, z, b):
    return 0.5 * np.mean((np.abs(A @ z) - b) ** 2)


def _armijo(fun, z, f0, g, step, c=1e-4, shrink=0.5, min_step=1e-300):
    gg = float(np.vdot(g, g).real)
    while step > min_step:
        zn = z - step * g
        fn = fun(zn)
        if np.isfinite(fn) and fn <= f0 - c * step * gg:
            return zn, fn, step
        step *= shrink
    return z, f0, 0.0


def reweighted_wf(H, y, opts: WFOptions = None) -> ReconResult:
    """Amplitude-only reconstruction from measured amplitudes ``y``."""
    opts = opts or WFOptions()
    A = np.ascontiguousarray(_matrix(H), dtype=complex)
    if isinstance(y, MeasurementSet):
        if y.mode != "amplitude":
            raise ValueError("reweighted_wf needs amplitude-only measurements")
        y = y.values
    b = np.asarray(y, dtype=float)
    if b.shape != (A.shape[0],):
        raise DimensionError(f"matrix has {A.shape[0]} rows, got {b.shape} amplitudes")
    inten = b * b
    m = A.shape[0]

    z = spectral_initialize(A, inten, norm=opts.init_norm)
    z0 = z.copy()
    eta0 = opts.eta_factor * float(np.mean(inten))
    eta_vec = np.full(m, eta0)

    hist, surrogate, weights_log = [], [], []
    step = None
    if not opts.line_search:
        lmax = float(np.linalg.norm(A, 2) ** 2) / m
        fixed_step = opts.step_size * eta0 / (lmax * max(float(np.mean(inten)), 1e-300))
    converged = False
    k = 0

    def merit(zz, eta):
        if opts.objective == "amplitude":
            return _amplitude_objective(A, zz, b)
        return robust_potential(A, zz, inten, eta)

    hist.append(merit(z, eta0))
    for k in range(1, opts.max_iter + 1):
        eta = eta_vec if opts.eta_schedule == "constant" else eta_vec / k
        z_prev = z
        if opts.objective == "amplitude":
            w = None
            fun = lambda zz: _amplitude_objective(A, zz, b)  # noqa: E731
            grad_fun = lambda zz: amplitude_objective_grad(A, zz, b)  # noqa: E731
        else:
            w = compute_weights(A, z, inten, eta)
            if opts.keep_weights:
                weights_log.append(w)
            fun = lambda zz: kernels.wf_objective(A, zz, inten, w)  # noqa: E731
            grad_fun = lambda zz: kernels.wf_objective_grad(A, zz, inten, w)  # noqa: E731
        for _ in range(opts.inner_steps):
            f0, g = grad_fun(z)
            if not np.isfinite(f0):
                raise DivergenceError(k)
            if opts.line_search:
                if step is None:
                    step = float(np.linalg.norm(z) / max(np.linalg.norm(g), 1e-300))
                z, fz, accepted = _armijo(fun, z, f0, g, 2.0 * step)
                if accepted > 0:
                    step = accepted
            else:
                z = z - fixed_step * g
                fz = fun(z)
            if not np.isfinite(fz):
                raise DivergenceError(k)
        surrogate.append(fz)
        hist.append(merit(z, eta[0] if opts.eta_schedule == "decay" else eta0))
        if not np.isfinite(hist[-1]):
            raise DivergenceError(k)
        znorm = np.linalg.norm(z_prev)
        change = np.linalg.norm(z - z_prev) / znorm if znorm > 0 else np.linalg.norm(z)
        if change < opts.tol:
            converged = True
            break

    resid = np.linalg.norm(np.abs(A @ z) ** 2 - inten) / max(np.linalg.norm(inten), 1e-300)
    return ReconResult(
        estimate=z,
        objective_history=np.asarray(hist),
        converged=converged,
        iterations=k,
        method="amplitude",
        residual=float(resid),
        initial=z0,
        surrogate_history=np.asarray(surrogate),
        weights=weights_log or None,
    )


def align_phase(z, reference):
    """Rotate ``z`` by the global phase that best matches ``reference``."""
    z = np.asarray(z)
    reference = np.asarray(reference)
    if z.shape != reference.shape:
        raise DimensionError(f"shapes differ: {z.shape} vs {reference.shape}")
    inner = np.vdot(z, reference)
    if not np.any(reference) or inner == 0:
        if not np.any(reference):
            warnings.warn("zero reference; phase left unchanged", RuntimeWarning, stacklevel=2)
        return z
    return z * (inner / abs(inner))
