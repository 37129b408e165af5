"""Stacked imaging matrix and synthetic measurements.

Rows are stacked panel-major then snapshot-major: row ``k * T + t`` is panel k
under snapshot t. Each panel block factors as ``W_k @ P_k`` with
``P_k = h_s diag(a_s) A_i diag(H_i)``.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng
from .channel import incident_propagation, incident_steering, reflect_path
from .codebook import Codebook, as_snapshot_matrix
from .exceptions import DimensionError


@dataclass(frozen=True)
class SourceField:
    values: np.ndarray

    @property
    def magnitudes(self):
        return np.abs(self.values)

    def __len__(self):
        return self.values.shape[0]


def source_field(magnitudes, phase="random", seed=0) -> SourceField:
    """Complex source vector ``s_m exp(-j alpha_m)`` from nonnegative magnitudes.

    ``phase`` is ``"random"`` (alpha i.i.d. uniform on [0, 2 pi)) or ``"zero"``.
    """
    mags = np.asarray(magnitudes, dtype=float).ravel()
    if np.any(mags < 0):
        raise ValueError("source magnitudes must be nonnegative")
    if phase == "zero":
        return SourceField(mags.astype(complex))
    if phase != "random":
        raise ValueError(f"unknown phase policy {phase!r}")
    alpha = rng.stream(seed, rng.SOURCE_PHASE).uniform(0.0, 2.0 * np.pi, size=mags.size)
    return SourceField(mags * np.exp(-1j * alpha))


@dataclass(frozen=True)
class ImagingMatrix:
    matrix: np.ndarray
    W: tuple
    P: tuple
    snapshots: int

    @property
    def num_panels(self):
        return len(self.P)

    @property
    def shape(self):
        return self.matrix.shape

    def row(self, ris, t):
        return ris * self.snapshots + t

    def block(self, ris):
        t = self.snapshots
        return self.matrix[ris * t:(ris + 1) * t]

    def subset(self, panels):
        """Imaging matrix restricted to the listed panels (in the given order)."""
        panels = list(panels)
        return ImagingMatrix(
            np.vstack([self.block(k) for k in panels]),
            tuple(self.W[k] for k in panels),
            tuple(self.P[k] for k in panels),
            self.snapshots,
        )


@dataclass(frozen=True)
class MeasurementSet:
    values: np.ndarray
    mode: str = "complex"
    noise_variance: float = 0.0
    seed: int = 0
    snr_db: float = None
    clean: np.ndarray = field(default=None, repr=False, compare=False)

    def __len__(self):
        return self.values.shape[0]


def build_P(panel, grid, receiver, carrier) -> np.ndarray:
    """Deployment factor P_k (N x M) of one panel."""
    A = incident_steering(panel, grid, carrier)
    Hi = incident_propagation(grid, panel, carrier)
    path = reflect_path(panel, receiver, carrier)
    return path.scalar * (path.steering[:, None] * A) * Hi[None, :]


def assemble_imaging_matrix(grid, panels, receivers, carrier, codebook: Codebook) -> ImagingMatrix:
    panels = list(panels)
    receivers = list(receivers)
    if len(panels) != len(receivers):
        raise DimensionError(f"{len(panels)} panels but {len(receivers)} receivers")
    if codebook.num_panels != len(panels):
        raise DimensionError(f"codebook has {codebook.num_panels} panels, scene has {len(panels)}")
    Ws, Ps, blocks = [], [], []
    for k, (panel, rx) in enumerate(zip(panels, receivers)):
        W = as_snapshot_matrix(codebook, k)
        if W.shape[1] != panel.size:
            raise DimensionError(f"panel {k}: codebook width {W.shape[1]} != {panel.size} elements")
        P = build_P(panel, grid, rx, carrier)
        Ws.append(W)
        Ps.append(P)
        blocks.append(W @ P)
    return ImagingMatrix(np.vstack(blocks), tuple(Ws), tuple(Ps), codebook.snapshots)


def noise_variance_for_snr(clean, snr_db):
    power = float(np.mean(np.abs(clean) ** 2))
    return power / 10.0 ** (snr_db / 10.0)


def synthesize_measurements(H, s, noise_variance=None, snr_db=None, seed=0) -> MeasurementSet:
    """``y = H s + n`` with ``n ~ CN(0, rho)`` i.i.d.

    Give either ``noise_variance`` (rho) or ``snr_db`` (rho relative to mean |Hs|^2);
    neither means noiseless.
    """
    mat = H.matrix if isinstance(H, ImagingMatrix) else np.asarray(H)
    vals = s.values if isinstance(s, SourceField) else np.asarray(s)
    if mat.shape[1] != vals.shape[0]:
        raise DimensionError(f"imaging matrix has {mat.shape[1]} columns, source has {vals.shape[0]} cells")
    if noise_variance is not None and snr_db is not None:
        raise ValueError("give noise_variance or snr_db, not both")
    clean = mat @ vals
    if snr_db is not None:
        rho = noise_variance_for_snr(clean, snr_db)
    else:
        rho = float(noise_variance or 0.0)
    if rho < 0:
        raise ValueError("noise variance must be >= 0")
    y = clean.copy()
    if rho > 0:
        gen = rng.stream(seed, rng.NOISE)
        n = gen.standard_normal((clean.size, 2)) @ np.array([1.0, 1j])
        y = y + np.sqrt(rho / 2.0) * n
    return MeasurementSet(y, "complex", rho, int(seed), snr_db, clean)


def amplitude_measurements(m: MeasurementSet) -> MeasurementSet:
    if m.mode == "amplitude":
        return m
    return replace(m, values=np.abs(m.values), mode="amplitude")
