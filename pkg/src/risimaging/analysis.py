"""Imaging-matrix quality: singular spectrum, numerical rank and its
min{M, K*T, K*N} ceiling, and near-collinear grid points as seen by a panel."""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel import incident_steering
from .forward import ImagingMatrix
from .geometry import CarrierConfig, grid_points, unit_directions

DEFAULT_COLLINEARITY_TOL = np.radians(0.5)


@dataclass(frozen=True)
class RankReport:
    singular_values: np.ndarray
    rank: int
    threshold: float
    bound: int
    bound_satisfied: bool


def _as_array(H):
    return H.matrix if isinstance(H, ImagingMatrix) else np.asarray(H)


def singular_values(H) -> np.ndarray:
    a = _as_array(H)
    if a.size == 0:
        raise ValueError("empty matrix")
    return np.linalg.svd(a, compute_uv=False)


def rank_bound(H) -> int:
    """min{M, K*T, sum_k N_k} for an ImagingMatrix, min(shape) for a plain array."""
    if isinstance(H, ImagingMatrix):
        rows, m = H.shape
        units = sum(P.shape[0] for P in H.P)
        return int(min(m, rows, units))
    return int(min(np.shape(H)))


def rank_threshold(sv, shape, rtol=None):
    """Default: max(rows, cols) * sigma_max * machine epsilon; ``rtol`` overrides the factor."""
    smax = float(sv[0]) if len(sv) else 0.0
    if rtol is None:
        rtol = max(shape) * np.finfo(float).eps
    return rtol * smax


def numerical_rank(H, rtol=None) -> RankReport:
    a = _as_array(H)
    sv = singular_values(a)
    tau = rank_threshold(sv, a.shape, rtol)
    rank = int(np.count_nonzero(sv > tau))
    bound = rank_bound(H)
    return RankReport(sv, rank, tau, bound, rank <= bound)


@dataclass(frozen=True)
class PanelCollinearity:
    pairs: np.ndarray  # (P, 2) grid indices, i < j
    angles: np.ndarray  # separation in radians
    coherence: np.ndarray  # |<A_i[:, i], A_i[:, j]>| / N


@dataclass(frozen=True)
class CollinearityReport:
    tolerance: float
    panels: tuple
    joint_pairs: np.ndarray

    @property
    def total_pairs(self):
        return int(sum(len(p.pairs) for p in self.panels))

    @property
    def worst_separation(self):
        angles = [p.angles.min() for p in self.panels if len(p.angles)]
        return float(min(angles)) if angles else float("nan")

    @property
    def max_coherence(self):
        c = [p.coherence.max() for p in self.panels if len(p.coherence)]
        return float(max(c)) if c else 0.0


def collinearity_report(grid, panels, tolerance=DEFAULT_COLLINEARITY_TOL, carrier=None) -> CollinearityReport:
    """Flag grid-point pairs lying (nearly) on one line of sight from a panel.

    ``joint_pairs`` holds the pairs flagged for every panel, which no view in the
    deployment can separate by direction. ``carrier`` (default 5.8 GHz) sets the
    wavelength used for the steering coherence.
    """
    carrier = carrier or CarrierConfig()
    pts = grid_points(grid)
    per_panel = []
    joint = None
    for panel in panels:
        u, _ = unit_directions(panel.center, pts)
        pairs, angles = kernels.collinear_pairs(np.ascontiguousarray(u), float(tolerance))
        if len(pairs):
            A = incident_steering(panel, grid, carrier)
            coh = np.abs(np.einsum("ni,ni->i", A[:, pairs[:, 0]].conj(), A[:, pairs[:, 1]])) / panel.size
        else:
            coh = np.zeros(0)
        per_panel.append(PanelCollinearity(pairs, angles, coh))
        keys = {(int(i), int(j)) for i, j in pairs}
        joint = keys if joint is None else joint & keys
    joint_arr = np.array(sorted(joint or ()), dtype=np.int64).reshape(-1, 2)
    return CollinearityReport(float(tolerance), tuple(per_panel), joint_arr)
