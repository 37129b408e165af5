"""Scene geometry: carrier, SoI grid, RIS panel layout, directions and ranges.

Conventions used throughout the package:

* Grid points are cell centres. ``GridSpec.origin`` is the centre of the whole
  grid, so a 1x1x1 grid sits exactly on its origin.
* Grid enumeration is x-fastest, then y, then z. A length-M vector reshaped
  with ``GridSpec.shape`` (``(Mz, My, Mx)``, C order) gives the image volume.
* Panel elements are enumerated row-major: element ``n = r * cols + c`` sits at
  ``center + (c - (cols-1)/2) * pitch * axis_u + (r - (rows-1)/2) * pitch * axis_v``.
* Angles are in the global frame: theta from +z, phi from +x towards +y.
"""
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import GeometryError

SPEED_OF_LIGHT = 299_792_458.0
_ORTHO_TOL = 1e-9


class FarFieldWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CarrierConfig:
    frequency: float = 5.8e9

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError(f"carrier frequency must be positive, got {self.frequency}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency


@dataclass(frozen=True)
class GridSpec:
    origin: tuple = (0.0, 0.0, 0.0)
    counts: tuple = (1, 1, 1)
    spacing: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        origin = tuple(float(v) for v in self.origin)
        counts = tuple(int(v) for v in self.counts)
        spacing = tuple(float(v) for v in self.spacing)
        if len(origin) != 3 or len(counts) != 3 or len(spacing) != 3:
            raise ValueError("origin, counts and spacing need three components each")
        if any(c < 1 for c in counts):
            raise ValueError(f"grid counts must be >= 1, got {counts}")
        if any(not s > 0 for s in spacing):
            raise ValueError(f"grid spacing must be > 0, got {spacing}")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "spacing", spacing)

    @property
    def size(self) -> int:
        return self.counts[0] * self.counts[1] * self.counts[2]

    @property
    def shape(self):
        """Image-volume shape ``(Mz, My, Mx)`` matching the enumeration order."""
        return (self.counts[2], self.counts[1], self.counts[0])

    @property
    def extent(self):
        """Physical size of the region covered by the cells, per axis."""
        return tuple(c * s for c, s in zip(self.counts, self.spacing))


@dataclass(frozen=True)
class PanelSpec:
    center: tuple
    normal: tuple
    axis_u: tuple
    axis_v: tuple
    rows: int
    cols: int
    pitch: float
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for attr in ("center", "normal", "axis_u", "axis_v"):
            v = tuple(float(x) for x in getattr(self, attr))
            if len(v) != 3:
                raise ValueError(f"panel {attr} must have three components")
            object.__setattr__(self, attr, v)
        if int(self.rows) < 1 or int(self.cols) < 1:
            raise ValueError(f"panel needs rows, cols >= 1, got {self.rows}x{self.cols}")
        object.__setattr__(self, "rows", int(self.rows))
        object.__setattr__(self, "cols", int(self.cols))
        if not self.pitch > 0:
            raise ValueError(f"element pitch must be positive, got {self.pitch}")
        basis = np.array([self.axis_u, self.axis_v, self.normal])
        if not np.allclose(basis @ basis.T, np.eye(3), atol=_ORTHO_TOL, rtol=0):
            raise ValueError("panel axes (axis_u, axis_v, normal) must be orthonormal")

    @classmethod
    def facing(cls, center, target, rows, cols, pitch, up=(0.0, 0.0, 1.0), name=""):
        """Panel at ``center`` whose normal points at ``target``.

        ``axis_u`` is horizontal (perpendicular to ``up`` and the normal) unless the
        normal is parallel to ``up``, in which case +x is used as the reference.
        """
        c = np.asarray(center, dtype=float)
        normal = np.asarray(target, dtype=float) - c
        dist = np.linalg.norm(normal)
        if dist == 0:
            raise GeometryError("panel target coincides with its centre")
        normal /= dist
        ref = np.asarray(up, dtype=float)
        ref = ref / np.linalg.norm(ref)
        if abs(normal @ ref) > 0.999:
            ref = np.array([1.0, 0.0, 0.0]) if abs(normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        axis_u = np.cross(ref, normal)
        axis_u /= np.linalg.norm(axis_u)
        axis_v = np.cross(normal, axis_u)
        return cls(tuple(c), tuple(normal), tuple(axis_u), tuple(axis_v), rows, cols, pitch, name)

    @property
    def size(self) -> int:
        return self.rows * self.cols

    @property
    def diagonal(self) -> float:
        """Maximum physical extent D, the distance between opposite corner elements."""
        return self.pitch * math.hypot(self.rows - 1, self.cols - 1)


@dataclass(frozen=True)
class DirectionAngles:
    theta: float
    phi: float

    @property
    def unit_vector(self):
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])


def grid_points(spec: GridSpec) -> np.ndarray:
    """Cell centres as an ``(M, 3)`` array in x-fastest order."""
    axes = []
    for o, c, s in zip(spec.origin, spec.counts, spec.spacing):
        axes.append(o + (np.arange(c) - (c - 1) / 2.0) * s)
    zz, yy, xx = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
    return np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=1)


def angles_from_vector(d) -> DirectionAngles:
    d = np.asarray(d, dtype=float)
    r = float(np.linalg.norm(d))
    if r == 0.0:
        raise GeometryError("cannot take the direction of a zero vector")
    theta = math.acos(max(-1.0, min(1.0, d[2] / r)))
    phi = math.atan2(d[1], d[0]) % (2.0 * math.pi)
    if phi >= 2.0 * math.pi:  # tiny negative angles round up to 2 pi
        phi = 0.0
    return DirectionAngles(theta, phi)


def direction_and_range(src, dst):
    """Angles of ``dst - src`` and the Euclidean distance between the points."""
    d = np.asarray(dst, dtype=float) - np.asarray(src, dtype=float)
    r = float(np.linalg.norm(d))
    if r == 0.0:
        raise GeometryError(f"coincident points {tuple(src)} and {tuple(dst)}")
    return angles_from_vector(d), r


def unit_directions(src, points):
    """Unit vectors and ranges from ``src`` to each row of ``points`` (vectorised)."""
    d = np.atleast_2d(np.asarray(points, dtype=float)) - np.asarray(src, dtype=float)
    r = np.linalg.norm(d, axis=1)
    if np.any(r == 0.0):
        bad = int(np.flatnonzero(r == 0.0)[0])
        raise GeometryError(f"point {bad} coincides with {tuple(src)}")
    return d / r[:, None], r


def element_offsets(panel: PanelSpec) -> np.ndarray:
    """Element positions relative to the panel centre, ``(N, 3)``."""
    c = (np.arange(panel.cols) - (panel.cols - 1) / 2.0) * panel.pitch
    r = (np.arange(panel.rows) - (panel.rows - 1) / 2.0) * panel.pitch
    rr, cc = np.meshgrid(r, c, indexing="ij")
    u = np.asarray(panel.axis_u)
    v = np.asarray(panel.axis_v)
    return cc.reshape(-1, 1) * u + rr.reshape(-1, 1) * v


def element_positions(panel: PanelSpec) -> np.ndarray:
    return np.asarray(panel.center) + element_offsets(panel)


def far_field_distance(aperture, wavelength):
    """Fraunhofer distance 2 D^2 / lambda."""
    return 2.0 * aperture**2 / wavelength


def far_field_min_distance(panel: PanelSpec, carrier: CarrierConfig) -> float:
    return far_field_distance(panel.diagonal, carrier.wavelength)


def check_far_field(panel: PanelSpec, carrier: CarrierConfig, points, label="SoI"):
    """Warn (never raise) when any point is closer than the far-field bound.

    Returns True when every point satisfies the bound.
    """
    bound = far_field_min_distance(panel, carrier)
    _, r = unit_directions(panel.center, points)
    closest = float(r.min())
    if closest < bound:
        warnings.warn(
            f"panel {panel.name or panel.center}: {label} point at {closest:.2f} m is inside "
            f"the far-field distance {bound:.2f} m; the plane-wave model is approximate",
            FarFieldWarning,
            stacklevel=2,
        )
        return False
    return True
