"""Single-RIS channel factors.

For one panel the channel row seen by its receiver under reflection pattern
``omega`` is ``h = h_s * a_s^T diag(omega) A_i diag(H_i)``:

* ``A_i`` (N x M): incident steering, ``exp(+j 2 pi p_n . u_m / lambda)``
* ``H_i`` (M,): incident propagation, ``exp(-j 2 pi r_m / lambda) / r_m``
* ``a_s`` (N,): steering towards the receiver, same sign as ``A_i``
* ``h_s``: receiver propagation scalar, same form as ``H_i``

Element positions ``p_n`` are taken relative to the panel centre, which is
also the point the ranges ``r_m`` and ``r_s`` are measured from.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .exceptions import DimensionError
from .geometry import CarrierConfig, GridSpec, PanelSpec, element_offsets, grid_points, unit_directions


def propagation(distance, wavelength):
    """exp(-j 2 pi r / lambda) / r, elementwise."""
    r = np.asarray(distance, dtype=float)
    return np.exp(-2j * np.pi * r / wavelength) / r


def steering_matrix(offsets, directions, wavelength):
    offsets = np.ascontiguousarray(np.atleast_2d(offsets), dtype=float)
    directions = np.ascontiguousarray(np.atleast_2d(directions), dtype=float)
    return kernels.steering_matrix(offsets, directions, float(wavelength))


def incident_steering(panel: PanelSpec, grid: GridSpec, carrier: CarrierConfig) -> np.ndarray:
    u, _ = unit_directions(panel.center, grid_points(grid))
    return steering_matrix(element_offsets(panel), u, carrier.wavelength)


def incident_propagation(grid: GridSpec, panel: PanelSpec, carrier: CarrierConfig) -> np.ndarray:
    """Diagonal of H_i as a length-M vector."""
    _, r = unit_directions(panel.center, grid_points(grid))
    return propagation(r, carrier.wavelength)


@dataclass(frozen=True)
class ReflectPath:
    steering: np.ndarray
    scalar: complex
    distance: float


def reflect_path(panel: PanelSpec, receiver, carrier: CarrierConfig) -> ReflectPath:
    u, r = unit_directions(panel.center, np.asarray(receiver, dtype=float)[None, :])
    a_s = steering_matrix(element_offsets(panel), u, carrier.wavelength)[:, 0]
    return ReflectPath(a_s, complex(propagation(r[0], carrier.wavelength)), float(r[0]))


def channel_row(steering, incident, reflect: ReflectPath, config) -> np.ndarray:
    """One 1 x M channel row for reflection coefficients ``config`` (length N)."""
    steering = np.asarray(steering)
    incident = np.asarray(incident)
    config = np.asarray(config)
    n, m = steering.shape
    if incident.shape != (m,):
        raise DimensionError(f"incident propagation has shape {incident.shape}, expected ({m},)")
    if reflect.steering.shape != (n,) or config.shape != (n,):
        raise DimensionError(
            f"panel has {n} elements but got reflect steering {reflect.steering.shape} "
            f"and configuration {config.shape}"
        )
    return reflect.scalar * ((reflect.steering * config) @ steering) * incident
