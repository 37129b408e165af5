import numpy as np
import pytest

from risimaging import kernels
from risimaging.codebook import random_codebook
from risimaging.forward import assemble_imaging_matrix
from risimaging.geometry import CarrierConfig, GridSpec, PanelSpec

CARRIER = CarrierConfig(5.8e9)
LAM = CARRIER.wavelength

KERNEL_NAMES = ("steering_matrix", "wf_objective", "wf_objective_grad", "ssim_map", "collinear_pairs")


@pytest.fixture(params=["numpy", "numba"])
def flavour(request, monkeypatch):
    """Rebind the public kernel names to one flavour for the duration of a test."""
    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(kernels, f"{name}_{request.param}"))
    return request.param


def small_scene(rows=3, cols=3, counts=(4, 4, 1), spacing=1.0, dist=20.0, receiver=(2.0, 1.5, 10.0)):
    grid = GridSpec((0.0, 0.0, 0.0), counts, (spacing,) * 3)
    panel = PanelSpec.facing((0.0, 0.0, dist), grid.origin, rows, cols, LAM / 2)
    return grid, panel, np.asarray(receiver, dtype=float)


def small_imaging(K=1, T=12, rows=3, cols=3, counts=(4, 4, 1), seed=0):
    grid = GridSpec((0.0, 0.0, 0.0), counts, (1.0, 1.0, 1.0))
    panels, rxs = [], []
    for k in range(K):
        ang = 2 * np.pi * k / max(K, 1)
        c = (15.0 * np.cos(ang), 15.0 * np.sin(ang), 12.0)
        p = PanelSpec.facing(c, grid.origin, rows, cols, LAM / 2)
        panels.append(p)
        rxs.append(np.asarray(c) + 5.0 * np.asarray(p.normal) + 2.0 * np.asarray(p.axis_u))
    cb = random_codebook([p.size for p in panels], T, seed)
    return grid, panels, rxs, assemble_imaging_matrix(grid, panels, rxs, CARRIER, cb)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
