"""Scenario descriptions, presets and YAML loading.

A scenario file is YAML with units in the key names::

    name: my-scene
    carrier: {frequency_hz: 5.8e9}
    grid: {origin_m: [0, 0, 0], counts: [16, 16, 1], spacing_m: [2, 2, 2]}
    panels:
      - center_m: [0, 0, 50]
        target_m: [0, 0, 0]        # or normal + axis_u
        rows: 40
        cols: 40
        pitch_m: null              # null -> half wavelength
        receiver_m: [0, 0, 40]     # or a top-level `receivers_m` list
    snapshots: 300
    seed: 1
    noise: {snr_db: 30}            # snr_db: null -> noiseless
    source: {kind: letter, letter: H, phase: random}
    solver:
      method: ls                   # or amplitude
      ls: {regularization: auto}
      amplitude: {max_iter: 2000}

Sources: ``letter`` (``letter: H``), ``image`` (``path:`` to a whitespace text
matrix of shape (My, Mx) or (Mz*My, Mx)), or ``points`` (``points:`` list of
``{index: m, magnitude: a}``).
"""
import copy
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from . import rng
from .codebook import random_codebook
from .exceptions import ScenarioError
from .forward import assemble_imaging_matrix, source_field
from .geometry import (
    CarrierConfig,
    FarFieldWarning,
    GridSpec,
    PanelSpec,
    check_far_field,
    grid_points,
)
from .letters import letter_image
from .recon import LSOptions, WFOptions


@dataclass(frozen=True)
class SourceSpec:
    kind: str = "letter"
    letter: str = "H"
    path: str = None
    points: tuple = ()
    phase: str = "random"


@dataclass(frozen=True)
class Scenario:
    name: str
    carrier: CarrierConfig
    grid: GridSpec
    panels: tuple
    receivers: tuple
    snapshots: int
    seed: int = 0
    snr_db: float = None
    source: SourceSpec = SourceSpec()
    solver: str = "ls"
    ls_options: LSOptions = field(default_factory=LSOptions)
    wf_options: WFOptions = field(default_factory=WFOptions)

    def __post_init__(self):
        if len(self.panels) < 1:
            raise ScenarioError("scenario needs at least one panel", field="panels")
        if len(self.receivers) != len(self.panels):
            raise ScenarioError(
                f"{len(self.panels)} panels but {len(self.receivers)} receivers; every panel serves exactly one receiver",
                field="receivers",
            )
        if self.snapshots < 1:
            raise ScenarioError("snapshots must be >= 1", field="snapshots")
        if self.solver not in ("ls", "amplitude"):
            raise ScenarioError(f"unknown solver {self.solver!r}", field="solver.method")

    @property
    def num_panels(self):
        return len(self.panels)

    def codebook(self):
        return random_codebook([p.size for p in self.panels], self.snapshots, self.seed)

    def imaging_matrix(self):
        return assemble_imaging_matrix(self.grid, self.panels, self.receivers, self.carrier, self.codebook())

    def magnitudes(self):
        """Ground-truth magnitude volume ``(Mz, My, Mx)``."""
        src = self.source
        shape = self.grid.shape
        if src.kind == "letter":
            return letter_image(src.letter, shape)
        if src.kind == "image":
            img = np.loadtxt(src.path, ndmin=2)
            if img.size != self.grid.size:
                raise ScenarioError(f"image has {img.size} pixels, grid has {self.grid.size}", field="source.path")
            return img.reshape(shape)
        mags = np.zeros(self.grid.size)
        for idx, amp in src.points:
            mags[idx] = amp
        return mags.reshape(shape)

    def source_field(self):
        return source_field(self.magnitudes().ravel(), self.source.phase, self.seed)

    def with_panel_size(self, rows, cols):
        panels = tuple(replace(p, rows=rows, cols=cols) for p in self.panels)
        return replace(self, panels=panels)


def validate_scenario(scn: Scenario):
    """Warnings (as strings) for a constructed scenario; far-field violations only warn."""
    notes = []
    pts = grid_points(scn.grid)
    for k, (panel, rx) in enumerate(zip(scn.panels, scn.receivers)):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", FarFieldWarning)
            check_far_field(panel, scn.carrier, pts, label="SoI")
            check_far_field(panel, scn.carrier, np.asarray(rx)[None, :], label="receiver")
        notes.extend(f"panel {k}: {w.message}" for w in caught)
    return notes


# --------------------------------------------------------------------------
# presets
# --------------------------------------------------------------------------

CARRIER = CarrierConfig(5.8e9)
HALF_WAVE = CARRIER.wavelength / 2.0

# Geometry constants of the reproduced experiments.
LETTER_GRID = GridSpec((0.0, 0.0, 0.0), (16, 16, 1), (2.0, 2.0, 2.0))
LETTER_RIS_DISTANCE = 50.0
LETTER_RECEIVER_DISTANCE = 10.0
DEPLOY_GRID = GridSpec((0.0, 0.0, 15.0), (10, 10, 4), (1.0, 1.0, 7.5))
DEPLOY_PANEL_SIDE = 20
DEPLOY_RANGE = 20.0
CHAMBER_GRID = GridSpec((0.0, 0.0, 0.0), (7, 8, 1), (1.0, 1.0, 1.0))
OFFICE_GRID = GridSpec((0.0, 0.0, 0.0), (5, 6, 1), (1.0, 1.0, 1.0))
LINE_ARRAY = 32


def _facing_with_receiver(center, target, rows, cols, rx_distance, rx_tilt=(0.0, 0.0), name=""):
    """Panel facing ``target``; receiver ``rx_distance`` in front, tilted by the
    given direction cosines along the panel's (axis_u, axis_v)."""
    panel = PanelSpec.facing(center, target, rows, cols, HALF_WAVE, name=name)
    tu, tv = rx_tilt
    along = math.sqrt(max(0.0, 1.0 - tu * tu - tv * tv))
    d = tu * np.asarray(panel.axis_u) + tv * np.asarray(panel.axis_v) + along * np.asarray(panel.normal)
    return panel, tuple(np.asarray(panel.center) + rx_distance * d)


def _letter_scene(side, name):
    panel, rx = _facing_with_receiver(
        (0.0, 0.0, LETTER_RIS_DISTANCE), LETTER_GRID.origin, side, side, LETTER_RECEIVER_DISTANCE
    )
    return Scenario(
        name=name,
        carrier=CARRIER,
        grid=LETTER_GRID,
        panels=(panel,),
        receivers=(rx,),
        snapshots=300,
        seed=1,
        snr_db=30.0,
        source=SourceSpec("letter", "H"),
        solver="ls",
        ls_options=LSOptions(regularization="auto"),
    )


def _deployment(label):
    # Approximate placements: I = four panels side by side at ground level on one
    # side; II = four panels at mid-height of the SoI on its diagonals;
    # III = two of I's ground-level panels plus two mid-height side panels.
    cx, cy, cz = DEPLOY_GRID.origin
    ground = cz - DEPLOY_GRID.extent[2] / 2.0
    centre = np.array(DEPLOY_GRID.origin)
    if label == "I":
        centers = [(cx - 4.5 + 3.0 * i, cy - DEPLOY_RANGE, ground) for i in range(4)]
    elif label == "II":
        az = np.radians([45.0, 135.0, 225.0, 315.0])
        centers = [(cx + DEPLOY_RANGE * math.cos(a), cy + DEPLOY_RANGE * math.sin(a), cz) for a in az]
    elif label == "III":
        centers = [
            (cx - 1.5, cy - DEPLOY_RANGE, ground),
            (cx + 1.5, cy - DEPLOY_RANGE, ground),
            (cx + DEPLOY_RANGE, cy, cz),
            (cx, cy + DEPLOY_RANGE, cz),
        ]
    else:
        raise KeyError(label)
    panels, rxs = [], []
    for i, c in enumerate(centers):
        p, rx = _facing_with_receiver(c, centre, DEPLOY_PANEL_SIDE, DEPLOY_PANEL_SIDE, 10.0, name=f"RIS{i + 1}")
        panels.append(p)
        rxs.append(rx)
    return Scenario(
        name=f"deploy-{label}",
        carrier=CARRIER,
        grid=DEPLOY_GRID,
        panels=tuple(panels),
        receivers=tuple(rxs),
        snapshots=300,
        seed=1,
        snr_db=30.0,
        source=SourceSpec("letter", "HUST"),
        solver="ls",
        ls_options=LSOptions(regularization="auto"),
    )


def _line_array_pair(grid, name, points):
    # Two 32-element line arrays viewing the 2-D SoI from orthogonal sides. The
    # receivers sit off broadside: with real +-1 patterns a receiver on the
    # symmetry axis makes a mirrored, conjugated scene indistinguishable from the
    # true one in amplitude-only data.
    centre = np.array(grid.origin)
    dist = 12.0
    p1, r1 = _facing_with_receiver(centre + (0.0, -dist, 0.0), centre, 1, LINE_ARRAY, 10.0, (0.5, 0.0), "RIS1")
    p2, r2 = _facing_with_receiver(centre + (-dist, 0.0, 0.0), centre, 1, LINE_ARRAY, 10.0, (-0.5, 0.0), "RIS2")
    return Scenario(
        name=name,
        carrier=CARRIER,
        grid=grid,
        panels=(p1, p2),
        receivers=(r1, r2),
        snapshots=500,
        seed=1,
        snr_db=None,
        source=SourceSpec("points", points=points),
        solver="amplitude",
    )


PRESETS = {
    "fig3-H": lambda: _letter_scene(40, "fig3-H"),
    "fig3-H-15": lambda: _letter_scene(15, "fig3-H-15"),
    "deploy-I": lambda: _deployment("I"),
    "deploy-II": lambda: _deployment("II"),
    "deploy-III": lambda: _deployment("III"),
    "chamber": lambda: _line_array_pair(CHAMBER_GRID, "chamber", ((30, 1.0),)),
    "office": lambda: _line_array_pair(OFFICE_GRID, "office", ((8, 1.0), (21, 0.7))),
}


def preset(name) -> Scenario:
    try:
        return PRESETS[name]()
    except KeyError:
        raise ScenarioError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}") from None


# --------------------------------------------------------------------------
# YAML
# --------------------------------------------------------------------------

def _vec3(value, where):
    try:
        v = tuple(float(x) for x in value)
    except (TypeError, ValueError):
        raise ScenarioError("expected a list of three numbers", field=where) from None
    if len(v) != 3:
        raise ScenarioError("expected a list of three numbers", field=where)
    return v


def _get(mapping, key, where, default=...):
    if not isinstance(mapping, dict):
        raise ScenarioError("expected a mapping", field=where)
    if key in mapping:
        return mapping[key]
    if default is ...:
        raise ScenarioError("missing required field", field=f"{where}.{key}" if where else key)
    return default


def _check_keys(mapping, allowed, where):
    extra = set(mapping) - set(allowed)
    if extra:
        raise ScenarioError(f"unknown keys {sorted(extra)}", field=where or "<root>")


def _options(cls, raw, where):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ScenarioError("expected a mapping", field=where)
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ScenarioError(str(exc), field=where) from None
    except ValueError as exc:
        raise ScenarioError(str(exc), field=where) from None


def scenario_from_dict(doc, name="scenario") -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario file must contain a mapping")
    if "preset" in doc:
        base = preset(doc["preset"])
        overrides = {k: v for k, v in doc.items() if k != "preset"}
        return apply_overrides(base, overrides)
    _check_keys(
        doc,
        {"name", "carrier", "grid", "panels", "receivers_m", "snapshots", "seed", "noise", "source", "solver"},
        "",
    )
    carrier_doc = _get(doc, "carrier", "", {}) or {}
    try:
        carrier = CarrierConfig(float(_get(carrier_doc, "frequency_hz", "carrier", 5.8e9)))
    except ValueError as exc:
        raise ScenarioError(str(exc), field="carrier.frequency_hz") from None

    g = _get(doc, "grid", "")
    _check_keys(g, {"origin_m", "counts", "spacing_m"}, "grid")
    try:
        spacing = _get(g, "spacing_m", "grid")
        if np.isscalar(spacing):
            spacing = [spacing] * 3
        grid = GridSpec(
            _vec3(_get(g, "origin_m", "grid", [0, 0, 0]), "grid.origin_m"),
            tuple(int(c) for c in _get(g, "counts", "grid")),
            _vec3(spacing, "grid.spacing_m"),
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(str(exc), field="grid") from None

    raw_panels = _get(doc, "panels", "")
    if not isinstance(raw_panels, list) or not raw_panels:
        raise ScenarioError("need a non-empty list of panels", field="panels")
    panels, receivers = [], []
    for i, p in enumerate(raw_panels):
        where = f"panels[{i}]"
        _check_keys(p, {"center_m", "target_m", "normal", "axis_u", "rows", "cols", "pitch_m", "receiver_m", "name"}, where)
        center = _vec3(_get(p, "center_m", where), f"{where}.center_m")
        pitch = _get(p, "pitch_m", where, None)
        pitch = carrier.wavelength / 2.0 if pitch is None else float(pitch)
        rows = int(_get(p, "rows", where))
        cols = int(_get(p, "cols", where))
        pname = str(p.get("name", f"RIS{i + 1}"))
        try:
            if "target_m" in p:
                panel = PanelSpec.facing(center, _vec3(p["target_m"], f"{where}.target_m"), rows, cols, pitch, name=pname)
            else:
                normal = np.asarray(_vec3(_get(p, "normal", where), f"{where}.normal"))
                axis_u = np.asarray(_vec3(_get(p, "axis_u", where), f"{where}.axis_u"))
                axis_v = np.cross(normal, axis_u)
                panel = PanelSpec(center, tuple(normal), tuple(axis_u), tuple(axis_v), rows, cols, pitch, pname)
        except ValueError as exc:
            raise ScenarioError(str(exc), field=where) from None
        panels.append(panel)
        if "receiver_m" in p:
            receivers.append(_vec3(p["receiver_m"], f"{where}.receiver_m"))
    if "receivers_m" in doc:
        if receivers:
            raise ScenarioError("give receivers per panel or as a top-level list, not both", field="receivers_m")
        receivers = [_vec3(r, f"receivers_m[{i}]") for i, r in enumerate(doc["receivers_m"] or [])]

    snr = (_get(doc, "noise", "", {}) or {}).get("snr_db")
    src_doc = _get(doc, "source", "", {}) or {}
    _check_keys(src_doc, {"kind", "letter", "path", "points", "phase"}, "source")
    kind = src_doc.get("kind", "letter")
    if kind not in ("letter", "image", "points"):
        raise ScenarioError(f"unknown source kind {kind!r}", field="source.kind")
    points = tuple((int(pt["index"]), float(pt.get("magnitude", 1.0))) for pt in src_doc.get("points", []) or [])
    for idx, _ in points:
        if not 0 <= idx < grid.size:
            raise ScenarioError(f"point index {idx} outside grid of {grid.size} cells", field="source.points")
    phase = src_doc.get("phase", "random")
    if phase not in ("random", "zero"):
        raise ScenarioError(f"unknown phase policy {phase!r}", field="source.phase")
    source = SourceSpec(kind, str(src_doc.get("letter", "H")), src_doc.get("path"), points, phase)
    if kind == "letter":
        try:
            letter_image(source.letter, grid.shape)
        except ValueError as exc:
            raise ScenarioError(str(exc), field="source.letter") from None

    solver_doc = _get(doc, "solver", "", {}) or {}
    _check_keys(solver_doc, {"method", "ls", "amplitude"}, "solver")
    return Scenario(
        name=str(doc.get("name", name)),
        carrier=carrier,
        grid=grid,
        panels=tuple(panels),
        receivers=tuple(receivers),
        snapshots=int(_get(doc, "snapshots", "")),
        seed=int(doc.get("seed", 0)),
        snr_db=None if snr is None else float(snr),
        source=source,
        solver=solver_doc.get("method", "ls"),
        ls_options=_options(LSOptions, solver_doc.get("ls"), "solver.ls"),
        wf_options=_options(WFOptions, solver_doc.get("amplitude"), "solver.amplitude"),
    )


def apply_overrides(scn: Scenario, overrides) -> Scenario:
    """Shallow overrides on a preset: snapshots, seed, noise, solver, name."""
    _check_keys(overrides, {"snapshots", "seed", "noise", "solver", "name"}, "")
    kw = {}
    if "snapshots" in overrides:
        kw["snapshots"] = int(overrides["snapshots"])
    if "seed" in overrides:
        kw["seed"] = int(overrides["seed"])
    if "name" in overrides:
        kw["name"] = str(overrides["name"])
    if "noise" in overrides:
        snr = (overrides["noise"] or {}).get("snr_db")
        kw["snr_db"] = None if snr is None else float(snr)
    if "solver" in overrides:
        sd = overrides["solver"] or {}
        if "method" in sd:
            kw["solver"] = sd["method"]
        if "ls" in sd:
            kw["ls_options"] = _options(LSOptions, sd["ls"], "solver.ls")
        if "amplitude" in sd:
            kw["wf_options"] = _options(WFOptions, sd["amplitude"], "solver.amplitude")
    return replace(scn, **kw)


def _read_yaml(path):
    try:
        with open(path) as fh:
            return yaml.safe_load(fh)
    except FileNotFoundError:
        raise ScenarioError(f"file not found: {path}") from None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ScenarioError(f"YAML parse error: {problem}", line=line) from None


def load_scenario(path) -> Scenario:
    return scenario_from_dict(_read_yaml(path), name=str(path))


def scenario_to_dict(scn: Scenario):
    """Plain-data form of a scenario (the inverse of :func:`scenario_from_dict`)."""
    src = scn.source
    src_doc = {"kind": src.kind, "phase": src.phase}
    if src.kind == "letter":
        src_doc["letter"] = src.letter
    elif src.kind == "image":
        src_doc["path"] = src.path
    else:
        src_doc["points"] = [{"index": i, "magnitude": a} for i, a in src.points]
    return {
        "name": scn.name,
        "carrier": {"frequency_hz": scn.carrier.frequency},
        "grid": {
            "origin_m": list(scn.grid.origin),
            "counts": list(scn.grid.counts),
            "spacing_m": list(scn.grid.spacing),
        },
        "panels": [
            {
                "name": p.name,
                "center_m": list(p.center),
                "normal": list(p.normal),
                "axis_u": list(p.axis_u),
                "rows": p.rows,
                "cols": p.cols,
                "pitch_m": p.pitch,
                "receiver_m": [float(v) for v in rx],
            }
            for p, rx in zip(scn.panels, scn.receivers)
        ],
        "snapshots": scn.snapshots,
        "seed": scn.seed,
        "noise": {"snr_db": scn.snr_db},
        "source": src_doc,
        "solver": {
            "method": scn.solver,
            "ls": copy.deepcopy(vars(scn.ls_options)),
            "amplitude": copy.deepcopy(vars(scn.wf_options)),
        },
    }


def trial_seed(scn: Scenario, repetition):
    return scn.seed if repetition == 0 else rng.derive_seed(scn.seed, rng.REPETITION, repetition)
