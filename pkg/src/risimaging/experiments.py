"""Experiment orchestration: single runs, parameter sweeps and the
amplitude-only multi-RIS demo.

Sweep outputs in ``out_dir``:

``metrics.csv``
    one row per sweep point and repetition, columns :data:`METRIC_COLUMNS`.
    Deterministic for a given plan and seed.
``timings.csv``
    ``point,repetition,label,runtime_s`` (wall clock, not reproducible).
``point<NNN>_r<R>_z<k>.pgm``
    reconstructed magnitude per z-layer, normalised by the ground-truth maximum.
``spectrum_point<NNN>_r<R>.csv``
    singular values, one per line.
"""
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import io
from .analysis import RankReport, numerical_rank
from .exceptions import ScenarioError
from .forward import ImagingMatrix, MeasurementSet, amplitude_measurements, synthesize_measurements
from .geometry import FarFieldWarning
from .metrics import MetricReport, fit_window, image_report
from .recon import ReconResult, ls_reconstruct, reweighted_wf
from .scenario import Scenario, _read_yaml, preset, scenario_from_dict, trial_seed

METRIC_COLUMNS = [
    "point", "repetition", "label", "seed", "K", "N", "KN", "T", "M", "solver",
    "rank", "bound", "sigma_1", "sigma_2", "sigma_3", "rmse", "ssim", "complex_error", "status",
]
DEMO_COLUMNS = [
    "config", "panels", "M", "rows", "rank", "complex_error", "rmse", "ssim",
    "peak_cell", "true_peak_cell", "converged", "iterations",
]
AXES = ("snapshots", "panel_size", "deployment")


@dataclass
class RunOutcome:
    scenario: Scenario
    imaging: ImagingMatrix
    measurements: MeasurementSet
    result: ReconResult
    rank: RankReport
    metrics: MetricReport
    truth: np.ndarray


def reconstruct(scn: Scenario, H, meas, solver=None):
    solver = solver or scn.solver
    if solver == "ls":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return ls_reconstruct(H, meas, scn.ls_options)
    if solver == "amplitude":
        return reweighted_wf(H, amplitude_measurements(meas), scn.wf_options)
    raise ValueError(f"unknown solver {solver!r}")


def run_scenario(scn: Scenario, solver=None) -> RunOutcome:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FarFieldWarning)
        H = scn.imaging_matrix()
    s = scn.source_field()
    meas = synthesize_measurements(H, s, snr_db=scn.snr_db, seed=scn.seed)
    result = reconstruct(scn, H, meas, solver)
    rank = numerical_rank(H)
    metrics = image_report(result.estimate, s.values, scn.grid.shape)
    return RunOutcome(scn, H, meas, result, rank, metrics, s.values)


def write_run_outputs(outcome: RunOutcome, out_dir, stem="run", png=False):
    os.makedirs(out_dir, exist_ok=True)
    scn = outcome.scenario
    truth = np.abs(outcome.truth).reshape(scn.grid.shape)
    est = np.abs(outcome.result.estimate).reshape(scn.grid.shape)
    io.write_volume_images(os.path.join(out_dir, f"{stem}"), est, truth.max() or None, png)
    io.write_volume_images(os.path.join(out_dir, f"{stem}_truth"), truth, None, png)
    io.write_singular_values(os.path.join(out_dir, f"spectrum_{stem}.csv"), outcome.rank.singular_values)
    io.save_recon(os.path.join(out_dir, stem), outcome.result)


def metrics_row(point, rep, label, scn, solver, outcome=None, status="ok"):
    row = {
        "point": point, "repetition": rep, "label": label, "seed": scn.seed,
        "K": scn.num_panels, "N": scn.panels[0].size, "KN": sum(p.size for p in scn.panels),
        "T": scn.snapshots, "M": scn.grid.size, "solver": solver, "status": status,
    }
    if outcome is not None:
        sv = outcome.rank.singular_values
        row.update(
            rank=outcome.rank.rank,
            bound=outcome.rank.bound,
            sigma_1=float(sv[0]) if len(sv) > 0 else "",
            sigma_2=float(sv[1]) if len(sv) > 1 else "",
            sigma_3=float(sv[2]) if len(sv) > 2 else "",
            rmse=outcome.metrics.rmse,
            ssim=outcome.metrics.ssim,
            complex_error=outcome.metrics.complex_error,
        )
    return row


# --------------------------------------------------------------------------
# plans
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentPlan:
    name: str
    base: Scenario
    axis: str
    values: tuple
    repetitions: int = 1
    seed: int = None
    solver: str = None

    def __post_init__(self):
        if self.axis not in AXES:
            raise ScenarioError(f"unknown sweep axis {self.axis!r}; use one of {AXES}", field="sweep.axis")
        if len(self.values) == 0:
            raise ScenarioError("sweep has no values", field="sweep.values")
        if self.repetitions < 1:
            raise ScenarioError("repetitions must be >= 1", field="repetitions")
        if self.axis in ("snapshots", "panel_size"):
            for v in self.values:
                parts = v if isinstance(v, (tuple, list)) else (v,)
                if any(int(x) < 1 for x in parts):
                    raise ScenarioError(f"sweep values must be positive, got {v}", field="sweep.values")


def _point_scenario(plan: ExperimentPlan, value):
    base = plan.base
    if plan.axis == "snapshots":
        return f"T={int(value)}", replace(base, snapshots=int(value))
    if plan.axis == "panel_size":
        rows, cols = (value, value) if not isinstance(value, (tuple, list)) else value
        return f"N={rows}x{cols}", base.with_panel_size(int(rows), int(cols))
    scn = preset(value) if isinstance(value, str) else value
    return scn.name, replace(scn, seed=base.seed, snapshots=base.snapshots, snr_db=base.snr_db)


def expand_plan(plan: ExperimentPlan):
    """Sweep points in a fixed order: value-major, then repetition."""
    base_seed = plan.base.seed if plan.seed is None else int(plan.seed)
    plan_base = replace(plan.base, seed=base_seed)
    plan = replace(plan, base=plan_base)
    jobs = []
    for i, v in enumerate(plan.values):
        label, scn = _point_scenario(plan, v)
        for r in range(plan.repetitions):
            jobs.append((i, r, label, replace(scn, seed=trial_seed(scn, r))))
    return jobs


PLANS = {
    "snapshots": dict(base="fig3-H", axis="snapshots", values=(100, 200, 300, 400, 500)),
    "snapshots-n15": dict(base="fig3-H-15", axis="snapshots", values=(100, 200, 300, 400, 500)),
    "panel-size": dict(base="fig3-H", axis="panel_size", values=(6, 12, 18, 24, 30, 36)),
    "deployment": dict(base="deploy-II", axis="deployment", values=("deploy-I", "deploy-II", "deploy-III")),
}


def plan_preset(name, seed=None, repetitions=1) -> ExperimentPlan:
    try:
        spec = PLANS[name]
    except KeyError:
        raise ScenarioError(f"unknown plan {name!r}; available: {', '.join(sorted(PLANS))}") from None
    return ExperimentPlan(name, preset(spec["base"]), spec["axis"], spec["values"], repetitions, seed)


def load_plan(path) -> ExperimentPlan:
    doc = _read_yaml(path)
    if not isinstance(doc, dict):
        raise ScenarioError("plan file must contain a mapping")
    if "plan" in doc:
        return plan_preset(doc["plan"], doc.get("seed"), int(doc.get("repetitions", 1)))
    base_doc = doc.get("base")
    if base_doc is None:
        raise ScenarioError("missing required field", field="base")
    if isinstance(base_doc, str):
        base = preset(base_doc)
    else:
        base = scenario_from_dict(base_doc)
    sweep = doc.get("sweep") or {}
    values = sweep.get("values") or []
    return ExperimentPlan(
        str(doc.get("name", path)),
        base,
        sweep.get("axis", ""),
        tuple(tuple(v) if isinstance(v, list) else v for v in values),
        int(doc.get("repetitions", 1)),
        doc.get("seed"),
        doc.get("solver"),
    )


def run_sweep(plan: ExperimentPlan, out_dir=None, threads=1, png=False):
    """Run every sweep point; failures are recorded in the row's status and the sweep continues."""
    jobs = expand_plan(plan)

    def work(job):
        i, r, label, scn = job
        solver = plan.solver or scn.solver
        t0 = time.perf_counter()
        try:
            outcome = run_scenario(scn, solver)
            row = metrics_row(i, r, label, scn, solver, outcome)
            if out_dir:
                write_run_outputs(outcome, out_dir, f"point{i:03d}_r{r}", png)
        except Exception as exc:  # noqa: BLE001 - recorded, sweep continues
            row = metrics_row(i, r, label, scn, solver, status=f"error: {type(exc).__name__}: {exc}")
        return row, time.perf_counter() - t0

    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            done = list(pool.map(work, jobs))
    else:
        done = [work(j) for j in jobs]
    rows = [d[0] for d in done]
    if out_dir:
        io.write_csv(os.path.join(out_dir, "metrics.csv"), rows, METRIC_COLUMNS)
        io.write_csv(
            os.path.join(out_dir, "timings.csv"),
            [{"point": r["point"], "repetition": r["repetition"], "label": r["label"], "runtime_s": t}
             for r, t in done],
            ["point", "repetition", "label", "runtime_s"],
        )
    return rows


# --------------------------------------------------------------------------
# amplitude-only demo
# --------------------------------------------------------------------------

def run_amplitude_demo(scn: Scenario, out_dir=None, png=False):
    """Amplitude-only reconstruction from each panel alone and from all panels jointly.

    All configurations share one acquisition: a single-panel run uses that
    panel's rows of the joint measurement vector.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FarFieldWarning)
        H = scn.imaging_matrix()
    s = scn.source_field()
    meas = amplitude_measurements(synthesize_measurements(H, s, snr_db=scn.snr_db, seed=scn.seed))
    T = scn.snapshots
    configs = [(f"RIS{k + 1}", [k]) for k in range(scn.num_panels)]
    if scn.num_panels > 1:
        configs.append(("joint", list(range(scn.num_panels))))
    truth = np.abs(s.values).reshape(scn.grid.shape)
    window = fit_window(scn.grid.shape[-2:])
    rows, results = [], {}
    for label, panels in configs:
        sub = H.subset(panels)
        idx = np.concatenate([np.arange(k * T, (k + 1) * T) for k in panels])
        y = replace(meas, values=meas.values[idx])
        res = reweighted_wf(sub, y, scn.wf_options)
        rep = image_report(res.estimate, s.values, scn.grid.shape, window)
        results[label] = res
        rows.append({
            "config": label,
            "panels": "+".join(str(k + 1) for k in panels),
            "M": scn.grid.size,
            "rows": len(idx),
            "rank": numerical_rank(sub).rank,
            "complex_error": rep.complex_error,
            "rmse": rep.rmse,
            "ssim": rep.ssim,
            "peak_cell": int(np.argmax(np.abs(res.estimate))),
            "true_peak_cell": int(np.argmax(np.abs(s.values))),
            "converged": res.converged,
            "iterations": res.iterations,
        })
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)
            est = np.abs(res.estimate).reshape(scn.grid.shape)
            io.write_volume_images(os.path.join(out_dir, f"amp_{label}"), est, truth.max() or None, png)
    if out_dir:
        io.write_volume_images(os.path.join(out_dir, "amp_truth"), truth, None, png)
        io.write_csv(os.path.join(out_dir, "amplitude_demo.csv"), rows, DEMO_COLUMNS)
    return rows, results
