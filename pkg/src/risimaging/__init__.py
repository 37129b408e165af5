"""Passive imaging with multiple reconfigurable intelligent surfaces (RIS).

Geometry and channel models, random 1-bit codebooks, the stacked imaging
matrix, rank analysis, least-squares and amplitude-only reconstruction, and
image metrics.
"""
from ._accel import backend_name
from .analysis import RankReport, collinearity_report, numerical_rank, rank_bound, singular_values
from .codebook import Codebook, random_codebook, random_one_bit_codebook
from .exceptions import (
    DimensionError,
    DivergenceError,
    GeometryError,
    InitializationError,
    ScenarioError,
)
from .forward import (
    ImagingMatrix,
    MeasurementSet,
    SourceField,
    amplitude_measurements,
    assemble_imaging_matrix,
    source_field,
    synthesize_measurements,
)
from .geometry import CarrierConfig, FarFieldWarning, GridSpec, PanelSpec, grid_points
from .letters import letter_image, letter_source
from .metrics import MetricReport, complex_error, rmse, ssim, ssim_volume
from .recon import LSOptions, ReconResult, WFOptions, align_phase, ls_reconstruct, reweighted_wf, spectral_initialize
from .scenario import Scenario, load_scenario, preset

__version__ = "0.1.0"
