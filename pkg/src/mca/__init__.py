"""Multiresolution correlation analysis workbench.

Pairwise correlations over every quantile window of a sorting variable,
rendered as a triangle plot for subpopulation and outlier exploration, plus
the stochastic three-species benchmark generator, a batch CLI, and a local
HTTP exploration service.
"""

from .correlation import CorrelationResult, pearson, significance, spearman
from .data import (
    CompartmentRule,
    CsvFormatError,
    DataMatrix,
    apply_compartment,
    drop_incomplete,
    load_csv,
    normalize_housekeeping,
)
from .engine import (
    MCACell,
    MCAGrid,
    SubpopulationWindow,
    build_grid,
    grid_from_csv,
    grid_to_csv,
    lattice_cell_count,
    resolve_window,
    subpopulation_correlation,
)
from .render import DivergingColormap, RenderOptions, render_mca, render_scatter
from .sde import (
    SamplingPlan,
    SDEModelSpec,
    activation_model,
    drift,
    inhibition_model,
    make_mixture,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "CorrelationResult", "pearson", "spearman", "significance",
    "DataMatrix", "CompartmentRule", "CsvFormatError",
    "load_csv", "drop_incomplete", "normalize_housekeeping", "apply_compartment",
    "SubpopulationWindow", "MCACell", "MCAGrid",
    "resolve_window", "build_grid", "subpopulation_correlation",
    "lattice_cell_count", "grid_to_csv", "grid_from_csv",
    "RenderOptions", "DivergingColormap", "render_mca", "render_scatter",
    "SDEModelSpec", "SamplingPlan", "activation_model", "inhibition_model",
    "drift", "simulate", "make_mixture",
    "__version__",
]
