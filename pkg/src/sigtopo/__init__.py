"""Sliding-window simplicial complexes from path signatures and LASSO selection."""

from .complex import WeightedComplex, build_complex, link
from .ingest import Recording, parse_csv, parse_edf, read_csv, read_edf, resample_mean
from .lasso import DesignMatrix, LassoFit, fit_lasso, r_squared, select
from .persistence import (
    betti,
    births_from_weights,
    persistence_entropy,
    reduce_boundary,
)
from .pipeline import AnalysisConfig, TrajectoryPoint, rolling_bands, sliding_analysis
from .signature import Path, TruncatedSignature, chen_concat, path_signature

__version__ = "0.1.0"
