"""Robust Bayesian dynamic linear model for outliers and structural breaks."""
from .core import (ModelSpec, TimeSeries, build_linear_growth,
                   diffuse_linear_growth, log_transform)
from .priors import (Beta2Params, beta2_density, beta2_sample,
                     stb2_density_1111, tail_comparison_table)
from .kalman import (FilterResult, VarianceSequences, ffbs_sample,
                     kalman_filter, smoother_oracle)
from .gibbs import ChainOutput, ChainState, HyperParams, init_chain, run_gibbs
from .diagnostics import PosteriorSummary, rank_events, summarize
from .io import RunConfig, ingest_csv, run_analysis
from .synthetic import generate_synthetic

__all__ = [
    "ModelSpec", "TimeSeries", "build_linear_growth", "diffuse_linear_growth",
    "log_transform", "Beta2Params", "beta2_density", "beta2_sample",
    "stb2_density_1111", "tail_comparison_table", "FilterResult",
    "VarianceSequences", "ffbs_sample", "kalman_filter", "smoother_oracle",
    "ChainOutput", "ChainState", "HyperParams", "init_chain", "run_gibbs",
    "PosteriorSummary", "rank_events", "summarize", "RunConfig", "ingest_csv",
    "run_analysis", "generate_synthetic",
]
