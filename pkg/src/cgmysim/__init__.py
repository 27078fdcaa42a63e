"""Exact and time-change-decomposition sampling of CGMY paths, with Monte Carlo option pricing."""

from .dirichlet import MeanFixedPointSpec, ScaleLaw, sample_mean_cftp, sample_mean_series
from .engine import Method, PathSample, PayoffKind, PayoffSpec, PriceEstimate, price, price_many, sample_path
from .ggc import TcdConfig, Variant, l_min, sample_time_change_increment
from .model import (
    DESIGN_I,
    DESIGN_II,
    CgmyParams,
    DomainError,
    MarketSpec,
    char_fn,
    cumulants,
    levy_density,
    martingale_drift,
)
from .rngkit import RngStream, SamplerError
from .stable import TiltedStableSpec, sample_cgmy_increment_exact, sample_tilted_stable

__all__ = [
    "CgmyParams",
    "MarketSpec",
    "DESIGN_I",
    "DESIGN_II",
    "DomainError",
    "SamplerError",
    "RngStream",
    "levy_density",
    "char_fn",
    "cumulants",
    "martingale_drift",
    "TiltedStableSpec",
    "sample_tilted_stable",
    "sample_cgmy_increment_exact",
    "ScaleLaw",
    "MeanFixedPointSpec",
    "sample_mean_cftp",
    "sample_mean_series",
    "TcdConfig",
    "Variant",
    "l_min",
    "sample_time_change_increment",
    "Method",
    "PayoffKind",
    "PayoffSpec",
    "PathSample",
    "PriceEstimate",
    "sample_path",
    "price",
    "price_many",
]
