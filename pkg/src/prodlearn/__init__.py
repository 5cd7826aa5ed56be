"""Learning prophet, Pandora and auction strategies from product empirical distributions."""

from .dist import (
    DiscreteDistribution,
    LabeledProductDistribution,
    ProductDistribution,
    SampleMatrix,
    ShadingParams,
    discretize_down,
    dominates,
    double_shade,
    empirical,
    lower_auxiliary,
    product_empirical,
    sample,
    shade,
    truncate,
    upper_auxiliary,
)
from .errors import CapExceededError, ProdLearnError, SchemaError

__version__ = "0.1.0"

__all__ = [
    "CapExceededError",
    "DiscreteDistribution",
    "LabeledProductDistribution",
    "ProdLearnError",
    "ProductDistribution",
    "SampleMatrix",
    "SchemaError",
    "ShadingParams",
    "discretize_down",
    "dominates",
    "double_shade",
    "empirical",
    "lower_auxiliary",
    "product_empirical",
    "sample",
    "shade",
    "truncate",
    "upper_auxiliary",
]
