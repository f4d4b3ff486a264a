"""Information-theoretic limits to two-class classification.

kNN estimates of the two Kullback-Leibler divergences (CDI) and their
resistor average (CDR), confusion-matrix leakage rates, and an audit of a
classifier's Cohen's kappa against the limit 1 - 2^-CDR.
"""

__version__ = "0.1.0"

from .analytic import (
    Exponential1D, Gaussian1D, Product, bhattacharyya, chernoff_divergence,
    chernoff_information, divergence_curve, kl_closed_form, renyi_divergence,
    resistor_average, second_order_bracket, second_order_coefficients,
)
from .classify import ClassifierSpec, cross_validate
from .confusion import ConfusionCounts, kappa, kappa_from_rates, rates
from .datagen import GenSpec, generate, reference, subsample_to_f1
from .errors import InfolimitError
from .ingest import SchemaSpec, greedy_select, load_csv, load_schema
from .knn import DivergenceEstimate, EstimatorConfig, cdi, estimate
from .sweep import FitResult, fit_leakage_model, kappa_limit, sweep, verdict
from .table import DatasetTable, Variable, write_csv

__all__ = [
    "ClassifierSpec", "ConfusionCounts", "DatasetTable", "DivergenceEstimate",
    "EstimatorConfig", "Exponential1D", "FitResult", "Gaussian1D", "GenSpec",
    "InfolimitError", "Product", "SchemaSpec", "Variable", "bhattacharyya", "cdi",
    "chernoff_divergence", "chernoff_information", "cross_validate", "divergence_curve",
    "estimate", "fit_leakage_model", "generate", "greedy_select", "kappa",
    "kappa_from_rates", "kappa_limit", "kl_closed_form", "load_csv", "load_schema",
    "rates", "reference", "renyi_divergence", "resistor_average", "second_order_bracket",
    "second_order_coefficients", "subsample_to_f1", "sweep", "verdict", "write_csv",
]
