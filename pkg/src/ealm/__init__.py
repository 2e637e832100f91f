"""Fuzzy rule extraction from scattered data: ALM and extended ALM."""

from .alm import AlmConfig, alm_fit
from .estimators import ALMRegressor, EALMRegressor, make_estimator
from .extended import EalmConfig, ealm_fit
from .generators import generate
from .grid import BinaryGrid, DataPlane, Dataset, GridSpec
from .ids import IdsParams
from .io import DataError, read_dataset, write_dataset
from .rules import RuleBase, model_error

__all__ = [
    "ALMRegressor", "AlmConfig", "BinaryGrid", "DataError", "DataPlane", "Dataset", "EALMRegressor",
    "EalmConfig", "GridSpec", "IdsParams", "RuleBase", "alm_fit", "ealm_fit", "generate", "make_estimator",
    "model_error", "read_dataset", "write_dataset",
]
__version__ = "0.1.0"
