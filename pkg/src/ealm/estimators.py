"""scikit-learn style wrappers around the two fitting pipelines."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .alm import AlmConfig, alm_fit
from .extended import EalmConfig, ealm_fit
from .grid import Dataset
from .ids import IdsParams
from .rules import RuleBase


class _RuleBaseRegressor(RegressorMixin, BaseEstimator):

    def _check_fit_input(self, X, y):
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        if len(y) < 2:
            raise ValueError("empty dataset: at least 2 rows are needed")
        self.n_features_in_ = X.shape[1]
        return Dataset(X, y)

    def predict(self, X):
        check_is_fitted(self, "rule_base_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, the model expects {self.n_features_in_}")
        return self.rule_base_.predict(X)

    def describe(self, names=None) -> str:
        check_is_fitted(self, "rule_base_")
        return self.rule_base_.describe(names)

    @property
    def n_rules_(self) -> int:
        check_is_fitted(self, "rule_base_")
        return len(self.rule_base_.rules)

    @classmethod
    def from_rule_base(cls, rb: RuleBase):
        """An estimator wrapping an already fitted (e.g. loaded) rule base."""
        est = cls()
        est.rule_base_ = rb
        est.n_features_in_ = rb.n_inputs
        return est


class ALMRegressor(_RuleBaseRegressor):
    """Ink-drop / centre-of-gravity rule extraction.

    Parameters
    ----------
    resolution : int
        Cells per axis of every projection plane.
    ids_radius : int
        Radius in cells of the pyramid ink drop.
    ids_mode : {"additive", "supremum"}
    truth_threshold : float
        A plane whose Truth reaches this value becomes a rule.
    max_depth : int
        Maximum number of nested axis splits.
    min_samples : int
        Smallest sample count on each side of a split.
    """

    def __init__(self, resolution=64, ids_radius=2, ids_mode="additive", truth_threshold=0.8,
                 max_depth=6, min_samples=3):
        self.resolution = resolution
        self.ids_radius = ids_radius
        self.ids_mode = ids_mode
        self.truth_threshold = truth_threshold
        self.max_depth = max_depth
        self.min_samples = min_samples

    def config(self) -> AlmConfig:
        return AlmConfig(self.resolution, IdsParams(self.ids_radius, self.ids_mode),
                         self.truth_threshold, self.max_depth, self.min_samples)

    def fit(self, X, y):
        ds = self._check_fit_input(X, y)
        self.rule_base_ = alm_fit(ds, self.config())
        return self


class EALMRegressor(_RuleBaseRegressor):
    """Thickening/thinning rule extraction with y0 splits.

    Parameters
    ----------
    resolution : int
        Cells per axis of every projection plane.
    thicken_passes : int
        Passes of the thickening chain before thinning.
    bridge : int
        3x3 dilations applied first so that isolated samples can merge.
    spur_length : int
        End-point pruning length applied to each skeleton.
    error_threshold : float
        Held-out RMSE, relative to the standard deviation of ``y``, below
        which a region stops splitting.
    max_depth : int
        Maximum number of nested y0 splits.
    min_samples : int
        Smallest sample count of a split's side.
    """

    def __init__(self, resolution=64, thicken_passes=3, bridge=1, spur_length=3, error_threshold=0.05,
                 max_depth=6, min_samples=3):
        self.resolution = resolution
        self.thicken_passes = thicken_passes
        self.bridge = bridge
        self.spur_length = spur_length
        self.error_threshold = error_threshold
        self.max_depth = max_depth
        self.min_samples = min_samples

    def config(self) -> EalmConfig:
        return EalmConfig(resolution=self.resolution, thicken_passes=self.thicken_passes, bridge=self.bridge,
                          spur_length=self.spur_length, error_threshold=self.error_threshold,
                          max_depth=self.max_depth, min_samples=self.min_samples)

    def fit(self, X, y):
        ds = self._check_fit_input(X, y)
        self.rule_base_ = ealm_fit(ds, self.config())
        return self


def make_estimator(method: str, **params):
    """``"alm"`` or ``"ealm"`` estimator with the given parameters."""
    try:
        cls = {"alm": ALMRegressor, "ealm": EALMRegressor}[method.lower()]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose alm or ealm") from None
    return cls(**params)
