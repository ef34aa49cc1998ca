"""scikit-learn style wrapper: least squares with a piecewise-linear regularizer."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, validate_data

from .exact import RationalMatrix, to_fraction
from .pwl import CpwlFunction, l1_norm, scaled
from .wellposed import ProblemInstance, solve_exact, solve_numeric, well_posedness


class CpwlRegularizedRegression(RegressorMixin, BaseEstimator):
    """Minimize ``1/2 ||X w - y||^2 + alpha * f(w)``.

    ``regularizer`` is a :class:`CpwlFunction` on ``n_features`` variables;
    ``None`` means the l1 norm.  ``method`` is ``"numeric"`` or ``"exact"``
    (the latter converts the data to rationals and may be slow).  After
    ``fit``, ``well_posedness_`` holds the verdict for the design matrix when
    ``check_well_posedness`` is set.
    """

    def __init__(self, regularizer=None, alpha=1.0, method="numeric", tol=1e-6, check_well_posedness=True):
        self.regularizer = regularizer
        self.alpha = alpha
        self.method = method
        self.tol = tol
        self.check_well_posedness = check_well_posedness

    def _function(self, n: int) -> CpwlFunction:
        f = self.regularizer if self.regularizer is not None else l1_norm(n)
        if not isinstance(f, CpwlFunction):
            raise TypeError("regularizer must be a CpwlFunction")
        if f.ambient_dim != n:
            raise ValueError(f"regularizer has dimension {f.ambient_dim}, data has {n} features")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        return scaled(f, to_fraction(self.alpha)) if self.alpha != 1 else f

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True)
        if self.method not in ("numeric", "exact"):
            raise ValueError("method must be 'numeric' or 'exact'")
        n = X.shape[1]
        A = RationalMatrix([[to_fraction(float(a)) for a in row] for row in X], ncols=n)
        inst = ProblemInstance(A, self._function(n))
        b = tuple(to_fraction(float(a)) for a in y)
        self.well_posedness_ = well_posedness(inst, certify=False) if self.check_well_posedness else None
        if self.method == "exact":
            res = solve_exact(inst, b)
            self.coef_ = np.array([float(a) for a in res.minimizer])
            self.coef_exact_ = tuple(Fraction(a) for a in res.minimizer)
        else:
            res = solve_numeric(inst, b, tol=self.tol)
            self.coef_ = np.asarray(res.minimizer, dtype=float)
        self.objective_ = float(res.objective)
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, reset=False)
        return X @ self.coef_
