"""scikit-learn style wrappers around the period map.

Divisors are encoded as rows ``[Re e1, Im e1, Re e2, Im e2]``; weights as
rows of length four in the field order of the cell, padded with NaN for
the three-weight wall cell.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .cells import FIELDS, CellCoordinates, GraphType
from .coordinates import forward, inverse
from .curve import BranchDivisor
from .errors import ModuliWallsError, ValidationError


def _as_divisors(X):
    X = np.atleast_2d(np.asarray(X, float))
    if X.shape[1] != 4:
        raise ValidationError("divisor rows need four columns")
    return [BranchDivisor.from_vector(row) for row in X]


def _pad(coords):
    out = np.full(4, np.nan)
    out[: len(coords.values)] = coords.values
    return out


class PeriodMapTransformer(BaseEstimator, TransformerMixin):
    """Forward map from divisor rows to weight rows.

    Parameters
    ----------
    wall_tol : float
        Discriminant threshold for the wall cell.
    errors : {"raise", "nan"}
        What to do with configurations outside the supported cells.
    """

    def __init__(self, wall_tol=1e-10, errors="raise"):
        self.wall_tol = wall_tol
        self.errors = errors

    def fit(self, X, y=None):
        _as_divisors(X)
        self.n_features_in_ = 4
        return self

    def _rows(self, X):
        kinds, rows = [], []
        for E in _as_divisors(X):
            try:
                kind, coords = forward(E, wall_tol=self.wall_tol)
                kinds.append(kind.value)
                rows.append(_pad(coords))
            except ModuliWallsError:
                if self.errors == "raise":
                    raise
                kinds.append(GraphType.Unsupported.value)
                rows.append(np.full(4, np.nan))
        return np.array(kinds), np.array(rows)

    def transform(self, X):
        return self._rows(X)[1]

    def classify(self, X):
        """Graph type names for each row."""
        return self._rows(X)[0]


class PeriodMapInverse(BaseEstimator):
    """Newton inverse of the period map within one cell.

    ``fit`` stores reference pairs (divisor, weights); ``predict`` starts
    Newton from the reference whose weights are closest to the target.

    Parameters
    ----------
    kind : str
        Cell of the targets: "GammaPlus", "GammaZero" or "GammaMinus".
    tol : float
    max_iter : int
    """

    def __init__(self, kind="GammaMinus", tol=1e-10, max_iter=50):
        self.kind = kind
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y=None):
        """X holds reference divisors; y their weights (computed when None)."""
        divs = _as_divisors(X)
        kind = GraphType(self.kind)
        n = len(FIELDS[kind])
        if y is None:
            y = PeriodMapTransformer().fit(X).transform(X)
        y = np.atleast_2d(np.asarray(y, float))[:, :n]
        self.references_ = np.array([E.as_vector() for E in divs])
        self.reference_weights_ = y
        return self

    def predict(self, Y):
        check_is_fitted(self, "references_")
        kind = GraphType(self.kind)
        n = len(FIELDS[kind])
        Y = np.atleast_2d(np.asarray(Y, float))[:, :n]
        out = []
        for row in Y:
            k = int(np.argmin(np.linalg.norm(self.reference_weights_ - row, axis=1)))
            guess = BranchDivisor.from_vector(self.references_[k])
            E = inverse(CellCoordinates(kind, tuple(row)), guess, tol=self.tol, max_iter=self.max_iter)
            out.append(E.as_vector())
        return np.array(out)
