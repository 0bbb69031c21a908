import numpy as np
import pytest
from sklearn.base import clone

from moduli_walls import PeriodMapInverse, PeriodMapTransformer, forward
from moduli_walls.errors import ModuliWallsError


@pytest.fixture(scope="module")
def rows(wall):
    from test_coordinates import shifted
    return np.array([shifted(wall, f).as_vector() for f in (1.02, 1.03, 1.04)])


def test_params_and_clone():
    t = PeriodMapTransformer(wall_tol=1e-9, errors="nan")
    assert t.get_params() == {"wall_tol": 1e-9, "errors": "nan"}
    c = clone(t)
    assert c.get_params() == t.get_params() and c is not t
    inv = PeriodMapInverse(kind="GammaPlus", tol=1e-11)
    assert clone(inv).get_params()["kind"] == "GammaPlus"


def test_transform_matches_forward(rows, wall):
    t = PeriodMapTransformer().fit(rows)
    Y = t.transform(rows)
    assert Y.shape == (3, 4)
    from moduli_walls import BranchDivisor
    for row, y in zip(rows, Y):
        _, A = forward(BranchDivisor.from_vector(row))
        assert np.array_equal(y, A.vector)
    assert list(t.classify(rows)) == ["GammaPlus"] * 3
    w = t.transform(wall.as_vector())
    assert np.isnan(w[0, 3]) and np.all(np.isfinite(w[0, :3]))


def test_unsupported_rows(rows):
    bad = np.array([[0.82, 0.88, -2.75, 0.15]])
    with pytest.raises(ModuliWallsError):
        PeriodMapTransformer().fit_transform(bad)
    t = PeriodMapTransformer(errors="nan")
    assert np.all(np.isnan(t.fit_transform(bad)))
    assert t.classify(bad)[0] == "Unsupported"


def test_bad_shape():
    with pytest.raises(ModuliWallsError):
        PeriodMapTransformer().fit(np.zeros((2, 3)))


def test_inverse_round_trip(rows):
    Y = PeriodMapTransformer().fit_transform(rows)
    inv = PeriodMapInverse(kind="GammaPlus").fit(rows[[0, 2]])
    X = inv.predict(Y[1])
    assert np.max(np.abs(X[0] - rows[1])) < 1e-8


def test_predict_requires_fit():
    from sklearn.exceptions import NotFittedError
    with pytest.raises(NotFittedError):
        PeriodMapInverse().predict(np.zeros((1, 4)))
