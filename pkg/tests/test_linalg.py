import numpy as np
import pytest

from lhm_sim.errors import SingularMatrixError
from lhm_sim.linalg import condition_estimate, solve_pivoted


def random_system(rng, n=16, batch=()):
    a = rng.normal(size=batch + (n, n)) + 1j * rng.normal(size=batch + (n, n))
    b = rng.normal(size=batch + (n,)) + 1j * rng.normal(size=batch + (n,))
    return a, b


def test_matches_numpy(rng):
    for n in (1, 2, 5, 16):
        a, b = random_system(rng, n)
        assert np.allclose(solve_pivoted(a, b), np.linalg.solve(a, b), atol=1e-10)


def test_needs_pivoting():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.allclose(solve_pivoted(a, [2.0, 3.0]), [3.0, 2.0])
    a = np.array([[1e-20, 1.0], [1.0, 1.0]])
    x = solve_pivoted(a, [1.0, 2.0])
    assert np.allclose(a @ x, [1.0, 2.0], atol=1e-14)


def test_batch_matches_single(rng):
    a, b = random_system(rng, 6, (4,))
    batched = solve_pivoted(a, b)
    for k in range(4):
        assert np.array_equal(batched[k], solve_pivoted(a[k], b[k]))


def test_singular_detected():
    a = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrixError):
        solve_pivoted(a, [1.0, 1.0])
    with pytest.raises(SingularMatrixError):
        solve_pivoted(np.zeros((3, 3)), np.zeros(3))


def test_shape_errors():
    with pytest.raises(ValueError):
        solve_pivoted(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        solve_pivoted(np.eye(2), np.ones(3))


def test_condition_estimate():
    assert condition_estimate(np.eye(3)) == pytest.approx(1.0)
    assert not np.isfinite(condition_estimate(np.zeros((2, 2)))) or condition_estimate(np.zeros((2, 2))) > 1e15
