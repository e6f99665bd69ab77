import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from perigid.errors import AsymmetricInput, NonFiniteEntry
from perigid.linalg import numeric_rank, nullspace, psd_check, smith_rank
from perigid.tolerances import ToleranceVault

SQRT2 = math.sqrt(2.0)

# Golden 4x4 stress matrix of the two-vertex fixture; rows 2 and 3 are
# rational multiples of row 1, so the exact rank is 1.
FLEX2_LZD = np.array(
    [[8, -8, 4, 0], [-8, 8, -4, 0], [4, -4, 2, 0], [0, 0, 0, 0]], dtype=float
)


def octagon_finite_laplacian():
    a = 2 * SQRT2 + 2
    b = -SQRT2 - 2
    c = -1 - SQRT2
    m = np.zeros((8, 8))
    for i in range(8):
        m[i, i] = a
        m[i, (i + 1) % 8] = b if i % 2 == 0 else c
        m[(i + 1) % 8, i] = m[i, (i + 1) % 8]
    for i, j in ((0, 3), (4, 7), (1, 6), (2, 5)):
        m[i, j] = m[j, i] = 1.0
    return m


def test_numeric_rank_identity(tol):
    res = numeric_rank(np.eye(3), tol)
    assert res.rank == 3
    assert not res.marginal


def test_numeric_rank_flex2_stress_matrix(tol):
    assert numeric_rank(FLEX2_LZD, tol).rank == 1


def test_numeric_rank_octagon_finite(tol):
    m = octagon_finite_laplacian()
    assert numeric_rank(m, tol).rank == 5


def test_numeric_rank_zero_and_empty(tol):
    assert numeric_rank(np.zeros((3, 3)), tol).rank == 0
    assert numeric_rank(np.zeros((0, 4)), tol).rank == 0


def test_numeric_rank_rejects_nonfinite(tol):
    with pytest.raises(NonFiniteEntry):
        numeric_rank(np.array([[1.0, np.nan]]), tol)


def test_numeric_rank_marginal_flag(tol):
    # Singular values 1 and 2e-3: the cut ratio 500 is below the 1e3 guard.
    m = np.diag([1.0, 2e-3])
    shrunk = ToleranceVault(rank_rel_tol=1e-2)
    res = numeric_rank(m, shrunk)
    assert res.rank == 1 and res.marginal
    assert numeric_rank(np.diag([1.0, 1e-12]), tol).marginal is False


def test_nullspace_zero_matrix(tol):
    basis = nullspace(np.zeros((2, 2)), "right", tol)
    assert basis.shape == (2, 2)
    assert np.allclose(basis.T @ basis, np.eye(2))


def test_nullspace_flex2_incidence_contains_one_hat(tol):
    izd = np.array(
        [[-1, 1, 0, 0], [-1, 1, -1, 0], [0, 0, 0, 1], [0, 0, 1, 1], [0, 0, -1, 1]],
        dtype=float,
    )
    basis = nullspace(izd, "right", tol)
    one_hat = np.array([1.0, 1.0, 0.0, 0.0])
    # 1-hat must be reproduced by projection onto the kernel
    assert np.allclose(basis @ (basis.T @ one_hat), one_hat)


def test_nullspace_flex2_stress_matrix_dimension(tol):
    assert nullspace(FLEX2_LZD, "right", tol).shape[1] == 3


def test_nullspace_residual_property(tol):
    rng = np.random.default_rng(0)
    for _ in range(50):
        m = rng.standard_normal((rng.integers(1, 7), rng.integers(1, 7)))
        basis = nullspace(m, "right", tol)
        if basis.size:
            smax = np.linalg.svd(m, compute_uv=False)[0]
            assert np.abs(m @ basis).max() <= tol.residual_tol * smax * np.sqrt(m.shape[1])
        left = nullspace(m, "left", tol)
        if left.size:
            smax = np.linalg.svd(m, compute_uv=False)[0]
            assert np.abs(left.T @ m).max() <= tol.residual_tol * smax * np.sqrt(m.shape[0])


def test_psd_check_basics(tol):
    assert psd_check(np.zeros((2, 2)), tol) == (True, 0.0)
    is_psd, lam_min = psd_check(np.diag([1.0, -1.0]), tol)
    assert not is_psd and lam_min == pytest.approx(-1.0)
    ok, _ = psd_check(octagon_finite_laplacian(), tol)
    assert ok


def test_psd_check_rejects_asymmetric(tol):
    with pytest.raises(AsymmetricInput):
        psd_check(np.array([[0.0, 1.0], [0.0, 0.0]]), tol)


def test_psd_check_conjugation_invariance(tol):
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(2, 6))
        a = rng.standard_normal((n, n))
        s = a + a.T
        q, _ = np.linalg.qr(rng.standard_normal((n, n)))
        assert psd_check(s, tol).is_psd == psd_check(q @ s @ q.T, tol).is_psd


@pytest.mark.parametrize(
    "rows,expected",
    [
        ([[1, 0], [0, 1]], 2),
        ([[1, 0], [1, 1], [-1, 1]], 2),
        ([[0, 0, 0]], 0),
        ([[2, 4], [1, 2]], 1),
    ],
)
def test_smith_rank_cases(rows, expected):
    assert smith_rank(np.array(rows, dtype=int)) == expected


def test_smith_rank_empty():
    assert smith_rank(np.zeros((0, 2), dtype=int)) == 0
    assert smith_rank(np.array([], dtype=int)) == 0


def test_smith_rank_rejects_floats():
    with pytest.raises(ValueError):
        smith_rank(np.array([[1.0, 2.0]]))


@settings(max_examples=1000, deadline=None)
@given(
    st.integers(1, 8),
    st.integers(1, 8),
    st.integers(0, 2**32 - 1),
)
def test_numeric_rank_agrees_with_smith_rank(rows, cols, seed):
    rng = np.random.default_rng(seed)
    m = rng.integers(-10, 11, size=(rows, cols))
    tol = ToleranceVault()
    assert numeric_rank(m.astype(float), tol).rank == smith_rank(m)
