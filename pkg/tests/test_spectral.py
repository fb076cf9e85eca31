import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lidskii_evolve import errors
from lidskii_evolve.operators import (
    DiscretizedOperator,
    diagonal_normal_operator,
    dirichlet_laplacian,
    from_matrix,
    make_grid,
)
from lidskii_evolve.spectral import (
    accretivity_check,
    bracket_eigenvalues,
    counting_function,
    counting_ratio_trend,
    diagnose,
    eigendecompose,
    estimate_convergence_exponent,
    estimate_order,
    h2_constants,
    numerical_range_sector,
    singular_values,
)


def diag_op(values):
    values = np.asarray(values, dtype=complex)
    return DiscretizedOperator("diagonal", values.size, None, {}, diagonal=values)


def random_nonnormal(seed, n=12):
    rng = np.random.default_rng(seed)
    lam = rng.uniform(1, 10, n) + 1j * rng.uniform(-2, 2, n)
    s = np.eye(n) + 0.3 * rng.standard_normal((n, n))
    return s @ np.diag(lam) @ np.linalg.inv(s)


# -- eigendecompose --------------------------------------------------------

def test_eigendecompose_diagonal_matrix():
    sd = eigendecompose(from_matrix(np.diag([2 + 1j, 1.0])))
    assert np.allclose(sd.eigenvalues, [1, 2 + 1j])
    e, g = sd.right_vectors, sd.left_vectors
    assert np.allclose(np.abs(e), [[0, 1], [1, 0]])
    assert np.allclose(g.conj().T @ e, np.eye(2))


def test_eigendecompose_diagonal_operator_uses_basis():
    sd = eigendecompose(diag_op([3, 1, 2]))
    assert np.allclose(sd.eigenvalues, [1, 2, 3])
    assert list(sd.basis_index) == [1, 2, 0]
    assert np.allclose(sd.right([0, 2]), [[0, 1], [1, 0], [0, 0]])
    assert np.allclose(sd.coefficients(np.array([10, 20, 30])), [20, 30, 10])


def test_jordan_block_forms_flagged_cluster():
    sd = eigendecompose(from_matrix([[1.0, 1.0], [0.0, 1.0]]))
    assert sd.cluster_of[0] == sd.cluster_of[1]
    assert sd.condition_numbers.min() > 1e6


def test_composite_spectrum_in_right_half_plane(composite64):
    sd = eigendecompose(composite64)
    assert np.all(sd.eigenvalues.real > 0)
    assert np.all(np.diff(np.abs(sd.eigenvalues)) >= 0)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_biorthogonality_and_resolution_of_identity(seed):
    m = random_nonnormal(seed)
    sd = eigendecompose(from_matrix(m))
    gram = sd.left_vectors.conj().T @ sd.right_vectors
    assert np.abs(gram - np.eye(m.shape[0])).max() <= 1e-8
    ident = sd.right_vectors @ sd.left_vectors.conj().T
    assert np.linalg.norm(ident - np.eye(m.shape[0])) <= 1e-6 * math.sqrt(m.shape[0])


def test_hermitian_path(rng):
    a = rng.standard_normal((8, 8))
    sd = eigendecompose(from_matrix(a + a.T))
    assert np.allclose(sd.left_vectors, sd.right_vectors)
    assert np.allclose(sd.condition_numbers, 1)


def test_repeated_eigenvalue_clusters_merge():
    sd = eigendecompose(diag_op([1.0, 1.0 + 1e-9, 1.0 + 2e-9, 4.0]))
    assert len(set(sd.cluster_of[:3])) == 1
    assert sd.cluster_of[3] != sd.cluster_of[0]


# -- s-numbers and counting function ---------------------------------------

def test_singular_values_diagonal():
    assert np.allclose(singular_values(from_matrix(np.diag([2.0, 4.0]))), [0.5, 0.25])
    assert np.allclose(singular_values(diag_op([4.0, 2.0])), [0.5, 0.25])


def test_singular_values_unitary(rng):
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    assert np.allclose(singular_values(from_matrix(q)), 1)


def test_singular_values_laplacian():
    s = singular_values(from_matrix(-np.asarray(dirichlet_laplacian(make_grid(0, 1, 512)).matrix)))
    j = np.arange(1, 6)
    assert np.allclose(s[:5] * math.pi**2 * j**2, 1, rtol=0.02)


def test_singular_operator():
    with pytest.raises(errors.SingularOperator):
        singular_values(from_matrix(np.diag([1.0, 0.0])))


def test_counting_function_examples():
    assert counting_function([1, 0.5, 0.25], 3) == 2
    assert counting_function([1, 0.5, 0.25], 1) == 0
    s = 1.0 / np.arange(1, 50) ** 2
    # 1/s_j = j^2 < 100 holds for j <= 9
    assert counting_function(s, 100) == 9


@given(st.lists(st.floats(1e-6, 1.0), min_size=1, max_size=40), st.floats(0.5, 1e6), st.floats(0.5, 1e6))
def test_counting_function_monotone(s, r1, r2):
    lo, hi = sorted((r1, r2))
    assert counting_function(s, lo) <= counting_function(s, hi)
    s_sorted = sorted(s, reverse=True)
    k = len(s_sorted)
    assert counting_function(s, 1 / s_sorted[-1] * (1 + 1e-9)) >= k


# -- exponents -------------------------------------------------------------

@pytest.mark.parametrize("power, rho", [(0.5, 2.0), (2.0, 0.5), (1.0, 1.0)])
def test_convergence_exponent_power_laws(power, rho):
    s = np.arange(1, 2001, dtype=float) ** -power
    assert estimate_convergence_exponent(s) == pytest.approx(rho, abs=0.05)
    assert estimate_convergence_exponent(s, log_correction=False) == pytest.approx(rho, abs=0.05)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.3, 3.0))
def test_convergence_exponent_ignores_index_shift(power):
    s = np.arange(1, 20_001, dtype=float) ** -power
    assert abs(estimate_convergence_exponent(s) - estimate_convergence_exponent(s[10:])) < 0.05


def test_convergence_exponent_needs_data():
    with pytest.raises(errors.TooFewValues):
        estimate_convergence_exponent(np.ones(31))


def test_order_of_laplacian():
    g = make_grid(0, 1, 2000)
    h = DiscretizedOperator("neg_laplacian", 2000, g, {}, dense=-np.asarray(dirichlet_laplacian(g).matrix))
    assert estimate_order(h) == pytest.approx(2.0, abs=0.1)


def test_order_of_identity_is_flagged():
    with pytest.warns(RuntimeWarning):
        assert estimate_order(from_matrix(np.eye(10))) == 0.0


def test_order_of_quartic_sequence():
    assert estimate_order(diag_op(np.arange(1, 301, dtype=float) ** 4)) == pytest.approx(4.0, abs=0.1)


def test_order_requires_positive_definite():
    with pytest.raises(errors.NonPositiveDefinite):
        estimate_order(from_matrix(np.diag([1.0, -1.0])))


# -- sector, accretivity, H2 -----------------------------------------------

def test_sector_of_real_diagonal():
    vertex, semi = numerical_range_sector(from_matrix(np.diag([1.0, 2.0])), 200, 0)
    assert vertex <= 1 and vertex == pytest.approx(1.0, abs=0.1)
    assert semi <= 1e-10


def test_sector_of_complex_diagonal():
    vertex, semi = numerical_range_sector(from_matrix(np.diag([1.0, 1 + 1j])), 200, 1)
    assert vertex <= 1
    assert semi >= math.atan(1.0) * 0.95


def test_sector_contains_eigenvalues(composite64):
    vertex, semi = numerical_range_sector(composite64, 150, 2)
    lam = np.linalg.eigvals(np.asarray(composite64.matrix))
    assert np.all(np.abs(np.angle(lam - vertex)) <= semi)
    assert 0 <= semi < math.pi / 2


def test_sector_needs_samples():
    with pytest.raises(errors.ParameterError):
        numerical_range_sector(from_matrix(np.eye(2)), 50)


def test_sector_is_reproducible(composite64):
    assert numerical_range_sector(composite64, 120, 7) == numerical_range_sector(composite64, 120, 7)


def test_accretivity_hermitian_psd(rng):
    a = rng.standard_normal((7, 7))
    for p in (1, 2, 3):
        assert accretivity_check(from_matrix(a @ a.T + 0.1 * np.eye(7)), p)[0]


@pytest.mark.parametrize("m, ratio, expected", [(1.0, 0.5, True), (2.0, 1.5, False)])
def test_accretivity_of_squared_normal_operator(m, ratio, expected):
    op = diagonal_normal_operator(0.5, m, 64, "alternating", eta_ratio=ratio)
    ok, margin = accretivity_check(op, 2)
    assert ok is expected
    mu = np.asarray(op.diagonal).real
    assert margin == pytest.approx(((1 - ratio**2) * mu**2).min(), rel=1e-12)


def test_h2_identity_and_scaling(rng):
    a = rng.standard_normal((6, 6))
    gram = a @ a.T + np.eye(6)
    assert h2_constants(from_matrix(gram), gram) == pytest.approx((1.0, 1.0))
    assert h2_constants(from_matrix(2 * gram), gram)[1] == pytest.approx(2.0)


def test_h2_composite_positive(composite64, grid64):
    gram = -np.asarray(dirichlet_laplacian(grid64).matrix)
    c1, c2 = h2_constants(composite64, gram)
    assert c2 > 0 and c1 >= c2


def test_h2_rejects_indefinite_gram():
    with pytest.raises(errors.IndefiniteGram):
        h2_constants(from_matrix(np.eye(2)), np.diag([1.0, -1.0]))


# -- brackets --------------------------------------------------------------

def test_brackets_hand_example():
    b = bracket_eigenvalues(eigendecompose(diag_op([1, 1.05, 5, 5.1, 20])), tau=1, gap_constant=1)
    assert b.boundaries == (0, 2, 4, 5)


def test_brackets_equal_moduli_single_group():
    vals = np.exp(1j * np.linspace(-1, 1, 7)) * 3
    assert bracket_eigenvalues(eigendecompose(diag_op(vals))).boundaries == (0, 7)


def test_brackets_tau_infinite_geometric():
    vals = 1.5 ** np.arange(10)
    b = bracket_eigenvalues(eigendecompose(diag_op(vals)), tau=np.inf, gap_constant=1)
    assert b.boundaries == (0, 10)


def test_brackets_never_split_jordan_cluster():
    m = np.array([[1.0, 1.0, 0], [0, 1.0, 0], [0, 0, 50.0]])
    sd = eigendecompose(from_matrix(m))
    b = bracket_eigenvalues(sd, tau=1, gap_constant=1e-12)
    assert 1 not in b.boundaries


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.1, 1e4), min_size=1, max_size=60), st.floats(0.2, 5), st.floats(0.01, 3))
def test_brackets_gap_rule_holds_inside_groups(moduli, tau, c):
    sd = eigendecompose(diag_op(moduli))
    b = bracket_eigenvalues(sd, tau, c)
    mod = np.abs(sd.eigenvalues)
    assert b.boundaries[0] == 0 and b.boundaries[-1] == mod.size
    assert all(x < y for x, y in zip(b.boundaries, b.boundaries[1:]))
    for grp in b.groups():
        for k in list(grp)[1:]:
            assert mod[k] - mod[k - 1] <= c * mod[k] ** (1 - 1 / tau)


# -- report helpers --------------------------------------------------------

def test_counting_ratio_trend_is_reported():
    s = 1.0 / np.arange(1, 200) ** 0.5
    trend = counting_ratio_trend(s, 2.0)
    assert len(trend) == 8 and all(t["ratio"] >= 0 for t in trend)


def test_diagnose_composite(composite64):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        d = diagnose(composite64, powers=(1, 2))
    data = d.to_dict()
    assert set(data) >= {"s_numbers", "rho_hat", "mu_hat", "sector", "accretive", "h2_constants"}
    assert data["accretive"]["1"]["accretive"]
    assert np.all(np.diff(d.s_numbers) <= 0) and np.all(d.s_numbers > 0)
    assert d.rho_hat > 0
