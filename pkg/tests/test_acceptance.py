"""Acceptance criteria 1-14.

Each case registers its outcome through the ``record`` fixture; the terminal
summary prints one PASS/FAIL line per criterion.  Run alone with
``python3 tests/test_acceptance.py`` or ``pytest tests/test_acceptance.py``.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from lidskii_evolve.cli import main as cli_main
from lidskii_evolve.operators import (
    DiscretizedOperator,
    binomial_expansion_operator,
    composite_operator,
    diagonal_normal_operator,
    dirichlet_laplacian,
    example_one_sequence,
    fractional_difference_coefficients,
    from_matrix,
    gl_fractional_derivative,
    make_grid,
)
from lidskii_evolve.solver import (
    EvolutionProblem,
    contraction_probe,
    derivative_identity_check,
    fractional_residual,
    initial_condition_probe,
    relative_error,
    solve_contour,
    solve_oracle,
    solve_series,
)
from lidskii_evolve.spectral import (
    accretivity_check,
    bracket_eigenvalues,
    eigendecompose,
    estimate_convergence_exponent,
    estimate_order,
)

TIMES = [0.1, 0.5, 1.0]
CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def jordan4():
    j = np.diag([2.0, 2.0, 3.0, 5.0])
    j[0, 1] = 1.0
    s = np.eye(4) + 0.2 * np.random.default_rng(3).standard_normal((4, 4))
    return s @ j @ np.linalg.inv(s)


def hermitian_psd(n=16, seed=0):
    a = np.random.default_rng(seed).standard_normal((n, n))
    return a @ a.T + 0.1 * np.eye(n)


# -- 1. oracle equivalence -------------------------------------------------

@pytest.mark.parametrize("power", [1, 2])
def test_c01_oracle_equivalence(record, composite64, power):
    p = EvolutionProblem(composite64, "power", power, np.ones(64), TIMES)
    start = time.perf_counter()
    c = solve_contour(p)
    elapsed = time.perf_counter() - start
    err = relative_error(c, solve_oracle(p)).max()
    ok = err <= 1e-6 and elapsed < 10
    record(1, ok, f"n={power}: max rel err {err:.2e}, {elapsed:.2f} s")
    assert ok


# -- 2. series equals integral ---------------------------------------------

@pytest.mark.parametrize("power", [1, 2])
def test_c02_series_equals_contour(record, composite64, power):
    p = EvolutionProblem(composite64, "power", power, np.ones(64), TIMES)
    err = relative_error(solve_contour(p), solve_series(p)).max()
    record(2, err <= 1e-6, f"composite n={power}: {err:.2e}")
    assert err <= 1e-6


def test_c02_series_equals_contour_defective(record):
    p = EvolutionProblem(from_matrix(jordan4()), "power", 1, np.ones(4), TIMES)
    s = solve_series(p)
    err = relative_error(solve_contour(p), s).max()
    ok = err <= 1e-8 and s.diagnostics["cluster_count"] >= 1
    record(2, ok, f"4x4 Jordan: {err:.2e}")
    assert ok


# -- 3. closed-form diagonal -----------------------------------------------

def test_c03_closed_form_diagonal(record):
    op = diagonal_normal_operator(0.5, 0.5, 32)
    h = np.random.default_rng(1).standard_normal(32)
    p = EvolutionProblem(op, "power", 2, h, TIMES)
    c = solve_contour(p)
    lam2 = np.asarray(op.diagonal) ** 2
    exact = np.array([np.exp(-lam2 * t) * h for t in TIMES])
    err = max(np.linalg.norm(c.solution[i] - exact[i]) / np.linalg.norm(exact[i]) for i in range(3))
    record(3, err <= 1e-8, f"max rel err {err:.2e}")
    assert err <= 1e-8


# -- 4. contraction --------------------------------------------------------

CONTRACTION_CASES = {
    "hermitian_psd": (lambda: from_matrix(hermitian_psd()), 1),
    "composite_n1": (lambda: composite_operator(-1, 1, 0.5, make_grid(0, 1, 64)), 1),
    "composite_n2": (lambda: composite_operator(-1, 1, 0.5, make_grid(0, 1, 64)), 2),
    "normal_power2": (lambda: diagonal_normal_operator(0.5, 0.5, 32), 2),
}


@pytest.mark.parametrize("name", list(CONTRACTION_CASES))
def test_c04_contraction(record, name):
    build, power = CONTRACTION_CASES[name]
    op = build()
    assert accretivity_check(op, power)[0]
    rep = contraction_probe(op, power, 100, times=TIMES, seed=2)
    record(4, rep["passed"], f"{name}: max ratio {rep['max_ratio']:.12f}")
    assert rep["max_ratio"] <= 1 + 1e-10


# -- 5. initial condition --------------------------------------------------

def test_c05_initial_condition(record, composite64):
    h = np.sin(math.pi * composite64.grid.nodes)
    p = EvolutionProblem(composite64, "power", 1, h, [1.0])
    rep = initial_condition_probe(p, t_sequence=(1e-1, 1e-2, 1e-3, 1e-4))
    final = rep["table"][-1][1]
    ok = rep["decreasing"] and final <= 1e-2 * np.linalg.norm(h)
    record(5, ok, f"final gap {final / np.linalg.norm(h):.2e}*|h|")
    assert ok


# -- 6. eigenvalue asymptotics ---------------------------------------------

def test_c06_laplacian_asymptotics(record):
    m = -np.asarray(dirichlet_laplacian(make_grid(0, 1, 2000)).matrix)
    lam = np.linalg.eigvalsh(m)[:20]
    j = np.arange(1, 21)
    ratio = lam / (math.pi**2 * j**2)
    ok_ratio = bool(np.all((0.99 <= ratio) & (ratio <= 1.01)))
    record(6, ok_ratio, f"ratio in [{ratio.min():.4f}, {ratio.max():.4f}]")
    grid = make_grid(0, 1, 2000)
    mu = estimate_order(DiscretizedOperator("neg_laplacian", 2000, grid, {}, dense=m))
    record(6, 1.9 <= mu <= 2.1, f"mu_hat {mu:.3f}")
    assert ok_ratio and 1.9 <= mu <= 2.1


# -- 7. binomial identity --------------------------------------------------

@pytest.mark.parametrize("n, beta", [(2, 0.3), (3, 0.2)])
def test_c07_binomial_identity(record, n, beta):
    grid = make_grid(0, 1, 64)
    comp = np.asarray(composite_operator(-1, 1, beta, grid, "gl_toeplitz").matrix)
    power = np.linalg.matrix_power(comp, n)
    expanded = np.asarray(binomial_expansion_operator(n, beta, grid).matrix)
    rel = np.linalg.norm(expanded - power) / np.linalg.norm(power)
    record(7, rel <= 1e-10, f"(n, beta)=({n}, {beta}): {rel:.2e}")
    assert rel <= 1e-10


# -- 8. difference coefficients --------------------------------------------

@pytest.mark.parametrize("beta, c", [(0.3, 1.0), (0.5, 2.0), (0.9, 0.7)])
def test_c08_difference_coefficients(record, beta, c):
    k_max = 10_000
    coef = fractional_difference_coefficients(beta, c, k_max + 1)
    cb = c**beta
    exact = (coef[0] == cb and coef[1] == -beta * cb
             and math.isclose(coef[2], -beta * (1 - beta) * cb / 2, rel_tol=1e-15))
    partial = np.abs(np.cumsum(coef))[1:]
    ks = np.arange(1, k_max + 1)
    worst = float((partial * ks**beta).max())
    ok = exact and worst <= 2
    record(8, ok, f"beta={beta}, c={c}: first three exact={exact}, max |S_K| K^beta {worst:.3f}")
    assert ok


def test_c08_convolution_identity(record):
    b1, b2, c = 0.3, 0.5, 1.5
    a = fractional_difference_coefficients(b1, c, 256)
    b = fractional_difference_coefficients(b2, c, 256)
    target = fractional_difference_coefficients(b1 + b2, c, 256)
    err = np.abs(np.convolve(a, b)[:256] - target).max()
    record(8, err <= 1e-12, f"convolution max err {err:.2e}")
    assert err <= 1e-12


# -- 9. accretivity of D^beta ----------------------------------------------

@pytest.mark.parametrize("beta", [0.25, 0.5, 0.75])
def test_c09_gl_accretive(record, beta):
    m = np.asarray(gl_fractional_derivative(make_grid(0, 1, 256), beta).matrix)
    low = np.linalg.eigvalsh((m + m.conj().T) / 2)[0]
    record(9, low >= -1e-10, f"beta={beta}: min eig {low:.3e}")
    assert low >= -1e-10


# -- 10. normal-operator criterion -----------------------------------------

def test_c10_normal_criterion(record):
    inside = diagonal_normal_operator(0.5, 1.0, 1000, eta_ratio=0.99)
    outside = diagonal_normal_operator(0.5, 1.02, 1000, eta_ratio=1.01)
    ok_in, m_in = accretivity_check(inside, 2)
    ok_out, m_out = accretivity_check(outside, 2)
    record(10, ok_in and not ok_out, f"margins {m_in:.3g} (0.99), {m_out:.3g} (1.01)")
    assert ok_in and not ok_out


# -- 11. convergence exponent ----------------------------------------------

def test_c11_example_one_exponent(record):
    s = 1.0 / example_one_sequence(0.5, 100_000)
    rho = estimate_convergence_exponent(s)
    record(11, 1.8 <= rho <= 2.2, f"log-modified sequence rho_hat {rho:.3f}")
    assert 1.8 <= rho <= 2.2


def test_c11_power_law_control(record):
    s = np.arange(1, 100_001, dtype=float) ** -0.5
    rho = estimate_convergence_exponent(s)
    record(11, 1.95 <= rho <= 2.05, f"power law rho_hat {rho:.3f}")
    assert 1.95 <= rho <= 2.05


# -- 12. fractional identities ---------------------------------------------

@pytest.mark.parametrize("t", [0.2, 1.0])
def test_c12_fractional_composite(record, t):
    op = composite_operator(-1, 1, 0.5, make_grid(0, 1, 32))
    p = EvolutionProblem(op, "fractional", 3.0, np.ones(32), [t])
    res, der = fractional_residual(p, t=t), derivative_identity_check(p, t=t)
    ok = res <= 1e-5 and der <= 1e-5
    record(12, ok, f"t={t}: residual {res:.1e}, derivative {der:.1e}")
    assert ok


@pytest.mark.parametrize("w, alpha", [(2.0, 2.0), (3.0, 2.0), (1.5, 3.0)])
def test_c12_fractional_scalar(record, w, alpha):
    p = EvolutionProblem(from_matrix([[w]]), "fractional", alpha, [1.0], [1.0])
    res, der = fractional_residual(p, t=1.0), derivative_identity_check(p, t=1.0)
    ok = res <= 1e-8 and der <= 1e-8
    record(12, ok, f"scalar {w}, alpha {alpha}: {res:.1e}, {der:.1e}")
    assert ok


# -- 13. bracketing gap rule -----------------------------------------------

def _spectra():
    grid64 = make_grid(0, 1, 64)
    return {
        "composite64": composite_operator(-1, 1, 0.5, grid64),
        "composite32": composite_operator(-1, 1, 0.5, make_grid(0, 1, 32)),
        "laplacian": from_matrix(-np.asarray(dirichlet_laplacian(grid64).matrix)),
        "normal": diagonal_normal_operator(0.5, 0.5, 200),
        "jordan4": from_matrix(jordan4()),
        "hermitian": from_matrix(hermitian_psd()),
    }


@pytest.mark.parametrize("tau, gap", [(1.0, 1.0), (2.0, 0.5), (np.inf, 0.1)])
def test_c13_bracketing_gap_rule(record, tau, gap):
    worst = []
    for name, op in _spectra().items():
        sd = eigendecompose(op)
        br = bracket_eigenvalues(sd, tau, gap)
        mod = np.abs(sd.eigenvalues)
        expo = 1.0 if np.isinf(tau) else 1.0 - 1.0 / tau
        assert br.boundaries[0] == 0 and br.boundaries[-1] == mod.size
        for lo, hi in zip(br.boundaries[:-1], br.boundaries[1:]):
            for k in range(lo + 1, hi):
                if not mod[k] - mod[k - 1] <= gap * mod[k] ** expo:
                    worst.append(f"{name}@{k}")
    record(13, not worst, f"tau={tau}, C={gap}: violations {worst[:3] or 'none'}")
    assert not worst


# -- 14. CLI determinism ---------------------------------------------------

def test_c14_cli_determinism(record, tmp_path):
    blobs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert cli_main(["solve", "--config", str(CONFIGS / "composite64.json"), "--out", str(out),
                         "--seed", "11"]) == 0
        blobs.append((out / "solution.csv").read_bytes())
    same = blobs[0] == blobs[1]
    record(14, same, f"solution.csv identical ({len(blobs[0])} bytes)")
    assert same


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
