"""Solution of ``du/dt = -W**n u`` and ``D_-^{1/alpha} u = W u`` with ``u(0) = h``.

Three independent evaluations are offered:

* ``solve_contour``: quadrature of ``(1/2 pi i) int exp(-lambda**k t) (W - lambda)^{-1} h``
  over a sector contour (``k = n`` or ``alpha``);
* ``solve_series``: the bracketed root-vector expansion, with clusters of
  close or defective eigenvalues handled by small circular contours;
* ``solve_oracle``: ``exp(-t W**n) h`` (integer powers only).

All results are stored scaled: ``values[i] = exp(c t_i) u(t_i)`` with
``c = min_q Re lambda_q**k`` and ``log_scale[i] = c t_i``.  This keeps
``exp(-lambda**k t)`` representable when ``lambda_1**k t`` runs into the
hundreds; ratios of solutions never need the unscaled numbers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.special import gamma

from .contour import Contour, QuadratureRule, contour_for_spectrum, contour_nodes, validate_contour
from .errors import (
    ClusterOverlap,
    ContourInvalid,
    ModeMismatch,
    ParameterError,
    PreconditionViolation,
    SingularResolvent,
    ToleranceUnreachable,
)
from .operators import DiscretizedOperator
from .spectral import Bracketing, SpectralData, accretivity_check, bracket_eigenvalues, eigendecompose

__all__ = [
    "EvolutionProblem",
    "SolutionResult",
    "solve_contour",
    "solve_series",
    "solve_oracle",
    "fractional_residual",
    "derivative_identity_check",
    "contraction_probe",
    "initial_condition_probe",
    "compare_methods",
    "relative_error",
]

CIRCLE_NODES = 32
SIMPLE_COND_LIMIT = 1e6


@dataclass(frozen=True, eq=False)
class EvolutionProblem:
    """Operator, mode and data of a Cauchy problem.

    ``mode`` is ``"power"`` (``exponent`` a positive integer ``n``) or
    ``"fractional"`` (``exponent`` a real ``alpha > 1``).  ``initial`` may
    hold several right-hand sides as columns.
    """

    operator: DiscretizedOperator
    mode: str
    exponent: float
    initial: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        if self.mode == "power":
            if int(self.exponent) != self.exponent or self.exponent < 1:
                raise ParameterError(f"power must be a positive integer, got {self.exponent}")
            object.__setattr__(self, "exponent", int(self.exponent))
        elif self.mode == "fractional":
            if not self.exponent > 1:
                raise ParameterError(f"alpha must exceed 1, got {self.exponent}")
            object.__setattr__(self, "exponent", float(self.exponent))
        else:
            raise ParameterError(f"unknown mode {self.mode!r}")
        h = np.array(self.initial, dtype=complex)
        if h.shape[0] != self.operator.dimension or h.ndim > 2:
            raise ParameterError("initial vector does not match the operator dimension")
        times = np.array(self.times, dtype=float).ravel()
        if times.size == 0:
            raise ParameterError("times must be non-empty")
        if np.any(times <= 0) or np.any(np.diff(times) <= 0):
            raise ParameterError("times must be positive and strictly increasing")
        h.setflags(write=False)
        times.setflags(write=False)
        object.__setattr__(self, "initial", h)
        object.__setattr__(self, "times", times)

    @property
    def kappa(self) -> float:
        return self.exponent


@dataclass(frozen=True, eq=False)
class SolutionResult:
    method: str
    times: np.ndarray
    values: np.ndarray
    log_scale: np.ndarray
    group_partial_norms: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def solution(self) -> np.ndarray:
        """Unscaled ``u(t_i)``; may underflow for stiff problems."""
        factor = np.exp(-self.log_scale).reshape((-1,) + (1,) * (self.values.ndim - 1))
        return self.values * factor


def relative_error(a: SolutionResult, b: SolutionResult) -> np.ndarray:
    """Per-time ``||u_a - u_b|| / ||u_b||`` computed on a common scale."""
    out = np.empty(a.times.size)
    for i in range(a.times.size):
        vb = b.values[i] * np.exp(a.log_scale[i] - b.log_scale[i])
        denom = np.linalg.norm(vb)
        diff = np.linalg.norm(a.values[i] - vb)
        out[i] = 0.0 if denom == 0 and diff == 0 else diff / denom
    return out


# -- helpers ---------------------------------------------------------------

def _spectrum(op: DiscretizedOperator, spectral: SpectralData | None = None) -> np.ndarray:
    if spectral is not None:
        return spectral.eigenvalues
    if op.is_diagonal:
        return np.asarray(op.diagonal)
    return np.linalg.eigvals(np.asarray(op.matrix))


def _shift(eigs: np.ndarray, kappa: float) -> float:
    return float(np.power(eigs.astype(complex), kappa).real.min())


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("LIDSKII_EVOLVE_THREADS", "1")))
    except ValueError:
        return 1


def _resolvent_solves(op: DiscretizedOperator, nodes: np.ndarray, h: np.ndarray) -> np.ndarray:
    """``X[j] = (W - nodes[j])^{-1} h`` for every node, assembled in node order."""
    h2 = h.reshape(h.shape[0], -1)
    if op.is_diagonal:
        d = np.asarray(op.diagonal)
        out = h2[None, :, :] / (d[None, :, None] - nodes[:, None, None])
        return out.reshape((nodes.size,) + h.shape)
    w = np.asarray(op.matrix)
    n = w.shape[0]
    eye = np.eye(n)
    chunk = max(1, min(256, 4_000_000 // (n * n)))
    starts = list(range(0, nodes.size, chunk))

    def work(s):
        z = nodes[s: s + chunk]
        mats = w[None, :, :] - z[:, None, None] * eye[None, :, :]
        return np.linalg.solve(mats, np.broadcast_to(h2, (z.size,) + h2.shape))

    threads = min(_threads(), len(starts))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    return np.concatenate(parts).reshape((nodes.size,) + h.shape)


def _check_nodes(nodes: np.ndarray, eigs: np.ndarray):
    if eigs.size == 0:
        return
    step = max(1, 2_000_000 // max(eigs.size, 1))
    for s in range(0, nodes.size, step):
        z = nodes[s: s + step]
        d = np.abs(z[:, None] - eigs[None, :]).min(axis=1)
        if np.any(d <= 1e-12 * np.maximum(np.abs(z), 1.0)):
            raise SingularResolvent("a quadrature node coincides with an eigenvalue")


def _quadrature_sum(rule: QuadratureRule, x: np.ndarray, factor: np.ndarray, times, kappa, shift):
    """Scaled ``(1/2 pi i) sum_j w_j f_j exp(-(z_j**k - c) t) X_j`` for every ``t``."""
    zk = np.power(rule.nodes, kappa) - shift
    out = []
    for t in times:
        coef = rule.weights * factor * np.exp(-zk * t) / (2j * np.pi)
        out.append(np.tensordot(coef, x, axes=(0, 0)))
    return np.array(out)


@dataclass
class _ContourRun:
    contour: Contour
    rule: QuadratureRule
    x: np.ndarray
    shift: float
    eigs: np.ndarray
    coarse: tuple | None


def _prepare(problem: EvolutionProblem, contour, tol, base_nodes_per_unit, spectral, t_min=None,
             t_max=None, with_coarse=True) -> _ContourRun:
    op, kappa = problem.operator, problem.kappa
    eigs = _spectrum(op, spectral)
    t_min = float(problem.times[0]) if t_min is None else t_min
    t_max = float(problem.times[-1]) if t_max is None else t_max
    if contour is None:
        contour = contour_for_spectrum(eigs, kappa, t_max)
    ok, dist = validate_contour(contour, eigs)
    if not ok:
        raise ContourInvalid(f"contour does not enclose the spectrum (min distance {dist:.3g})")
    shift = _shift(eigs, kappa)
    rule = contour_nodes(contour, t_min, kappa, tol, base_nodes_per_unit, poles=eigs, shift=shift)
    _check_nodes(rule.nodes, eigs)
    x = _resolvent_solves(op, rule.nodes, problem.initial)
    coarse = None
    if with_coarse:
        rule2 = contour_nodes(contour, t_min, kappa, tol, max(1, base_nodes_per_unit // 2),
                              poles=eigs, shift=shift)
        _check_nodes(rule2.nodes, eigs)
        coarse = (rule2, _resolvent_solves(op, rule2.nodes, problem.initial))
    return _ContourRun(contour, rule, x, shift, eigs, coarse)


def _roundoff(rule: QuadratureRule, x: np.ndarray, kappa, shift, t) -> float:
    zk = np.power(rule.nodes, kappa) - shift
    mag = np.abs(rule.weights * np.exp(-zk * t)) / (2 * np.pi)
    norms = np.linalg.norm(x.reshape(x.shape[0], -1), axis=1)
    return float(np.finfo(float).eps * np.sum(mag * norms))


def solve_contour(
    problem: EvolutionProblem,
    contour: Contour | None = None,
    tol: float = 1e-10,
    *,
    base_nodes_per_unit: int = 64,
    spectral: SpectralData | None = None,
    strict: bool = False,
    estimate_error: bool = True,
) -> SolutionResult:
    """Contour-quadrature solution at every time of ``problem``.

    The contour defaults to one fitted to the spectrum.  The error estimate
    compares against a rule with half as many base nodes and adds tail and
    roundoff bounds; with ``strict=True`` an estimate above ``tol`` (relative
    to the solution norm) raises ``ToleranceUnreachable``.
    """
    run = _prepare(problem, contour, tol, base_nodes_per_unit, spectral, with_coarse=estimate_error)
    kappa, times = problem.kappa, problem.times
    values = _quadrature_sum(run.rule, run.x, np.ones(run.rule.nodes.size), times, kappa, run.shift)
    errors = []
    if run.coarse is not None:
        rule2, x2 = run.coarse
        coarse = _quadrature_sum(rule2, x2, np.ones(rule2.nodes.size), times, kappa, run.shift)
        for i, t in enumerate(times):
            est = (np.linalg.norm(values[i] - coarse[i]) + _roundoff(run.rule, run.x, kappa, run.shift, t)
                   + run.rule.est_tail * np.linalg.norm(problem.initial))
            scale = np.linalg.norm(values[i])
            errors.append(float(est / scale) if scale > 0 else float(est))
        if strict and max(errors) > tol:
            raise ToleranceUnreachable(f"estimated relative error {max(errors):.3g} exceeds tol {tol:.3g}")
    diag = {
        "contour": run.contour.to_dict(),
        "quadrature": run.rule.to_dict(),
        "shift": run.shift,
        "error_estimate": errors,
    }
    return SolutionResult("contour", times, values, run.shift * times, None, diag)


# -- series ----------------------------------------------------------------

def _residue_groups(spectral: SpectralData) -> list[np.ndarray]:
    """Index sets evaluated together: clusters, merged until their circles separate."""
    lam = spectral.eigenvalues
    groups = [g for g in spectral.clusters()]
    simple_ok = spectral.condition_numbers <= SIMPLE_COND_LIMIT
    changed = True
    while changed:
        changed = False
        for gi, g in enumerate(groups):
            if g.size == 1 and simple_ok[g[0]]:
                continue
            center = lam[g].mean()
            spread = np.abs(lam[g] - center).max()
            others = np.setdiff1d(np.arange(lam.size), g)
            if others.size == 0:
                continue
            dist = np.abs(lam[others] - center)
            radius = min(0.5 * dist.min(), 0.5 * abs(center))
            if spread < 0.5 * radius:
                continue
            if spread >= 0.25 * abs(center):
                raise ClusterOverlap("eigenvalue cluster cannot be isolated from its neighbours")
            nearest = others[np.argmin(dist)]
            gj = next(j for j, other in enumerate(groups) if nearest in other)
            groups[gi] = np.sort(np.concatenate([g, groups[gj]]))
            del groups[gj]
            changed = True
            break
    return groups


def _cluster_term(op, lam_all, idx, h, kappa, shift, times):
    lam = lam_all[idx]
    center = lam.mean()
    others = np.setdiff1d(np.arange(lam_all.size), idx)
    radius = 0.5 * abs(center)
    if others.size:
        radius = min(radius, 0.5 * np.abs(lam_all[others] - center).min())
    z = center + radius * np.exp(2j * np.pi * np.arange(CIRCLE_NODES) / CIRCLE_NODES)
    x = _resolvent_solves(op, z, h)
    zk = np.power(z, kappa) - shift
    out = []
    for t in times:
        coef = -(z - center) * np.exp(-zk * t) / CIRCLE_NODES
        out.append(np.tensordot(coef, x, axes=(0, 0)))
    return np.array(out)


def solve_series(
    problem: EvolutionProblem,
    spectral: SpectralData | None = None,
    brackets: Bracketing | None = None,
) -> SolutionResult:
    """Bracketed root-vector expansion of the solution.

    Simple well-conditioned eigenvalues contribute ``exp(-lambda_q**k t) (h, g_q) e_q``;
    clusters contribute the residue of the resolvent integrand, evaluated by
    a 32-point trapezoid rule on a circle around the cluster.  A merged
    cluster is booked under the bracket of its first member.
    """
    op, kappa, times, h = problem.operator, problem.kappa, problem.times, problem.initial
    if spectral is None:
        spectral = eigendecompose(op)
    if brackets is None:
        brackets = bracket_eigenvalues(spectral)
    lam = spectral.eigenvalues
    shift = _shift(lam, kappa)
    bracket_of = np.empty(lam.size, dtype=int)
    for nu, grp in enumerate(brackets.groups()):
        bracket_of[list(grp)] = nu
    n_groups = len(brackets.groups())
    sums = np.zeros((n_groups, times.size) + h.shape, dtype=complex)

    groups = _residue_groups(spectral)
    simple = [g[0] for g in groups if g.size == 1 and spectral.condition_numbers[g[0]] <= SIMPLE_COND_LIMIT]
    if simple:
        simple = np.array(simple)
        coef = spectral.coefficients(h)[simple]
        vecs = spectral.right(simple)
        lk = np.power(lam[simple], kappa) - shift
        for i, t in enumerate(times):
            c = np.exp(-lk * t).reshape((-1,) + (1,) * (h.ndim - 1)) * coef
            terms = vecs[:, :, None] * c[None, :, ...] if h.ndim == 2 else vecs * c[None, :]
            # accumulate per bracket
            for nu in np.unique(bracket_of[simple]):
                sel = bracket_of[simple] == nu
                sums[nu, i] += terms[:, sel].sum(axis=1)
    for g in groups:
        if g.size == 1 and spectral.condition_numbers[g[0]] <= SIMPLE_COND_LIMIT:
            continue
        sums[bracket_of[g.min()]] += _cluster_term(op, lam, g, h, kappa, shift, times)

    values = sums.sum(axis=0)
    norms = np.array([[np.linalg.norm(sums[nu, i]) for nu in range(n_groups)] for i in range(times.size)])
    diag = {"shift": shift, "brackets": list(brackets.boundaries),
            "cluster_count": int(sum(1 for g in groups if g.size > 1)),
            "circle_count": int(sum(1 for g in groups
                                    if not (g.size == 1 and spectral.condition_numbers[g[0]] <= SIMPLE_COND_LIMIT)))}
    return SolutionResult("series", times, values, shift * times, norms, diag)


# -- oracle ----------------------------------------------------------------

def solve_oracle(problem: EvolutionProblem, *, method: str = "auto") -> SolutionResult:
    """``exp(-t (W**n - c)) h`` by scaling and squaring or by eigenvectors.

    ``method="auto"`` uses a well-conditioned eigenbasis when one exists
    (``cond(V) < 1e4``), which stays accurate for stiff powers where the
    scaling-and-squaring result loses relative precision, and falls back
    to ``scipy.linalg.expm`` otherwise.
    """
    if problem.mode != "power":
        raise ModeMismatch("no matrix-exponential oracle exists for fractional mode")
    op, n, times, h = problem.operator, problem.exponent, problem.times, problem.initial
    if op.is_diagonal:
        dn = np.asarray(op.diagonal) ** n
        shift = float(dn.real.min())
        vals = np.array([np.exp(-(dn - shift) * t).reshape((-1,) + (1,) * (h.ndim - 1)) * h for t in times])
        return SolutionResult("oracle", times, vals, shift * times, None, {"method": "diagonal"})
    w = np.asarray(op.matrix)
    lam, v = np.linalg.eig(w)
    shift = _shift(lam, n)
    use_eig = method == "eig" or (method == "auto" and np.linalg.cond(v) < 1e4)
    if method not in ("auto", "eig", "expm"):
        raise ParameterError(f"unknown oracle method {method!r}")
    vals = []
    if use_eig:
        y = np.linalg.solve(v, h)
        ln = lam**n - shift
        for t in times:
            vals.append(v @ (np.exp(-ln * t).reshape((-1,) + (1,) * (h.ndim - 1)) * y))
        tag = "eig"
    else:
        p = np.linalg.matrix_power(w, n) - shift * np.eye(w.shape[0])
        for t in times:
            vals.append(sla.expm(-t * p) @ h)
        tag = "expm"
    return SolutionResult("oracle", times, np.array(vals), shift * times, None, {"method": tag})


# -- fractional identities -------------------------------------------------

def _require_fractional(problem: EvolutionProblem):
    if problem.mode != "fractional":
        raise ModeMismatch("this check applies to fractional mode only")


def fractional_residual(problem: EvolutionProblem, contour: Contour | None = None, t: float | None = None,
                        tol: float = 1e-10, *, base_nodes_per_unit: int = 64) -> float:
    """Relative gap between ``D_-^{1/alpha} u(t)`` and ``W u(t)``.

    The left side uses the node factor ``lambda``; the right side multiplies
    the contour solution by the matrix.
    """
    _require_fractional(problem)
    t = float(problem.times[0]) if t is None else float(t)
    if not np.any(problem.initial):
        return 0.0
    run = _prepare(problem, contour, tol, base_nodes_per_unit, None, t_min=t,
                   t_max=max(t, float(problem.times[-1])), with_coarse=False)
    kappa = problem.kappa
    u = _quadrature_sum(run.rule, run.x, np.ones(run.rule.nodes.size), [t], kappa, run.shift)[0]
    lhs = _quadrature_sum(run.rule, run.x, run.rule.nodes, [t], kappa, run.shift)[0]
    rhs = problem.operator @ u
    denom = np.linalg.norm(rhs)
    return float(np.linalg.norm(lhs - rhs) / denom) if denom > 0 else 0.0


def derivative_identity_check(problem: EvolutionProblem, contour: Contour | None = None,
                              t: float | None = None, tol: float = 1e-10, *,
                              base_nodes_per_unit: int = 64) -> float:
    """Relative gap between ``D_-^{1-1/alpha} D_-^{1/alpha} u`` and ``-u'`` at ``t``.

    At each node the right-sided derivative of ``exp(-mu t)``, ``mu = lambda**alpha``,
    is assembled from the Gamma integral
    ``int_0^inf x**(-s) exp(-mu x) dx = Gamma(1 - s) mu**(s - 1)``, giving the
    factor ``lambda * mu**(1 - 1/alpha)``.  ``-u'`` is a five-point central
    difference of the contour solution in ``t``.
    """
    _require_fractional(problem)
    t = float(problem.times[0]) if t is None else float(t)
    if not np.any(problem.initial):
        return 0.0
    alpha = problem.kappa
    eigs = _spectrum(problem.operator)
    shift = _shift(eigs, alpha)
    step = 0.01 / max(abs(shift), 1.0 / t)
    grid = t + step * np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    run = _prepare(problem, contour, tol, base_nodes_per_unit, None, t_min=grid[0],
                   t_max=max(grid[-1], float(problem.times[-1])), with_coarse=False)
    z = run.rule.nodes
    mu = np.power(z, alpha)
    s = 1.0 - 1.0 / alpha
    # I^{1-s} exp(-mu x): int x^{-s} e^{-mu x} dx / Gamma(1-s) = mu^{s-1}; -d/dt brings mu
    integral = gamma_integral(s, mu) / gamma(1.0 - s)
    factor = z * integral * mu
    lhs = _quadrature_sum(run.rule, run.x, factor, [t], alpha, run.shift)[0]
    v = _quadrature_sum(run.rule, run.x, np.ones(z.size), grid, alpha, run.shift)
    # u = exp(-c t) v, so exp(c t) (-u') = c v - v'
    dv = (v[0] - 8 * v[1] + 8 * v[3] - v[4]) / (12 * step)
    rhs = run.shift * v[2] - dv
    denom = np.linalg.norm(rhs)
    return float(np.linalg.norm(lhs - rhs) / denom) if denom > 0 else 0.0


def gamma_integral(s: float, mu: np.ndarray) -> np.ndarray:
    """``int_0^inf x**(-s) exp(-mu x) dx = Gamma(1 - s) mu**(s - 1)`` for ``Re mu > 0``, ``s < 1``."""
    return gamma(1.0 - s) * np.power(mu, s - 1.0)


# -- probes ----------------------------------------------------------------

def contraction_probe(op: DiscretizedOperator, power: int = 1, n_samples: int = 100,
                      times=(0.1, 0.5, 1.0), seed: int = 0, tol: float = 1e-12) -> dict:
    """Largest ``||u(t)|| / ||h||`` over random unit initial vectors."""
    ok, margin = accretivity_check(op, power)
    if not ok:
        raise PreconditionViolation(f"W**{power} is not accretive (margin {margin:.3g})")
    rng = np.random.default_rng(seed)
    n = op.dimension
    h = rng.standard_normal((n, n_samples)) + 1j * rng.standard_normal((n, n_samples))
    h /= np.linalg.norm(h, axis=0)
    res = solve_contour(EvolutionProblem(op, "power", power, h, times), tol=tol, estimate_error=False)
    norms = np.linalg.norm(res.values, axis=1) * np.exp(-res.log_scale)[:, None]
    max_ratio = float(norms.max())
    monotone = bool(np.all(np.diff(norms, axis=0) <= 1e-12))
    return {"max_ratio": max_ratio, "passed": max_ratio <= 1 + 1e-10, "monotone": monotone,
            "margin": margin, "n_samples": n_samples, "times": [float(t) for t in times]}


def initial_condition_probe(problem: EvolutionProblem, contour: Contour | None = None,
                            t_sequence=(1e-1, 1e-2, 1e-3, 1e-4), tol: float = 1e-10) -> dict:
    """Table of ``||u(t) - h||`` for ``t`` decreasing toward 0."""
    ts = np.sort(np.asarray(t_sequence, dtype=float))
    sub = EvolutionProblem(problem.operator, problem.mode, problem.exponent, problem.initial, ts)
    res = solve_contour(sub, contour, tol, estimate_error=False)
    h = problem.initial
    gaps = np.array([np.linalg.norm(res.solution[i] - h) for i in range(ts.size)])
    order = np.argsort(-ts)
    table = [(float(ts[i]), float(gaps[i])) for i in order]
    if problem.mode == "power":
        whn = np.linalg.norm(np.linalg.matrix_power(np.asarray(problem.operator.matrix), problem.exponent) @ h)
    else:
        whn = np.linalg.norm(problem.operator @ h)
    bound = 10 * tol * np.linalg.norm(h) + 2 * ts[0] * whn
    decreasing = bool(np.all(np.diff([g for _, g in table]) < 0))
    return {"table": table, "bound": float(bound), "decreasing": decreasing,
            "passed": decreasing and table[-1][1] <= bound}


def compare_methods(problem: EvolutionProblem, contour: Contour | None = None,
                    spectral: SpectralData | None = None, brackets: Bracketing | None = None,
                    tol: float = 1e-10) -> dict:
    """Pairwise relative errors between the available methods, per time."""
    if spectral is None:
        spectral = eigendecompose(problem.operator)
    if brackets is None:
        brackets = bracket_eigenvalues(spectral)
    c = solve_contour(problem, contour, tol, spectral=spectral)
    s = solve_series(problem, spectral, brackets)
    out = {"times": problem.times.tolist(), "contour": c, "series": s,
           "contour_vs_series": relative_error(c, s).tolist()}
    if problem.mode == "power":
        o = solve_oracle(problem)
        out.update(oracle=o, contour_vs_oracle=relative_error(c, o).tolist(),
                   series_vs_oracle=relative_error(s, o).tolist())
    else:
        out.update(oracle=None, contour_vs_oracle=None, series_vs_oracle=None,
                   oracle_absent="fractional mode has no exponential oracle")
    return out
