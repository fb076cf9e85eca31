"""Spectral analysis: eigen-systems, s-numbers, sector estimates and brackets.

The inner product is ``(x, y) = y^H x``, so the coefficient of ``h`` along
the right eigenvector ``e_q`` is ``(h, g_q) = g_q^H h`` with ``g_q`` the
biorthonormal left vector.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    EigensolveFailure,
    IndefiniteGram,
    NonPositiveDefinite,
    ParameterError,
    SingularOperator,
    TooFewValues,
)
from .operators import DiscretizedOperator, dirichlet_laplacian

__all__ = [
    "SpectralData",
    "SpectralDiagnostics",
    "Bracketing",
    "eigendecompose",
    "singular_values",
    "counting_function",
    "estimate_convergence_exponent",
    "estimate_order",
    "numerical_range_sector",
    "accretivity_check",
    "h2_constants",
    "bracket_eigenvalues",
    "counting_ratio_trend",
    "diagnose",
]


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Eigenvalues sorted by ``(|lambda|, arg lambda)`` with biorthonormal vectors.

    For diagonal operators ``right_vectors`` and ``left_vectors`` are ``None``
    and ``basis_index[q]`` names the coordinate axis carrying ``lambda_q``.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray | None
    left_vectors: np.ndarray | None
    cluster_of: np.ndarray
    condition_numbers: np.ndarray
    basis_index: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.eigenvalues.size

    def clusters(self) -> list[np.ndarray]:
        """Index arrays of each cluster, ordered by first member."""
        order = {}
        for q, c in enumerate(self.cluster_of):
            order.setdefault(int(c), []).append(q)
        return [np.array(v) for v in order.values()]

    def right(self, idx) -> np.ndarray:
        idx = np.atleast_1d(idx)
        if self.right_vectors is not None:
            return self.right_vectors[:, idx]
        out = np.zeros((self.size, idx.size), dtype=complex)
        out[self.basis_index[idx], np.arange(idx.size)] = 1.0
        return out

    def coefficients(self, h: np.ndarray) -> np.ndarray:
        """``(h, g_q)`` for every ``q``; ``h`` may carry extra trailing columns."""
        h = np.asarray(h, dtype=complex)
        if self.left_vectors is not None:
            return self.left_vectors.conj().T @ h
        return h[self.basis_index]


@dataclass(frozen=True)
class Bracketing:
    boundaries: tuple[int, ...]
    tau: float
    gap_constant: float

    def groups(self):
        b = self.boundaries
        return [range(b[i], b[i + 1]) for i in range(len(b) - 1)]


@dataclass(frozen=True)
class SpectralDiagnostics:
    s_numbers: np.ndarray
    rho_hat: float
    mu_hat: float
    sector_vertex: float
    sector_semi_angle: float
    accretive: dict = field(default_factory=dict)
    h2_constants: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        return {
            "s_numbers": [float(s) for s in self.s_numbers],
            "rho_hat": self.rho_hat,
            "mu_hat": self.mu_hat,
            "sector": {"vertex": self.sector_vertex, "semi_angle": self.sector_semi_angle},
            "accretive": self.accretive,
            "h2_constants": None if self.h2_constants is None else list(self.h2_constants),
        }


# -- eigen-systems ---------------------------------------------------------

def _sort_key(values: np.ndarray) -> np.ndarray:
    return np.lexsort((np.angle(values), np.abs(values)))


def _clusters(values: np.ndarray, tol: float) -> np.ndarray:
    """Transitive clusters of ``values`` (already sorted by modulus)."""
    n = values.size
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    mod = np.abs(values)
    scale = max(float(mod.max(initial=0.0)), 1.0) * 1e-300
    for i in range(n):
        j = i + 1
        while j < n and mod[j] - mod[i] <= tol * max(mod[j], scale):
            if abs(values[j] - values[i]) <= tol * max(mod[i], mod[j], scale):
                parent[find(j)] = find(i)
            j += 1
    roots = np.array([find(i) for i in range(n)])
    _, ids = np.unique(roots, return_inverse=True)
    # relabel in order of first appearance
    first = {}
    return np.array([first.setdefault(r, len(first)) for r in ids])


def eigendecompose(op: DiscretizedOperator, cluster_tol: float = 1e-6) -> SpectralData:
    """Eigenvalues, right vectors and biorthonormal left vectors of ``op``.

    Hermitian matrices go through ``eigh``.  Otherwise left vectors are
    normalized so ``(e_q, g_q) = 1``; inside a cluster the block
    ``V_c^H L_c`` is inverted (pseudo-inverted when singular, as for a
    Jordan block) so the cluster's projector is still reproduced.
    """
    if op.is_diagonal:
        d = np.asarray(op.diagonal)
        order = _sort_key(d)
        values = d[order]
        return SpectralData(values, None, None, _clusters(values, cluster_tol),
                            np.ones(values.size), basis_index=order)

    m = np.asarray(op.matrix)
    if not np.all(np.isfinite(m)):
        raise EigensolveFailure("matrix has non-finite entries")
    try:
        if np.linalg.norm(m - m.conj().T) <= 1e-14 * np.linalg.norm(m):
            w, v = np.linalg.eigh((m + m.conj().T) / 2)
            w = w.astype(complex)
            v = v.astype(complex)
            order = _sort_key(w)
            w, v = w[order], v[:, order]
            return SpectralData(w, v, v.copy(), _clusters(w, cluster_tol), np.ones(w.size))
        w, vl, vr = sla.eig(m, left=True, right=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolveFailure(str(exc)) from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(vr))):
        raise EigensolveFailure("eigensolver returned non-finite values")

    order = _sort_key(w)
    w, vl, vr = w[order], vl[:, order], vr[:, order]
    cluster_of = _clusters(w, cluster_tol)
    g = np.empty_like(vl)
    for c in np.unique(cluster_of):
        idx = np.flatnonzero(cluster_of == c)
        v_c, l_c = vr[:, idx], vl[:, idx]
        gram = v_c.conj().T @ l_c
        if idx.size == 1 and abs(gram[0, 0]) > 0:
            g[:, idx] = l_c / gram[0, 0]
        else:
            # pinv keeps defective blocks finite; cond numbers flag them
            if np.linalg.cond(gram) < 1e12:
                g[:, idx] = l_c @ np.linalg.inv(gram)
            else:
                g[:, idx] = l_c @ np.linalg.pinv(gram, rcond=1e-12)
    cond = np.linalg.norm(vr, axis=0) * np.linalg.norm(g, axis=0)
    for c in np.unique(cluster_of):
        idx = np.flatnonzero(cluster_of == c)
        if idx.size > 1:
            # a nearly singular basis of the cluster betrays a Jordan block
            cond[idx] = max(cond[idx].max(), np.linalg.cond(vr[:, idx]))
    return SpectralData(w, vr, g, cluster_of, cond)


def _is_hermitian(m: np.ndarray) -> bool:
    return bool(np.array_equal(m, m.conj().T))


def _norm2(m: np.ndarray) -> float:
    if _is_hermitian(m):
        return float(np.abs(np.linalg.eigvalsh(m)).max())
    return float(np.linalg.norm(m, 2))


def singular_values(op: DiscretizedOperator) -> np.ndarray:
    """s-numbers of ``op^{-1}``, in decreasing order."""
    if op.is_diagonal:
        mod = np.abs(np.asarray(op.diagonal))
        if np.any(mod == 0):
            raise SingularOperator("operator has a zero eigenvalue")
        return np.sort(1.0 / mod)[::-1]
    m = np.asarray(op.matrix)
    if _is_hermitian(m):
        s = np.sort(np.abs(np.linalg.eigvalsh(m)))[::-1]
    else:
        s = np.linalg.svd(m, compute_uv=False)
    if s[-1] <= s[0] * 1e-15 or s[-1] == 0:
        raise SingularOperator("operator is numerically singular")
    return np.sort(1.0 / s)[::-1]


def counting_function(s_numbers, r: float) -> int:
    """Number of inverse s-numbers of modulus below ``r``."""
    if not r > 0:
        raise ParameterError("r must be positive")
    s = np.asarray(s_numbers, dtype=float)
    return int(np.count_nonzero(1.0 / s < r))


def estimate_convergence_exponent(s_numbers, *, log_correction: bool = True) -> float:
    """Estimate the convergence exponent of the s-number sequence.

    Fits ``log n = rho * y + b * log y + c`` with ``y = log(1/s_n)`` over the
    tail half.  The ``log y`` column soaks up slowly varying factors such as
    ``ln n`` so that, e.g., ``s_n = (n ln n ln ln n)**(-1/2)`` gives a value
    near 2 at moderate lengths.  ``log_correction=False`` drops the extra
    column and returns the plain log-log slope.
    """
    s = np.sort(np.asarray(s_numbers, dtype=float))[::-1]
    if s.size < 32:
        raise TooFewValues(f"need at least 32 s-numbers, got {s.size}")
    n = np.arange(1, s.size + 1, dtype=float)
    tail = slice(s.size // 2, None)
    y = np.log(1.0 / s[tail])
    cols = [y, np.ones_like(y)]
    if log_correction:
        # keep the regressor finite if the tail straddles y = 1
        cols.insert(1, np.log(y) if y.min() >= 1 else np.log(y - y.min() + 1))
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), np.log(n[tail]), rcond=None)
    return float(coef[0])


def estimate_order(op_H: DiscretizedOperator, resolved_fraction: float | None = None) -> float:
    """Growth exponent ``mu`` in ``lambda_n(H) ~ C n**mu``.

    Only the resolved part of a discrete spectrum follows the continuum law
    (the top of a grid Laplacian's spectrum flattens out), so grid operators
    are fitted on their lowest 10% and abstract ones on everything; in both
    cases the log-log slope uses the tail half of that window.
    """
    if op_H.is_diagonal:
        d = np.asarray(op_H.diagonal)
        if np.any(np.abs(d.imag) > 1e-12 * np.abs(d).max()):
            raise NonPositiveDefinite("H must be selfadjoint")
        lam = np.sort(d.real)
    else:
        m = np.asarray(op_H.matrix)
        if np.linalg.norm(m - m.conj().T) > 1e-10 * np.linalg.norm(m):
            raise NonPositiveDefinite("H must be selfadjoint")
        lam = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if lam[0] <= 0:
        raise NonPositiveDefinite(f"H is not positive definite (min eigenvalue {lam[0]:.3g})")
    if resolved_fraction is None:
        resolved_fraction = 0.1 if op_H.grid is not None else 1.0
    window = lam[: max(int(lam.size * resolved_fraction), min(lam.size, 8))]
    n = np.arange(1, window.size + 1, dtype=float)
    tail = slice(window.size // 2, None)
    x, y = np.log(n[tail]), np.log(window[tail])
    if x.size < 2 or np.ptp(y) <= 1e-12:
        warnings.warn("degenerate spectrum, order fit set to 0", RuntimeWarning, stacklevel=2)
        return 0.0
    return float(np.polyfit(x, y, 1)[0])


def numerical_range_sector(op: DiscretizedOperator, n_samples: int = 200, seed: int = 0):
    """Sector ``|arg(z - vertex)| <= semi_angle`` enclosing sampled ``(Wf, f)``.

    Samples random complex unit vectors, eigenvectors and pairwise mixtures
    of the lowest eigenvectors, then widens the hull by 5%.
    """
    if n_samples < 100:
        raise ParameterError("n_samples must be at least 100")
    rng = np.random.default_rng(seed)
    n = op.dimension
    if op.is_diagonal:
        # (Wf, f) is a convex combination of the diagonal; sample the weights
        d = np.asarray(op.diagonal)
        weights = [rng.standard_normal(n) ** 2 + rng.standard_normal(n) ** 2 for _ in range(n_samples)]
        z = [d, np.array([w @ d / w.sum() for w in weights])]
    else:
        f = rng.standard_normal((n, n_samples)) + 1j * rng.standard_normal((n, n_samples))
        f /= np.linalg.norm(f, axis=0)
        m = np.asarray(op.matrix)
        z = [np.einsum("ij,ij->j", f.conj(), m @ f)]
        _, vecs = np.linalg.eigh(m) if _is_hermitian(m) else np.linalg.eig(m)
        vecs = vecs / np.linalg.norm(vecs, axis=0)
        z.append(np.einsum("ij,ij->j", vecs.conj(), m @ vecs))
        low = vecs[:, : min(n, 16)]
        k = low.shape[1]
        i, j = np.triu_indices(k, 1)
        mix = low[:, i] + low[:, j]
        norms = np.linalg.norm(mix, axis=0)
        keep = norms > 1e-8
        mix = mix[:, keep] / norms[keep]
        z.append(np.einsum("ij,ij->j", mix.conj(), m @ mix))
    z = np.concatenate(z)
    spread = np.ptp(z.real) + np.abs(z.imag).max()
    vertex = float(z.real.min() - 0.05 * spread)
    semi = float(np.abs(np.angle(z - vertex)).max()) * 1.05
    return vertex, min(semi, np.nextafter(np.pi / 2, 0))


def accretivity_check(op: DiscretizedOperator, power: int = 1, tol: float | None = None):
    """``(margin >= -tol, margin)`` with margin the least eigenvalue of ``Re(op**power)``.

    ``tol`` defaults to ``1e-12 * ||op**power||``.
    """
    if power < 1:
        raise ParameterError("power must be >= 1")
    if op.is_diagonal:
        d = np.asarray(op.diagonal) ** power
        margin = float(d.real.min())
        scale = float(np.abs(d).max())
    else:
        p = np.linalg.matrix_power(np.asarray(op.matrix), power)
        sym = np.linalg.eigvalsh((p + p.conj().T) / 2)
        margin = float(sym[0])
        scale = float(np.abs(sym).max()) if _is_hermitian(p) else _norm2(p)
    if tol is None:
        tol = 1e-12 * scale
    return margin >= -tol, margin


def h2_constants(op: DiscretizedOperator, gram_plus) -> tuple[float, float]:
    """Constants of the bounds ``|(Lf, g)| <= C1 |f|_+ |g|_+`` and ``Re(Lf, f) >= C2 |f|_+**2``."""
    g = np.asarray(getattr(gram_plus, "matrix", gram_plus))
    g = (g + g.conj().T) / 2
    try:
        r = np.linalg.cholesky(g).conj().T
    except np.linalg.LinAlgError as exc:
        raise IndefiniteGram("gram_plus is not positive definite") from exc
    m = np.asarray(op.matrix)
    r_inv = sla.solve_triangular(r, np.eye(r.shape[0]), lower=False)
    k = r_inv.conj().T @ m @ r_inv
    sym = (k + k.conj().T) / 2
    eig = np.linalg.eigvalsh(sym)
    c2 = float(eig[0])
    if np.linalg.norm(k - sym) <= 1e-13 * np.linalg.norm(k):
        # Hermitian up to rounding: the 2-norm is the largest |eigenvalue|
        c1 = float(np.abs(eig).max())
    else:
        c1 = float(np.linalg.norm(k, 2))
    return c1, c2


def bracket_eigenvalues(spectral: SpectralData, tau: float = 1.0, gap_constant: float = 1.0) -> Bracketing:
    """Greedy brackets obeying ``|l_k| - |l_{k-1}| <= C |l_k|**(1 - 1/tau)`` inside groups.

    ``tau = inf`` gives the exponent 1.  A boundary that would split a
    cluster is skipped.
    """
    if not tau > 0:
        raise ParameterError("tau must be positive")
    mod = np.abs(spectral.eigenvalues)
    expo = 1.0 if np.isinf(tau) else 1.0 - 1.0 / tau
    cl = spectral.cluster_of
    seen_after = {}
    for q in range(mod.size - 1, -1, -1):
        seen_after.setdefault(int(cl[q]), q)
    boundaries = [0]
    open_clusters_max = -1
    for k in range(1, mod.size):
        open_clusters_max = max(open_clusters_max, seen_after[int(cl[k - 1])])
        gap = mod[k] - mod[k - 1]
        if gap > gap_constant * mod[k] ** expo and open_clusters_max < k:
            boundaries.append(k)
    if mod.size:
        boundaries.append(int(mod.size))
    return Bracketing(tuple(boundaries), float(tau), float(gap_constant))


def counting_ratio_trend(s_numbers, rho: float, m: int = 1, n_radii: int = 8) -> list[dict]:
    """Samples of ``n_{A^{m+1}}(r^{m+1}) / r**rho`` on log-spaced radii.

    s-numbers of ``A^{m+1}`` are taken as ``s_i**(m+1)``, exact for normal
    ``A``; this is a trend report, not a test.
    """
    s = np.sort(np.asarray(s_numbers, dtype=float))[::-1]
    lo, hi = 1.0 / s[0], 1.0 / s[-1]
    out = []
    for r in np.geomspace(lo * 1.5, hi, n_radii):
        count = counting_function(s ** (m + 1), r ** (m + 1))
        out.append({"r": float(r), "ratio": float(count / r**rho)})
    return out


def _gram_for(op: DiscretizedOperator):
    if op.grid is not None:
        return -np.asarray(dirichlet_laplacian(op.grid).matrix)
    return np.eye(op.dimension)


def diagnose(op: DiscretizedOperator, powers=(1,), seed: int = 0, n_samples: int = 200) -> SpectralDiagnostics:
    """Run the standard battery of diagnostics on ``op``."""
    s = singular_values(op)
    # grid operators: only the low, resolved modes follow the continuum law
    fit = s if op.grid is None else s[: max(int(0.1 * s.size), min(s.size, 64))]
    rho = estimate_convergence_exponent(fit) if fit.size >= 32 else float("nan")
    if op.is_diagonal:
        h_op = DiscretizedOperator("real_part", op.dimension, op.grid, {},
                                   diagonal=np.asarray(op.diagonal).real)
    else:
        m = np.asarray(op.matrix)
        h_op = DiscretizedOperator("real_part", op.dimension, op.grid, {}, dense=(m + m.conj().T) / 2)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            mu = estimate_order(h_op)
    except NonPositiveDefinite:
        mu = float("nan")
    vertex, semi = numerical_range_sector(op, n_samples, seed)
    acc = {}
    for p in powers:
        ok, margin = accretivity_check(op, int(p))
        acc[str(int(p))] = {"accretive": bool(ok), "margin": margin}
    h2 = None
    if not op.is_diagonal:
        try:
            h2 = h2_constants(op, _gram_for(op))
        except IndefiniteGram:
            h2 = None
    return SpectralDiagnostics(s, rho, mu, vertex, semi, acc, h2)
