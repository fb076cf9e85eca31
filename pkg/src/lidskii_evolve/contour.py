"""Sector contours around a spectrum and their quadrature rules.

The contour is the boundary of the intersection of two sectors, one with
vertex 0 and semi-angle ``theta_zero + epsilon`` and one with vertex
``iota`` and semi-angle ``theta_iota + epsilon``, with the disk
``|lambda| < cut_radius`` removed.  It is traversed clockwise around the
spectrum: in along the lower ray, across the real axis, out along the upper
ray.  With that orientation

    (1 / 2 pi i) * integral of f(lambda) (W - lambda)^{-1} h d lambda

equals ``sum_q f(lambda_q) P_q h`` for the spectral projectors ``P_q``.

Only the upper half is stored; the lower half is its mirror image, so a
node ``lambda`` with weight ``w`` on the upper half pairs with the node
``conj(lambda)`` and weight ``-conj(w)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DecayViolation, GeometryDegenerate, ParameterError, ToleranceUnreachable

__all__ = [
    "Segment",
    "Contour",
    "QuadratureRule",
    "vertex_from_h2",
    "build_contour",
    "contour_for_spectrum",
    "contour_nodes",
    "validate_contour",
]

R_CAP = 1e6
GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


@dataclass(frozen=True)
class Segment:
    """One piece of the upper half: a ray ``origin + s e^{i angle}``, ``0 <= s <= length``,
    or an arc ``radius e^{i theta}``, ``theta_start <= theta <= theta_end``.
    """

    kind: str
    origin: complex = 0j
    angle: float = 0.0
    length: float = np.inf
    radius: float = 0.0
    theta_start: float = 0.0
    theta_end: float = 0.0

    @property
    def start(self) -> complex:
        if self.kind == "arc":
            return self.radius * np.exp(1j * self.theta_start)
        return self.origin

    @property
    def end(self) -> complex | None:
        if self.kind == "arc":
            return self.radius * np.exp(1j * self.theta_end)
        if np.isinf(self.length):
            return None
        return self.origin + self.length * np.exp(1j * self.angle)

    def to_dict(self) -> dict:
        def c(z):
            return None if z is None else [float(z.real), float(z.imag)]
        d = {"kind": self.kind, "start": c(self.start), "end": c(self.end)}
        if self.kind == "arc":
            d.update(radius=self.radius, theta_start=self.theta_start, theta_end=self.theta_end)
        else:
            d.update(angle=self.angle, length=None if np.isinf(self.length) else self.length)
        return d


@dataclass(frozen=True)
class Contour:
    vertex_iota: float
    theta_iota: float
    theta_zero: float
    epsilon: float
    cut_radius: float
    alpha: float
    upper: tuple[Segment, ...]
    orientation: str = "spectrum-enclosing-clockwise"

    @property
    def segments(self) -> tuple[Segment, ...]:
        """Both halves in traversal order; lower pieces are mirror images, reversed."""
        lower = []
        for seg in reversed(self.upper):
            if seg.kind == "arc":
                continue
            lower.append(Segment("ray", np.conj(seg.origin), -seg.angle, seg.length))
        arcs = [s for s in self.upper if s.kind == "arc"]
        middle = [Segment("arc", radius=a.radius, theta_start=-a.theta_end, theta_end=a.theta_end)
                  for a in arcs]
        rays = [s for s in self.upper if s.kind == "ray"]
        return tuple(lower + middle + rays)

    @property
    def unbounded_angle(self) -> float:
        """Largest argument met along the unbounded ray."""
        last = self.upper[-1]
        return max(last.angle, float(np.angle(last.origin)))

    def to_dict(self) -> dict:
        return {
            "vertex_iota": self.vertex_iota,
            "theta_iota": self.theta_iota,
            "theta_zero": self.theta_zero,
            "epsilon": self.epsilon,
            "cut_radius": self.cut_radius,
            "alpha": self.alpha,
            "orientation": self.orientation,
            "segments": [s.to_dict() for s in self.segments],
        }


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and ``d lambda`` weights for the whole contour (no ``1/(2 pi i)`` factor)."""

    nodes: np.ndarray
    weights: np.ndarray
    truncation_radius: float
    est_tail: float

    def to_dict(self) -> dict:
        return {"truncation_radius": self.truncation_radius, "est_tail": self.est_tail,
                "node_count": int(self.nodes.size)}


def vertex_from_h2(c1: float, c2: float, theta_iota: float) -> float:
    """Sector vertex ``C2 (1 - C1 cot(theta) / C2)`` built from the H2 constants."""
    return c2 * (1 - c1 / np.tan(theta_iota) / c2)


# -- geometry --------------------------------------------------------------

def _polyline(iota: float, phi0: float, phii: float) -> list[tuple[complex, float]]:
    """Upper boundary of the sector intersection as (origin, angle) legs."""
    t0, ti = np.tan(phi0), np.tan(phii)
    if iota <= 0:
        if phii >= phi0:
            return [(0j, phi0)]
        x = -iota * ti / (t0 - ti)
        return [(0j, phi0), (complex(x, x * t0), phii)]
    if phii <= phi0:
        return [(complex(iota), phii)]
    x = iota * ti / (ti - t0)
    return [(complex(iota), phii), (complex(x, x * t0), phi0)]


def _exit_disk(origin: complex, angle: float, r: float) -> float:
    """Arclength where ``origin + s e^{i angle}`` leaves ``|z| < r``."""
    d = np.exp(1j * angle)
    b = (origin * np.conj(d)).real
    return -b + np.sqrt(b * b - abs(origin) ** 2 + r * r)


def build_contour(
    sector_vertex: float,
    theta_iota: float,
    theta_zero: float,
    epsilon: float,
    cut_radius: float,
    alpha: float,
) -> Contour:
    """Assemble the sector contour.

    Raises
    ------
    DecayViolation
        If ``theta_zero + epsilon >= pi / (2 alpha)``, so ``Re lambda**alpha``
        would not grow along the rays.
    GeometryDegenerate
        If an angle is not in ``(0, pi/2)`` or the radius is not positive.
    """
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    phi0, phii = theta_zero + epsilon, theta_iota + epsilon
    if phi0 >= np.pi / (2 * alpha):
        raise DecayViolation(
            f"theta_zero + epsilon = {phi0:.6g} must stay below pi/(2 alpha) = {np.pi / (2 * alpha):.6g}"
        )
    if not (0 < phi0 < np.pi / 2 and 0 < phii < np.pi / 2):
        raise GeometryDegenerate("sector semi-angles plus epsilon must lie in (0, pi/2)")
    if not cut_radius > 0 or not np.isfinite(sector_vertex):
        raise GeometryDegenerate("cut_radius must be positive and the vertex finite")

    legs = _polyline(float(sector_vertex), phi0, phii)
    segs: list[Segment] = []
    if abs(legs[0][0]) >= cut_radius:
        for k, (o, a) in enumerate(legs):
            length = abs(legs[k + 1][0] - o) if k + 1 < len(legs) else np.inf
            segs.append(Segment("ray", o, a, length))
    else:
        # find the leg that leaves the disk
        for k, (o, a) in enumerate(legs):
            nxt = legs[k + 1][0] if k + 1 < len(legs) else None
            if nxt is not None and abs(nxt) < cut_radius:
                continue
            s = _exit_disk(o, a, cut_radius)
            q = o + s * np.exp(1j * a)
            segs.append(Segment("arc", radius=cut_radius, theta_start=0.0, theta_end=float(np.angle(q))))
            length = abs(nxt - q) if nxt is not None else np.inf
            segs.append(Segment("ray", q, a, length))
            for j in range(k + 1, len(legs)):
                o2, a2 = legs[j]
                l2 = abs(legs[j + 1][0] - o2) if j + 1 < len(legs) else np.inf
                segs.append(Segment("ray", o2, a2, l2))
            break
    return Contour(float(sector_vertex), float(theta_iota), float(theta_zero), float(epsilon),
                   float(cut_radius), float(alpha), tuple(segs))


def _max_arg_from(values: np.ndarray, point: float) -> float:
    return float(np.abs(np.angle(values - point)).max()) if values.size else 0.0


def contour_for_spectrum(
    eigenvalues,
    alpha: float,
    t_max: float = 1.0,
    *,
    theta_zero: float | None = None,
    theta_iota: float | None = None,
    epsilon: float | None = None,
    cut_radius: float | None = None,
    vertex: float | None = None,
    budget: float = np.log(1e6),
) -> Contour:
    """Pick contour parameters for a known spectrum.

    The vertex is pushed right toward the lowest eigenvalue as far as the
    amplification ``exp((min Re lambda**alpha - Re iota**alpha) t_max)`` stays
    under ``exp(budget)``; passing far to the left of the spectrum would
    drown the result in cancellation.  Any parameter given explicitly wins.
    """
    lam = np.asarray(eigenvalues, dtype=complex).ravel()
    if lam.size == 0:
        raise GeometryDegenerate("empty spectrum")
    half = np.pi / (2 * alpha)
    th0 = float(np.abs(np.angle(lam)).max()) if theta_zero is None else float(theta_zero)
    if th0 >= half:
        raise DecayViolation(f"spectrum reaches argument {th0:.6g} >= pi/(2 alpha) = {half:.6g}")
    mods = np.abs(lam)
    r = 0.5 * float(mods.min()) if cut_radius is None else float(cut_radius)

    if vertex is None:
        m = float((lam**alpha).real.min())
        iota_b = max(m - budget / t_max, 0.0) ** (1.0 / alpha)
        cap = float(lam.real.min()) - 1e-3 * float(mods.min())
        iota = min(max(iota_b, 0.5 * float(lam.real.min())), cap)
        allow = max(th0, 0.5 * half)
        if iota > 0 and _max_arg_from(lam, iota) > allow:
            lo, hi = 0.0, iota
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if _max_arg_from(lam, mid) > allow:
                    hi = mid
                else:
                    lo = mid
            iota = lo
    else:
        iota = float(vertex)
    thi = _max_arg_from(lam, iota) if theta_iota is None else float(theta_iota)
    if theta_zero is None and iota > 0:
        # a single ray from iota then bounds the region; avoids far crossings
        th0 = max(th0, thi)
    eps = 0.25 * (half - max(th0, thi)) if epsilon is None else float(epsilon)
    if eps <= 0:
        raise DecayViolation("no angular room left between the spectrum and pi/(2 alpha)")
    return build_contour(iota, thi, th0, eps, r, alpha)


# -- quadrature ------------------------------------------------------------

def _truncation(contour: Contour, t: float, alpha: float, tol: float, shift: float):
    phi = contour.unbounded_angle
    a = t * np.cos(alpha * phi)
    if a <= 0:
        raise DecayViolation("integrand does not decay along the unbounded ray")
    target = shift + np.log(1.0 / tol) / t
    radius = max((max(target, 0.0) * t / a) ** (1.0 / alpha), 1e-300)

    def tail(rad):
        return np.exp(-(a * rad**alpha - shift * t)) / (a * alpha * rad ** (alpha - 1))

    last = contour.upper[-1]
    radius = max(radius, abs(last.origin) * 1.01, contour.cut_radius * 1.01)
    while tail(radius) > tol and radius <= R_CAP:
        radius *= 1.1
    if radius > R_CAP:
        raise ToleranceUnreachable(f"truncation radius {radius:.3g} exceeds {R_CAP:.0e}")
    return radius, float(tail(radius))


def _panel_points(seg: Segment, lo: float, hi: float, s0: float):
    """Nodes and d lambda weights of one GL panel in the segment's own variable."""
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    x = mid + half * _GL_X
    if seg.kind == "arc":
        z = seg.radius * np.exp(1j * x)
        dz = 1j * z
    else:
        d = np.exp(1j * seg.angle)
        s = s0 * np.expm1(x)
        z = seg.origin + s * d
        dz = s0 * np.exp(x) * d
    return z, dz * half * _GL_W


def _point(seg: Segment, x: float, s0: float) -> complex:
    if seg.kind == "arc":
        return seg.radius * np.exp(1j * x)
    return seg.origin + s0 * np.expm1(x) * np.exp(1j * seg.angle)


def _min_pole_dist(poles: np.ndarray | None, a: complex, b: complex) -> float:
    if poles is None or poles.size == 0:
        return np.inf
    ab = b - a
    denom = abs(ab) ** 2
    tpar = np.clip(((poles - a) * np.conj(ab)).real / denom, 0, 1) if denom > 0 else 0.0
    return float(np.abs(poles - (a + tpar * ab)).min())


def contour_nodes(
    contour: Contour,
    t: float,
    alpha: float,
    tol: float = 1e-10,
    base_nodes_per_unit: int = 64,
    *,
    poles=None,
    shift: float = 0.0,
) -> QuadratureRule:
    """Composite Gauss-Legendre rule along the contour, truncated at radius ``R``.

    Rays are parametrized by ``u = log(1 + s/s0)`` so that panels grow with
    distance; arcs by angle.  Base panels have width
    ``GL_ORDER / base_nodes_per_unit`` and are bisected until each is no
    longer than half its distance to the nearest known pole.  ``R`` is the
    smallest radius where the analytic tail of ``exp(-(lambda**alpha - shift) t)``
    drops below ``tol``.
    """
    if not t > 0 or not tol > 0:
        raise ParameterError("need t > 0 and tol > 0")
    if base_nodes_per_unit < 1:
        raise ParameterError("base_nodes_per_unit must be positive")
    poles = None if poles is None else np.asarray(poles, dtype=complex).ravel()
    radius, est_tail = _truncation(contour, t, alpha, tol, shift)
    width = GL_ORDER / base_nodes_per_unit
    s0 = max(contour.cut_radius, abs(contour.vertex_iota), 1e-12) * 0.25

    zs, ws = [], []
    for seg in contour.upper:
        if seg.kind == "arc":
            lo, hi = seg.theta_start, seg.theta_end
        else:
            length = seg.length
            if np.isinf(length):
                d = np.exp(1j * seg.angle)
                b = (seg.origin * np.conj(d)).real
                length = -b + np.sqrt(max(b * b - abs(seg.origin) ** 2 + radius**2, 0.0))
            lo, hi = 0.0, float(np.log1p(length / s0))
        if hi <= lo:
            continue
        n_base = max(1, int(np.ceil((hi - lo) / width)))
        stack = [(lo + (hi - lo) * k / n_base, lo + (hi - lo) * (k + 1) / n_base, 0)
                 for k in range(n_base)][::-1]
        while stack:
            a, b, depth = stack.pop()
            pa, pb = _point(seg, a, s0), _point(seg, b, s0)
            half_len = 0.5 * abs(pb - pa)
            if depth < 50 and half_len > 0.5 * _min_pole_dist(poles, pa, pb):
                m = 0.5 * (a + b)
                stack.extend([(m, b, depth + 1), (a, m, depth + 1)])
                continue
            z, w = _panel_points(seg, a, b, s0)
            zs.append(z)
            ws.append(w)
    z = np.concatenate(zs)
    w = np.concatenate(ws)
    nodes = np.concatenate([np.conj(z), z])
    weights = np.concatenate([-np.conj(w), w])
    return QuadratureRule(nodes, weights, float(radius), est_tail)


# -- validation ------------------------------------------------------------

def _closed_polygon(contour: Contour, radius: float, per_unit: int = 4000) -> np.ndarray:
    pts = []
    for seg in contour.upper:
        if seg.kind == "arc":
            th = np.linspace(seg.theta_start, seg.theta_end, max(16, int(per_unit * (seg.theta_end - seg.theta_start))))
            pts.append(seg.radius * np.exp(1j * th))
        else:
            d = np.exp(1j * seg.angle)
            length = seg.length
            if np.isinf(length):
                b = (seg.origin * np.conj(d)).real
                length = -b + np.sqrt(max(b * b - abs(seg.origin) ** 2 + radius**2, 0.0))
            pts.append(seg.origin + np.linspace(0, length, 64) * d)
    upper = np.concatenate(pts)
    end_arg = float(np.angle(upper[-1]))
    close = radius * np.exp(1j * np.linspace(end_arg, -end_arg, 4000))
    lower = np.conj(upper[::-1])
    return np.concatenate([upper, close, lower])


def _distance_to_segment(seg: Segment, z: np.ndarray) -> np.ndarray:
    if seg.kind == "arc":
        th = np.clip(np.angle(z), seg.theta_start, seg.theta_end)
        nearest = seg.radius * np.exp(1j * th)
        out = np.abs(z - nearest)
        ends = np.minimum(np.abs(z - seg.start), np.abs(z - seg.end))
        return np.minimum(out, ends)
    d = np.exp(1j * seg.angle)
    s = np.clip(((z - seg.origin) * np.conj(d)).real, 0, seg.length)
    return np.abs(z - (seg.origin + s * d))


def validate_contour(contour: Contour, eigenvalues):
    """``(ok, min_distance)``: every eigenvalue has winding number -1 (enclosed clockwise)."""
    lam = np.asarray(eigenvalues, dtype=complex).ravel()
    if lam.size == 0:
        return True, float("inf")
    dist = np.full(lam.size, np.inf)
    for seg in contour.upper:
        dist = np.minimum(dist, _distance_to_segment(seg, lam))
        dist = np.minimum(dist, _distance_to_segment(seg, np.conj(lam)))
    radius = 2.0 * float(np.abs(lam).max()) + 2.0 * abs(contour.vertex_iota) + 4.0 * contour.cut_radius + 1.0
    poly = _closed_polygon(contour, radius)
    ratios = (np.roll(poly, -1)[None, :] - lam[:, None]) / (poly[None, :] - lam[:, None])
    winding = np.angle(ratios).sum(axis=1) / (2 * np.pi)
    scale = max(float(np.abs(lam).max()), 1.0)
    ok = bool(np.all(np.abs(winding + 1) < 0.5) and dist.min() > 1e-12 * scale)
    return ok, float(dist.min())
