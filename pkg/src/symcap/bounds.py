"""Gromov-width lower bounds for the ball-cylinder intersection family.

Three lower bounds for the capacity-t domain: the trivial ball of
capacity t^2, the inradius ball t/(1+sqrt(1-t^2)), and the optimized
two-parameter family value

    f(t) = sqrt(2 (1/t^2 - 1)(sqrt(1-t^2) - 1) + 1),

which satisfies t - 0.07 <= f(t) < t.  The module also carries the planar
area-feasibility checks behind the single-plane capacity (1+t)/2 and an
evaluator for the epsilon-family upper bound.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize, root

from . import bodies as bd
from .ehz import ehz_capacity
from .symcore import (gw_plane_normals, matrix_A_gw, matrix_Mt, matrix_S,
                      matrix_AL, random_symplectic_matrix)


def bound_f(t: float) -> float:
    """The optimized lower bound f(t); real on all of (0, 1)."""
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie strictly between 0 and 1")
    radicand = 2.0 * (1.0 / (t * t) - 1.0) * (np.sqrt(1.0 - t * t) - 1.0) + 1.0
    if radicand <= 0.0:
        raise ValueError("radicand vanished unexpectedly at t=%g" % t)
    return float(np.sqrt(radicand))


def bound_simple(t: float) -> float:
    """t^2: the round ball surviving both constraints without adjustment."""
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie strictly between 0 and 1")
    return t * t


def bound_inradius(t: float) -> float:
    """t/(1+sqrt(1-t^2)): the inradius ball of the ellipsoid factor."""
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie strictly between 0 and 1")
    return t / (1.0 + np.sqrt(1.0 - t * t))


def bound_simple_geometric(t: float) -> float:
    """bound_simple re-derived: the identity map against the cylinder."""
    return bd.largest_ball_in_cylinder(np.eye(4), bd.aw_cylinder_gw(t))


def bound_inradius_geometric(t: float) -> float:
    """bound_inradius re-derived: largest round ball in the ellipsoid."""
    return bd.largest_ball_in_ellipsoid(matrix_A_gw(t))


def _cylinder_plane_basis(cyl: bd.QuadCylinder) -> np.ndarray:
    """Orthonormal rows spanning the constrained plane of a rank-2 cylinder."""
    w, V = cyl.eigvals, cyl.eigvecs
    keep = w > 1e-10 * max(1.0, w[-1])
    if int(keep.sum()) != 2:
        raise ValueError("cylinder base plane is not two-dimensional")
    return V[:, keep].T


def _containment_radii(S: np.ndarray, cyl: bd.QuadCylinder):
    r_ball = 1.0 / float(np.linalg.svd(S, compute_uv=False)[0] ** 2)
    r_cyl = bd.largest_ball_in_cylinder(S, cyl)
    return r_ball, r_cyl


@dataclass
class EmbeddingSolution:
    """Optimal (d1, d2) with its containment radii and disc diagnostics."""

    t: float
    d1: float
    d2: float
    capacity: float
    r_ball: float
    r_cyl: float
    singular_values: tuple

    def to_json(self) -> dict:
        return {"t": self.t, "d1": self.d1, "d2": self.d2,
                "capacity": self.capacity, "r_ball": self.r_ball,
                "r_cyl": self.r_cyl,
                "singular_values": list(self.singular_values)}


def solve_embedding(t: float, cylinder: str = "gw") -> EmbeddingSolution:
    """Maximize the ball capacity fitting both constraints over (d1, d2).

    A coarse grid plus bounded quasi-Newton ascent of min(r_ball, r_cyl),
    polished by a root solve of the two equalization conditions: equal
    containment radii and a disc-shaped shadow on the cylinder base plane.
    cylinder="orbit" switches to the corner-frame realization of the same
    plane family.
    """
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie strictly between 0 and 1")
    if cylinder == "gw":
        cyl = bd.aw_cylinder_gw(t)
    elif cylinder == "orbit":
        cyl = bd.aw_cylinder_orbit(t)
    else:
        raise ValueError("cylinder must be 'gw' or 'orbit'")
    V = _cylinder_plane_basis(cyl)

    def value(x):
        d1, m = x
        S = matrix_S(d1, (1.0 + m) / d1)
        return min(_containment_radii(S, cyl))

    # multi-start grid
    d1_grid = np.geomspace(0.15, 6.0, 36)
    m_grid = np.linspace(0.0, 12.0, 48)
    vals = np.array([[value((d1, m)) for m in m_grid] for d1 in d1_grid])
    order = np.dstack(np.unravel_index(np.argsort(vals, axis=None)[::-1], vals.shape))[0]
    starts = [(d1_grid[i], m_grid[j]) for i, j in order[:4]]

    best_x, best_v = None, -np.inf
    for x0 in starts:
        res = minimize(lambda x: -value(x), x0, method="L-BFGS-B",
                       bounds=[(1e-3, 50.0), (0.0, 200.0)],
                       options={"maxiter": 500})
        if -res.fun > best_v:
            best_v, best_x = -res.fun, res.x

    polished = _polish_equalized(t, cyl, V, best_x)
    x = polished if polished is not None and value(polished) >= best_v - 1e-7 else best_x
    d1, m = float(x[0]), float(max(x[1], 0.0))
    d2 = (1.0 + m) / d1
    S = matrix_S(d1, d2)
    r_ball, r_cyl = _containment_radii(S, cyl)
    s = np.linalg.svd(V @ S, compute_uv=False)
    return EmbeddingSolution(t=t, d1=d1, d2=d2,
                             capacity=float(min(r_ball, r_cyl)),
                             r_ball=float(r_ball), r_cyl=float(r_cyl),
                             singular_values=(float(s[0]), float(s[1])))


def _disc_curve_point(t: float, e: float):
    """(d1, d2) on the disc-condition curve d2 - d1 = 2 sqrt(1-t^2) e / t
    with the coupling constraint e^2 = d1 d2 - 1; e = 0 gives the identity."""
    s = np.sqrt(1.0 - t * t)
    shift = s * e / t
    d1 = -shift + np.sqrt(shift * shift + 1.0 + e * e)
    return d1, d1 + 2.0 * shift


def _polish_equalized(t: float, cyl, V, x0):
    """Root of the two equalization conditions near a candidate optimum.

    Along the disc-condition curve of the gw cylinder the remaining
    condition r_ball = r_cyl is one-dimensional and bracketed by brentq;
    for other cylinders a two-dimensional quasi-Newton root is used.
    """
    from scipy.optimize import brentq

    def radii_gap_on_curve(e):
        d1, d2 = _disc_curve_point(t, e)
        S = matrix_S(d1, d2)
        r_ball, r_cyl_val = _containment_radii(S, cyl)
        return r_ball - r_cyl_val

    def disc_gap(x):
        d1, m = x
        S = matrix_S(d1, (1.0 + m) / d1)
        s = np.linalg.svd(V @ S, compute_uv=False)
        return s[0] - s[1]

    def radii_gap_raw(x):
        d1, m = x
        S = matrix_S(d1, max(1.0 + m, 1.0) / d1)
        r_ball, r_cyl_val = _containment_radii(S, cyl)
        return r_ball - r_cyl_val

    # 1D path: bracket the radii gap along the disc curve (it starts
    # positive at the identity, where r_ball = 1 > t^2 = r_cyl)
    e0 = np.sqrt(max(x0[1], 0.0))
    lo, hi = 0.0, max(2.0 * e0, 1.0)
    g_lo = radii_gap_on_curve(lo)
    g_hi = radii_gap_on_curve(hi)
    expand = 0
    while g_lo * g_hi > 0.0 and expand < 60:
        hi *= 1.7
        g_hi = radii_gap_on_curve(hi)
        expand += 1
    if g_lo * g_hi <= 0.0:
        e_star = brentq(radii_gap_on_curve, lo, hi, xtol=1e-15, rtol=1e-15)
        d1, d2 = _disc_curve_point(t, e_star)
        cand = np.array([d1, d1 * d2 - 1.0])
        if abs(disc_gap(cand)) < 1e-8:
            return cand
    # generic cylinder: solve both conditions together
    sol = root(lambda x: [radii_gap_raw(x), disc_gap(x)], x0,
               method="hybr", tol=1e-13)
    if sol.success:
        return sol.x
    return None


def linear_search(t: float, budget: int, seed: int = 0) -> dict:
    """Best min-containment value over random linear symplectic maps.

    The search is seeded with the optimum of the two-parameter family, so
    the returned best is at least bound_f(t) minus solver error; samples
    are random products of symplectic transvections and unitaries.
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    cyl = bd.aw_cylinder_gw(t)
    baseline_sol = solve_embedding(t)
    best = baseline_sol.capacity
    best_is_family = True
    exceed_count = 0
    max_seen = best
    rng = np.random.default_rng(seed)
    for _ in range(budget):
        S = random_symplectic_matrix(2, rng)
        val = min(_containment_radii(S, cyl))
        if val > max_seen:
            max_seen = val
        if val > best:
            best = val
            best_is_family = False
        if val > baseline_sol.capacity + 1e-4:
            exceed_count += 1
    return {"t": t, "budget": budget, "best": float(best),
            "family_value": baseline_sol.capacity,
            "best_is_family": best_is_family,
            "improvements_over_1e-4": exceed_count,
            "max_seen": float(max_seen)}


def projection_subspaces(t: float, n: int = 2) -> dict:
    """Bases of E (orthogonal to both plane normals), its symplectic
    orthogonal E^omega, and the Euclidean complement of the latter.

    Each entry lists spanning vectors of the non-complex factor; E and
    (E^omega)^perp additionally contain the first n-2 complex coordinate
    planes.
    """
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie strictly between 0 and 1")
    if n < 2:
        raise ValueError("n must be at least 2")
    s = np.sqrt(1.0 - t * t)
    dim = 2 * n

    def last4(a, b, c, d):
        v = np.zeros(dim)
        v[dim - 4:] = (a, b, c, d)
        return v

    E = [last4(t, 0.0, s, 0.0), last4(0.0, 1.0, 0.0, 0.0)]
    E_omega = [last4(0.0, -s, 0.0, t), last4(0.0, 0.0, 1.0, 0.0)]
    E_omega_perp = [last4(1.0, 0.0, 0.0, 0.0), last4(0.0, t, 0.0, s)]
    n1, n2 = gw_plane_normals(t, n)
    return {"E": E, "E_omega": E_omega, "E_omega_perp": E_omega_perp,
            "normals": (n1, n2), "complex_factor_dim": dim - 4}


def projected_slice(t: float, n: int = 2) -> dict:
    """Orthogonal projection of E cap B^{2n}(1) onto (E^omega)^perp.

    In the orthonormal basis of that subspace the image is the ellipsoid
    with semiaxes (1/sqrt(pi), ..., 1/sqrt(pi), t/sqrt(pi), t/sqrt(pi)),
    so the round ball of capacity t^2 fits inside.
    """
    sub = projection_subspaces(t, n)
    dim = 2 * n
    s = np.sqrt(1.0 - t * t)

    def ambient_point(lams):
        lams = np.asarray(lams, dtype=float)
        if lams.size != dim - 2:
            raise ValueError("expected %d parameters" % (dim - 2))
        out = np.zeros(dim)
        out[: dim - 4] = lams[: dim - 4]
        out[dim - 4] = lams[-2] * t
        out[dim - 3] = lams[-1] * t * t
        out[dim - 2] = 0.0
        out[dim - 1] = lams[-1] * t * s
        return out

    semiaxes = np.full(dim - 2, 1.0 / np.sqrt(np.pi))
    semiaxes[-2:] = t / np.sqrt(np.pi)
    return {"subspaces": sub, "ambient_point": ambient_point,
            "semiaxes": semiaxes, "contains_ball_capacity": t * t}


def area_exact_Sh(t: float, h: float, tol: float = 1e-8) -> float:
    """Area of S_h = R cap D(1-h) by adaptive quadrature.

    R is the region of the unit-area disc left of the right half-boundary
    of the inscribed ellipse with axes t/sqrt(pi) and 1/sqrt(pi).
    """
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie strictly between 0 and 1")
    if h < 0.0 or h > (1.0 + t) / 2.0 + 1e-12:
        raise ValueError("h out of range [0, (1+t)/2]")
    p = t / np.sqrt(np.pi)
    q = 1.0 / np.sqrt(np.pi)
    rho = np.sqrt(max(1.0 - h, 0.0) / np.pi)
    if rho == 0.0:
        return 0.0

    def width(y):
        inside_e = p * np.sqrt(max(1.0 - (y / q) ** 2, 0.0))
        inside_d = np.sqrt(max(rho * rho - y * y, 0.0))
        return min(inside_e, inside_d)

    pts = None
    if p < rho < q:
        ystar = q * np.sqrt((rho * rho - p * p) / (q * q - p * p))
        pts = [-ystar, ystar]
    right, _ = quad(width, -rho, rho, points=pts, epsabs=tol / 4, epsrel=0.0, limit=400)
    return 0.5 * (1.0 - h) + float(right)


def area_exact_Sh_sectors(t: float, h: float) -> float:
    """Closed-form oracle for area_exact_Sh via circular and elliptic sectors."""
    p = t / np.sqrt(np.pi)
    q = 1.0 / np.sqrt(np.pi)
    rho = np.sqrt(max(1.0 - h, 0.0) / np.pi)
    if rho <= p:
        right = 0.5 * np.pi * rho * rho
    elif rho >= q:
        right = 0.5 * np.pi * p * q
    else:
        cos_phi = np.sqrt((q * q - rho * rho) / (q * q - p * p))
        phi = np.arccos(np.clip(cos_phi, -1.0, 1.0))
        xs, ys = p * cos_phi, q * np.sin(phi)
        theta = np.arctan2(ys, xs)
        right = p * q * phi + rho * rho * (0.5 * np.pi - theta)
    return 0.5 * (1.0 - h) + right


def area_feasibility(t: float, h_grid, tol: float = 1e-8, strict: bool = False) -> list:
    """Disc area, printed lower bound, and exact area of S_h per grid value.

    Returns one row per h with the two comparison flags.  With strict=True
    an AssertionError is raised at the first failing row.
    """
    rows = []
    for h in h_grid:
        if h < -1e-12 or h > (1.0 + t) / 2.0 + 1e-12:
            raise ValueError("h=%g outside [0, (1+t)/2]" % h)
        h = float(min(max(h, 0.0), (1.0 + t) / 2.0))
        disc = (1.0 + t) / 2.0 - h
        lower = 0.5 * (1.0 - h) + 0.5 * t * np.sqrt(1.0 - h)
        exact = area_exact_Sh(t, h, tol)
        row = {"h": h, "disc_area": disc, "lower_bound": lower, "exact_area": exact,
               "disc_le_lower": disc <= lower + tol,
               "lower_le_exact": lower <= exact + tol,
               "disc_le_exact": disc <= exact + tol}
        if strict:
            assert row["disc_le_lower"], "disc area exceeds printed bound at h=%g" % h
            assert row["lower_le_exact"], "printed bound exceeds exact area at h=%g" % h
        rows.append(row)
    return rows


def smallest_support_width(M: np.ndarray) -> float:
    """lambda(M B^{2n}(1)): the smallest semi-axis of the ellipsoid image."""
    return bd.EllipsoidBody.from_linear_image(M).smallest_width()


def family_upper_bound(t: float, eps: float, L: float, N: int = 192,
                       restarts: int = 4, seed: int = 0) -> dict:
    """(1 + sqrt(2) eps L / lambda)^2 times the capacity of A^L M_t B^4(1).

    lambda is the smallest support value of the stretched ellipsoid over
    the unit sphere; the capacity factor is estimated with the dual-action
    minimizer and cross-checked against the normal-form oracle.
    """
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie strictly between 0 and 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if L <= 1.0:
        raise ValueError("L must exceed 1")
    M = matrix_AL(L) @ matrix_Mt(t)
    lam = smallest_support_width(M)
    body = bd.EllipsoidBody.from_linear_image(M)
    est = ehz_capacity(body, N=N, restarts=restarts, seed=seed)
    oracle = bd.ellipsoid_ehz_oracle(body)
    prefactor = (1.0 + np.sqrt(2.0) * eps * L / lam) ** 2
    return {"t": t, "eps": eps, "L": L, "lambda": lam,
            "capacity_estimate": est.capacity, "capacity_oracle": oracle,
            "prefactor": prefactor, "value": prefactor * est.capacity}


def schedule_family_upper_bound(t: float, delta: float, seed: int = 0,
                                L_grid=(2.0, 4.0, 8.0, 16.0)) -> dict:
    """Find (L, eps) with family_upper_bound value at most t + delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    for L in L_grid:
        M = matrix_AL(L) @ matrix_Mt(t)
        body = bd.EllipsoidBody.from_linear_image(M)
        cap = bd.ellipsoid_ehz_oracle(body)
        if cap >= t + 0.75 * delta:
            continue
        lam = smallest_support_width(M)
        # prefactor budget (1 + x)^2 cap <= t + delta, spent half-way to
        # leave room for optimizer error in the capacity estimate
        x = np.sqrt((t + delta) / cap) - 1.0
        eps = 0.5 * x * lam / (np.sqrt(2.0) * L)
        result = family_upper_bound(t, eps, L, seed=seed)
        if result["value"] <= t + delta:
            return result
    raise RuntimeError("no (L, eps) found below t + delta on the schedule grid")


@dataclass
class BoundTable:
    """Per-t rows of the three lower bounds and the upper bound t."""

    ts: np.ndarray
    simple: np.ndarray
    inradius: np.ndarray
    f: np.ndarray
    upper: np.ndarray

    @classmethod
    def on_grid(cls, ts) -> "BoundTable":
        ts = np.asarray(list(ts), dtype=float)
        if np.any((ts <= 0.0) | (ts >= 1.0)):
            raise ValueError("grid values must lie strictly between 0 and 1")
        return cls(ts=ts,
                   simple=np.array([bound_simple(t) for t in ts]),
                   inradius=np.array([bound_inradius(t) for t in ts]),
                   f=np.array([bound_f(t) for t in ts]),
                   upper=ts.copy())

    def rows(self):
        for i, t in enumerate(self.ts):
            yield (t, self.simple[i], self.inradius[i], self.f[i], self.upper[i])

    def to_csv(self) -> str:
        lines = ["t,bound_t2,bound_inradius,bound_f,upper_t"]
        for row in self.rows():
            lines.append(",".join(f"{x:.12g}" for x in row))
        return "\n".join(lines) + "\n"

    def to_svg(self, width: int = 640, height: int = 480) -> str:
        """Line chart with exactly four polylines (one per column)."""
        margin = 50.0
        w, hgt = float(width), float(height)

        def sx(t):
            return margin + t * (w - 2 * margin)

        def sy(v):
            return hgt - margin - v * (hgt - 2 * margin)

        curves = [("bound_t2", self.simple, "#1f77b4"),
                  ("bound_inradius", self.inradius, "#2ca02c"),
                  ("bound_f", self.f, "#d62728"),
                  ("upper_t", self.upper, "#7f7f7f")]
        parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
            f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
            f'<line x1="{margin}" y1="{hgt - margin}" x2="{w - margin}" y2="{hgt - margin}" stroke="black"/>',
            f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{hgt - margin}" stroke="black"/>',
        ]
        for name, vals, color in curves:
            pts = " ".join(f"{sx(t):.2f},{sy(v):.2f}" for t, v in zip(self.ts, vals))
            parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
            ix = int(0.82 * len(self.ts))
            parts.append(f'<text x="{sx(self.ts[ix]) + 4:.2f}" y="{sy(vals[ix]):.2f}" '
                         f'font-size="11" fill="{color}">{name}</text>')
        parts.append("</svg>")
        return "\n".join(parts) + "\n"
