"""Closed characteristics on the boundary of B^4(1) intersected with a
round cylinder A^{-1} W^4 over a Kahler-angle-t plane.

The boundary splits into a sphere part S1, a cylinder part S2, and the
corner stratum S1 cap S2.  Characteristics rotate rigidly on each stratum,
so arcs are advanced in closed form and integration reduces to locating
corner events.  Action is accounted per arc as tau/2pi on S1 and
(theta/2pi) t on S2; both strata split omega-orthogonally, so the arc
formula agrees with the line integral exactly.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .symcore import apply_J

S1 = "S1"
S2 = "S2"
CORNER = "CORNER"
CORNER_GLIDE = "CORNER_GLIDE"

PLUS = "PLUS"
MINUS = "MINUS"


class OffBoundaryError(ValueError):
    """Point is not on the boundary of the intersection body."""


@dataclass(frozen=True)
class OrbitFrame:
    """Orthonormal frame (v1, v2, n1, n2) adapted to the corner geometry.

    v1, v2 span the base plane of the cylinder (omega restricted to it has
    angle t), n1, n2 complete them to an orthonormal basis of R^4.
    """

    t: float
    v1: np.ndarray
    v2: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    jv1: np.ndarray = field(init=False)
    jv2: np.ndarray = field(init=False)
    jn1: np.ndarray = field(init=False)
    jn2: np.ndarray = field(init=False)

    def __post_init__(self):
        B = np.column_stack([self.v1, self.v2, self.n1, self.n2])
        if np.max(np.abs(B.T @ B - np.eye(4))) > 1e-10:
            raise ValueError("frame vectors must be orthonormal")
        object.__setattr__(self, "jv1", apply_J(self.v1))
        object.__setattr__(self, "jv2", apply_J(self.v2))
        object.__setattr__(self, "jn1", apply_J(self.n1))
        object.__setattr__(self, "jn2", apply_J(self.n2))
        if abs(float(self.v2 @ self.jv1) - self.t) > 1e-10:
            raise ValueError("frame does not satisfy <v2, J v1> = t")
        if abs(float(self.v1 @ self.jv2) + self.t) > 1e-10:
            raise ValueError("frame does not satisfy <v1, J v2> = -t")

    @classmethod
    def standard(cls, t: float) -> "OrbitFrame":
        if not 0.0 < t < 1.0:
            raise ValueError("t must lie strictly between 0 and 1")
        sp = np.sqrt(1.0 + t)
        sm = np.sqrt(1.0 - t)
        v1 = np.array([sp, 0.0, sm, 0.0]) / np.sqrt(2.0)
        v2 = np.array([0.0, sp, 0.0, -sm]) / np.sqrt(2.0)
        n1 = np.array([0.0, sm, 0.0, sp]) / np.sqrt(2.0)
        n2 = np.array([-sm, 0.0, sp, 0.0]) / np.sqrt(2.0)
        return cls(t, v1, v2, n1, n2)

    def frame_coords(self, p: np.ndarray) -> np.ndarray:
        """Components (x1, x2, x3, x4) of p in the basis (Jn1, Jn2, Jv1, Jv2)."""
        p = np.asarray(p, dtype=float)
        return np.array([p @ self.jn1, p @ self.jn2, p @ self.jv1, p @ self.jv2])

    def from_frame_coords(self, x: np.ndarray) -> np.ndarray:
        return x[0] * self.jn1 + x[1] * self.jn2 + x[2] * self.jv1 + x[3] * self.jv2

    def oblique_coords(self, p: np.ndarray) -> np.ndarray:
        """Coefficients (a1, a2, a3, a4) with p = a1 v1 + a2 v2 + a3 Jn1 + a4 Jn2."""
        x = self.frame_coords(p)
        k = np.sqrt(1.0 - self.t ** 2) / self.t
        return np.array([-x[3] / self.t, x[2] / self.t,
                         x[0] - k * x[3], x[1] + k * x[2]])

    def from_oblique_coords(self, a: np.ndarray) -> np.ndarray:
        return a[0] * self.v1 + a[1] * self.v2 + a[2] * self.jn1 + a[3] * self.jn2

    def cylinder_form(self, p: np.ndarray) -> float:
        """<p, Jv1>^2 + <p, Jv2>^2, at most t^2/pi inside the cylinder."""
        return float((p @ self.jv1) ** 2 + (p @ self.jv2) ** 2)


def classify_boundary_point(p, frame: OrbitFrame, tol: float = 1e-9) -> str:
    """S1 / S2 / CORNER classification of a boundary point."""
    p = np.asarray(p, dtype=float)
    t = frame.t
    sphere_res = np.pi * float(p @ p) - 1.0
    cyl_res = np.pi * frame.cylinder_form(p) - t * t
    # tolerances are relative to each constraint level (1 and t^2)
    on_sphere = abs(sphere_res) <= tol
    on_cyl = abs(cyl_res) <= tol * t * t
    if on_sphere and on_cyl:
        return CORNER
    if on_sphere and cyl_res < 0:
        return S1
    if on_cyl and sphere_res < 0:
        return S2
    raise OffBoundaryError(
        "point is not on the boundary: sphere residual %.3e, cylinder residual %.3e"
        % (sphere_res, cyl_res))


def cylinder_normal(p, frame: OrbitFrame) -> np.ndarray:
    """Outer normal <p,Jv1> Jv1 + <p,Jv2> Jv2 of the cylinder at p."""
    p = np.asarray(p, dtype=float)
    return (p @ frame.jv1) * frame.jv1 + (p @ frame.jv2) * frame.jv2


def characteristic_direction(p, frame: OrbitFrame, tol: float = 1e-9):
    """Characteristic direction at a boundary point.

    Returns a single vector on the open strata (J p on S1, J n_W(p) on S2)
    and the pair of extreme cone generators at a corner.
    """
    p = np.asarray(p, dtype=float)
    region = classify_boundary_point(p, frame, tol)
    if region == S1:
        return apply_J(p)
    if region == S2:
        return apply_J(cylinder_normal(p, frame))
    return apply_J(p), apply_J(cylinder_normal(p, frame))


def s1_flow(p, theta):
    """Hopf rotation e^{J theta} p; theta may be an array."""
    p = np.asarray(p, dtype=float)
    theta = np.asarray(theta, dtype=float)
    c = np.cos(theta)[..., None] if theta.ndim else np.cos(theta)
    s = np.sin(theta)[..., None] if theta.ndim else np.sin(theta)
    return c * p + s * apply_J(p)


def s2_flow(p, phi, frame: OrbitFrame):
    """Cylinder characteristic: rotate the (v1, v2) coefficients by phi."""
    a = frame.oblique_coords(np.asarray(p, dtype=float))
    phi = np.asarray(phi, dtype=float)
    c, s = np.cos(phi), np.sin(phi)
    a1 = c * a[0] - s * a[1]
    a2 = s * a[0] + c * a[1]
    out = (np.multiply.outer(a1, frame.v1) + np.multiply.outer(a2, frame.v2)
           + a[2] * frame.jn1 + a[3] * frame.jn2)
    return out


def glide_minus_flow(p, s, frame: OrbitFrame):
    """Corner orbit of the lambda < 0 branch: simultaneous clockwise rotation
    of the (x1, x2) and (x3, x4) frame coordinates with equal speed.

    Clockwise is the orientation of the normal-cone combination
    alpha J p + beta J n_W with alpha, beta > 0; it gives action +t(3-4t^2).
    """
    x = frame.frame_coords(np.asarray(p, dtype=float))
    s = np.asarray(s, dtype=float)
    c, sn = np.cos(s), np.sin(s)
    x1 = c * x[0] + sn * x[1]
    x2 = -sn * x[0] + c * x[1]
    x3 = c * x[2] + sn * x[3]
    x4 = -sn * x[2] + c * x[3]
    return (np.multiply.outer(x1, frame.jn1) + np.multiply.outer(x2, frame.jn2)
            + np.multiply.outer(x3, frame.jv1) + np.multiply.outer(x4, frame.jv2))


def glide_sign(p, frame: OrbitFrame) -> float:
    """sigma = a1 a4 - a2 a3; its sign dispatches corner continuation.

    Moving along the Hopf direction changes the cylinder form at rate
    2 t sqrt(1-t^2) sigma while the cylinder direction changes the sphere
    form at the opposite rate, so sigma < 0 admits S1, sigma > 0 admits S2
    and sigma = 0 is the glide condition x1 = lambda x4, x2 = -lambda x3.
    """
    a = frame.oblique_coords(np.asarray(p, dtype=float))
    return float(a[0] * a[3] - a[1] * a[2])


@dataclass(frozen=True)
class Arc:
    region: str
    start: np.ndarray
    end: np.ndarray
    angle: float
    action: float


@dataclass
class CharacteristicOrbit:
    """Piecewise orbit with per-arc angular budgets and action accounting."""

    frame: OrbitFrame
    arcs: list
    closed: bool

    @property
    def action(self) -> float:
        return float(sum(a.action for a in self.arcs))

    @property
    def regions(self) -> list:
        return [a.region for a in self.arcs]

    def is_mixed(self) -> bool:
        regs = set(self.regions)
        return S1 in regs and S2 in regs

    def sample_points(self, per_two_pi: int = 4096) -> np.ndarray:
        """Dense positions along the orbit, for plotting and line integrals."""
        chunks = []
        for arc in self.arcs:
            m = max(8, int(abs(arc.angle) / (2.0 * np.pi) * per_two_pi))
            s = np.linspace(0.0, arc.angle, m, endpoint=False)
            if arc.region == S1:
                chunks.append(s1_flow(arc.start, s))
            elif arc.region == S2:
                chunks.append(s2_flow(arc.start, s, self.frame))
            else:
                chunks.append(self._glide_points(arc, s))
        return np.vstack(chunks)

    def _glide_points(self, arc: Arc, s: np.ndarray) -> np.ndarray:
        if arc.region != CORNER_GLIDE:
            raise ValueError("not a glide arc")
        # the PLUS family lives at a3 = a4 = 0, MINUS strictly away from it
        a = self.frame.oblique_coords(arc.start)
        if float(np.hypot(a[2], a[3])) > 1e-8:
            return glide_minus_flow(arc.start, s, self.frame)
        return s2_flow(arc.start, s, self.frame)

    def line_integral_action(self, per_two_pi: int = 65536) -> float:
        """(1/2) closed integral of omega(gamma, dgamma) over a dense polygon."""
        pts = self.sample_points(per_two_pi)
        nxt = np.roll(pts, -1, axis=0)
        return 0.5 * float(np.sum(np.einsum("ij,ij->i", apply_J(pts), nxt)))


def glide_orbit(t: float, branch: str) -> CharacteristicOrbit:
    """The closed corner orbits: PLUS has action t, MINUS (t < 1/2 only)
    has action t(3 - 4 t^2)."""
    frame = OrbitFrame.standard(t)
    if branch == PLUS:
        start = frame.from_oblique_coords(np.array([1.0 / np.sqrt(np.pi), 0.0, 0.0, 0.0]))
        arc = Arc(CORNER_GLIDE, start, start, 2.0 * np.pi, t)
        return CharacteristicOrbit(frame, [arc], True)
    if branch == MINUS:
        if t >= 0.5:
            raise ValueError("the MINUS corner branch exists only for t < 1/2")
        lam = -np.sqrt(1.0 - t * t) / t
        x3 = t / np.sqrt(np.pi)
        x4 = 0.0
        x = np.array([lam * x4, -lam * x3, x3, x4])
        start = frame.from_frame_coords(x)
        action = t * (3.0 - 4.0 * t * t)
        arc = Arc(CORNER_GLIDE, start, start, 2.0 * np.pi, action)
        return CharacteristicOrbit(frame, [arc], True)
    raise ValueError("branch must be PLUS or MINUS")


def hopf_projection_area(p, frame: OrbitFrame) -> float:
    """Area |pi |z1|^2 - (1-t)/2| of the Hopf circle's shadow on the
    (Jv1, Jv2) plane."""
    p = np.asarray(p, dtype=float)
    z1_sq = float(p[0] ** 2 + p[1] ** 2)
    return abs(np.pi * z1_sq - 0.5 * (1.0 - frame.t))


def hopf_projection_shoelace(p, frame: OrbitFrame, m: int = 20000) -> float:
    """Sampled-shadow oracle for hopf_projection_area."""
    theta = np.linspace(0.0, 2.0 * np.pi, m, endpoint=False)
    pts = s1_flow(np.asarray(p, dtype=float), theta)
    x = pts @ frame.jv1
    y = pts @ frame.jv2
    return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - y * np.roll(x, -1))))


def s2_transit_norms(alpha3: float, alpha4: float, t: float):
    """(|z1|^2, |z2|^2) at corner points over a cylinder characteristic.

    Both are independent of the rotating coefficients, which is what makes
    |z_i| invariant across an S2 arc.
    """
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie strictly between 0 and 1")
    rho_sq = alpha3 ** 2 + alpha4 ** 2
    if rho_sq > 4.0 * (1.0 - t * t) / np.pi + 1e-12:
        raise ValueError("no corner point exists at this (alpha3, alpha4)")
    z1 = (1.0 + t) / (2.0 * np.pi) - 0.5 * t * rho_sq
    z2 = (1.0 - t) / (2.0 * np.pi) + 0.5 * t * rho_sq
    return z1, z2


def corner_rho_max(t: float) -> float:
    """Largest sqrt(a3^2 + a4^2) for which the corner is reachable."""
    return 2.0 * np.sqrt((1.0 - t * t) / np.pi)


def corner_state(t: float, rho: float, psi: float, frame: OrbitFrame | None = None) -> np.ndarray:
    """Corner point with (a3, a4) = rho (cos psi, sin psi), entering S2.

    The rotating phase phi is pinned by the sphere constraint; the entry
    choice phi - psi = -arccos(...) makes the cylinder flow point inward.
    """
    frame = frame or OrbitFrame.standard(t)
    if not 0.0 <= rho < corner_rho_max(t):
        raise ValueError("rho outside the admissible corner range")
    cval = rho * np.sqrt(np.pi) / (2.0 * np.sqrt(1.0 - t * t))
    aangle = np.arccos(np.clip(cval, -1.0, 1.0))
    phi = psi - aangle
    a = np.array([np.cos(phi) / np.sqrt(np.pi), np.sin(phi) / np.sqrt(np.pi),
                  rho * np.cos(psi), rho * np.sin(psi)])
    return frame.from_oblique_coords(a)


def _first_crossing(fvals, grid, fun, guard: int):
    """Index search plus brentq refinement of the first upward zero of fun."""
    for i in range(guard, len(grid) - 1):
        if fvals[i] <= 0.0 < fvals[i + 1]:
            lo, hi = grid[i], grid[i + 1]
            if fun(lo) > 0.0:
                return lo
            return brentq(fun, lo, hi, xtol=1e-12, rtol=1e-15)
    return None


def integrate_orbit(start, frame: OrbitFrame, max_arcs: int = 64,
                    step: float = 1e-3, closure_tol: float = 1e-6,
                    boundary_tol: float = 1e-7) -> CharacteristicOrbit:
    """Follow the piecewise characteristic flow from a boundary point.

    Each stratum is an exact rotation, so the integrator only locates the
    next corner event (sign change of the inactive constraint, refined by
    bisection to 1e-12) and dispatches at corners by the glide sign.
    Stops at closure, at a glide classification, or after max_arcs.
    """
    p = np.asarray(start, dtype=float).copy()
    t = frame.t
    region = classify_boundary_point(p, frame, boundary_tol)
    arcs = []
    origin = p.copy()
    closed = False
    glide_tol = 1e-8

    for _ in range(max_arcs):
        if region == CORNER:
            sigma = glide_sign(p, frame)
            if abs(sigma) <= glide_tol:
                rho = float(np.hypot(*frame.oblique_coords(p)[2:]))
                branch = PLUS if rho <= 1e-8 else MINUS
                orbit = glide_orbit(t, branch)
                arc = orbit.arcs[0]
                arcs.append(Arc(CORNER_GLIDE, p, p, arc.angle, arc.action))
                return CharacteristicOrbit(frame, arcs, True)
            region = S1 if sigma < 0.0 else S2
        if region == S1:
            fun = lambda th: np.pi * frame.cylinder_form(s1_flow(p, th)) - t * t
            grid = np.arange(0.0, 2.0 * np.pi + step, step)
            vals = np.pi * _cyl_form_batch(s1_flow(p, grid), frame) - t * t
            theta = _first_crossing(vals, grid, fun, guard=1)
            if theta is None:
                arcs.append(Arc(S1, p, p, 2.0 * np.pi, 1.0))
                closed = True
                break
            q = s1_flow(p, theta)
            arcs.append(Arc(S1, p, q, theta, theta / (2.0 * np.pi)))
            p = q
            region = CORNER
        else:
            fun = lambda ph: np.pi * float(np.sum(s2_flow(p, ph, frame) ** 2)) - 1.0
            grid = np.arange(0.0, 2.0 * np.pi + step, step)
            pts = s2_flow(p, grid, frame)
            vals = np.pi * np.sum(pts * pts, axis=1) - 1.0
            phi = _first_crossing(vals, grid, fun, guard=1)
            if phi is None:
                arcs.append(Arc(S2, p, p, 2.0 * np.pi, t))
                closed = True
                break
            q = s2_flow(p, phi, frame)
            arcs.append(Arc(S2, p, q, phi, phi * t / (2.0 * np.pi)))
            p = q
            region = CORNER
        if np.linalg.norm(p - origin) <= closure_tol and len(arcs) > 1:
            closed = True
            break
    return CharacteristicOrbit(frame, arcs, closed)


def _cyl_form_batch(pts: np.ndarray, frame: OrbitFrame) -> np.ndarray:
    return (pts @ frame.jv1) ** 2 + (pts @ frame.jv2) ** 2


def block_map(t: float, rho: float, frame: OrbitFrame | None = None):
    """One S2-then-S1 block from a corner entry at radius rho.

    Returns (delta_psi, theta, tau): the net rotation of the (a3, a4)
    phase and the two angular budgets.  By the anti-diagonal circle
    symmetry of the body these depend on rho only.
    """
    frame = frame or OrbitFrame.standard(t)
    p0 = corner_state(t, rho, 0.0, frame)
    orbit = integrate_orbit(p0, frame, max_arcs=2, closure_tol=0.0)
    if len(orbit.arcs) < 2 or orbit.regions[:2] != [S2, S1]:
        raise RuntimeError("block integration did not produce an S2+S1 pair")
    theta = orbit.arcs[0].angle
    tau = orbit.arcs[1].angle
    a = frame.oblique_coords(orbit.arcs[1].end)
    delta_psi = float(np.arctan2(a[3], a[2])) % (2.0 * np.pi)
    return delta_psi, theta, tau


def find_closed_alternating_orbits(t: float, k_max: int = 8,
                                   rho_samples: int = 160) -> list:
    """Census of closed orbits alternating between S1 and S2.

    The per-block phase advance delta_psi(rho) is scanned over the corner
    radius; a k-block orbit closes when k * delta_psi is a multiple of
    2 pi, located by bracketed root finding and confirmed by integration.
    """
    frame = OrbitFrame.standard(t)
    rho_hi = corner_rho_max(t) * 0.995
    rhos = np.linspace(rho_hi * 1e-3, rho_hi, rho_samples)
    psis = np.array([block_map(t, r, frame)[0] for r in rhos])
    psis = np.unwrap(psis)
    orbits = []
    seen = set()
    for k in range(1, k_max + 1):
        targets = [2.0 * np.pi * m / k for m in range(-4 * k, 4 * k + 1)]
        for target in targets:
            g = psis - target
            for i in range(len(rhos) - 1):
                if g[i] == 0.0 or g[i] * g[i + 1] < 0.0:
                    try:
                        root = brentq(
                            lambda r: _unwrapped_psi(t, r, frame, rhos, psis) - target,
                            rhos[i], rhos[i + 1], xtol=1e-11)
                    except ValueError:
                        continue
                    key = (k, round(root, 7))
                    if key in seen:
                        continue
                    seen.add(key)
                    p0 = corner_state(t, root, 0.0, frame)
                    orbit = integrate_orbit(p0, frame, max_arcs=2 * k + 1,
                                            closure_tol=1e-6)
                    if orbit.closed and orbit.is_mixed() and len(orbit.arcs) == 2 * k:
                        orbits.append(orbit)
    return orbits


def _unwrapped_psi(t, rho, frame, rho_grid, psi_grid):
    """block_map phase lifted to the continuous branch of the scan."""
    raw = block_map(t, rho, frame)[0]
    ref = float(np.interp(rho, rho_grid, psi_grid))
    k = round((ref - raw) / (2.0 * np.pi))
    return raw + 2.0 * np.pi * k


def min_action_scan(t: float, samples: int = 48, seed: int = 0,
                    max_arcs: int = 64):
    """Minimal action among closed characteristics found on the boundary.

    Always includes the closed-form glide orbits, pure Hopf orbits found
    from sampled starts, and any closed alternating orbits hit by the
    sampler; ties break lexicographically on the start coordinates.
    """
    frame = OrbitFrame.standard(t)
    found = [glide_orbit(t, PLUS)]
    if t < 0.5:
        found.append(glide_orbit(t, MINUS))
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        p = rng.normal(size=4)
        p /= np.linalg.norm(p) * np.sqrt(np.pi)
        if np.pi * frame.cylinder_form(p) > t * t:
            # push the sampled sphere point into the cylinder: shrink the
            # (Jv1, Jv2) component until the form is admissible
            x = frame.frame_coords(p)
            scale = (t / np.sqrt(np.pi)) / np.hypot(x[2], x[3]) * rng.uniform(0.2, 1.0)
            x[2] *= scale
            x[3] *= scale
            x[:2] *= np.sqrt(max(1.0 / np.pi - x[2] ** 2 - x[3] ** 2, 0.0)) / np.hypot(x[0], x[1])
            p = frame.from_frame_coords(x)
        orbit = integrate_orbit(p, frame, max_arcs=max_arcs)
        if orbit.closed:
            found.append(orbit)
    best = min(found, key=lambda o: (o.action, tuple(np.round(o.arcs[0].start, 12))))
    return best.action, best, found
