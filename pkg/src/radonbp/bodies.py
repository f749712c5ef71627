"""Origin-symmetric star bodies represented by evaluable radial functions.

A body is a positive even function rho on the sphere; all downstream
integrals sample it on their own nodes, so nothing is gridded up front.
Constructors validate positivity and evenness on a fixed probe set.  Bodies
of revolution carry their profile in ``meta["zonal_profile"]`` so zonal fast
paths (one-dimensional quadrature, harmonic analysis) can pick it up.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import weights as weights_mod
from .harmonics import zonal_basis
from .spheres import RandomSource, random_directions

_PROBE_SEED = 0xB0D1E5
_RADIUS_CAP = 1e6


class InvalidBodyError(ValueError):
    """Radial function not positive/even, or constructor parameters invalid."""


class DivergenceError(RuntimeError):
    """Radial-mass inversion exceeded the radius cap without bracketing."""


@dataclass(frozen=True, eq=False)
class StarBody:
    """Star body in R^n described by its radial function.

    ``rho`` maps unit vectors (..., n) to positive radii (...).  ``smooth``
    is a constructor-level tag (no curvature is checked); ``meta`` carries
    optional structure such as a zonal profile or semi-axes.
    """

    n: int
    rho: object
    kind: str
    smooth: bool = True
    meta: dict = field(default_factory=dict)

    def zonal(self):
        return "zonal_profile" in self.meta

    def describe(self):
        out = {"kind": self.kind, "n": self.n, "smooth": self.smooth}
        for key, val in self.meta.items():
            if isinstance(val, (int, float, str, list, tuple)):
                out[key] = list(val) if isinstance(val, tuple) else val
        return out


def radial(body, theta):
    """Evaluate the radial function, rejecting nonpositive values."""
    vals = np.asarray(body.rho(np.asarray(theta, dtype=float)), dtype=float)
    if np.any(~np.isfinite(vals)) or np.any(vals <= 0.0):
        raise InvalidBodyError("radial function must be finite and positive")
    return float(vals) if vals.ndim == 0 else vals


def _probe(rho, n, count=1024):
    dirs = random_directions(RandomSource(_PROBE_SEED), n, count)
    vals = np.asarray(rho(dirs), dtype=float)
    if np.any(~np.isfinite(vals)) or np.any(vals <= 0.0):
        raise InvalidBodyError("radial function is not positive on the probe set")
    even = np.max(np.abs(vals - np.asarray(rho(-dirs), dtype=float)))
    if even > 1e-12 * max(1.0, float(np.max(np.abs(vals)))):
        raise InvalidBodyError(f"radial function is not even (residual {even:.2e})")
    return float(np.min(vals)), float(np.max(vals))


def ball(n, radius=1.0):
    if radius <= 0:
        raise InvalidBodyError("radius must be positive")
    radius = float(radius)

    def rho(thetas):
        thetas = np.asarray(thetas, dtype=float)
        return np.full(thetas.shape[:-1], radius)

    return StarBody(n, rho, "ball", smooth=True,
                    meta={"radius": radius, "zonal_profile": lambda t: np.full(np.shape(t), radius)})


def ellipsoid(semi_axes):
    axes = np.asarray(semi_axes, dtype=float)
    if axes.ndim != 1 or axes.size < 2 or np.any(axes <= 0):
        raise InvalidBodyError("semi-axes must be a vector of positive reals")
    inv_sq = 1.0 / axes ** 2

    def rho(thetas):
        thetas = np.asarray(thetas, dtype=float)
        return 1.0 / np.sqrt(np.sum(thetas ** 2 * inv_sq, axis=-1))

    return StarBody(axes.size, rho, "ellipsoid", smooth=True,
                    meta={"semi_axes": tuple(axes.tolist())})


def lp_ball(n, p, radius=1.0):
    """Unit ball of the l^p norm, scaled by ``radius``; requires p >= 1."""
    if p < 1:
        raise InvalidBodyError(f"need p >= 1, got {p}")
    p = float(p)

    def rho(thetas):
        thetas = np.asarray(thetas, dtype=float)
        return radius / np.sum(np.abs(thetas) ** p, axis=-1) ** (1.0 / p)

    return StarBody(n, rho, "lp-ball", smooth=(p == 2.0),
                    meta={"p": p, "radius": float(radius)})


def harmonic_perturbed(n, h, exponent=1, smooth=True, meta=None):
    """rho(theta) = (1 + h(theta))^(1/exponent) for an even perturbation h."""
    if exponent < 1:
        raise InvalidBodyError("exponent must be >= 1")

    def rho(thetas):
        base = 1.0 + np.asarray(h(np.asarray(thetas, dtype=float)), dtype=float)
        return np.sign(base) * np.abs(base) ** (1.0 / exponent)

    body = StarBody(n, rho, "harmonic-perturbed", smooth=smooth, meta=dict(meta or {}))
    _probe(rho, n)
    return body


def zonal_perturbed(n, coeffs, exponent=1):
    """Perturbed ball with a zonal perturbation given as {degree: coefficient}.

    rho(theta) = (1 + sum_k c_k Z_k(theta_n))^(1/exponent) with Z_k the
    degree-k zonal basis function normalized to 1 at the pole.  Odd degrees
    are rejected (they would break origin symmetry).
    """
    coeffs = {int(k): float(c) for k, c in dict(coeffs).items()}
    if any(k % 2 for k in coeffs):
        raise InvalidBodyError("zonal perturbation must use even degrees")

    def profile_perturbation(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for k, c in sorted(coeffs.items()):
            out = out + c * zonal_basis(k, n, t)
        return out

    def profile(t):
        base = 1.0 + profile_perturbation(t)
        return np.sign(base) * np.abs(base) ** (1.0 / exponent)

    def rho(thetas):
        thetas = np.asarray(thetas, dtype=float)
        return profile(thetas[..., -1])

    body = StarBody(n, rho, "harmonic-perturbed", smooth=True,
                    meta={"zonal_profile": profile,
                          "zonal_coeffs": sorted(coeffs.items()),
                          "exponent": exponent})
    lo, hi = _probe(rho, n)
    grid = np.linspace(-1.0, 1.0, 4097)
    if np.min(profile(grid)) <= 0.0:
        raise InvalidBodyError("zonal perturbation destroys positivity")
    return body


def revolution_body(n, profile_angle, smooth=True):
    """Body of revolution from a colatitude profile f: [0, pi] -> (0, inf).

    ``f`` must satisfy f(pi - psi) = f(psi) so the body is origin-symmetric.
    """
    def profile_t(t):
        return np.asarray(profile_angle(np.arccos(np.clip(t, -1.0, 1.0))), dtype=float)

    def rho(thetas):
        thetas = np.asarray(thetas, dtype=float)
        return profile_t(thetas[..., -1])

    body = StarBody(n, rho, "revolution", smooth=smooth,
                    meta={"zonal_profile": profile_t})
    _probe(rho, n)
    return body


def from_radial_mass(u, i, mass_fn, kind="from-b", smooth=False, meta=None):
    """Body recovered pointwise from a prescribed radial-mass function.

    ``mass_fn(theta)`` prescribes integral_0^rho r^{i-1} u(r theta) dr; the
    radius is recovered by :func:`invert_radial_mass` on demand.
    """
    def rho(thetas):
        thetas = np.asarray(thetas, dtype=float)
        flat = np.atleast_2d(thetas)
        masses = np.asarray(mass_fn(flat), dtype=float)
        out = invert_radial_mass(u, i, masses, flat)
        return out.reshape(thetas.shape[:-1])

    return StarBody(u.n, rho, kind, smooth=smooth, meta=dict(meta or {}))


def invert_radial_mass(u, i, mass, thetas):
    """Radius rho with integral_0^rho r^{i-1} u(r theta) dr = mass.

    Unique by strict monotonicity.  Closed form for homogeneous weights;
    otherwise bracketing by doubling followed by bisection to relative
    tolerance 1e-10.  Radii are capped at 1e6 (DivergenceError beyond).
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    mass = np.broadcast_to(np.asarray(mass, dtype=float), thetas.shape[:-1]).astype(float)
    if np.any(mass <= 0.0) or np.any(~np.isfinite(mass)):
        raise ValueError("radial mass must be positive and finite")

    if u.homogeneity is not None:
        power = i + u.homogeneity
        if power <= 0:
            raise weights_mod.IntegrabilityError(
                f"degree-{u.homogeneity} weight is not integrable against r^{i - 1}"
            )
        ang = np.asarray(u.angular_values(thetas), dtype=float)
        if np.any(ang <= 0.0):
            raise InvalidBodyError("weight vanishes along a requested direction")
        return (power * mass / ang) ** (1.0 / power)

    flat_thetas = thetas.reshape(-1, thetas.shape[-1])
    flat_mass = mass.reshape(-1)
    out = np.empty(flat_mass.shape)
    for j, (theta, target) in enumerate(zip(flat_thetas, flat_mass)):
        out[j] = _invert_single(u, i, target, theta)
    return out.reshape(mass.shape)


def _invert_single(u, i, target, theta):
    def mass_at(rho):
        return weights_mod.power_weighted_integral(
            lambda r: u.fn(r[:, None] * theta[None, :]), rho, i)

    hi = 1.0
    while mass_at(hi) < target:
        hi *= 2.0
        if hi > _RADIUS_CAP:
            raise DivergenceError(
                f"no radius below {_RADIUS_CAP:.0e} reaches the requested mass")
    lo = 0.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mass_at(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10 * max(hi, 1e-12):
            break
    return 0.5 * (lo + hi)


def weighted_volume(body, v, quad):
    """integral over the body of the weight v, in polar coordinates.

    The outer integral runs over the quadrature nodes; the inner radial
    integral is closed-form for homogeneous weights and adaptive otherwise.
    """
    rhos = np.asarray(body.rho(quad.nodes), dtype=float)
    inner = weights_mod.radial_moment(v, quad.nodes, rhos, body.n)
    if np.any(~np.isfinite(inner)):
        raise weights_mod.IntegrabilityError("inner radial integral is not finite")
    return float(inner @ quad.weights)


@dataclass(frozen=True)
class ConvexityVerdict:
    passed: bool
    pairs: int
    tol: float
    witness: tuple | None = None

    def as_dict(self):
        out = {"passed": self.passed, "pairs": self.pairs, "tol": self.tol}
        if self.witness is not None:
            out["witness"] = [list(map(float, w)) for w in self.witness]
        return out


def is_convex_sampled(body, pairs=4096, tol=1e-9, source=None):
    """Necessary-condition convexity test on sampled boundary pairs.

    Draws random boundary points x, y and checks that their midpoint stays
    inside (norm <= rho * (1 + tol)).  ``passed`` means no violation was
    found; it is not a certificate of convexity.
    """
    src = source if source is not None else RandomSource(_PROBE_SEED, (1,))
    dirs = random_directions(src, body.n, 2 * pairs)
    a, b = dirs[:pairs], dirs[pairs:]
    x = np.asarray(body.rho(a), dtype=float)[:, None] * a
    y = np.asarray(body.rho(b), dtype=float)[:, None] * b
    mid = 0.5 * (x + y)
    norms = np.linalg.norm(mid, axis=1)
    keep = norms > 1e-12
    inside = np.ones(pairs, dtype=bool)
    if np.any(keep):
        units = mid[keep] / norms[keep, None]
        allowed = np.asarray(body.rho(units), dtype=float) * (1.0 + tol)
        inside[keep] = norms[keep] <= allowed
    if np.all(inside):
        return ConvexityVerdict(True, pairs, tol)
    first = int(np.argmax(~inside))
    return ConvexityVerdict(False, pairs, tol,
                            witness=(tuple(x[first]), tuple(y[first])))


_BODY_KINDS = ("ball", "ellipsoid", "lp-ball", "harmonic-perturbed", "revolution")


def make_body(kind, n, **params):
    """Config-addressable body constructor used by the CLI."""
    if kind == "ball":
        return ball(n, params.get("radius", 1.0))
    if kind == "ellipsoid":
        axes = params.get("semi_axes")
        if axes is None or len(axes) != n:
            raise InvalidBodyError(f"ellipsoid needs {n} semi-axes, got {axes!r}")
        return ellipsoid(axes)
    if kind == "lp-ball":
        return lp_ball(n, params.get("p", 2.0), params.get("radius", 1.0))
    if kind == "harmonic-perturbed":
        zonal = params.get("zonal")
        if zonal is None:
            raise InvalidBodyError("harmonic-perturbed body needs zonal=[[degree, coeff], ...]")
        coeffs = {int(k): float(c) for k, c in zonal}
        return zonal_perturbed(n, coeffs, exponent=int(params.get("exponent", 1)))
    if kind == "revolution":
        zonal = params.get("zonal")
        if zonal is None:
            raise InvalidBodyError("revolution body (config form) needs zonal=[[degree, coeff], ...]")
        coeffs = {int(k): float(c) for k, c in zonal}
        return zonal_perturbed(n, coeffs, exponent=1)
    raise InvalidBodyError(f"unknown body kind {kind!r}; valid kinds: {', '.join(_BODY_KINDS)}")
