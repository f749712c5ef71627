"""Weight functions on R^n and the admissibility checks for section comparison.

A comparison instance carries two weights: ``u`` measures sections (the
attenuated density) and ``v`` measures volume (the true density).  The
machinery here evaluates weights, computes the attenuated radial mass

    radial_mass(u, K, theta, i) = integral_0^{rho_K(theta)} r^{i-1} u(r theta) dr,

whose Radon transform is the weighted section volume, and probes the three
admissibility conditions:

* attenuation: u even, positive away from the origin, |x|^{i-n} u(x) locally
  integrable;
* density: v even, nonnegative, locally integrable, radially continuous;
* comparison: r^{n-i} v(r theta)/u(r theta) nondecreasing in r.

Verdicts are sampled, never proven: a reported pass means "no violation found
on the probe set".
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .spheres import RandomSource, random_directions

_PROBE_SEED = 0x5EED_D17C


class IntegrabilityError(ValueError):
    """A radial integral is divergent (or failed to converge numerically)."""


@dataclass(frozen=True, eq=False)
class Weight:
    """An even, nonnegative weight on R^n backed by a vectorized callable.

    ``fn`` maps points of shape (..., n) to values of shape (...).  When the
    weight is homogeneous, ``homogeneity`` holds its degree and ``angular``
    the restriction to the unit sphere, which unlocks closed-form radial
    integrals downstream.
    """

    n: int
    fn: object
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    homogeneity: float | None = None
    angular: object | None = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.fn(x)

    def angular_values(self, thetas):
        if self.angular is not None:
            return np.asarray(self.angular(np.asarray(thetas, dtype=float)), dtype=float)
        return self(thetas)


def power_weight(n, alpha):
    """w(x) = |x|^alpha (alpha = 0 gives the constant weight 1)."""
    alpha = float(alpha)

    def fn(x):
        r = np.linalg.norm(np.atleast_2d(x), axis=-1)
        vals = np.ones_like(r) if alpha == 0.0 else r ** alpha
        return vals.reshape(np.asarray(x).shape[:-1])

    def angular(thetas):
        return np.ones(np.asarray(thetas).shape[:-1])

    return Weight(n, fn, kind="power", params={"alpha": alpha},
                  homogeneity=alpha, angular=angular)


def constant_weight(n):
    return power_weight(n, 0.0)


def wgamma_weight(n, i, gamma):
    """Axial weight w(x) = (|x'| / |x|)^(gamma + i - n), x' the first n-1 coords.

    Homogeneous of degree zero; depends only on the angle between x and the
    last coordinate axis.  Requires gamma > 0.
    """
    if gamma <= 0:
        raise ValueError(f"need gamma > 0, got {gamma}")
    exponent = float(gamma + i - n)

    def angular(thetas):
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        sin_sq = np.clip(1.0 - thetas[..., -1] ** 2, 0.0, 1.0)
        if exponent == 0.0:
            vals = np.ones_like(sin_sq)
        else:
            with np.errstate(divide="ignore"):
                vals = sin_sq ** (exponent / 2.0)
        return vals.reshape(np.asarray(thetas).shape[:-1])

    def fn(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.linalg.norm(x, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(r > 0, x[..., -1] / np.where(r > 0, r, 1.0), 0.0)
        sin_sq = np.clip(1.0 - t * t, 0.0, 1.0)
        if exponent == 0.0:
            vals = np.ones_like(sin_sq)
        else:
            with np.errstate(divide="ignore"):
                vals = sin_sq ** (exponent / 2.0)
        return vals.reshape(np.asarray(x).shape[:-1])

    return Weight(n, fn, kind="wgamma", params={"i": int(i), "gamma": float(gamma)},
                  homogeneity=0.0, angular=angular)


def product_weight(a, b):
    """Pointwise product of two weights (degrees add when both are homogeneous)."""
    if a.n != b.n:
        raise ValueError("weights live in different dimensions")
    hom = None
    if a.homogeneity is not None and b.homogeneity is not None:
        hom = a.homogeneity + b.homogeneity
    ang = None
    if a.angular is not None and b.angular is not None:
        ang = lambda thetas: a.angular(thetas) * b.angular(thetas)
    return Weight(a.n, lambda x: a.fn(x) * b.fn(x), kind="product",
                  params={"factors": (a.kind, b.kind)}, homogeneity=hom, angular=ang)


def custom_weight(n, fn, homogeneity=None, params=None):
    angular = None
    if homogeneity is not None:
        hom = float(homogeneity)

        def angular(thetas):  # restriction to the sphere
            return np.asarray(fn(np.asarray(thetas, dtype=float)), dtype=float)

    return Weight(n, fn, kind="custom", params=params or {},
                  homogeneity=homogeneity, angular=angular)


# --- expression grammar for config-defined weights --------------------------

_ALLOWED_CALLS = {
    "exp": np.exp, "log": np.log, "sqrt": np.sqrt, "abs": np.abs,
    "sin": np.sin, "cos": np.cos,
}
_ALLOWED_BINOPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow,
}
_ALLOWED_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def expression_weight(n, expression, homogeneity=None):
    """Weight from a small arithmetic expression over ``r``, ``rp``, ``x1..xn``.

    ``r`` is |x|, ``rp`` is the norm of the first n-1 coordinates; the grammar
    allows numbers, + - * / **, parentheses, and exp/log/sqrt/abs/sin/cos.
    Anything else is rejected.  Example: ``"r**-1 * exp(-r)"``.
    """
    tree = ast.parse(expression, mode="eval")

    def check(node):
        if isinstance(node, ast.Expression):
            return check(node.body)
        if isinstance(node, ast.BinOp) and type(node.op) in _ALLOWED_BINOPS:
            check(node.left)
            check(node.right)
            return
        if isinstance(node, ast.UnaryOp) and type(node.op) in _ALLOWED_UNARY:
            check(node.operand)
            return
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _ALLOWED_CALLS:
                raise ValueError(f"call to {ast.dump(node.func)} is not in the weight grammar")
            if node.keywords:
                raise ValueError("keyword arguments are not in the weight grammar")
            for arg in node.args:
                check(arg)
            return
        if isinstance(node, ast.Name):
            if node.id in ("r", "rp") or (node.id.startswith("x") and node.id[1:].isdigit()):
                return
            raise ValueError(f"name {node.id!r} is not in the weight grammar")
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return
        raise ValueError(f"{type(node).__name__} is not in the weight grammar")

    check(tree)
    code = compile(tree, "<weight-expression>", "eval")

    def fn(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        names = {"r": np.linalg.norm(x, axis=-1),
                 "rp": np.linalg.norm(x[..., :-1], axis=-1)}
        for k in range(x.shape[-1]):
            names[f"x{k + 1}"] = x[..., k]
        with np.errstate(all="ignore"):
            vals = eval(code, {"__builtins__": {}}, {**names, **_ALLOWED_CALLS})
        return np.asarray(vals, dtype=float).reshape(np.asarray(x).shape[:-1])

    return Weight(n, fn, kind="custom", params={"expression": expression},
                  homogeneity=homogeneity,
                  angular=(lambda thetas: fn(thetas)) if homogeneity is not None else None)


# --- radial integrals --------------------------------------------------------

def power_weighted_integral(fn, upper, k, points=96, max_refinements=6, rtol=1e-11):
    """integral_0^upper r^{k-1} fn(r) dr, robust to an integrable endpoint at 0.

    The substitution r = upper * s^3 clusters Gauss-Legendre nodes at the
    origin, so algebraic singularities r^{-s} with s < k converge.  The rule
    is refined (doubling) until two consecutive levels agree to ``rtol``.
    """
    upper = float(upper)
    if upper == 0.0:
        return 0.0
    if upper < 0.0:
        raise ValueError("upper limit must be nonnegative")
    prev = None
    m = points
    for _ in range(max_refinements + 1):
        s, w = leggauss(m)
        s = 0.5 * (s + 1.0)
        w = 0.5 * w
        r = upper * s ** 3
        vals = np.asarray(fn(r), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise IntegrabilityError("integrand is not finite inside the domain")
        total = float(np.sum(w * 3.0 * upper * s ** 2 * r ** (k - 1) * vals))
        if prev is not None and abs(total - prev) <= rtol * max(abs(total), 1e-300):
            return total
        prev = total
        m *= 2
    raise IntegrabilityError("radial integral did not converge; weight may not be integrable")


def radial_moment(w, thetas, rhos, k):
    """Vectorized integral_0^rho r^{k-1} w(r theta) dr for directions ``thetas``.

    Uses the closed form angular(theta) * rho^(k+d) / (k+d) when ``w`` is
    homogeneous of degree d; otherwise falls back to adaptive quadrature per
    direction.  Raises IntegrabilityError when k + d <= 0.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    rhos = np.broadcast_to(np.asarray(rhos, dtype=float), thetas.shape[:-1]).astype(float)
    if np.any(rhos < 0):
        raise ValueError("radii must be nonnegative")
    if w.homogeneity is not None:
        power = k + w.homogeneity
        if power <= 0:
            raise IntegrabilityError(
                f"integral of r^{k - 1} times a degree-{w.homogeneity} weight diverges at 0"
            )
        ang = w.angular_values(thetas)
        return ang * rhos ** power / power

    flat_thetas = thetas.reshape(-1, thetas.shape[-1])
    flat_rhos = rhos.reshape(-1)
    out = np.empty(flat_rhos.shape)
    for j, (theta, rho) in enumerate(zip(flat_thetas, flat_rhos)):
        out[j] = power_weighted_integral(lambda r: w.fn(r[:, None] * theta[None, :]),
                                         rho, k)
    return out.reshape(rhos.shape)


def radial_mass(u, body, thetas, i):
    """Attenuated radial mass of ``body`` along ``thetas`` for section dimension i.

    This is the function whose Radon transform over a subsphere is the
    weighted section volume.
    """
    rhos = body.rho(np.asarray(thetas, dtype=float))
    return radial_moment(u, thetas, rhos, int(i))


def comparison_function(pair, body, thetas):
    """rho^{n-i}(theta) * v(boundary point) / u(boundary point).

    The quantity whose representability as a dual Radon transform of a
    positive measure drives the section-to-volume implication.
    """
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    rhos = np.asarray(body.rho(thetas), dtype=float)
    boundary = rhos[..., None] * thetas
    uv = np.asarray(pair.u(boundary), dtype=float)
    vv = np.asarray(pair.v(boundary), dtype=float)
    if np.any(uv == 0.0) or not np.all(np.isfinite(uv)):
        raise ZeroDivisionError("attenuation weight vanishes at a boundary point")
    return rhos ** (pair.n - pair.i) * vv / uv


# --- admissibility probes -----------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    passed: bool
    detail: str = ""
    witness: tuple | None = None


@dataclass(frozen=True)
class ConditionReport:
    """Sampled verdicts for the attenuation / density / comparison conditions."""

    attenuation: Verdict
    density: Verdict
    comparison: Verdict
    probe_directions: int
    radial_points: int

    @property
    def admissible(self):
        return self.attenuation.passed and self.density.passed and self.comparison.passed

    def as_dict(self):
        out = {}
        for name in ("attenuation", "density", "comparison"):
            v = getattr(self, name)
            out[name] = {"passed": v.passed, "detail": v.detail}
        out["admissible"] = self.admissible
        return out


@dataclass(frozen=True, eq=False)
class WeightPair:
    """A section weight u and a volume weight v with their sampled verdicts."""

    u: Weight
    v: Weight
    n: int
    i: int
    conditions: ConditionReport

    @property
    def admissible(self):
        return self.conditions.admissible


def _probe_directions(n, count):
    # Fixed-seed probe set: deterministic across runs, independent of caller RNG.
    return random_directions(RandomSource(_PROBE_SEED), n, count)


def check_conditions(u, v, n, i, probe_dirs=512, r_points=200, body=None):
    """Probe the admissibility conditions on a direction/radius grid.

    The radius grid is geometric on [1e-4, 1e2] with ``r_points`` points; the
    body's own boundary radius joins the grid when a body is supplied.  A
    single sampled failure fails the verdict; passing means only that no
    violation was found.
    """
    dirs = _probe_directions(n, probe_dirs)
    radii = np.geomspace(1e-4, 1e2, r_points)
    r_matrix = np.broadcast_to(radii, (probe_dirs, r_points)).copy()
    if body is not None:
        boundary = np.asarray(body.rho(dirs), dtype=float)[:, None]
        r_matrix = np.sort(np.concatenate([r_matrix, boundary], axis=1), axis=1)

    points = r_matrix[:, :, None] * dirs[:, None, :]
    with np.errstate(all="ignore"):
        u_vals = np.asarray(u(points), dtype=float)
        v_vals = np.asarray(v(points), dtype=float)
        u_even = np.max(np.abs(u_vals[:, :1] - u(-points[:, :1, :])))
        v_even = np.max(np.abs(v_vals[:, :1] - v(-points[:, :1, :])))

    # attenuation: positivity, evenness, integrability of r^{i-1} u near 0
    atten = Verdict(True, "positive, even, integrable on probes")
    if not np.all(np.isfinite(u_vals)) or np.any(u_vals <= 0.0):
        idx = np.argwhere(~(np.isfinite(u_vals) & (u_vals > 0.0)))[0]
        atten = Verdict(False, "section weight is not positive at a probe point",
                        (tuple(dirs[idx[0]]), float(r_matrix[idx[0], idx[1]])))
    elif u_even > 1e-12:
        atten = Verdict(False, f"section weight evenness residual {u_even:.2e}")
    else:
        try:
            radial_moment(u, dirs[:8], np.ones(8), i)
        except IntegrabilityError as exc:
            atten = Verdict(False, f"section weight not integrable: {exc}")

    # density: nonnegative, even, finite along rays
    dens = Verdict(True, "nonnegative, even, finite on probes")
    if not np.all(np.isfinite(v_vals)) or np.any(v_vals < 0.0):
        idx = np.argwhere(~(np.isfinite(v_vals) & (v_vals >= 0.0)))[0]
        dens = Verdict(False, "volume weight is negative or non-finite at a probe point",
                       (tuple(dirs[idx[0]]), float(r_matrix[idx[0], idx[1]])))
    elif v_even > 1e-12:
        dens = Verdict(False, f"volume weight evenness residual {v_even:.2e}")

    # comparison: r^{n-i} v / u nondecreasing along every probed ray
    comp = Verdict(True, "ratio nondecreasing on probed rays")
    if atten.passed:
        with np.errstate(all="ignore"):
            ratio = r_matrix ** (n - i) * v_vals / u_vals
        drops = np.diff(ratio, axis=1)
        scale = np.maximum(np.maximum(np.abs(ratio[:, :-1]), np.abs(ratio[:, 1:])), 1.0)
        bad = drops < -1e-10 * scale
        if np.any(bad):
            d_idx, r_idx = np.argwhere(bad)[0]
            comp = Verdict(
                False,
                "comparison ratio decreases along a probed ray",
                (tuple(dirs[d_idx]), float(r_matrix[d_idx, r_idx]),
                 float(r_matrix[d_idx, r_idx + 1])),
            )
    else:
        comp = Verdict(False, "not evaluated: section weight failed its own condition")

    return ConditionReport(atten, dens, comp, probe_dirs, r_points)


def make_weight_pair(u, v, n, i, probe_dirs=512, r_points=200, body=None):
    """Bundle two weights with their admissibility report."""
    report = check_conditions(u, v, n, i, probe_dirs=probe_dirs,
                              r_points=r_points, body=body)
    return WeightPair(u, v, int(n), int(i), report)
