"""Harmonic analysis: S^2 spherical harmonics, zonal Gegenbauer expansions,
and the diagonal action of the hyperplane (Funk) transform.

The normalized dual transform acts on degree-k spherical harmonics by a
multiplier lambda_k; for the hyperplane case this multiplier is computed here
by one-dimensional quadrature, and dividing coefficients by it inverts the
transform on band-limited even functions.  Only this case (i = n-1) is
invertible; intermediate section dimensions have a nontrivial kernel and are
deliberately not inverted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import binom, eval_gegenbauer, gammaln, lpmv, roots_jacobi


class ParityError(ValueError):
    """Input carries an odd component where an even function is required."""


class ConditioningError(RuntimeError):
    """Inversion refused: a multiplier is too small for the requested cap."""


# --- zonal (Gegenbauer) machinery -------------------------------------------

def zonal_basis(k, n, t):
    """Degree-k zonal basis function on S^{n-1}, normalized to 1 at t = 1.

    For n = 3 these are the Legendre polynomials.  ``t`` is the cosine of the
    colatitude, i.e. the inner product with the symmetry axis.
    """
    lam = (n - 2) / 2.0
    t = np.asarray(t, dtype=float)
    if k == 0:
        return np.ones_like(t)
    scale = binom(k + 2 * lam - 1, k)
    return eval_gegenbauer(k, lam, t) / scale


def zonal_weight_quadrature(n, points):
    """Gauss-Jacobi nodes and weights for integral f(t) (1-t^2)^{(n-3)/2} dt."""
    alpha = (n - 3) / 2.0
    return roots_jacobi(points, alpha, alpha)


def sphere_mean_zonal(profile, n, points=256):
    """Mean over S^{n-1} of a zonal function given by its t-profile."""
    t, w = zonal_weight_quadrature(n, points)
    vals = np.asarray(profile(t), dtype=float)
    return float(np.sum(w * vals) / np.sum(w))


@dataclass(frozen=True, eq=False)
class HarmonicExpansion:
    """Degree-indexed coefficients, zonal (coeffs[k]) or full S^2 (coeffs[l, m+L])."""

    n: int
    basis: str              # "zonal" | "s2"
    max_degree: int
    coeffs: np.ndarray

    def energy(self):
        if self.basis == "zonal":
            norms = np.array([_zonal_norm(k, self.n) for k in range(self.max_degree + 1)])
            return float(np.sum(self.coeffs ** 2 * norms))
        return float(np.sum(self.coeffs ** 2))

    def odd_energy(self):
        if self.basis == "zonal":
            norms = np.array([_zonal_norm(k, self.n) for k in range(self.max_degree + 1)])
            mask = np.arange(self.max_degree + 1) % 2 == 1
            return float(np.sum((self.coeffs ** 2 * norms)[mask]))
        mask = np.arange(self.max_degree + 1) % 2 == 1
        return float(np.sum(self.coeffs[mask] ** 2))

    def rows(self):
        """(degree, order, coefficient) rows for CSV export."""
        if self.basis == "zonal":
            return [(k, 0, float(c)) for k, c in enumerate(self.coeffs)]
        out = []
        for l in range(self.max_degree + 1):
            for m in range(-l, l + 1):
                out.append((l, m, float(self.coeffs[l, m + self.max_degree])))
        return out


_ZONAL_NORM_CACHE = {}


def _zonal_norm(k, n, points=None):
    # E_w[zonal_basis_k^2] under the probability measure with density
    # (1-t^2)^{(n-3)/2}; exact by Gauss-Jacobi.
    key = (k, n)
    if key not in _ZONAL_NORM_CACHE:
        pts = points or (k + 8)
        t, w = zonal_weight_quadrature(n, pts)
        vals = zonal_basis(k, n, t)
        _ZONAL_NORM_CACHE[key] = float(np.sum(w * vals * vals) / np.sum(w))
    return _ZONAL_NORM_CACHE[key]


def zonal_analyze(profile, n, max_degree, points=None):
    """Expand an even t-profile on [-1, 1] in the zonal basis of S^{n-1}.

    Exact (up to roundoff) for polynomial profiles of degree <= max_degree
    when ``points`` is at least max_degree + 1; the default oversamples for
    smooth non-polynomial profiles.
    """
    pts = points or max(4 * (max_degree + 1), 160)
    t, w = zonal_weight_quadrature(n, pts)
    total = np.sum(w)
    vals = np.asarray(profile(t), dtype=float)
    coeffs = np.empty(max_degree + 1)
    for k in range(max_degree + 1):
        basis = zonal_basis(k, n, t)
        coeffs[k] = float(np.sum(w * vals * basis) / total) / _zonal_norm(k, n)
    return HarmonicExpansion(n, "zonal", max_degree, coeffs)


def zonal_synthesize(expansion, t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t, dtype=float)
    for k, c in enumerate(expansion.coeffs):
        if c != 0.0:
            out = out + c * zonal_basis(k, expansion.n, t)
    return out


def zonal_profile(expansion):
    """The expansion as a plain callable t -> value."""
    return lambda t: zonal_synthesize(expansion, t)


# --- Funk multipliers ---------------------------------------------------------

def equator_average_profile(profile, n, colatitude, points=96):
    """Average of a zonal function over the subsphere orthogonal to a direction.

    For a direction theta at the given colatitude (angle to the symmetry
    axis), the unit vectors orthogonal to theta meet the axis with cosine
    t * sin(colatitude) where t has density (1-t^2)^{(n-4)/2}.  This is the
    one-dimensional form of the hyperplane transform for zonal data, used
    both as the multiplier source and as an independent test oracle.
    """
    alpha = (n - 4) / 2.0
    t, w = roots_jacobi(points, alpha, alpha)
    w = w / np.sum(w)
    colat = np.atleast_1d(np.asarray(colatitude, dtype=float))
    args = np.sin(colat)[:, None] * t[None, :]
    vals = np.asarray(profile(args), dtype=float)
    out = vals @ w
    return float(out[0]) if np.isscalar(colatitude) else out


def funk_multiplier(n, k):
    """Eigenvalue of the normalized hyperplane transform on degree-k harmonics.

    Normalized so the multiplier at k = 0 is exactly 1; odd degrees are
    rejected (the transform annihilates them).  Computed by Gauss-Jacobi
    quadrature of the zonal basis function over an orthogonal subsphere.
    """
    k = int(k)
    if k < 0 or k % 2:
        raise ValueError(f"multiplier is defined for even k >= 0, got {k}")
    if k == 0:
        return 1.0
    pole_value = float(zonal_basis(k, n, 0.0))
    value = equator_average_profile(lambda t: zonal_basis(k, n, t), n,
                                    math.pi / 2.0, points=k // 2 + 8)
    return value / pole_value


@dataclass(frozen=True, eq=False)
class FunkMultiplierTable:
    """Multipliers lambda_k for even k <= max_degree, lambda_0 = 1."""

    n: int
    max_degree: int
    values: np.ndarray  # indexed by k; odd entries are 0

    def __getitem__(self, k):
        return float(self.values[k])


def multiplier_table(n, max_degree):
    values = np.zeros(max_degree + 1)
    for k in range(0, max_degree + 1, 2):
        values[k] = funk_multiplier(n, k)
    return FunkMultiplierTable(n, max_degree, values)


# --- inversion ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class InversionResult:
    """Funk preimage of an even function, with conditioning diagnostics."""

    expansion: HarmonicExpansion       # coefficients of the preimage
    multipliers: FunkMultiplierTable
    input_expansion: HarmonicExpansion
    tail_energy: float                 # energy of the input above max_degree
    odd_energy: float


def funk_invert_zonal(profile, n, max_degree=16, cond_cap=1e6, points=None):
    """Solve (normalized hyperplane transform) phi = g for zonal g.

    ``profile`` is the t-profile of g (or a zonal HarmonicExpansion).  The
    result's expansion synthesizes the preimage as a function of the
    hyperplane's unit normal.  Fails with ParityError when g has an odd part
    and with ConditioningError when the required amplification exceeds
    ``cond_cap``.
    """
    if isinstance(profile, HarmonicExpansion):
        g_exp = profile
        if g_exp.basis != "zonal" or g_exp.n != n:
            raise ValueError("expansion must be zonal in the same dimension")
        tail = 0.0
    else:
        refined = zonal_analyze(profile, n, 2 * max_degree + 8, points=points)
        norms = np.array([_zonal_norm(k, n) for k in range(refined.max_degree + 1)])
        weighted = refined.coeffs ** 2 * norms
        tail = float(np.sum(weighted[max_degree + 1:]))
        g_exp = HarmonicExpansion(n, "zonal", max_degree,
                                  refined.coeffs[: max_degree + 1].copy())
    return _invert_expansion(g_exp, n, max_degree, cond_cap, tail)


def _invert_expansion(g_exp, n, max_degree, cond_cap, tail):
    norms = np.array([_zonal_norm(k, n) for k in range(max_degree + 1)])
    weighted = g_exp.coeffs ** 2 * norms
    total = float(np.sum(weighted))
    odd = float(np.sum(weighted[1::2]))
    if total > 0 and odd > 1e-8 * total:
        raise ParityError(
            f"input has odd-part energy {odd:.3e} (total {total:.3e}); "
            "the hyperplane transform only reaches even functions"
        )
    table = multiplier_table(n, max_degree)
    phi_coeffs = np.zeros(max_degree + 1)
    for k in range(0, max_degree + 1, 2):
        lam = table[k]
        if abs(1.0 / lam) > cond_cap:
            raise ConditioningError(
                f"degree {k} requires amplification {abs(1 / lam):.3e} "
                f"beyond the cap {cond_cap:.1e}"
            )
        phi_coeffs[k] = g_exp.coeffs[k] / lam
    phi = HarmonicExpansion(n, "zonal", max_degree, phi_coeffs)
    return InversionResult(phi, table, g_exp, tail, odd)


# --- full S^2 machinery ---------------------------------------------------------

def real_sph_harm(l, m, thetas):
    """Real orthonormal spherical harmonic on S^2 at unit vectors (..., 3)."""
    thetas = np.asarray(thetas, dtype=float)
    t = np.clip(thetas[..., 2], -1.0, 1.0)
    phi_ang = np.arctan2(thetas[..., 1], thetas[..., 0])
    ma = abs(m)
    log_norm = 0.5 * (math.log(2 * l + 1) - math.log(4 * math.pi)
                      + gammaln(l - ma + 1) - gammaln(l + ma + 1))
    vals = math.exp(log_norm) * lpmv(ma, l, t)
    if m == 0:
        return vals
    if m > 0:
        return math.sqrt(2.0) * vals * np.cos(ma * phi_ang)
    return math.sqrt(2.0) * vals * np.sin(ma * phi_ang)


def s2_grid(max_degree):
    """Gauss-Legendre x equiangular grid exact for products up to 2*max_degree."""
    from numpy.polynomial.legendre import leggauss

    t, wt = leggauss(max_degree + 1)
    n_az = 2 * max_degree + 2
    az = 2.0 * np.pi * np.arange(n_az) / n_az
    sine = np.sqrt(np.clip(1.0 - t * t, 0.0, 1.0))
    nodes = np.empty((t.size, n_az, 3))
    nodes[:, :, 0] = sine[:, None] * np.cos(az)[None, :]
    nodes[:, :, 1] = sine[:, None] * np.sin(az)[None, :]
    nodes[:, :, 2] = t[:, None]
    weights = np.broadcast_to(wt[:, None] * (2.0 * np.pi / n_az), (t.size, n_az))
    return nodes.reshape(-1, 3), weights.ravel().copy()


def _s2_design_matrix(max_degree, nodes):
    cols = []
    for l in range(max_degree + 1):
        for m in range(-l, l + 1):
            cols.append(real_sph_harm(l, m, nodes))
    return np.column_stack(cols)


def analyze_s2(fn, max_degree, grid=None):
    """Expand a function on S^2 in real orthonormal harmonics up to max_degree.

    Exact on band-limited inputs; least-squares-accurate otherwise.  ``fn``
    maps (..., 3) unit vectors to values.
    """
    if max_degree > 64:
        raise ValueError("analysis capped at degree 64")
    nodes, weights = grid or s2_grid(max_degree)
    design = _s2_design_matrix(max_degree, nodes)
    vals = np.asarray(fn(nodes), dtype=float)
    flat = design.T @ (weights * vals)
    coeffs = np.zeros((max_degree + 1, 2 * max_degree + 1))
    pos = 0
    for l in range(max_degree + 1):
        for m in range(-l, l + 1):
            coeffs[l, m + max_degree] = flat[pos]
            pos += 1
    return HarmonicExpansion(3, "s2", max_degree, coeffs)


def synthesize_s2(expansion, thetas):
    thetas = np.asarray(thetas, dtype=float)
    L = expansion.max_degree
    out = np.zeros(thetas.shape[:-1])
    for l in range(L + 1):
        for m in range(-l, l + 1):
            c = expansion.coeffs[l, m + L]
            if c != 0.0:
                out = out + c * real_sph_harm(l, m, thetas)
    return out


def funk_invert_s2(fn, max_degree=16, cond_cap=1e6):
    """Funk preimage on S^2 (n = 3): divide each degree by its multiplier."""
    refined = analyze_s2(fn, min(2 * max_degree + 8, 64))
    L = refined.max_degree
    degree_energy = np.array([np.sum(refined.coeffs[l] ** 2) for l in range(L + 1)])
    total = float(np.sum(degree_energy))
    odd = float(np.sum(degree_energy[1::2]))
    tail = float(np.sum(degree_energy[max_degree + 1:]))
    if total > 0 and odd > 1e-8 * total:
        raise ParityError(
            f"input has odd-part energy {odd:.3e} (total {total:.3e}); "
            "the hyperplane transform only reaches even functions"
        )
    table = multiplier_table(3, max_degree)
    coeffs = np.zeros((max_degree + 1, 2 * max_degree + 1))
    for l in range(0, max_degree + 1, 2):
        lam = table[l]
        if abs(1.0 / lam) > cond_cap:
            raise ConditioningError(
                f"degree {l} requires amplification {abs(1 / lam):.3e} "
                f"beyond the cap {cond_cap:.1e}"
            )
        width = 2 * l + 1
        src = refined.coeffs[l, refined.max_degree - l: refined.max_degree + l + 1]
        coeffs[l, max_degree - l: max_degree + l + 1] = src / lam
    g_exp = HarmonicExpansion(3, "s2", max_degree,
                              _truncate_s2(refined, max_degree))
    phi = HarmonicExpansion(3, "s2", max_degree, coeffs)
    return InversionResult(phi, table, g_exp, tail, odd)


def _truncate_s2(expansion, max_degree):
    out = np.zeros((max_degree + 1, 2 * max_degree + 1))
    for l in range(max_degree + 1):
        src = expansion.coeffs[l, expansion.max_degree - l: expansion.max_degree + l + 1]
        out[l, max_degree - l: max_degree + l + 1] = src
    return out
