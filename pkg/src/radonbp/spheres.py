"""Geometric substrate: unit spheres, subspaces, rotations, and quadrature.

Everything downstream (transforms, section volumes, harmonic analysis) pulls
directions, frames and integration nodes from this module.  All randomness is
routed through :class:`RandomSource` so that results are reproducible and
parallel work can derive independent streams from ``(seed, key)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi


class UnsupportedQuadratureError(ValueError):
    """Requested quadrature kind is not available in this dimension."""


def unit_sphere_area(n):
    """Surface area of the unit sphere S^{n-1} in R^n.

    ``unit_sphere_area(2) == 2*pi`` (circle length), ``unit_sphere_area(3) ==
    4*pi``.  Raises for ``n < 1``.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"sphere dimension must be >= 1, got {n}")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True)
class RandomSource:
    """Deterministic tree of random streams.

    Two sources with equal ``(seed, key)`` produce bit-identical streams.
    Derive independent streams for subtasks with :meth:`substream`, so the
    result of a computation does not depend on execution order.
    """

    seed: int
    key: tuple = ()

    def generator(self):
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, *indices):
        return RandomSource(self.seed, self.key + tuple(int(i) for i in indices))


def as_source(source):
    """Coerce an int seed or RandomSource to a RandomSource."""
    if isinstance(source, RandomSource):
        return source
    return RandomSource(int(source))


def unit_vector(x):
    """Normalize a vector to unit Euclidean length."""
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return x / norm


def random_directions(source, n, count):
    """``count`` independent uniform points on S^{n-1}, shape (count, n)."""
    gen = as_source(source).generator()
    x = gen.standard_normal((count, n))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def random_direction(source, n):
    return random_directions(source, n, 1)[0]


def _householder(v):
    v = unit_vector(v)
    return np.eye(v.shape[0]) - 2.0 * np.outer(v, v)


def rotation_to_pole(theta):
    """A rotation R in SO(n) with ``R @ e_n == theta``.

    Built from at most two Householder reflections so the determinant is +1.
    The choice of R is not canonical; callers that need a well-defined result
    must average over the stabilizer of the pole (see ``dual_radon``).
    """
    theta = unit_vector(theta)
    n = theta.shape[0]
    pole = np.zeros(n)
    pole[-1] = 1.0
    if np.linalg.norm(theta - pole) < 1e-12:
        return np.eye(n)
    if n < 2:
        raise ValueError("SO(1) cannot move the pole")
    swap = _householder(theta - pole)        # exchanges pole and theta
    fix = _householder(np.eye(n)[0])         # fixes the pole, restores det=+1
    return swap @ fix


def haar_rotations(source, n, count):
    """``count`` Haar-uniform rotations in SO(n), shape (count, n, n)."""
    gen = as_source(source).generator()
    if n == 1:
        return np.ones((count, 1, 1))
    a = gen.standard_normal((count, n, n))
    q, r = np.linalg.qr(a)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d = np.where(d == 0.0, 1.0, d)
    q = q * d[..., None, :]
    dets = np.linalg.det(q)
    flip = dets < 0
    q[flip, :, 0] *= -1.0
    return q


def random_rotation(source, n):
    return haar_rotations(source, n, 1)[0]


def random_rotation_fixing_pole(source, n):
    """Haar-uniform rotation in the SO(n-1) subgroup that fixes e_n."""
    if n < 2:
        raise ValueError("need n >= 2")
    block = random_rotation(source, n - 1)
    out = np.eye(n)
    out[: n - 1, : n - 1] = block
    return out


def rotations_fixing_pole(source, n, count):
    """Batch version of :func:`random_rotation_fixing_pole`, shape (count, n, n)."""
    blocks = haar_rotations(source, n - 1, count)
    out = np.zeros((count, n, n))
    out[:, : n - 1, : n - 1] = blocks
    out[:, n - 1, n - 1] = 1.0
    return out


@dataclass(frozen=True, eq=False)
class Subspace:
    """An i-dimensional linear subspace of R^n, stored as an orthonormal frame.

    Two frames represent the same subspace iff their column spans agree;
    compare with :meth:`same_subspace`, never with frame equality.
    """

    columns: np.ndarray

    def __post_init__(self):
        cols = np.array(self.columns, dtype=float)
        if cols.ndim != 2 or not (1 <= cols.shape[1] <= cols.shape[0]):
            raise ValueError(f"frame must be (n, i) with 1 <= i <= n, got {cols.shape}")
        gram = cols.T @ cols
        if np.max(np.abs(gram - np.eye(cols.shape[1]))) > 1e-9:
            raise ValueError("frame columns are not orthonormal")
        object.__setattr__(self, "columns", cols)

    @property
    def n(self):
        return self.columns.shape[0]

    @property
    def i(self):
        return self.columns.shape[1]

    def projector(self):
        return self.columns @ self.columns.T

    def same_subspace(self, other, tol=1e-10):
        return np.max(np.abs(self.projector() - other.projector())) <= tol

    def normal(self):
        """Unit normal for a hyperplane (i == n-1); defined up to sign."""
        if self.i != self.n - 1:
            raise ValueError("normal vector is only defined for i == n-1")
        q, _ = np.linalg.qr(self.columns, mode="complete")
        v = q[:, -1]
        lead = np.argmax(np.abs(v))
        return v if v[lead] > 0 else -v


def subspace_from_columns(columns):
    """Orthonormalize a spanning set (n, i) and wrap it as a Subspace."""
    cols = np.asarray(columns, dtype=float)
    q, r = np.linalg.qr(cols)
    if np.min(np.abs(np.diagonal(r))) < 1e-12:
        raise ValueError("columns do not span an i-dimensional subspace")
    return Subspace(q)


def coordinate_subspace(n, i):
    """The coordinate plane spanned by the last i basis vectors."""
    if not 1 <= i <= n - 1:
        raise ValueError(f"need 1 <= i <= n-1, got i={i}, n={n}")
    return Subspace(np.eye(n)[:, n - i:])


def random_subspace(source, n, i):
    """A subspace drawn from the rotation-invariant measure on G_{n,i}."""
    if not 1 <= i <= n - 1:
        raise ValueError(f"need 1 <= i <= n-1, got i={i}, n={n}")
    gen = as_source(source).generator()
    a = gen.standard_normal((n, i))
    q, _ = np.linalg.qr(a)
    return Subspace(q)


def random_frames(source, n, i, count):
    """Batch of uniform subspace frames, shape (count, n, i)."""
    if not 1 <= i <= n - 1:
        raise ValueError(f"need 1 <= i <= n-1, got i={i}, n={n}")
    gen = as_source(source).generator()
    a = gen.standard_normal((count, n, i))
    q, _ = np.linalg.qr(a)
    return q


def frame_normals(frames):
    """Unit normals of hyperplane frames (count, n, n-1) -> (count, n)."""
    q, _ = np.linalg.qr(frames, mode="complete")
    return q[..., :, -1]


def distance_to_subsphere(theta, xi):
    """Geodesic distance on the sphere from ``theta`` to ``S^{n-1} \\cap xi``.

    Equals ``arccos(|P_xi theta|)`` and lies in [0, pi/2].  Accepts a batch of
    directions with shape (..., n).
    """
    theta = np.asarray(theta, dtype=float)
    proj = theta @ xi.columns
    norms = np.linalg.norm(np.atleast_2d(proj), axis=-1)
    norms = np.clip(norms, 0.0, 1.0)
    out = np.arccos(norms)
    return float(out[0]) if theta.ndim == 1 else out.reshape(theta.shape[:-1])


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Integration rule on S^{m-1}: nodes (N, m) and positive weights (N,).

    ``kind`` is ``"product-rule"`` (deterministic, exact on low-degree
    polynomials) or ``"monte-carlo"`` (unbiased, weights sigma_{m-1}/N).
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    seed: int | None = None

    def integrate(self, values_or_fn):
        values = values_or_fn(self.nodes) if callable(values_or_fn) else values_or_fn
        return float(np.asarray(values, dtype=float) @ self.weights)


def _product_rule(m, level):
    if m == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if m == 2:
        count = 2 * (level + 1)
        ang = 2.0 * np.pi * np.arange(count) / count
        nodes = np.column_stack([np.cos(ang), np.sin(ang)])
        weights = np.full(count, 2.0 * np.pi / count)
        return nodes, weights
    sub_nodes, sub_weights = _product_rule(m - 1, level)
    alpha = (m - 3) / 2.0
    t, wt = roots_jacobi(level + 1, alpha, alpha)
    sine = np.sqrt(np.clip(1.0 - t * t, 0.0, 1.0))
    nodes = np.empty((t.size, sub_nodes.shape[0], m))
    nodes[:, :, : m - 1] = sine[:, None, None] * sub_nodes[None, :, :]
    nodes[:, :, m - 1] = t[:, None]
    weights = (wt[:, None] * sub_weights[None, :]).ravel()
    return nodes.reshape(-1, m), weights


def sphere_quadrature(m, level=16, kind="product-rule", source=None, samples=None):
    """Quadrature on S^{m-1}.

    Product rules (m <= 4) integrate polynomials of degree <= 2*level + 1
    exactly: Gauss-Jacobi in each polar variable, uniform nodes in the
    azimuth.  Monte Carlo rules work in any dimension and carry weight
    sigma_{m-1}/samples per node.
    """
    m = int(m)
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    if kind == "product-rule":
        if m > 4:
            raise UnsupportedQuadratureError(
                f"product rules are provided for m <= 4 only, got m={m}; "
                "use kind='monte-carlo'"
            )
        nodes, weights = _product_rule(m, int(level))
        return SphereQuadrature(m, nodes, weights, "product-rule")
    if kind == "monte-carlo":
        if source is None:
            raise ValueError("monte-carlo quadrature needs a RandomSource")
        count = int(samples) if samples is not None else 4096
        nodes = random_directions(source, m, count)
        weights = np.full(count, unit_sphere_area(m) / count)
        return SphereQuadrature(m, nodes, weights, "monte-carlo",
                                seed=as_source(source).seed)
    raise UnsupportedQuadratureError(f"unknown quadrature kind {kind!r}")


def subsphere_nodes(xi, quad):
    """Push a rule on S^{i-1} onto the subsphere ``S^{n-1} \\cap xi``.

    Weights are unchanged, so the rule integrates with the induced measure
    (total mass sigma_{i-1}).  Nodes are returned in ambient coordinates.
    """
    if quad.dim != xi.i:
        raise ValueError(
            f"quadrature lives on S^{quad.dim - 1} but the subspace has i={xi.i}"
        )
    return SphereQuadrature(xi.n, quad.nodes @ xi.columns.T, quad.weights,
                            quad.kind, quad.seed)
