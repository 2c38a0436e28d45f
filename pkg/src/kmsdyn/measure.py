"""Atomic measures, test-function libraries, and the transfer operators.

Every measure handled here is a finite weighted sum of Dirac atoms, either on
the Riemann sphere or on the plane/line.  Diffuse limits (invariant measures
of maximal entropy, self-similar measures) exist only as sequences of atomic
approximants compared in a finite test-function library, which acts as a
fixed proxy for the weak-* topology.

The operators:
    pullback_F   F(delta_y) = sum over distinct preimages x of delta_x
    pullback_G   adds the branch index: atoms (x, e(x) w); mass scales by N
    apply_F_beta e^{-beta} F
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from .errors import AtomBudgetExceeded, NotSubinvariant
from .projective import (
    DEFAULT_CLUSTER_TOL,
    SpherePoint,
    _SphereHash,
    chordal_distance,
    merge_weighted,
)
from .ratmap import DEFAULT_ATOM_BUDGET, RationalMap

PLANAR_MERGE_TOL = 1e-9

SPHERE = "sphere"
PLANE = "plane"


# ---------------------------------------------------------------------------
# planar merging


def merge_planar(coords, weights, tol: float = PLANAR_MERGE_TOL):
    """Merge planar atoms closer than tol; weights add, centroids average.

    Cell-quantized so exact collisions merge in O(n); a second pass links
    occupied adjacent cells whose representatives actually sit within tol.
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=np.float64))
    weights = np.asarray(weights, dtype=np.float64)
    if coords.shape[0] == 0:
        return coords, weights
    cells = np.round(coords / tol).astype(np.int64)
    uniq, inverse = np.unique(cells, axis=0, return_inverse=True)
    inverse = np.ravel(inverse)  # shape differs across numpy versions
    wsum = np.bincount(inverse, weights=weights)
    reps = np.empty((len(uniq), coords.shape[1]))
    for d in range(coords.shape[1]):
        reps[:, d] = np.bincount(inverse, weights=weights * coords[:, d]) / wsum

    pairs = _adjacent_cell_pairs(uniq)
    close = [(i, j) for i, j in pairs if np.linalg.norm(reps[i] - reps[j]) <= tol]
    if not close:
        return reps, wsum
    parent = np.arange(len(uniq))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in close:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri
    while True:
        compressed = parent[parent]
        if np.array_equal(compressed, parent):
            break
        parent = compressed
    wgrp = np.bincount(parent, weights=wsum, minlength=len(uniq))
    keep = wgrp > 0
    out = np.empty((int(keep.sum()), coords.shape[1]))
    for d in range(coords.shape[1]):
        out[:, d] = np.bincount(parent, weights=wsum * reps[:, d], minlength=len(uniq))[keep]
    out /= wgrp[keep, None]
    return out, wgrp[keep]


def _adjacent_cell_pairs(uniq):
    """Index pairs of occupied cells that are grid neighbors."""
    dim = uniq.shape[1]
    if dim == 1:
        order = np.argsort(uniq[:, 0])
        vals = uniq[order, 0]
        hits = np.nonzero(np.diff(vals) == 1)[0]
        return [(int(order[k]), int(order[k + 1])) for k in hits]
    # positive half of the 3^dim neighborhood; mirrors are covered symmetrically
    offsets = [tuple(v - 1 for v in off) for off in np.ndindex(*(3,) * dim)]
    offsets = [off for off in offsets if off > (0,) * dim]
    mins = uniq.min(axis=0)
    spans = uniq.max(axis=0) - mins + 3  # 2 slack cells prevent key wrap-around
    if float(np.prod(spans.astype(np.float64))) < 2.0**62:
        shifted = (uniq - mins).astype(np.int64)
        key = shifted[:, 0].copy()
        for d in range(1, dim):
            key = key * spans[d] + shifted[:, d]
        order = np.argsort(key)
        skey = key[order]
        pairs = []
        for off in offsets:
            delta = np.int64(off[0])
            for d in range(1, dim):
                delta = delta * spans[d] + off[d]
            probe = key + delta
            pos = np.searchsorted(skey, probe)
            pos_c = np.minimum(pos, len(skey) - 1)
            valid = skey[pos_c] == probe
            for i in np.nonzero(valid)[0]:
                pairs.append((int(i), int(order[pos_c[i]])))
        return pairs
    lookup = {tuple(c): i for i, c in enumerate(uniq)}
    pairs = []
    for i, c in enumerate(uniq):
        for off in offsets:
            j = lookup.get(tuple(c + np.array(off)))
            if j is not None:
                pairs.append((i, j))
    return pairs


# ---------------------------------------------------------------------------
# atomic measures


class AtomicMeasure:
    """A finite positive weighted sum of Dirac atoms."""

    def __init__(self, space, points=None, coords=None, weights=None, info=None):
        self.space = space
        self.info = info
        if space == SPHERE:
            self.points = list(points or [])
            self.coords = None
            self.weights = np.array(
                weights if weights is not None else [], dtype=np.float64
            )
            if len(self.points) != len(self.weights):
                raise ValueError("points and weights length mismatch")
        elif space == PLANE:
            arr = np.atleast_2d(np.asarray(coords if coords is not None else np.zeros((0, 1))))
            self.points = None
            self.coords = arr.astype(np.float64, copy=True)
            self.weights = np.array(
                weights if weights is not None else [], dtype=np.float64
            )
            if self.coords.shape[0] != len(self.weights):
                raise ValueError("coords and weights length mismatch")
        else:
            raise ValueError(f"unknown space {space!r}")
        if np.any(self.weights <= 0):
            raise ValueError("atom weights must be positive")
        self._embedding = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_sphere_atoms(pairs, tol: float = DEFAULT_CLUSTER_TOL, merge: bool = True, info=None):
        pairs = list(pairs)
        if merge:
            pairs = merge_weighted(pairs, tol, sort_first=True)
        pts = [p for p, _w in pairs]
        ws = [w for _p, w in pairs]
        return AtomicMeasure(SPHERE, points=pts, weights=ws, info=info)

    @staticmethod
    def delta(point: SpherePoint) -> "AtomicMeasure":
        return AtomicMeasure(SPHERE, points=[point], weights=[1.0])

    @staticmethod
    def from_planar_atoms(coords, weights, tol: float = PLANAR_MERGE_TOL, merge: bool = True, info=None):
        coords = np.atleast_2d(np.asarray(coords, dtype=np.float64))
        weights = np.asarray(weights, dtype=np.float64)
        if merge and coords.shape[0]:
            coords, weights = merge_planar(coords, weights, tol)
        return AtomicMeasure(PLANE, coords=coords, weights=weights, info=info)

    @staticmethod
    def delta_plane(coord) -> "AtomicMeasure":
        arr = np.atleast_1d(np.asarray(coord, dtype=np.float64))
        return AtomicMeasure(PLANE, coords=arr[None, :], weights=[1.0])

    # -- basics -------------------------------------------------------------

    @property
    def n_atoms(self) -> int:
        return len(self.weights)

    def total_mass(self) -> float:
        return float(self.weights.sum()) if len(self.weights) else 0.0

    def iter_atoms(self):
        if self.space == SPHERE:
            yield from zip(self.points, self.weights)
        else:
            yield from zip(self.coords, self.weights)

    def scaled(self, c: float) -> "AtomicMeasure":
        if c <= 0:
            raise ValueError("scale factor must be positive")
        if self.space == SPHERE:
            return AtomicMeasure(SPHERE, points=self.points, weights=self.weights * c)
        return AtomicMeasure(PLANE, coords=self.coords, weights=self.weights * c)

    def normalized(self) -> "AtomicMeasure":
        return self.scaled(1.0 / self.total_mass())

    def embedding(self):
        """Coordinate matrix: sphere embedding (n, 3) or plane coords (n, d)."""
        if self.space == PLANE:
            return self.coords
        if self._embedding is None:
            self._embedding = np.array([p.embedding() for p in self.points]).reshape(-1, 3)
        return self._embedding

    def point_mass(self, point, tol=None) -> float:
        """Total weight within tol of the given point."""
        if self.space == SPHERE:
            tol = DEFAULT_CLUSTER_TOL if tol is None else tol
            return sum(
                w for p, w in zip(self.points, self.weights) if chordal_distance(p, point) <= tol
            )
        tol = PLANAR_MERGE_TOL if tol is None else tol
        point = np.atleast_1d(np.asarray(point, dtype=np.float64))
        if self.n_atoms == 0:
            return 0.0
        d = np.linalg.norm(self.coords - point[None, :], axis=1)
        return float(self.weights[d <= tol].sum())

    def to_jsonable(self):
        if self.space == SPHERE:
            atoms = [
                {"point": p.to_jsonable(), "weight": float(w)}
                for p, w in zip(self.points, self.weights)
            ]
        else:
            atoms = [
                {"point": [float(v) for v in c], "weight": float(w)}
                for c, w in zip(self.coords, self.weights)
            ]
        return {"atoms": atoms, "total_mass": self.total_mass()}

    def __repr__(self):
        return f"AtomicMeasure({self.space}, {self.n_atoms} atoms, mass={self.total_mass():.6g})"


def measure_sum(measures, tol=None) -> AtomicMeasure:
    """Sum of measures on a common space, atoms merged."""
    measures = [m for m in measures if m.n_atoms > 0]
    if not measures:
        raise ValueError("empty sum; build an explicit empty measure instead")
    space = measures[0].space
    if any(m.space != space for m in measures):
        raise ValueError("cannot sum measures on different spaces")
    if space == SPHERE:
        pairs = [(p, w) for m in measures for p, w in m.iter_atoms()]
        return AtomicMeasure.from_sphere_atoms(pairs, tol or DEFAULT_CLUSTER_TOL)
    coords = np.concatenate([m.coords for m in measures])
    weights = np.concatenate([m.weights for m in measures])
    return AtomicMeasure.from_planar_atoms(coords, weights, tol or PLANAR_MERGE_TOL)


def empty_measure(space: str, dim: int = 1) -> AtomicMeasure:
    if space == SPHERE:
        return AtomicMeasure(SPHERE, points=[], weights=[])
    return AtomicMeasure(PLANE, coords=np.zeros((0, dim)), weights=[])


# ---------------------------------------------------------------------------
# test-function library


@dataclass(frozen=True)
class TestFunction:
    """A monomial in the embedding coordinates with its recorded sup norm."""

    exponents: tuple
    sup_norm: float

    def evaluate_matrix(self, X):
        out = np.ones(X.shape[0])
        for d, e in enumerate(self.exponents):
            if e:
                out = out * X[:, d] ** e
        return out

    def __call__(self, point):
        if isinstance(point, SpherePoint):
            x = np.array(point.embedding())
        else:
            x = np.atleast_1d(np.asarray(point, dtype=np.float64))
        out = 1.0
        for d, e in enumerate(self.exponents):
            if e:
                out *= x[d] ** e
        return out


class TestFunctionLibrary:
    """Monomials of total degree <= d separating the measures at desk scale.

    On the sphere the variables are the three unit-sphere embedding
    coordinates; on the plane they are the raw coordinates, with sup norms
    taken over a stated bounding box.
    """

    __test__ = False  # not a pytest class despite the name

    def __init__(self, space, functions, degree, box=None):
        self.space = space
        self.functions = functions
        self.degree = degree
        self.box = box

    @staticmethod
    def sphere(degree: int = 4) -> "TestFunctionLibrary":
        funcs = []
        for total in range(degree + 1):
            for a in range(total + 1):
                for b in range(total - a + 1):
                    c = total - a - b
                    funcs.append(TestFunction((a, b, c), _sphere_monomial_sup(a, b, c)))
        return TestFunctionLibrary(SPHERE, funcs, degree)

    @staticmethod
    def plane(degree: int = 4, box=((0.0, 1.0), (0.0, 1.0))) -> "TestFunctionLibrary":
        box = tuple(tuple(map(float, b)) for b in box)
        dim = len(box)
        funcs = []
        for total in range(degree + 1):
            for combo in combinations_with_replacement(range(dim), total):
                exps = [0] * dim
                for d in combo:
                    exps[d] += 1
                sup = 1.0
                for d, e in enumerate(exps):
                    sup *= max(abs(box[d][0]), abs(box[d][1])) ** e
                funcs.append(TestFunction(tuple(exps), sup))
        return TestFunctionLibrary(PLANE, funcs, degree, box=box)

    def __len__(self):
        return len(self.functions)

    def values_matrix(self, X):
        """(n_funcs, n_points) matrix of function values at rows of X."""
        return np.array([f.evaluate_matrix(X) for f in self.functions])

    def integrate_all(self, mu: AtomicMeasure):
        if mu.n_atoms == 0:
            return np.zeros(len(self.functions))
        return self.values_matrix(mu.embedding()) @ mu.weights


def _sphere_monomial_sup(a, b, c):
    """max of |x^a y^b z^c| on the unit sphere (AM-GM optimum)."""
    s = a + b + c
    if s == 0:
        return 1.0
    val = 1.0
    for e in (a, b, c):
        if e:
            val *= (e / s) ** e
    return math.sqrt(val)


# ---------------------------------------------------------------------------
# integration and transfer operators


def _as_callable(f):
    if isinstance(f, TestFunction):
        return f
    if callable(f):
        return f
    const = float(f)
    return lambda _p: const


def integrate(mu: AtomicMeasure, f) -> float:
    """sum w_i f(x_i)."""
    if mu.n_atoms == 0:
        return 0.0
    if isinstance(f, TestFunction):
        return float(f.evaluate_matrix(mu.embedding()) @ mu.weights)
    g = _as_callable(f)
    return float(sum(w * g(p) for p, w in mu.iter_atoms()))


def tilde(R: RationalMap, f, y: SpherePoint, tol: float = DEFAULT_CLUSTER_TOL) -> float:
    """Set-sum of f over the distinct preimages of y (no index weights).

    This is the generally discontinuous integrand dual to pullback_F.
    """
    g = _as_callable(f)
    return float(sum(g(x) for x, _e in R.preimages(y, tol)))


def pullback_F(
    R: RationalMap,
    mu: AtomicMeasure,
    tol: float = DEFAULT_CLUSTER_TOL,
    atom_budget: int = DEFAULT_ATOM_BUDGET,
) -> AtomicMeasure:
    """Transfer-operator pullback: each atom spreads over its distinct preimages."""
    _require_sphere(mu)
    if mu.n_atoms * R.n > atom_budget:
        raise AtomBudgetExceeded(
            f"pullback would create up to {mu.n_atoms * R.n} atoms (budget {atom_budget})"
        )
    children = []
    for p, w in mu.iter_atoms():
        for x, _e in R.preimages(p, tol):
            children.append((x, w))
    return AtomicMeasure.from_sphere_atoms(children, tol)


def pullback_G(
    R: RationalMap,
    mu: AtomicMeasure,
    tol: float = DEFAULT_CLUSTER_TOL,
    atom_budget: int = DEFAULT_ATOM_BUDGET,
) -> AtomicMeasure:
    """Index-weighted pullback; total mass multiplies by exactly N."""
    _require_sphere(mu)
    if mu.n_atoms * R.n > atom_budget:
        raise AtomBudgetExceeded(
            f"pullback would create up to {mu.n_atoms * R.n} atoms (budget {atom_budget})"
        )
    children = []
    for p, w in mu.iter_atoms():
        for x, e in R.preimages(p, tol):
            children.append((x, w * e))
    return AtomicMeasure.from_sphere_atoms(children, tol)


def apply_F_beta(
    R: RationalMap,
    mu: AtomicMeasure,
    beta: float,
    tol: float = DEFAULT_CLUSTER_TOL,
    atom_budget: int = DEFAULT_ATOM_BUDGET,
) -> AtomicMeasure:
    """F_beta = e^{-beta} F."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    return pullback_F(R, mu, tol, atom_budget).scaled(math.exp(-beta))


def weak_star_distance(mu: AtomicMeasure, nu: AtomicMeasure, lib: TestFunctionLibrary) -> float:
    """max over the library of |int f dmu - int f dnu| / sup-norm(f)."""
    if mu.space != nu.space:
        raise ValueError("measures live on different spaces")
    gaps = np.abs(lib.integrate_all(mu) - lib.integrate_all(nu))
    sups = np.array([f.sup_norm for f in lib.functions])
    return float(np.max(gaps / sups)) if len(gaps) else 0.0


# ---------------------------------------------------------------------------
# finite/infinite decomposition


@dataclass
class TraceDecomposition:
    finite_part: AtomicMeasure
    infinite_part: AtomicMeasure
    residual: float
    clipped_mass: float


def decompose_trace(
    R: RationalMap,
    mu: AtomicMeasure,
    beta: float,
    n_max: int,
    lib: TestFunctionLibrary | None = None,
    tol: float = DEFAULT_CLUSTER_TOL,
    neg_tol: float = 1e-6,
    atom_budget: int = DEFAULT_ATOM_BUDGET,
) -> TraceDecomposition:
    """Split a (K2-subinvariant) measure into finite and infinite parts.

    mu0 = mu - F_beta(mu) must be nonnegative up to tolerance; the finite
    part is the partial geometric series over mu0 and the infinite part is
    F_beta^{n_max}(mu).  The reported residual is the library distance
    between mu and finite + infinite, which vanishes as n_max grows for
    genuine trace-condition measures.
    """
    _require_sphere(mu)
    fmu = apply_F_beta(R, mu, beta, tol, atom_budget)

    # signed subtraction mu - fmu, clipping small negative atoms
    grid = _SphereHash(tol)
    pts = list(mu.points)
    wts = list(mu.weights.astype(float))
    for i, p in enumerate(pts):
        grid.insert(p, i)
    clipped = 0.0
    for q, w in fmu.iter_atoms():
        idx = grid.find(q)
        if idx is None:
            if w > neg_tol:
                raise NotSubinvariant(
                    f"mu - F_beta(mu) has an atom of weight {-w:.3e} at {q}"
                )
            clipped += w
            continue
        wts[idx] -= w
    mu0_pairs = []
    for p, w in zip(pts, wts):
        if w < -neg_tol:
            raise NotSubinvariant(f"mu - F_beta(mu) has an atom of weight {w:.3e} at {p}")
        if w <= 0.0:
            clipped += -w if w < 0 else 0.0
            continue
        mu0_pairs.append((p, w))

    if mu0_pairs:
        mu0 = AtomicMeasure.from_sphere_atoms(mu0_pairs, tol)
        terms = [mu0]
        current = mu0
        for _ in range(n_max):
            current = apply_F_beta(R, current, beta, tol, atom_budget)
            terms.append(current)
        finite = measure_sum(terms, tol)
    else:
        finite = empty_measure(SPHERE)

    infinite = mu
    for _ in range(n_max):
        infinite = apply_F_beta(R, infinite, beta, tol, atom_budget)

    lib = lib or TestFunctionLibrary.sphere()
    if finite.n_atoms or infinite.n_atoms:
        recon = measure_sum([m for m in (finite, infinite) if m.n_atoms], tol)
        residual = weak_star_distance(mu, recon, lib)
    else:
        residual = weak_star_distance(mu, empty_measure(SPHERE), lib)
    return TraceDecomposition(finite, infinite, residual, clipped_mass=clipped)


def _require_sphere(mu: AtomicMeasure):
    if mu.space != SPHERE:
        raise ValueError("operation requires a sphere measure")
