"""Structural analysis of rational maps on the Riemann sphere.

A map R = P/Q of degree N >= 2 acts as an N-fold branched self-cover of the
sphere.  This module computes everything the measure engine needs from the
map itself: evaluation in homogeneous coordinates, preimages with local
degrees, branched points and indices, backward-orbit trees, and the
exceptional set with its orbit structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import exact as xq
from .errors import (
    DegreeTooLow,
    ExceptionalSeed,
    InternalConsistencyError,
)
from .polyroots import Poly, roots
from .projective import (
    DEFAULT_CLUSTER_TOL,
    SpherePoint,
    chordal_distance,
    cluster,
    merge_weighted,
)

DEFAULT_ATOM_BUDGET = 2_000_000
# relative threshold below which a leading coefficient counts as a true
# degree drop (a preimage at infinity)
_DEGREE_DROP_TOL = 1e-12

SET_COUNT = "set"
INDEX_WEIGHTED = "index"


class RationalMap:
    """A rational function P/Q with coprime P, Q and degree N >= 2.

    When exact Gaussian-rational coefficients are supplied, coprimality and
    the branch structure are decided exactly; the floating coefficients are
    used for all numeric work.
    """

    def __init__(self, p_coeffs, q_coeffs, exact=None, check: bool = True):
        self.p = Poly(p_coeffs)
        self.q = Poly(q_coeffs)
        self.exact = exact  # (ExactPoly, ExactPoly) or None
        n = max(self.p.degree, self.q.degree)
        if n < 2:
            raise DegreeTooLow(
                f"degree {n} rational map; the construction assumes degree at least two"
            )
        self.n = n
        # homogeneous coefficient vectors of length n+1 (ascending in z)
        self._hp = np.zeros(n + 1, dtype=np.complex128)
        self._hq = np.zeros(n + 1, dtype=np.complex128)
        self._hp[: len(self.p.coeffs)] = self.p.coeffs
        self._hq[: len(self.q.coeffs)] = self.q.coeffs
        self._branch_cache = None
        self._exceptional_cache = None
        if check:
            self._check_coprime()

    @classmethod
    def from_exact(cls, p_exact, q_exact) -> "RationalMap":
        return cls(xq.xp_to_complex(p_exact), xq.xp_to_complex(q_exact), exact=(p_exact, q_exact))

    def _check_coprime(self):
        if self.exact is not None:
            g = xq.xp_gcd(self.exact[0], self.exact[1])
            if xq.xp_degree(g) != 0:
                raise ValueError("P and Q share a common factor; map is not reduced")
            return
        # numeric fallback: no root of Q may be a root of P
        if self.q.degree >= 1:
            for r, _m in roots(self.q, 1e-9):
                scale = max(self.p.eval_scale(r), 1e-300)
                if abs(self.p(r)) <= 1e-7 * scale:
                    raise ValueError("P and Q appear to share a root; map is not reduced")

    # -- evaluation ------------------------------------------------------

    def _form(self, coeffs, z: complex, w: complex) -> complex:
        """Evaluate the degree-n binary form with the given coefficients."""
        if abs(w) >= abs(z):
            t = z / w
            out = 0j
            for c in coeffs[::-1]:
                out = out * t + c
            return out * w**self.n
        t = w / z
        out = 0j
        for c in coeffs:
            out = out * t + c
        return out * z**self.n

    def evaluate(self, p: SpherePoint) -> SpherePoint:
        """Image [P(z,w) : Q(z,w)]; well defined everywhere by coprimality."""
        num = self._form(self._hp, p.z, p.w)
        den = self._form(self._hq, p.z, p.w)
        return SpherePoint(num, den)

    def __call__(self, p: SpherePoint) -> SpherePoint:
        return self.evaluate(p)

    def forward_orbit(self, z: SpherePoint, n: int):
        """[z, R(z), ..., R^n(z)]."""
        out = [z]
        for _ in range(n):
            out.append(self.evaluate(out[-1]))
        return out

    # -- preimages -------------------------------------------------------

    def preimages(self, y: SpherePoint, tol: float = DEFAULT_CLUSTER_TOL):
        """Distinct solutions of R(x) = y with local degrees, sum e(x) = N.

        Solves the binary form w_y P(z,w) - z_y Q(z,w) = 0; trailing
        coefficient drops correspond to preimages at infinity.
        """
        c = y.w * self._hp - y.z * self._hq
        scale = float(np.max(np.abs(c)))
        if scale == 0.0:
            raise InternalConsistencyError("preimage form vanished identically")
        deg = self.n
        while deg > 0 and abs(c[deg]) <= _DEGREE_DROP_TOL * scale:
            deg -= 1
        out = []
        inf_mult = self.n - deg
        if inf_mult > 0:
            out.append((SpherePoint.infinity(), inf_mult))
        if deg >= 1:
            for r, m in roots(Poly(c[: deg + 1]), tol):
                out.append((SpherePoint.from_affine(r), m))
        total = sum(m for _p, m in out)
        if total != self.n:
            raise InternalConsistencyError(
                f"preimage multiplicities sum to {total}, expected {self.n}"
            )
        return out

    # -- branch structure --------------------------------------------------

    def branch_data(self, tol: float = DEFAULT_CLUSTER_TOL, cross_check: bool = True):
        if self._branch_cache is None:
            self._branch_cache = self._compute_branch_data(tol, cross_check)
        return self._branch_cache

    def _compute_branch_data(self, tol, cross_check):
        if self.exact is not None:
            points = self._branch_points_exact()
        else:
            points = self._branch_points_numeric(tol)
        # Riemann-Hurwitz bookkeeping must close exactly
        total = sum(e - 1 for _p, e in points)
        if total != 2 * self.n - 2:
            raise InternalConsistencyError(
                f"sum of (index - 1) over branched points is {total}, "
                f"expected {2 * self.n - 2}"
            )
        if cross_check:
            for pt, e in points:
                # the float image sits ~1e-16 off the true branch value, which
                # can split the order-e root into a cluster of simple roots
                # within ~eps^(1/e); compare total local multiplicity instead
                image = self.evaluate(pt)
                local = sum(
                    m for x, m in self.preimages(image, tol) if chordal_distance(x, pt) <= 1e-5
                )
                if local != e:
                    raise InternalConsistencyError(
                        f"branch index at {pt} is {e} by the Wronskian but the local "
                        f"preimage multiplicity of its image is {local}"
                    )
        values = [rep for rep, _m in cluster([self.evaluate(pt) for pt, _e in points], tol)]
        return BranchData(branch_points=points, branch_values=values)

    def _wronskian_exact(self):
        pe, qe = self.exact
        return xq.xp_sub(
            xq.xp_mul(xq.xp_derivative(pe), qe), xq.xp_mul(pe, xq.xp_derivative(qe))
        )

    def _branch_points_exact(self):
        w = self._wronskian_exact()
        degw = xq.xp_degree(w)
        points = []
        for factor, mult in xq.xp_squarefree_decomposition(w):
            fpoly = Poly(xq.xp_to_complex(factor))
            if fpoly.degree >= 1:
                for r, m in roots(fpoly, 1e-10):
                    if m != 1:
                        raise InternalConsistencyError("square-free factor produced a multiple root")
                    if mult + 1 >= 2:
                        points.append((SpherePoint.from_affine(r), mult + 1))
        inf_mult = (2 * self.n - 2) - degw
        if inf_mult > 0:
            points.append((SpherePoint.infinity(), inf_mult + 1))
        return points

    def _branch_points_numeric(self, tol):
        wp = np.polymul(np.polyder(self.p.coeffs[::-1]), self.q.coeffs[::-1])
        wq = np.polymul(self.p.coeffs[::-1], np.polyder(self.q.coeffs[::-1]))
        width = max(len(wp), len(wq))
        w = np.zeros(width, dtype=np.complex128)
        w[width - len(wp) :] += wp
        w[width - len(wq) :] -= wq
        w = w[::-1]  # ascending
        scale = float(np.max(np.abs(w))) if len(w) else 0.0
        if scale == 0.0:
            raise InternalConsistencyError("Wronskian vanished identically")
        deg = len(w) - 1
        while deg > 0 and abs(w[deg]) <= _DEGREE_DROP_TOL * scale:
            deg -= 1
        points = []
        if deg >= 1:
            for r, m in roots(Poly(w[: deg + 1]), tol):
                points.append((SpherePoint.from_affine(r), m + 1))
        inf_mult = (2 * self.n - 2) - deg
        if inf_mult > 0:
            points.append((SpherePoint.infinity(), inf_mult + 1))
        return points

    # -- orbits ----------------------------------------------------------

    def backward_orbit(
        self,
        z: SpherePoint,
        depth: int,
        weighting: str = SET_COUNT,
        tol: float = DEFAULT_CLUSTER_TOL,
        atom_budget: int = DEFAULT_ATOM_BUDGET,
    ) -> "OrbitTree":
        """Level sets of R^{-k}(z) for k = 0..depth with weights.

        SET_COUNT carries weight 1 per distinct preimage (the measure-level
        pullback of a Dirac mass); INDEX_WEIGHTED carries the normalized
        products of branch indices, so every level has total weight 1 (the
        invariant-measure approximants).  INDEX_WEIGHTED refuses exceptional
        seeds, whose orbit averages do not converge to the invariant measure.
        """
        if depth < 0:
            raise ValueError("depth must be nonnegative")
        if weighting not in (SET_COUNT, INDEX_WEIGHTED):
            raise ValueError(f"unknown weighting {weighting!r}")
        if weighting == INDEX_WEIGHTED:
            report = self.exceptional_points(tol)
            for e in report.points:
                if chordal_distance(e, z) <= tol:
                    raise ExceptionalSeed(
                        f"seed {z} is an exceptional point; index-weighted orbit "
                        "averages require a non-exceptional seed"
                    )
        levels = [[(z, 1.0)]]
        total = 1
        truncated = False
        for _k in range(depth):
            children = []
            for point, weight in levels[-1]:
                for x, e in self.preimages(point, tol):
                    if weighting == SET_COUNT:
                        children.append((x, weight))
                    else:
                        children.append((x, weight * e / self.n))
            merged = merge_weighted(children, tol, sort_first=True)
            if total + len(merged) > atom_budget:
                truncated = True
                break
            total += len(merged)
            levels.append(merged)
        return OrbitTree(levels=levels, weighting=weighting, truncated=truncated)

    # -- exceptional points ------------------------------------------------

    def exceptional_points(self, tol: float = DEFAULT_CLUSTER_TOL) -> "ExceptionalReport":
        if self._exceptional_cache is None:
            self._exceptional_cache = self._compute_exceptional(tol)
        return self._exceptional_cache

    def _compute_exceptional(self, tol):
        """Finite certificate: z with index N is exceptional iff its unique
        preimage u has a unique preimage v lying back in {z, u}.

        Any longer chain of totally ramified points would break the
        Riemann-Hurwitz budget, so depth two decides membership.
        """
        data = self.branch_data(tol)
        candidates = [pt for pt, e in data.branch_points if e == self.n]
        points = []
        for z in candidates:
            pre_z = self.preimages(z, tol)
            if len(pre_z) != 1:
                continue
            u = pre_z[0][0]
            pre_u = self.preimages(u, tol)
            if len(pre_u) != 1:
                continue
            v = pre_u[0][0]
            if chordal_distance(v, z) <= tol or chordal_distance(v, u) <= tol:
                points.append(z)
        points = [rep for rep, _m in cluster(points, tol)] if points else []
        if len(points) > 2:
            raise InternalConsistencyError(
                f"{len(points)} exceptional candidates; at most two are possible"
            )
        if not points:
            return ExceptionalReport(points=[], case_tag="Empty", orbit_classes=[])
        if len(points) == 1:
            z0 = points[0]
            if chordal_distance(self.evaluate(z0), z0) > tol:
                raise InternalConsistencyError("single exceptional point is not fixed")
            return ExceptionalReport(points=points, case_tag="OneFixed", orbit_classes=[[z0]])
        z0, z1 = points
        fixed0 = chordal_distance(self.evaluate(z0), z0) <= tol
        fixed1 = chordal_distance(self.evaluate(z1), z1) <= tol
        if fixed0 and fixed1:
            return ExceptionalReport(
                points=points, case_tag="TwoFixed", orbit_classes=[[z0], [z1]]
            )
        swaps = (
            chordal_distance(self.evaluate(z0), z1) <= tol
            and chordal_distance(self.evaluate(z1), z0) <= tol
        )
        if not swaps:
            raise InternalConsistencyError("two exceptional points neither fixed nor swapped")
        return ExceptionalReport(points=points, case_tag="TwoSwapped", orbit_classes=[[z0, z1]])

    def is_exceptional(self, p: SpherePoint, tol: float = DEFAULT_CLUSTER_TOL) -> bool:
        return any(chordal_distance(e, p) <= tol for e in self.exceptional_points(tol).points)

    def __repr__(self):
        return f"RationalMap(degree={self.n})"


@dataclass
class BranchData:
    """Branched points with indices, and the clustered branch values."""

    branch_points: list
    branch_values: list

    def index_at(self, p: SpherePoint, tol: float = 1e-6) -> int:
        for pt, e in self.branch_points:
            if chordal_distance(pt, p) <= tol:
                return e
        return 1

    def to_jsonable(self):
        return {
            "branch_points": [
                {"point": pt.to_jsonable(), "index": e} for pt, e in self.branch_points
            ],
            "branch_values": [v.to_jsonable() for v in self.branch_values],
        }


@dataclass
class OrbitTree:
    """Backward-orbit levels; level k lists (point, weight) for R^{-k}(root)."""

    levels: list
    weighting: str
    truncated: bool = False

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def level_points(self, k: int):
        return [p for p, _w in self.levels[k]]

    def level_mass(self, k: int) -> float:
        return sum(w for _p, w in self.levels[k])

    def atom_count(self) -> int:
        return sum(len(level) for level in self.levels)


@dataclass
class ExceptionalReport:
    """The exceptional set (at most two points) and its orbit shape."""

    points: list
    case_tag: str  # Empty | OneFixed | TwoFixed | TwoSwapped
    orbit_classes: list = field(default_factory=list)

    def to_jsonable(self):
        return {
            "points": [p.to_jsonable() for p in self.points],
            "case": self.case_tag,
            "orbit_classes": [[p.to_jsonable() for p in cls] for cls in self.orbit_classes],
        }


def analysis_report(R: RationalMap, tol: float = DEFAULT_CLUSTER_TOL) -> dict:
    """JSON-ready structural report: degree, branch data, exceptional set."""
    data = R.branch_data(tol)
    exc = R.exceptional_points(tol)
    out = {"degree": R.n}
    out.update(data.to_jsonable())
    out["exceptional"] = exc.to_jsonable()
    return out
