"""Result types shared by the rational-map and IFS classification engines."""

from __future__ import annotations

from dataclasses import dataclass, field

FINITE_TYPE = "finite"
INFINITE_TYPE = "infinite"
ZERO_TYPE = "zero"

SUBCRITICAL = "Subcritical"
CRITICAL = "Critical"
SUPERCRITICAL = "Supercritical"
ZERO = "Zero"


def _anchor_jsonable(anchor):
    if anchor is None:
        return None
    if isinstance(anchor, str):
        return anchor
    if hasattr(anchor, "to_jsonable"):
        return anchor.to_jsonable()
    try:
        return [float(v) for v in anchor]
    except TypeError:
        return float(anchor)


@dataclass
class KMSMeasure:
    """A constructed KMS-state restriction: a normalized atomic measure.

    normalization is the geometric-series prefactor; tail_bound controls the
    truncated mass, so total mass sits within tail_bound of 1.
    """

    measure: object
    anchor: object
    beta: float
    kind: str
    normalization: float
    truncation_depth: int
    tail_bound: float

    def to_jsonable(self, atoms_ref=None):
        out = {
            "kind": self.kind,
            "anchor": _anchor_jsonable(self.anchor),
            "beta": self.beta,
            "normalization": self.normalization,
            "truncation_depth": self.truncation_depth,
            "tail_bound": self.tail_bound,
            "total_mass": self.measure.total_mass(),
        }
        if atoms_ref is not None:
            out["atoms_ref"] = atoms_ref
        return out


@dataclass
class ExtremeState:
    """One extreme state in a phase report, identified by kind and anchor."""

    kind: str
    anchors: tuple = ()
    label: str = ""
    restriction: object = None  # AtomicMeasure when cheaply available

    def to_jsonable(self):
        if self.label and not self.anchors:
            anchor = self.label
        elif len(self.anchors) == 1:
            anchor = _anchor_jsonable(self.anchors[0])
        else:
            anchor = [_anchor_jsonable(a) for a in self.anchors]
        return {"kind": self.kind, "anchor": anchor}


@dataclass
class PhaseReport:
    """Extreme KMS states at one inverse temperature."""

    beta: float
    regime: str
    extreme_states: list = field(default_factory=list)
    counts: tuple = (0, 0)  # (finite, infinite)

    def to_jsonable(self):
        return {
            "beta": self.beta,
            "regime": self.regime,
            "states": [s.to_jsonable() for s in self.extreme_states],
            "counts": {"finite": self.counts[0], "infinite": self.counts[1]},
        }


@dataclass
class ResidualReport:
    """Outcome of a K1-type equality check: max |residual| over the library.

    masked_mass is the measure's weight within the cutoff transition zone,
    the part of the measure the branch-set cutoff blinds the check to.
    """

    max_residual: float
    worst_function: tuple = ()
    per_function: list = field(default_factory=list)
    cutoff_radius: float = 0.0
    masked_mass: float = 0.0

    def to_jsonable(self):
        return {
            "max_residual": self.max_residual,
            "worst_function": list(self.worst_function),
            "cutoff_radius": self.cutoff_radius,
            "masked_mass": self.masked_mass,
        }


@dataclass
class ViolationReport:
    """Outcome of a K2-type positivity check.

    max_violation aggregates the library sweep and the atomwise point-mass
    inequalities; point_mass_equality_residual tracks the atomwise equality
    at non-branch atoms.
    """

    max_violation: float
    function_violation: float
    point_mass_violation: float
    point_mass_equality_residual: float

    def to_jsonable(self):
        return {
            "max_violation": self.max_violation,
            "function_violation": self.function_violation,
            "point_mass_violation": self.point_mass_violation,
            "point_mass_equality_residual": self.point_mass_equality_residual,
        }
