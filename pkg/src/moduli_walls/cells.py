"""Critical points of the distinguished differential and cell coordinates."""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, WeightOutOfRange

WALL_TOL = 1e-10


class GraphType(str, enum.Enum):
    GammaPlus = "GammaPlus"
    GammaZero = "GammaZero"
    GammaMinus = "GammaMinus"
    Unsupported = "Unsupported"


FIELDS = {
    GraphType.GammaZero: ("H1", "H2", "W"),
    GraphType.GammaPlus: ("H0", "H1", "H2", "W"),
    GraphType.GammaMinus: ("H1", "H2", "W1", "W2"),
}


@dataclass(frozen=True)
class CriticalSet:
    """Roots of x**2 + a x + b and the discriminant a**2 - 4 b."""

    z1: complex
    z2: complex
    dsc: float

    @property
    def kind(self):
        if self.dsc > 0:
            return "real"
        if self.dsc < 0:
            return "complex"
        return "double"


def critical_points(D):
    """Zeros of the numerator, by the cancellation-free quadratic formula.

    Real pairs come sorted ascending, a conjugate pair with the upper root
    first.
    """
    a, b = float(D.a), float(D.b)
    dsc = a * a - 4.0 * b
    if dsc > 0:
        q = -0.5 * (a + np.copysign(np.sqrt(dsc), a if a != 0 else 1.0))
        r1, r2 = q, (b / q if q != 0 else -a - q)
        lo, hi = sorted((r1, r2))
        return CriticalSet(complex(lo), complex(hi), dsc)
    if dsc < 0:
        s = 0.5 * np.sqrt(-dsc)
        return CriticalSet(complex(-0.5 * a, s), complex(-0.5 * a, -s), dsc)
    return CriticalSet(complex(-0.5 * a), complex(-0.5 * a), 0.0)


@dataclass(frozen=True)
class CellCoordinates:
    """Tagged weight record of a cell.

    ``values`` follows :data:`FIELDS` for the tag: GammaZero (H1, H2, W),
    GammaPlus (H0, H1, H2, W), GammaMinus (H1, H2, W1, W2).
    """

    kind: GraphType
    values: tuple

    def __post_init__(self):
        kind = GraphType(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in FIELDS:
            raise ValidationError(f"no coordinates for {kind.value}")
        vals = tuple(float(v) for v in self.values)
        if len(vals) != len(FIELDS[kind]):
            raise ValidationError(f"{kind.value} needs {len(FIELDS[kind])} weights")
        object.__setattr__(self, "values", vals)

    @classmethod
    def make(cls, kind, **kw):
        kind = GraphType(kind)
        return cls(kind, tuple(kw[f] for f in FIELDS[kind]))

    def __getitem__(self, name):
        return self.values[FIELDS[self.kind].index(name)]

    def as_dict(self):
        return dict(zip(FIELDS[self.kind], self.values))

    @property
    def vector(self):
        return np.array(self.values)

    def violations(self):
        """List of violated polyhedron inequalities (empty if admissible)."""
        d = self.as_dict()
        out = [f"{k} <= 0" for k, v in d.items() if not v > 0]
        h = 2.0 * (d["H1"] + d["H2"])
        if self.kind is GraphType.GammaPlus:
            if not d["H0"] + h < np.pi:
                out.append("H0 + 2(H1 + H2) >= pi")
        elif not h < np.pi:
            out.append("2(H1 + H2) >= pi")
        if self.kind is GraphType.GammaMinus and not d["W1"] < d["W2"]:
            out.append("W1 >= W2")
        return out

    def validate(self):
        v = self.violations()
        if v:
            raise WeightOutOfRange(f"{self.kind.value} weights out of range: {', '.join(v)}")
        return self

    def to_json(self):
        return {"type": self.kind.value, **self.as_dict()}

    @classmethod
    def from_json(cls, obj):
        try:
            kind = GraphType(obj["type"])
            return cls(kind, tuple(obj[f] for f in FIELDS[kind]))
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationError(f"malformed cell coordinates: {obj!r}") from exc
