from enum import Enum
import math
from typing import Final

TWO_PI: Final[float] = 2.0 * math.pi

SQRT3_2: Final[float] = math.sqrt(3.0) / 2.0
"""Lowest height of the Γ(1) fundamental domain"""

DET_TOL: Final[float] = 1e-12

MAX_REDUCTION_STEPS: Final[int] = 200

Q_TRUNCATION: Final[int] = 64
"""q-expansion truncation K"""

HOROCYCLE_TOL: Final[float] = 1e-9
"""|k| = 1 band routed to the horocycle formulas"""

SEED_ENV: Final[str] = "WINDING_LAB_SEED"

CSV_FLOAT: Final[str] = ".17e"


class GroupName(str, Enum):
    GAMMA1 = "GAMMA1"
    COMMUTATOR = "COMMUTATOR"
    GAMMA2 = "GAMMA2"

    def __str__(self) -> str:
        return self.value


class FormName(str, Enum):
    OMEGA0 = "OMEGA0"
    ETA4_CUSPFORM = "ETA4_CUSPFORM"

    def __str__(self) -> str:
        return self.value


class FormKind(str, Enum):
    OMEGA0 = "omega0"
    SINGULAR = "singular"
    CUSP = "cusp"

    def __str__(self) -> str:
        return self.value


class Mode(str, Enum):
    BROWNIAN = "brownian"
    GEODESIC = "geodesic"
    EXCURSIONS = "excursions"
    SPHERES = "spheres"
    HITTING_TIME = "hitting-time"

    def __str__(self) -> str:
        return self.value


class IsometryKind(str, Enum):
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    LOXODROMIC = "loxodromic"

    def __str__(self) -> str:
        return self.value


class Branch(str, Enum):
    TAN = "tan"
    TANH = "tanh"
    HOROCYCLE = "horocycle"
    VERTICAL = "vertical"

    def __str__(self) -> str:
        return self.value


class BoundaryPoint(str, Enum):
    """The point ∞ of ∂H²; finite boundary points are plain floats"""

    INFINITY = "inf"

    def __str__(self) -> str:
        return self.value
