"""Numerical tolerances shared by every module."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    geom: float = 1e-8  # boundary / tangency residuals (level-function units)
    dca: float = 1e-10  # distance of closest approach
    taylor: float = 1e-9  # collinearity of a1 with nu . U
    class_: float = 1e-9  # sign thresholds on a1, a2
    overlap: float = 1e-8  # smallest area counted as positive


TOL = Tolerances()

BOUNDARY_SAMPLES = 256
NEWTON_STEPS = 8
