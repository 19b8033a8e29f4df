"""Radial profiles rho(omega) defining star-shaped surfaces as radial graphs."""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from staticineq.errors import DomainError


@dataclass(frozen=True)
class SphereProfile:
    r0: float

    def __call__(self, omega: np.ndarray) -> np.ndarray:
        return np.full(np.atleast_2d(omega).shape[0], float(self.r0))

    @property
    def spec(self) -> str:
        return f"sphere:{self.r0:g}"


@dataclass(frozen=True)
class EllipsoidProfile:
    """Ellipsoid with semi-axes (a, b, c) centred at the base point."""
    axes: Tuple[float, ...]

    def __call__(self, omega: np.ndarray) -> np.ndarray:
        omega = np.atleast_2d(omega)
        axes = np.asarray(self.axes, dtype=float)
        return 1.0 / np.sqrt(np.sum((omega / axes) ** 2, axis=1))

    @property
    def spec(self) -> str:
        return "ellipsoid:" + ",".join(f"{a:g}" for a in self.axes)


@dataclass(frozen=True)
class PerturbedProfile:
    """rho = r0 * (1 + amplitude * omega_axis), axis counted from 1."""
    r0: float
    amplitude: float
    axis: int = 1

    def __call__(self, omega: np.ndarray) -> np.ndarray:
        omega = np.atleast_2d(omega)
        return self.r0 * (1.0 + self.amplitude * omega[:, self.axis - 1])

    @property
    def spec(self) -> str:
        return f"perturbed:{self.r0:g},{self.amplitude:g},{self.axis}"


def parse_profile(spec: str, n: int = 3):
    """Parse 'sphere:1.0', 'ellipsoid:1,1,0.8' or 'perturbed:1,0.1,1'."""
    name, _, args = spec.partition(":")
    try:
        values = [float(v) for v in args.split(",") if v.strip()]
    except ValueError:
        raise DomainError(f"malformed profile parameters in '{spec}'")
    name = name.strip().lower()

    if name == "sphere" and len(values) == 1:
        profile = SphereProfile(values[0])
    elif name == "ellipsoid" and len(values) == n:
        profile = EllipsoidProfile(tuple(values))
    elif name == "perturbed" and len(values) in (2, 3):
        axis = int(values[2]) if len(values) == 3 else 1
        if not 1 <= axis <= n:
            raise DomainError(f"perturbation axis {axis} out of range 1..{n}")
        if abs(values[1]) >= 1.0:
            raise DomainError("perturbation amplitude must be below 1 to keep rho positive")
        profile = PerturbedProfile(values[0], values[1], axis)
    else:
        raise DomainError(f"unknown or malformed profile '{spec}'")

    if min(values[:n] if name == "ellipsoid" else values[:1]) <= 0:
        raise DomainError(f"profile radii must be positive in '{spec}'")
    return profile
