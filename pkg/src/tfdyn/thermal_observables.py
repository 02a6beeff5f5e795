"""Closed-form finite-temperature quantities.

The thermal vacuum in the doubled space is a two-mode squeezed state whose
squeeze angle theta(beta) encodes the temperature: tanh(theta) = e^{-b*h*w/2}
for bosons and tan(theta) = e^{-b*h*w/2} for fermions.  This module collects
the angle itself, the equilibrium occupations, the post-quench occupation
formula, the normal-ordered position moments <q^(2n)>, and the amplification
factor 1 + 2|nu|^2.  Everything here is an arithmetic identity; the matching
brute-force expectations live in fock_oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "ThermalParameters",
    "theta",
    "equilibrium_occupation",
    "evolved_occupation_boson",
    "q_moment",
    "amplification_factor",
    "EXP_ARG_MAX",
]

# Largest b*hbar*omega fed to exp(); e^700 is near the double-precision
# ceiling.  Beyond it the zero-temperature limits are returned exactly.
EXP_ARG_MAX = 700.0

_STATISTICS = ("boson", "fermion")


def _check_positive(**values: float) -> None:
    for name, value in values.items():
        if not (value > 0.0 and math.isfinite(value)):
            raise ValueError(f"{name} must be positive and finite, got {value}")


def theta(beta: float, omega: float, hbar: float = 1.0, statistics: str = "boson") -> float:
    """Squeeze angle of the thermal vacuum.

    Bosons: cosh(theta) = (1 - e^{-b*h*w})^{-1/2}, i.e.
    theta = artanh(e^{-b*h*w/2}); fermions: cos(theta) = (1 + e^{-b*h*w})^{-1/2},
    i.e. theta = arctan(e^{-b*h*w/2}).  Always >= 0, and -> 0 as T -> 0.
    """
    _check_positive(beta=beta, omega=omega, hbar=hbar)
    if statistics not in _STATISTICS:
        raise ValueError(f"unknown statistics {statistics!r}")
    x = beta * hbar * omega
    if x > EXP_ARG_MAX:
        return 0.0
    half = math.exp(-0.5 * x)
    return math.atanh(half) if statistics == "boson" else math.atan(half)


@dataclass(frozen=True)
class ThermalParameters:
    """Temperature bundle (beta, omega_ref, hbar, statistics) with its angle."""

    beta: float
    omega_ref: float
    hbar: float = 1.0
    statistics: str = "boson"
    theta: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "theta", theta(self.beta, self.omega_ref, self.hbar, self.statistics)
        )

    @property
    def occupation(self) -> float:
        return equilibrium_occupation(self.beta, self.omega_ref, self.hbar, self.statistics)

    @property
    def tangent(self) -> float:
        """tanh(theta) (boson) or tan(theta) (fermion): the pair amplitude e^{-b*h*w/2}."""
        return math.tanh(self.theta) if self.statistics == "boson" else math.tan(self.theta)


def equilibrium_occupation(
    beta: float, omega: float, hbar: float = 1.0, statistics: str = "boson"
) -> float:
    """Mean occupation 1/(e^{b*h*w} -+ 1): sinh^2(theta) or sin^2(theta)."""
    _check_positive(beta=beta, omega=omega, hbar=hbar)
    if statistics not in _STATISTICS:
        raise ValueError(f"unknown statistics {statistics!r}")
    x = beta * hbar * omega
    if x > EXP_ARG_MAX:
        return 0.0
    if statistics == "boson":
        return 1.0 / math.expm1(x)
    return 1.0 / (math.exp(x) + 1.0)


def evolved_occupation_boson(nu: complex, beta: float, omega: float, hbar: float = 1.0) -> float:
    """Occupation of the out-mode after a quench that produced nu.

    nu*nu + (1 + 2 nu*nu)/(e^{b*h*w} - 1): the produced pairs plus the
    thermal population amplified by the squeezing.  beta and omega are
    the *initial* equilibrium parameters.
    """
    n_pair = abs(nu) ** 2
    return n_pair + (1.0 + 2.0 * n_pair) * equilibrium_occupation(beta, omega, hbar, "boson")


def q_moment(n: int, v: complex, theta: float, hbar: float = 1.0) -> float:
    """Normal-ordered position moment <q^(2n)> for the boson thermal state.

    (2n)!/(2^n n!) * (hbar |v|^2)^n * (1 + 2 sinh^2 theta)^n, with v the mode
    function value at the evaluation time.  The combinatorial prefactor is the
    Gaussian (2n-1)!!, so <q^4>/<q^2>^2 = 3 regardless of v and theta.
    """
    if not isinstance(n, int) or n < 1:
        raise ValueError(f"moment order n must be a positive integer, got {n!r}")
    prefactor = math.factorial(2 * n) / (2**n * math.factorial(n))
    width = hbar * abs(v) ** 2 * (1.0 + 2.0 * math.sinh(theta) ** 2)
    return prefactor * width**n


def amplification_factor(nu: complex) -> float:
    """Thermal-population amplification 1 + 2|nu|^2 >= 1."""
    return 1.0 + 2.0 * abs(nu) ** 2
