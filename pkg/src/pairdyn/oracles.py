"""Closed-form references the numerical pipeline must reproduce.

Uniform-field moments, the analytic propagator blocks they come from, the
three-dimensional golden-rule atom-number rate, and the collinear
short-time correlation asymptote.  All of these are exact targets for the
matrix-free machinery, so they are kept free of any code they validate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .lattice import GridSpec, negate_index
from .system_matrix import PhysicalParams

_SMALL_X = 1e-2


@dataclass(frozen=True)
class UniformSolution:
    """Dimensionless parameters of the uniform-field closed forms.

    Both branches of sqrt(delta_k^2 - q*gamma0^2) are handled through the
    principal complex square root; the closed forms are even in the root,
    so the branch choice cannot change any value.
    """

    gamma0: float
    delta_k: float
    q: int

    @property
    def root(self) -> complex:
        return complex(np.sqrt(complex(self.delta_k**2 - self.q * self.gamma0**2)))


def _sin_over_r(r: complex, t: float) -> complex:
    """sin(r t)/r with the analytic r -> 0 limit (degenerate sinc)."""
    x = r * t
    if abs(x) < 1e-8:
        return t * (1.0 - x * x / 6.0)
    return np.sin(x) / r


def uniform_moments(sol: UniformSolution, t: float):
    """Occupation n_k(t) and pairing amplitude m_k(t) for a uniform field.

    n = gamma0^2 * (sin(rt)/r)^2 and
    m = gamma0 * cos(rt) * sin(rt)/r - i * gamma0 * delta * (sin(rt)/r)^2
    with r = sqrt(delta^2 - q gamma0^2); oscillatory for fermions,
    exponentially growing on the bosonic resonance branch.
    """
    if t < 0:
        raise ValidationError("time must be >= 0")
    r = sol.root
    s = _sin_over_r(r, t)
    c = np.cos(r * t)
    n = sol.gamma0**2 * s * s
    m = sol.gamma0 * c * s - 1j * sol.gamma0 * sol.delta_k * s * s
    return float(n.real), complex(m)


def uniform_blocks(gamma0: float, q: int, delta: np.ndarray, grid: GridSpec):
    """Analytic M11 (diagonal) and M12 (anti-diagonal) for a uniform field.

    M11[m, m] = cos(r_m t) - i delta_m sin(r_m t)/r_m and
    M12[m, negate(m)] = gamma0 sin(r_m t)/r_m, evaluated lazily per time by
    the returned callable.
    """

    def at_time(t: float):
        n = grid.n_total
        m11 = np.zeros((n, n), dtype=complex)
        m12 = np.zeros((n, n), dtype=complex)
        for m in range(n):
            r = complex(np.sqrt(complex(delta[m] ** 2 - q * gamma0**2)))
            s = _sin_over_r(r, t)
            m11[m, m] = np.cos(r * t) - 1j * delta[m] * s
            m12[m, negate_index(m, grid)] = gamma0 * s
        return m11, m12

    return at_time


def golden_rule_number(N0: float, params: PhysicalParams, t: float) -> float:
    """Linear short-time atom number N0 * lambda * t, three dimensions only.

    lambda = (1/(sqrt(2) pi)) * (m_a/hbar)^{3/2} * chi^2 * sqrt(|Omega|).
    """
    return N0 * golden_rule_rate(params) * t


def golden_rule_rate(params: PhysicalParams) -> float:
    return (
        1.0
        / (math.sqrt(2.0) * math.pi)
        * (params.m_a / params.hbar) ** 1.5
        * params.chi**2
        * math.sqrt(abs(params.Omega))
    )


def bessel_j_5half(x: float) -> float:
    """J_{5/2} via the elementary closed form, series branch for small |x|.

    The closed form sqrt(2/(pi x)) * ((3/x^2 - 1) sin x - (3/x) cos x)
    cancels catastrophically near zero, so below |x| = 1e-2 the ascending
    series is used instead.
    """
    ax = abs(x)
    if ax == 0.0:
        return 0.0
    if ax < _SMALL_X:
        val = _j_5half_series(ax)
    else:
        val = math.sqrt(2.0 / (math.pi * ax)) * (
            (3.0 / ax**2 - 1.0) * math.sin(ax) - (3.0 / ax) * math.cos(ax)
        )
    return -val if x < 0 else val


def _j_5half_series(x: float, terms: int = 10) -> float:
    acc = 0.0
    for j in range(terms):
        acc += (-1) ** j / (math.factorial(j) * math.gamma(j + 3.5)) * (x / 2.0) ** (
            2 * j + 2.5
        )
    return acc


def _dip_shape(x: float) -> float:
    """(225 pi / 2) * J_{5/2}(x)^2 / x^5, continued to 1 at x = 0."""
    ax = abs(x)
    if ax < _SMALL_X:
        # normalized series: [sum_j (-1)^j (x^2/4)^j Gamma(7/2)/(j! Gamma(j+7/2))]^2
        s = 0.0
        for j in range(6):
            s += (
                (-1) ** j
                * (ax * ax / 4.0) ** j
                * math.gamma(3.5)
                / (math.factorial(j) * math.gamma(j + 3.5))
            )
        return s * s
    return 112.5 * math.pi * bessel_j_5half(ax) ** 2 / ax**5


def cl_asymptote(dk_displacement: float, r_tf_j: float, q: int) -> float:
    """Short-time collinear g2 asymptote at a given momentum displacement.

    1 + q * (225 pi/2) * J_{5/2}(x)^2 / x^5 with x = displacement * R_TF
    along the slice axis: a Pauli dip (q = -1) or pair bunching peak
    (q = +1) of half-width 2.16 / R_TF.
    """
    if not r_tf_j > 0:
        raise ValidationError("Thomas-Fermi radius must be > 0")
    return 1.0 + q * _dip_shape(dk_displacement * r_tf_j)


def pair_identity_check(n: float, m: complex, q: int) -> float:
    """Signed residual |m|^2 - n (1 + q n).

    Zero for uniform fields; <= 0 (up to roundoff) in general, which is the
    Cauchy-Schwarz bound on the pairing amplitude.
    """
    if n < 0:
        raise ValidationError("occupation must be >= 0")
    return float(abs(m) ** 2 - n * (1.0 + q * n))
