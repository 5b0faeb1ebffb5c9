"""Closed-form colourability thresholds and degree window classification.

All logarithms are natural: the defining identities (for instance
(k-1)^d / k^(d-2) < 1  iff  d > u_k) only hold in base e.

For a random lift of a d-regular base graph:

* ``u_threshold(k)``   -- degrees d >= u_k give a.a.s. *no* proper
  k-colouring (u_k = 2 log k / (log k - log(k-1))).
* ``ell_threshold(k)`` -- degrees d < l_k give a.a.s. *some* proper
  k-colouring (l_k = 2 (k-1)^3 / (k (k-2)) * log(k-1)).
* ``c_q(q)``           -- admissible coefficient bound for the stochastic
  matrix inequality of :mod:`liftchroma.stochastic_opt`; l_k = 2 c_k.
* ``k_d(d)``           -- smallest k with d < 2 k log k.

Documentation note: for roughly half of all integer degrees the extra
condition d > (2 k_d - 1) log k_d holds, and then the two-value window
collapses so the chromatic number concentrates on the single value k_d + 1
(which always coincides with the one-point value obtained from the
u/ell interval classification).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class WindowKind(enum.Enum):
    ONE_POINT_K = "one_point_k"
    TWO_POINT = "two_point"
    ONE_POINT_K_PLUS_1 = "one_point_k_plus_1"


@dataclass(frozen=True)
class WindowClassification:
    """Concentration window for the chromatic number of lifts of K_{d+1}.

    ``k`` is the window base: the unique k >= 3 with d in [u_{k-1}, u_k).
    ``bounds`` is the half-open interval actually used for the decision,
    and always contains d.  ``chromatic_values`` lists the a.a.s. values.
    """

    d: int
    k: int
    kind: WindowKind
    bounds: tuple[float, float]
    chromatic_values: tuple[int, ...]


def u_threshold(k: int) -> float:
    """Non-colourability threshold u_k = 2 log k / (log k - log(k-1))."""
    if k < 2:
        raise ValueError(f"u_threshold needs k >= 2, got {k}")
    return 2.0 * math.log(k) / (math.log(k) - math.log(k - 1))


def ell_threshold(k: int) -> float:
    """Colourability threshold l_k = 2 (k-1)^3 / (k (k-2)) * log(k-1)."""
    if k < 3:
        raise ValueError(f"ell_threshold needs k >= 3, got {k}")
    return 2.0 * (k - 1) ** 3 / (k * (k - 2)) * math.log(k - 1)


def c_q(q: int) -> float:
    """Coefficient bound c_q = (q-1)^3 / (q (q-2)) * log(q-1)."""
    if q < 3:
        raise ValueError(f"c_q needs q >= 3, got {q}")
    return (q - 1) ** 3 / (q * (q - 2)) * math.log(q - 1)


def k_d(d: int) -> int:
    """Smallest k with d < 2 k log k."""
    if d < 3:
        raise ValueError(f"k_d needs d >= 3, got {d}")
    k = 2
    while not d < 2 * k * math.log(k):
        k += 1
    return k


def classify(d: int) -> WindowClassification:
    """Place degree d in its chromatic-number concentration window.

    Finds the window base k with d in [u_{k-1}, u_k).  If d < l_k the
    chromatic number of a random lift of K_{d+1} is a.a.s. exactly k
    (ONE_POINT_K, refined to ONE_POINT_K_PLUS_1 when the collapse
    condition d > (2 k_d - 1) log k_d certifies the same value as
    k_d + 1); otherwise it is a.a.s. in {k, k+1} (TWO_POINT).
    """
    if d < 3:
        raise ValueError(f"classify needs d >= 3, got {d}")
    k = 3
    while not d < u_threshold(k):
        k += 1
    # Here u_{k-1} <= d < u_k.  Integer d never equals a threshold exactly.
    ell = ell_threshold(k)
    if d < ell:
        kd = k_d(d)
        if d > (2 * kd - 1) * math.log(kd):
            # Window collapse certificate; the one-point value k equals kd+1.
            assert k == kd + 1
            kind = WindowKind.ONE_POINT_K_PLUS_1
        else:
            kind = WindowKind.ONE_POINT_K
        return WindowClassification(
            d=d,
            k=k,
            kind=kind,
            bounds=(u_threshold(k - 1), ell),
            chromatic_values=(k,),
        )
    return WindowClassification(
        d=d,
        k=k,
        kind=WindowKind.TWO_POINT,
        bounds=(ell, u_threshold(k)),
        chromatic_values=(k, k + 1),
    )
