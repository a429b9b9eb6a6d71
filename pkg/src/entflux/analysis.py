"""Analytic and numeric optima of the dimensionless link model.

For fixed noise parameters (y1, y2) the fidelity F(x) is unimodal with a
closed-form maximum, while the entangled bit rate R(x) is transcendental:
its maximum is bracketed by the two roots of F(x) = 1/2 and found by
golden-section search (R is concave between those roots).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InfeasibleConstraintError, InvalidStateError, NoEntanglementError
from .linkmodel import ebr_dimensionless, fidelity_dimensionless

# Absolute x-tolerance for the golden-section bracket.
GOLDEN_XTOL = 1e-9
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class LinkOptima:
    """Operating-point summary for one (y1, y2) pair.

    x_r is None and r_max is 0 when no entangled operating point exists.
    roots holds the x-values where F = 1/2 (empty in the same case).
    """

    y1: float
    y2: float
    x_f: float
    f_max: float
    x_r: float | None
    r_max: float
    roots: tuple[float, ...]


def _check_noise(y1: float, y2: float):
    if y1 < 0 or y2 < 0:
        raise InvalidStateError(f"noise parameters must be >= 0, got ({y1!r}, {y2!r})")


def fidelity_max(y1: float, y2: float) -> tuple[float, float]:
    """Closed-form location and value of the fidelity maximum.

    x_F = 2*sqrt(y1*y2);  F_max = (1/4) * [1 + 3/(4*sqrt(y1*y2) + 2*(y1+y2) + 1)].
    """
    _check_noise(y1, y2)
    root = math.sqrt(y1 * y2)
    x_f = 2.0 * root
    f_max = 0.25 * (1.0 + 3.0 / (4.0 * root + 2.0 * (y1 + y2) + 1.0))
    return x_f, f_max


def _discriminant(y1: float, y2: float) -> float:
    return (y1 - y2) ** 2 - 2.0 * (y1 + y2) + 1.0


def entanglement_possible(y1: float, y2: float) -> bool:
    """Whether any flux yields an entangled state (F(x) > 1/2 for some x > 0).

    Requires the boundary inequality (y1-y2)^2 - 2*(y1+y2) + 1 > 0 strictly,
    which makes the roots of F = 1/2 real and distinct. The roots sum to
    2 - 2*(y1+y2) with product 4*y1*y2 >= 0, so both are positive only when
    y1 + y2 < 1; outside that the bracket sits at x <= 0 and no physical
    flux is entangled.
    """
    _check_noise(y1, y2)
    return _discriminant(y1, y2) > 0.0 and y1 + y2 < 1.0


def critical_noise(y1: float) -> float:
    """Largest noise parameter on the second arm that still permits entanglement.

    Solving the boundary quadratic (y1-y2)^2 - 2*(y1+y2) + 1 = 0 for y2 gives
    (1 +/- sqrt(y1))^2; the smaller root is the physical edge. Any
    y2 < (1 - sqrt(y1))^2 keeps the F = 1/2 bracket real with positive roots.

    Raises
    ------
    NoEntanglementError
        When y1 >= 1, where no second-arm noise level works.
    """
    _check_noise(y1, 0.0)
    if y1 >= 1.0:
        raise NoEntanglementError(
            f"no second-arm noise level permits entanglement at y1 = {y1!r}")
    return (1.0 - math.sqrt(y1)) ** 2


def ebr_roots(y1: float, y2: float) -> tuple[float, float]:
    """The two fluxes where F(x) = 1/2, bracketing the entangled region.

    z = 1 - y1 - y2 +/- sqrt((y1-y2)^2 - 2*(y1+y2) + 1).

    Raises
    ------
    NoEntanglementError
        When the boundary inequality fails and no bracket exists.
    """
    if not entanglement_possible(y1, y2):
        raise NoEntanglementError(
            f"no entangled operating point for (y1, y2) = ({y1!r}, {y2!r})")
    half_width = math.sqrt(_discriminant(y1, y2))
    center = 1.0 - y1 - y2
    return center - half_width, center + half_width


def golden_section_max(fn, lo: float, hi: float, xtol: float = GOLDEN_XTOL) -> tuple[float, float]:
    """Maximize a unimodal scalar function on [lo, hi].

    Returns (x, fn(x)) with x within xtol of the true maximizer.
    """
    a, b = float(lo), float(hi)
    if b < a:
        raise InvalidStateError(f"empty bracket [{lo!r}, {hi!r}]")
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > xtol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def ebr_max(y1: float, y2: float) -> tuple[float | None, float]:
    """Location and value of the entangled-bit-rate maximum.

    Returns (None, 0.0) when no entangled operating point exists; otherwise
    golden-section search over the F = 1/2 bracket, inside which R is
    concave, to absolute x-tolerance 1e-9.
    """
    _check_noise(y1, y2)
    if not entanglement_possible(y1, y2):
        return None, 0.0
    z_lo, z_hi = ebr_roots(y1, y2)
    x_r, r_max = golden_section_max(lambda x: ebr_dimensionless(x, y1, y2), z_lo, z_hi)
    return x_r, r_max


def link_optima(y1: float, y2: float) -> LinkOptima:
    """Bundle the fidelity and EBR optima for one noise pairing."""
    x_f, f_max = fidelity_max(y1, y2)
    if entanglement_possible(y1, y2):
        x_r, r_max = ebr_max(y1, y2)
        roots = ebr_roots(y1, y2)
    else:
        x_r, r_max, roots = None, 0.0, ()
    return LinkOptima(y1=y1, y2=y2, x_f=x_f, f_max=f_max, x_r=x_r, r_max=r_max, roots=roots)


def constrained_optimal_flux(y1: float, y2: float, f_min: float) -> tuple[float, float]:
    """Best flux phi subject to the fidelity floor, and the EBR there.

    phi = argmax of R(x) over {x >= 0 : F(x) >= f_min}. When the floor is
    inactive at the unconstrained EBR maximum this is x_R itself; otherwise
    it is the larger root of F(x) = f_min, since R increases up to x_R
    while F is already decreasing past its own maximum.

    Returns (phi, R(phi)); the pair reuses the ebr_max result exactly when
    the constraint is inactive, so R(phi)/r_max is exactly 1.0 there.

    Raises
    ------
    InfeasibleConstraintError
        When f_min exceeds the link's maximum achievable fidelity.
    NoEntanglementError
        When the link has no entangled operating point at all.
    """
    if not 0.0 <= f_min <= 1.0:
        raise InvalidStateError(f"f_min must be in [0, 1], got {f_min!r}")
    _, f_max = fidelity_max(y1, y2)
    if f_max < f_min:
        raise InfeasibleConstraintError(
            f"f_min = {f_min!r} exceeds F_max = {f_max!r} for (y1, y2) = ({y1!r}, {y2!r})")
    if not entanglement_possible(y1, y2):
        raise NoEntanglementError(
            f"no entangled operating point for (y1, y2) = ({y1!r}, {y2!r})")
    x_r, r_max = ebr_max(y1, y2)
    if fidelity_dimensionless(x_r, y1, y2) >= f_min:
        return x_r, r_max
    phi = fidelity_floor_roots(y1, y2, f_min)[1]
    return phi, ebr_dimensionless(phi, y1, y2)


def fidelity_floor_roots(y1: float, y2: float, f_min: float) -> tuple[float, float]:
    """The two fluxes where F(x) = f_min, for f_min in (1/4, F_max].

    Solving F(x) = f via (4f - 1) * Q(x) = 3x gives the quadratic
    (4f-1) x^2 + [(4f-1)(2y1+2y2+1) - 3] x + (4f-1) 4 y1 y2 = 0.
    """
    _check_noise(y1, y2)
    _, f_max = fidelity_max(y1, y2)
    if not 0.25 < f_min <= f_max:
        raise InfeasibleConstraintError(
            f"fidelity level {f_min!r} not reachable for (y1, y2) = ({y1!r}, {y2!r})")
    a = 4.0 * f_min - 1.0
    b = a * (2.0 * y1 + 2.0 * y2 + 1.0) - 3.0
    c = a * 4.0 * y1 * y2
    disc = max(0.0, b * b - 4.0 * a * c)  # >= 0 guaranteed by f_min <= F_max
    root = math.sqrt(disc)
    return (-b - root) / (2.0 * a), (-b + root) / (2.0 * a)


def count_allocations(K: int, L: int, uniform_flux: bool) -> int:
    """Size of the allocation search space for K channels over L links.

    Distinct channels give (L+1)^K assignments (each channel to a link or
    the reserve); uniform per-channel flux collapses permutations, leaving
    C(K+L, L) channel-count compositions. Exact integer arithmetic at any
    size (Python integers do not overflow).
    """
    if K < 1 or L < 1:
        raise InvalidStateError(f"need K >= 1 and L >= 1, got K={K!r}, L={L!r}")
    if uniform_flux:
        return math.comb(K + L, L)
    return (L + 1) ** K
