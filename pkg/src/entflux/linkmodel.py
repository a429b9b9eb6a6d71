"""Coincidence-rate and state-quality model for a single entanglement link.

A link connects two users through one or more frequency channels carrying
polarization-entangled biphotons. Detection statistics reduce to two rates:
correlated coincidences C = eta1*eta2*mu and accidentals A from uncorrelated
singles (multi-pair emission plus dark counts). The visibility C/(A+C) sets
the Werner mixing weight of the delivered state, so fidelity and entangled
bit rate follow from (A, C) alone.

Everything collapses onto two dimensionless numbers per user pair: the flux
x = tau*mu and per-user noise parameters y = tau*d/eta. The identity

    (tau/(eta1*eta2)) * (A + C) = x^2 + (2*y1 + 2*y2 + 1)*x + 4*y1*y2

makes the dimensioned and dimensionless paths exactly interchangeable, and
the dimensionless forms are what every analysis and optimization routine in
this package consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidStateError, UndefinedVisibilityError
from .states import PureState4, bell_psi_minus

# Single-click probability above which the linearized rate model is suspect.
VALIDITY_THRESHOLD = 0.1


@dataclass(frozen=True)
class UserEndpoint:
    """One network user: detection efficiency and dark-count rate.

    eta folds every loss between source and detector click into a single
    system efficiency in (0, 1]; dark_rate is in counts/s.
    """

    label: str
    eta: float
    dark_rate: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise InvalidStateError(f"{self.label}: eta must be in (0, 1], got {self.eta!r}")
        if not np.isfinite(self.dark_rate) or self.dark_rate < 0:
            raise InvalidStateError(f"{self.label}: dark_rate must be finite and >= 0")


@dataclass(frozen=True)
class LinkSpec:
    """A one-to-one entanglement link between two distinct users."""

    user_a: UserEndpoint
    user_b: UserEndpoint
    target: PureState4 = field(default_factory=bell_psi_minus)

    def __post_init__(self):
        if self.user_a.label == self.user_b.label:
            raise InvalidStateError(f"link endpoints must differ, got {self.user_a.label!r} twice")

    @property
    def name(self) -> str:
        return self.user_a.label + self.user_b.label


@dataclass(frozen=True)
class LinkMetrics:
    """Per-link observables under one operating point.

    visibility and fidelity are NaN for an unallocated link (x = 0), where
    the delivered state is pure background and the Werner weight is undefined.
    """

    accidental_rate: float
    correlated_rate: float
    visibility: float
    dimensionless_flux: float
    fidelity: float
    ebr: float


@dataclass(frozen=True)
class ValidityCheck:
    """Advisory check that per-user click probabilities stay small."""

    click_probability: float
    threshold: float
    ok: bool


def accidental_rate_general(user_a: UserEndpoint, user_b: UserEndpoint,
                            fluxes_a, fluxes_b, tau: float) -> float:
    """Accidental coincidence rate with arbitrary flux loads at each user.

    Parameters
    ----------
    fluxes_a, fluxes_b : sequence of float
        Biphoton fluxes (1/s) of every link terminating at user a and at
        user b respectively; the halves of each pair arriving elsewhere
        still drive singles locally.
    tau : float
        Coincidence window in seconds.

    Returns
    -------
    float
        A = 4*tau * (eta_a/2 * sum(fluxes_a) + d_a) * (eta_b/2 * sum(fluxes_b) + d_b),
        the product of singles rates over the four detector pairings.
    """
    if tau <= 0:
        raise InvalidStateError(f"tau must be > 0, got {tau!r}")
    fa = np.asarray(fluxes_a, dtype=float)
    fb = np.asarray(fluxes_b, dtype=float)
    if (fa < 0).any() or (fb < 0).any():
        raise InvalidStateError("fluxes must be >= 0")
    singles_a = user_a.eta / 2.0 * fa.sum() + user_a.dark_rate
    singles_b = user_b.eta / 2.0 * fb.sum() + user_b.dark_rate
    return 4.0 * tau * singles_a * singles_b


def accidental_rate_single(user_a: UserEndpoint, user_b: UserEndpoint,
                           link_flux: float, tau: float) -> float:
    """Accidental rate when each user terminates exactly one link.

    Expands the general product into a polynomial in the one flux value:
    A = 4*tau*(eta1*eta2*mu^2/4 + (eta1*d2 + eta2*d1)*mu/2 + d1*d2).
    """
    if tau <= 0:
        raise InvalidStateError(f"tau must be > 0, got {tau!r}")
    if link_flux < 0:
        raise InvalidStateError("flux must be >= 0")
    e1, d1 = user_a.eta, user_a.dark_rate
    e2, d2 = user_b.eta, user_b.dark_rate
    mu = link_flux
    return 4.0 * tau * (e1 * e2 * mu * mu / 4.0 + (e1 * d2 + e2 * d1) * mu / 2.0 + d1 * d2)


def correlated_rate(user_a: UserEndpoint, user_b: UserEndpoint, link_flux: float) -> float:
    """True-pair coincidence rate C = eta1 * eta2 * mu."""
    if link_flux < 0:
        raise InvalidStateError("flux must be >= 0")
    return user_a.eta * user_b.eta * link_flux


def visibility(accidental: float, correlated: float) -> float:
    """Werner mixing weight lambda = C / (A + C).

    Raises
    ------
    UndefinedVisibilityError
        When A + C = 0; the caller owns the zero-flux convention.
    """
    if accidental < 0 or correlated < 0:
        raise InvalidStateError("rates must be >= 0")
    total = accidental + correlated
    if total == 0:
        raise UndefinedVisibilityError("A + C = 0, visibility undefined")
    return correlated / total


def noise_param(user: UserEndpoint, tau: float) -> float:
    """Dimensionless per-user noise figure y = tau * d / eta."""
    if tau <= 0:
        raise InvalidStateError(f"tau must be > 0, got {tau!r}")
    return tau * user.dark_rate / user.eta


def _poly(x, y1, y2):
    # (tau/(eta1 eta2)) * (A + C) as a function of x = tau*mu.
    return x * x + (2.0 * y1 + 2.0 * y2 + 1.0) * x + 4.0 * y1 * y2


def fidelity_dimensionless(x, y1: float, y2: float):
    """Singlet fidelity as a function of dimensionless flux.

    F(x) = (1/4) * [1 + 3x / (x^2 + (2y1+2y2+1)x + 4y1y2)].

    At x = 0 the ratio is 0/0 whenever y1*y2 = 0; the limit value is used:
    1 for a fully noiseless pair, (1/4)(1 + 3/(2y1+2y2+1)) when exactly one
    user is noiseless. With y1*y2 > 0 the formula itself yields 1/4.

    Accepts scalars or arrays (broadcast over x).
    """
    x = np.asarray(x, dtype=float)
    if (x < 0).any():
        raise InvalidStateError("x must be >= 0")
    q = _poly(x, y1, y2)
    # q = 0 only at x = 0 with y1*y2 = 0, where 3x/q -> 3/(2y1+2y2+1).
    limit = 3.0 / (2.0 * y1 + 2.0 * y2 + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(q > 0.0, 3.0 * x / np.where(q > 0.0, q, 1.0), limit)
    out = 0.25 * (1.0 + ratio)
    return float(out) if out.ndim == 0 else out


def ebr_dimensionless(x, y1: float, y2: float):
    """Dimensionless entangled bit rate R(x) = Q(x) * max(0, log2(2 F(x))).

    Q is the rate polynomial of the module docstring; the clamp encodes that
    a state with F <= 1/2 is separable and carries no distillable ebits.
    Scales to ebits/s as (eta1*eta2/tau) * R(tau*mu).
    """
    x = np.asarray(x, dtype=float)
    if (x < 0).any():
        raise InvalidStateError("x must be >= 0")
    f = fidelity_dimensionless(x, y1, y2)
    # F >= 1/4 always, so 2F >= 1/2 and the log never sees zero.
    out = _poly(x, y1, y2) * np.maximum(0.0, np.log2(2.0 * np.asarray(f)))
    return float(out) if out.ndim == 0 else out


def fidelity_dimensioned(mu_bar: float, user_a: UserEndpoint, user_b: UserEndpoint,
                         tau: float):
    """Fidelity from dimensioned inputs; equals the dimensionless path at x = tau*mu."""
    y1 = noise_param(user_a, tau)
    y2 = noise_param(user_b, tau)
    return fidelity_dimensionless(tau * np.asarray(mu_bar, dtype=float), y1, y2)


def ebr_dimensioned(mu_bar: float, user_a: UserEndpoint, user_b: UserEndpoint,
                    tau: float):
    """Entangled bit rate in ebits/s: (eta1*eta2/tau) * R(tau*mu).

    Identical to (A + C) * log-negativity of the delivered Werner state;
    the rate polynomial in the dimensionless form already carries the
    correlated-rate term, so no extra correction appears here.
    """
    y1 = noise_param(user_a, tau)
    y2 = noise_param(user_b, tau)
    scale = user_a.eta * user_b.eta / tau
    return scale * ebr_dimensionless(tau * np.asarray(mu_bar, dtype=float), y1, y2)


def check_validity(user: UserEndpoint, total_flux_at_user: float, tau: float,
                   threshold: float = VALIDITY_THRESHOLD) -> ValidityCheck:
    """Advisory check that the user's click probability per window is small.

    The rate model linearizes detection, which requires
    p = tau * (eta/2 * total_flux + d) << 1. Warn at or above the threshold.
    """
    if tau <= 0:
        raise InvalidStateError(f"tau must be > 0, got {tau!r}")
    p = tau * (user.eta / 2.0 * total_flux_at_user + user.dark_rate)
    return ValidityCheck(click_probability=p, threshold=threshold, ok=p < threshold)
