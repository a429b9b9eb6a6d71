"""Two-qubit state arithmetic and entanglement metrics.

All states live in the polarization basis ordered |HH>, |HV>, |VH>, |VV>.
The partial transpose acts on the first qubit; any consistent convention
gives the same log-negativity, but fixing one keeps tests bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidStateError

DIM = 4

# Invariant tolerances for validated matrix types.
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
UNITARITY_TOL = 1e-12
NORM_TOL = 1e-12
# Eigenvalues in (-EIG_FLOOR, 0) are floating-point slack, treated as 0.
EIG_FLOOR = 1e-10


def _as_complex_matrix(entries) -> np.ndarray:
    arr = np.array(entries, dtype=complex)
    if arr.shape != (DIM, DIM):
        raise InvalidStateError(f"expected a {DIM}x{DIM} matrix, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PureState4:
    """Length-4 complex state vector with unit norm."""

    amplitudes: np.ndarray

    def __post_init__(self):
        vec = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if vec.shape != (DIM,):
            raise InvalidStateError(f"expected {DIM} amplitudes, got shape {vec.shape}")
        norm_sq = float(np.vdot(vec, vec).real)
        if abs(norm_sq - 1.0) > NORM_TOL:
            raise InvalidStateError(f"state not normalized: |psi|^2 = {norm_sq!r}")
        vec.setflags(write=False)
        object.__setattr__(self, "amplitudes", vec)

    def projector(self) -> "DensityMatrix4":
        """Return |psi><psi| as a validated density matrix."""
        return DensityMatrix4(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix4:
    """4x4 density matrix: Hermitian, unit trace, positive semidefinite.

    Positivity is enforced up to -1e-10 on the spectrum to absorb
    floating-point slack from convex combinations.
    """

    entries: np.ndarray

    def __post_init__(self):
        mat = _as_complex_matrix(self.entries)
        if np.max(np.abs(mat - mat.conj().T)) > HERMITICITY_TOL:
            raise InvalidStateError("density matrix not Hermitian")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"density matrix trace {tr!r} != 1")
        eigs = np.linalg.eigvalsh(mat)
        if eigs.min() < -EIG_FLOOR:
            raise InvalidStateError(f"density matrix has negative eigenvalue {eigs.min()!r}")
        object.__setattr__(self, "entries", mat)


@dataclass(frozen=True)
class Unitary4:
    """4x4 unitary, e.g. the propagation transform of one channel."""

    entries: np.ndarray

    def __post_init__(self):
        mat = _as_complex_matrix(self.entries)
        if np.max(np.abs(mat @ mat.conj().T - np.eye(DIM))) > UNITARITY_TOL:
            raise InvalidStateError("matrix is not unitary")
        object.__setattr__(self, "entries", mat)


@dataclass(frozen=True)
class ChannelState:
    """Per-channel emitted state, propagation unitary, and biphoton flux."""

    state: PureState4
    unitary: Unitary4 = field(default_factory=lambda: Unitary4(np.eye(DIM)))
    flux: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.flux) or self.flux < 0:
            raise InvalidStateError(f"channel flux must be finite and >= 0, got {self.flux!r}")


def bell_psi_minus() -> PureState4:
    """The singlet Bell state (|HV> - |VH>)/sqrt(2)."""
    amp = np.zeros(DIM, dtype=complex)
    amp[1] = 1.0 / np.sqrt(2.0)
    amp[2] = -1.0 / np.sqrt(2.0)
    return PureState4(amp)


def maximally_mixed() -> DensityMatrix4:
    """I/4, the uniform background state."""
    return DensityMatrix4(np.eye(DIM) / DIM)


def werner_state(visibility: float, target: PureState4 | None = None) -> DensityMatrix4:
    """Mix a pure target with the maximally mixed background.

    Parameters
    ----------
    visibility : float
        Mixing weight lambda in [0, 1] of the pure component.
    target : PureState4, optional
        Pure component; defaults to the singlet.

    Returns
    -------
    DensityMatrix4
        lambda |psi><psi| + (1 - lambda) I/4.
    """
    if not 0.0 <= visibility <= 1.0:
        raise InvalidStateError(f"visibility must be in [0, 1], got {visibility!r}")
    if target is None:
        target = bell_psi_minus()
    proj = np.outer(target.amplitudes, target.amplitudes.conj())
    return DensityMatrix4(visibility * proj + (1.0 - visibility) * np.eye(DIM) / DIM)


def link_state_general(channels: list[ChannelState], visibility: float) -> DensityMatrix4:
    """Flux-weighted mixture of per-channel states against uniform background.

    Each channel contributes U rho U^dag weighted by its share of the total
    flux; the result is mixed with I/4 at the given visibility. Reduces to
    ``werner_state`` when every channel carries the same state and identity
    propagation.

    Raises
    ------
    InvalidStateError
        If the channel list is empty or carries zero total flux (the
        flux weights are undefined), or visibility is outside [0, 1].
    """
    if not 0.0 <= visibility <= 1.0:
        raise InvalidStateError(f"visibility must be in [0, 1], got {visibility!r}")
    if not channels:
        raise InvalidStateError("need at least one channel")
    total = sum(ch.flux for ch in channels)
    if total <= 0.0:
        raise InvalidStateError("all channel fluxes are zero; weights undefined")
    mix = np.zeros((DIM, DIM), dtype=complex)
    for ch in channels:
        u = ch.unitary.entries
        rho = np.outer(ch.state.amplitudes, ch.state.amplitudes.conj())
        mix += (ch.flux / total) * (u @ rho @ u.conj().T)
    return DensityMatrix4(visibility * mix + (1.0 - visibility) * np.eye(DIM) / DIM)


def fidelity(state: DensityMatrix4, target: PureState4) -> float:
    """Overlap <psi| sigma |psi>, clamped to [0, 1]."""
    amp = target.amplitudes
    val = np.vdot(amp, state.entries @ amp)
    # Hermitian sigma makes this real up to rounding; the imaginary part is noise.
    return float(min(1.0, max(0.0, val.real)))


def partial_transpose(state: DensityMatrix4) -> np.ndarray:
    """Transpose the first-qubit indices; returns a plain Hermitian ndarray."""
    four = state.entries.reshape(2, 2, 2, 2)
    return four.transpose(2, 1, 0, 3).reshape(DIM, DIM)


def log_negativity(state: DensityMatrix4) -> float:
    """log2 of the trace norm of the partial transpose, clamped at 0.

    The partial transpose is Hermitian, so the trace norm is the sum of
    absolute eigenvalues.
    """
    eigs = np.linalg.eigvalsh(partial_transpose(state))
    return float(max(0.0, np.log2(np.sum(np.abs(eigs)))))
