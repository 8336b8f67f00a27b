"""Encode -> loss -> Petz-recover -> decode for one logical qubit.

Logical blocks are plain 2x2 complex arrays, possibly trace-deficient; the
trace is the codespace survival weight. run_pipeline is the literal staged
map. LogicalCell is an algebraically identical rank-2 factorization used by
the sweep commands and the PTM cache: with B_l = E_l E and
T_l = E^dag E_l^dag S, the decoded block is sum_l' T_l' (sum_l B_l rho B_l^dag)
T_l'^dag because E^dag P_L E = I.
"""

from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .channels import DEFAULT_EPSILON, KrausSet, apply_channel
from .errors import DimensionError, PipelineError
from .fock import check_hermitian, psd_inv_sqrt
from .gkp import GkpCode

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}
SIGMA = (PAULI["I"], PAULI["X"], PAULI["Y"], PAULI["Z"])

LOGICAL_STATES = {
    "plus": 0.5 * np.array([[1, 1], [1, 1]], dtype=complex),
    "minus": 0.5 * np.array([[1, -1], [-1, 1]], dtype=complex),
    "zero": np.array([[1, 0], [0, 0]], dtype=complex),
    "one": np.array([[0, 0], [0, 1]], dtype=complex),
    "mixed": 0.5 * np.eye(2, dtype=complex),
}

PauliReadout = namedtuple("PauliReadout", ["leak", "conditional", "weight"])


def eta_from_depth(x: float) -> float:
    if x < 0:
        raise ValueError(f"loss depth must be >= 0, got {x}")
    return float(np.exp(-x))


def check_logical_block(block: np.ndarray, context: str = "pipeline output") -> None:
    """Physical sanity: Hermitian, near-PSD, weight in [0, 1]."""
    if block.shape != (2, 2):
        raise DimensionError(f"logical block must be 2x2, got {block.shape}")
    check_hermitian(block, 1e-10)
    w = float(np.trace(block).real)
    ev = np.linalg.eigvalsh(block)
    if ev[0] < -1e-9 or w < -1e-9 or w > 1.0 + 1e-8:
        raise PipelineError(
            f"{context} violates physical bounds: weight={w:.12f}, min eig={ev[0]:.3e}"
        )


def run_pipeline(
    rho_in: np.ndarray,
    code: GkpCode,
    loss: KrausSet,
    recovery: KrausSet,
    check: bool = True,
) -> np.ndarray:
    """Decoded logical block E^dag P_L R(N(E rho E^dag)) P_L E."""
    if rho_in.shape != (2, 2):
        raise DimensionError(f"logical input must be 2x2, got {rho_in.shape}")
    if check:
        check_hermitian(rho_in, 1e-10)
        if abs(np.trace(rho_in).real - 1.0) > 1e-10:
            raise ValueError("input state must have unit weight")
        if np.linalg.eigvalsh(rho_in)[0] < -1e-9:
            raise ValueError("input state must be positive semidefinite")
    if loss.dim != code.dim or recovery.dim != code.dim:
        raise DimensionError("code, loss and recovery must share one Fock cutoff")

    E = code.isometry
    PL = code.projector
    rho_enc = E @ rho_in @ E.conj().T
    rho_noisy = apply_channel(loss, rho_enc)
    if check:
        ev = np.linalg.eigvalsh(rho_noisy)
        if ev[0] < -1e-8:
            raise PipelineError(f"post-loss state has eigenvalue {ev[0]:.3e}")
    rho_rec = apply_channel(recovery, rho_noisy)
    block = E.conj().T @ PL @ rho_rec @ PL @ E
    if check:
        check_logical_block(block)
    return block


def expectations(rho_L: np.ndarray, obs: str) -> PauliReadout:
    """Leak-aware and conditional Pauli expectations plus survival weight.

    The conditional value is None when the weight is at or below 1e-12.
    """
    if obs not in PAULI:
        raise ValueError(f"unknown Pauli label {obs!r}")
    check_hermitian(rho_L, 1e-10)
    weight = float(np.trace(rho_L).real)
    leak = float(np.trace(PAULI[obs] @ rho_L).real)
    if weight <= 1e-12:
        return PauliReadout(leak, None, weight)
    cond = leak / weight
    if abs(cond) > 1.0 + 1e-8:
        raise PipelineError(f"conditional <{obs}> = {cond:.12f} outside [-1, 1]")
    return PauliReadout(leak, cond, weight)


@dataclass(frozen=True)
class PTM:
    """Pauli transfer matrix chi_ij = Tr[sigma_i Lambda(sigma_j)] / 2."""

    chi: np.ndarray
    eta: float
    nbar: float

    def __post_init__(self):
        if self.chi.shape != (4, 4):
            raise DimensionError("PTM must be 4x4")
        if np.max(np.abs(self.chi)) > 1.0 + 1e-8:
            raise PipelineError("PTM entry exceeds 1 beyond tolerance")


def _chi_from_pushes(push, eta: float, nbar: float) -> PTM:
    chi = np.empty((4, 4))
    for j, sj in enumerate(SIGMA):
        out = push(sj)
        for i, si in enumerate(SIGMA):
            val = 0.5 * np.trace(si @ out)
            if abs(val.imag) > 1e-9:
                raise PipelineError(f"PTM entry ({i},{j}) has imaginary part {val.imag:.3e}")
            chi[i, j] = val.real
    return PTM(chi=chi, eta=eta, nbar=nbar)


def single_qubit_ptm(code: GkpCode, loss: KrausSet, recovery: KrausSet) -> PTM:
    """PTM of the effective logical channel, by pushing the Pauli basis through.

    Paulis are Hermitian but not PSD, so positivity checks are skipped; every
    stage is linear, so this equals the density-decomposition route.
    """
    def push(sigma):
        return run_pipeline(sigma, code, loss, recovery, check=False)

    return _chi_from_pushes(push, loss.eta, code.nbar)


class LogicalCell:
    """Rank-2 factorized pipeline for one (code, loss depth) cell."""

    def __init__(self, code: GkpCode, x: float, epsilon: float = DEFAULT_EPSILON):
        self.code = code
        self.x = float(x)
        self.eta = eta_from_depth(x)
        self.epsilon = float(epsilon)
        dim = code.dim
        E = code.isometry
        n = np.arange(dim, dtype=float)
        gamma = 1.0 - self.eta

        B = np.zeros((dim, dim, 2), dtype=complex)
        cur = (self.eta ** (n / 2.0))[:, None] * E
        B[0] = cur
        if gamma > 0:
            ratio = gamma / self.eta
            for l in range(1, dim):
                nxt = np.zeros_like(cur)
                nxt[:-1] = np.sqrt(n[1:])[:, None] * cur[1:]
                nxt *= np.sqrt(ratio / l)
                B[l] = nxt
                cur = nxt
        self.B = B

        NL = np.tensordot(B, B.conj(), axes=([0, 2], [0, 2]))
        lam_max = float(np.linalg.eigvalsh(NL)[-1])
        S = psd_inv_sqrt(NL, self.epsilon * lam_max)
        self.T = np.transpose((S[None, :, :] @ B).conj(), (0, 2, 1))  # (L, 2, dim)

    def noisy_state(self, rho2: np.ndarray) -> np.ndarray:
        X = self.B @ rho2
        return np.tensordot(X, self.B.conj(), axes=([0, 2], [0, 2]))

    def push(self, rho2: np.ndarray) -> np.ndarray:
        """Decoded 2x2 block for a 2x2 logical input (need not be PSD)."""
        Y = self.T @ self.noisy_state(rho2)
        return np.tensordot(Y, self.T.conj(), axes=([0, 2], [0, 2]))

    def ptm(self) -> PTM:
        return _chi_from_pushes(self.push, self.eta, self.code.nbar)

    def readout(self, state: np.ndarray, obs: str) -> PauliReadout:
        block = self.push(state)
        check_logical_block(block)
        return expectations(block, obs)
