"""Pure-loss channel in Kraus form and the regularized Petz recovery map."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .fock import check_hermitian, psd_inv_sqrt
from .gkp import GkpCode

DEFAULT_EPSILON = 1e-12  # relative to lambda_max(N_L)


@dataclass(frozen=True)
class KrausSet:
    """Ordered Kraus operators plus channel metadata.

    kind is "loss" or "petz". For loss sets the full ladder l = 0..dim-1 is
    kept, which makes completeness exact on the truncated space (a^dim = 0
    there). epsilon is the relative Petz regularization (petz only).
    """

    ops: tuple
    eta: float
    kind: str
    epsilon: float = 0.0
    completeness_defect: float = field(default=0.0)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def __post_init__(self):
        dims = {K.shape for K in self.ops}
        if len(dims) != 1 or self.ops[0].shape[0] != self.ops[0].shape[1]:
            raise DimensionError(f"Kraus operators must share one square shape, got {dims}")


def _kraus_ladder(eta: float, dim: int):
    """E_l = (gamma/(1-gamma))^{l/2} a^l / sqrt(l!) (1-gamma)^{n/2}, l < dim."""
    gamma = 1.0 - eta
    n = np.arange(dim, dtype=float)
    ops = []
    cur = np.diag(eta ** (n / 2.0)).astype(complex)
    ops.append(cur)
    ratio = gamma / eta if eta > 0 else 0.0
    for l in range(1, dim):
        nxt = np.zeros_like(cur)
        if gamma > 0:
            nxt[:-1, :] = np.sqrt(n[1:])[:, None] * cur[1:, :]
            nxt *= np.sqrt(ratio / l)
        ops.append(nxt)
        cur = nxt
    return ops


def loss_kraus(eta: float, dim: int) -> KrausSet:
    """Pure-loss channel with transmissivity eta on a truncated Fock space."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"transmissivity must be in (0, 1], got {eta}")
    if dim < 2:
        raise DimensionError(f"dim must be >= 2, got {dim}")
    ops = _kraus_ladder(eta, dim)
    acc = np.zeros((dim, dim), dtype=complex)
    for K in ops:
        acc += K.conj().T @ K
    defect = float(np.max(np.abs(acc - np.eye(dim))))
    return KrausSet(ops=tuple(ops), eta=float(eta), kind="loss", completeness_defect=defect)


def apply_channel(K: KrausSet, rho: np.ndarray, require_psd: bool = False) -> np.ndarray:
    """sum_l K_l rho K_l^dag."""
    if rho.shape != (K.dim, K.dim):
        raise DimensionError(f"state shape {rho.shape} does not match Kraus dim {K.dim}")
    check_hermitian(rho, 1e-8)
    if require_psd:
        w = np.linalg.eigvalsh(rho)
        if w[0] < -1e-9 * max(1.0, float(w[-1])):
            raise ValueError(f"input state has eigenvalue {w[0]:.3e}")
    out = np.zeros_like(rho)
    for op in K.ops:
        if op[0, 0] == 0 and not op.any():
            continue
        out += op @ rho @ op.conj().T
    return out


def apply_adjoint(K: KrausSet, X: np.ndarray) -> np.ndarray:
    """Adjoint (Heisenberg) action sum_l K_l^dag X K_l; unital for loss sets."""
    if X.shape != (K.dim, K.dim):
        raise DimensionError(f"operator shape {X.shape} does not match Kraus dim {K.dim}")
    out = np.zeros_like(X, dtype=complex)
    for op in K.ops:
        if op[0, 0] == 0 and not op.any():
            continue
        out += op.conj().T @ X @ op
    return out


def petz_recovery(loss: KrausSet, code: GkpCode, epsilon: float = DEFAULT_EPSILON) -> KrausSet:
    """Transpose-channel recovery R_l = P_L E_l^dag (N_L + eps I)^{-1/2}.

    N_L = N(P_L); epsilon is relative to lambda_max(N_L) (0 selects the plain
    pseudo-inverse square root on the support). Every Kraus operator carries
    the left projector, so outputs always land in the codespace, and
    sum R^dag R equals the regularized support projector of N_L.
    """
    if loss.kind != "loss":
        raise ValueError("petz_recovery expects a loss KrausSet")
    if loss.dim != code.dim:
        raise DimensionError(f"loss dim {loss.dim} != code dim {code.dim}")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    NL = apply_channel(loss, code.projector)
    lam_max = float(np.linalg.eigvalsh(NL)[-1])
    S = psd_inv_sqrt(NL, epsilon * lam_max)
    E = code.isometry
    # R_l = P_L E_l^dag S = E (E^dag E_l^dag S); the 2-row intermediate keeps this cheap.
    ops = tuple(E @ ((E.conj().T @ K.conj().T) @ S) for K in loss.ops)
    return KrausSet(ops=ops, eta=loss.eta, kind="petz", epsilon=float(epsilon))


def trace_nonincrease_defect(K: KrausSet) -> float:
    """Largest eigenvalue of sum R^dag R minus one (<= ~1e-8 for Petz sets)."""
    acc = np.zeros((K.dim, K.dim), dtype=complex)
    for op in K.ops:
        acc += op.conj().T @ op
    return float(np.linalg.eigvalsh(acc)[-1] - 1.0)
