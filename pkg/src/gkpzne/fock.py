"""Truncated Fock-space linear algebra.

Operators are plain complex numpy arrays of shape (dim, dim); the array shape
carries the cutoff, and numpy itself rejects arithmetic between mismatched
truncations. Convention: hbar = 1, a = (q + ip)/sqrt(2), so a phase-space
displacement D(alpha) shifts (q, p) by sqrt(2)(Re alpha, Im alpha).
"""

from dataclasses import dataclass

import numpy as np

from .errors import CutoffTooSmallError, DimensionError, NotHermitianError, NotPSDError

# Relative spectral floor shared by every pseudo-inverse in the package.
SPECTRAL_FLOOR = 1e-12

HERMITIAN_TOL = 1e-10


def _check_dim(dim: int) -> int:
    if int(dim) != dim or dim < 2:
        raise DimensionError(f"Fock cutoff must be an integer >= 2, got {dim!r}")
    return int(dim)


def annihilation(dim: int) -> np.ndarray:
    """Annihilation operator a with entries <n-1|a|n> = sqrt(n)."""
    dim = _check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def creation(dim: int) -> np.ndarray:
    """Creation operator a^dag."""
    return annihilation(dim).conj().T


def number_op(dim: int) -> np.ndarray:
    """Photon number operator n = a^dag a (diagonal on the truncated space)."""
    dim = _check_dim(dim)
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def displacement(alpha: complex, dim: int) -> np.ndarray:
    """exp(alpha a^dag - alpha* a) on the truncated space.

    Evaluated through the unitary diagonalization of the anti-Hermitian
    generator, so the result is unitary to rounding. Writing
    alpha = r e^{i theta}, the generator equals R(theta) r(a^dag - a)
    R(theta)^dag with R = e^{i theta n}, which lets callers reuse one
    eigendecomposition of (a^dag - a) across many alpha (see wigner()).
    """
    dim = _check_dim(dim)
    alpha = complex(alpha)
    if alpha == 0:
        return np.eye(dim, dtype=complex)
    a = annihilation(dim)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    w, V = np.linalg.eigh(-1j * gen)
    return (V * np.exp(1j * w)) @ V.conj().T


def coherent_state(alpha: complex, dim: int) -> np.ndarray:
    """Coherent state D(alpha)|0>, components e^{-|a|^2/2} a^n / sqrt(n!).

    Requires |alpha|^2 + 6|alpha| + 10 <= dim so that the Poisson tail above
    the cutoff is negligible and the truncated vector has unit norm to 1e-10.
    """
    dim = _check_dim(dim)
    alpha = complex(alpha)
    mag = abs(alpha)
    if mag * mag + 6.0 * mag + 10.0 > dim:
        raise CutoffTooSmallError(
            f"coherent state with |alpha|={mag:.3f} needs dim >= "
            f"{mag * mag + 6 * mag + 10:.0f}, got {dim}"
        )
    out = np.zeros(dim, dtype=complex)
    c = complex(np.exp(-0.5 * mag * mag))
    out[0] = c
    for n in range(1, dim):
        c = c * alpha / np.sqrt(n)
        out[n] = c
    return out


def coherent_components(alpha: complex, dim: int) -> np.ndarray:
    """Truncated projection of |alpha> without the tail-containment check.

    Log-space evaluation; centers far above the cutoff underflow to zero,
    which is the exact truncated projection of such states. Used by the
    lattice-sum codeword builder where far, exponentially-suppressed centers
    are legitimate.
    """
    dim = _check_dim(dim)
    alpha = complex(alpha)
    if alpha == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    n = np.arange(dim)
    r = abs(alpha)
    logfact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, dim)))))
    logmag = -0.5 * r * r + n * np.log(r) - 0.5 * logfact
    return np.exp(np.clip(logmag, -745.0, 700.0)) * np.exp(1j * np.angle(alpha) * n)


def check_hermitian(H: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {H.shape}")
    dev = np.max(np.abs(H - H.conj().T))
    if dev > tol:
        raise NotHermitianError(f"matrix deviates from Hermitian by {dev:.3e} > {tol:.0e}")


def psd_inv_sqrt(H: np.ndarray, epsilon: float = 0.0) -> np.ndarray:
    """(H + eps I)^(-1/2) for eps > 0, else the pseudo-inverse square root.

    H must be Hermitian PSD within tolerance. With eps = 0, eigenvalues below
    SPECTRAL_FLOOR * lambda_max are treated as the null space and mapped to 0.
    """
    check_hermitian(H)
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    w, U = np.linalg.eigh(H)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and w[0] < -1e-10 * max(scale, 1e-300):
        raise NotPSDError(f"eigenvalue {w[0]:.3e} below -1e-10 * ||H||")
    if epsilon > 0:
        vals = (np.maximum(w, 0.0) + epsilon) ** -0.5
    else:
        floor = SPECTRAL_FLOOR * scale
        vals = np.where(w > floor, np.abs(np.maximum(w, floor)) ** -0.5, 0.0)
    return (U * vals) @ U.conj().T


@dataclass(frozen=True)
class WignerGrid:
    """Sampled Wigner function W(q, p); values[i, j] = W(q_axis[i], p_axis[j])."""

    q_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        for ax in (self.q_axis, self.p_axis):
            d = np.diff(ax)
            if ax.size < 2 or np.any(d <= 0):
                raise ValueError("axes must be strictly increasing with >= 2 samples")

    def to_csv(self, path) -> None:
        """Write header q,p,w and one row-major row per grid point."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("q,p,w\n")
            for i, q in enumerate(self.q_axis):
                for j, p in enumerate(self.p_axis):
                    fh.write(f"{q:.17g},{p:.17g},{self.values[i, j]:.17g}\n")


def wigner(rho: np.ndarray, q_axis, p_axis, weight: float | None = None) -> WignerGrid:
    """Displaced-parity Wigner function W(q,p) = Tr[rho D(a) P D(a)^dag] / pi.

    a = (q + ip)/sqrt(2) and P the photon-number parity. rho is
    eigendecomposed once and each displacement is applied through the shared
    eigenbasis of (a^dag - a), so the sum over parity is manifestly real.
    """
    check_hermitian(rho, 1e-8)
    q_axis = np.asarray(q_axis, dtype=float)
    p_axis = np.asarray(p_axis, dtype=float)
    dim = rho.shape[0]
    tr = float(np.trace(rho).real)
    if weight is not None and abs(tr - weight) > 1e-6:
        raise ValueError(f"trace {tr:.8f} differs from declared weight {weight:.8f}")

    lam, vecs = np.linalg.eigh(rho)
    keep = np.abs(lam) > 1e-14 * max(1.0, float(np.max(np.abs(lam))))
    lam, vecs = lam[keep], vecs[:, keep]

    a = annihilation(dim)
    w, V = np.linalg.eigh(-1j * (a.conj().T - a))  # a^dag - a = i * Hermitian
    Vc = V.conj()

    qg, pg = np.meshgrid(q_axis, p_axis, indexing="ij")
    alpha = ((qg + 1j * pg) / np.sqrt(2.0)).ravel()
    r = np.abs(alpha)
    theta = np.angle(alpha)
    n = np.arange(dim)
    parity = np.where(n % 2 == 0, 1.0, -1.0)

    phase_in = np.exp(-1j * np.outer(theta, n))      # R(theta)^dag applied entrywise
    rot = np.exp(-1j * np.outer(r, w))               # e^{-r (a^dag - a)} eigenphases
    W = np.zeros(alpha.size)
    for lk, vk in zip(lam, vecs.T):
        u = phase_in * vk[None, :]
        z = (u @ Vc * rot) @ V.T
        W += lk * ((np.abs(z) ** 2) @ parity)
    W /= np.pi
    return WignerGrid(q_axis, p_axis, W.reshape(q_axis.size, p_axis.size))
