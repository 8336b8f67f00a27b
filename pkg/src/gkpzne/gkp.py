"""Finite-energy square-lattice grid codes.

Codewords are lattice superpositions of coherent states equivalent (to
machine precision, verified against a position-comb oracle) to applying the
photon-number envelope exp(-Delta^2 n) to the ideal grid states: centers sit
at exp(-Delta^2) sqrt(pi/2) (m + i n2) with m = 2 n1 + mu, carry Gaussian
weights exp[-(pi/4)(1 - exp(-2 Delta^2))(m^2 + n2^2)] and phases
exp[-i (pi/2) m n2]. The realized codespace energy Tr(n P_L)/2 then matches
1/(e^{2 Delta^2} - 1) up to exponentially small corrections for grid-like
envelopes, and is strictly decreasing in Delta, which justifies calibrating
Delta by bisection. It is also strictly greater than 1 for every Delta, so
targets at or below 1 cannot be bracketed and raise CalibrationError.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CalibrationError,
    CollinearCodewordsError,
    CutoffTooSmallError,
    DegenerateEnvelopeError,
    DimensionError,
)
from .fock import coherent_components, psd_inv_sqrt

DELTA_BRACKET = (0.05, 1.4)
DELTA_BRACKET_EXPANDED = (0.02, 1.5)
DEFAULT_LATTICE_TOL = 1e-12
CALIBRATION_TOL_REL = 1e-6
TOP_BAND_TOL = 1e-9


def default_cutoff(nbar: float) -> int:
    """Fock cutoff for a target mean photon number.

    Calibrated so that doubling the cutoff moves conditional pipeline
    expectations by well under 1e-6 (checked at nbar = 10).
    """
    return max(120, int(np.ceil(6.4 * nbar)))


def _lattice_points(delta: float, mu: int, lattice_tol: float):
    """Retained (m, n2, weight) with envelope weight >= lattice_tol."""
    envc = (np.pi / 4.0) * (1.0 - np.exp(-2.0 * delta * delta))
    r2_max = -np.log(lattice_tol) / envc if lattice_tol > 0 else np.inf
    ms, n2s = [], []
    m_hi = int(np.sqrt(max(r2_max, 0.0))) + 1
    for m in range(-m_hi, m_hi + 1):
        if (m - mu) % 2:
            continue
        rem = r2_max - m * m
        if rem < 0:
            continue
        n2_hi = int(np.sqrt(rem))
        for n2 in range(-n2_hi, n2_hi + 1):
            ms.append(m)
            n2s.append(n2)
    ms = np.asarray(ms, dtype=float)
    n2s = np.asarray(n2s, dtype=float)
    w = np.exp(-envc * (ms * ms + n2s * n2s))
    keep = w >= lattice_tol
    return ms[keep], n2s[keep], w[keep]


def raw_codeword(delta: float, mu: int, dim: int, lattice_tol: float = DEFAULT_LATTICE_TOL):
    """Normalized raw (non-orthogonal) codeword for logical value mu.

    Each retained center is synthesized as its exact projection onto the
    truncated space; centers far above the cutoff underflow to zero, which is
    the correct truncated amplitude. Raises CutoffTooSmallError if the built
    state keeps non-negligible weight in the top two Fock levels.

    Returns (vector, retained_term_count).
    """
    if not 0 < delta <= 1.5:
        raise ValueError(f"delta must be in (0, 1.5], got {delta}")
    if mu not in (0, 1):
        raise ValueError(f"mu must be 0 or 1, got {mu}")
    if dim < 2:
        raise DimensionError(f"dim must be >= 2, got {dim}")
    if not lattice_tol > 0:
        raise ValueError("lattice_tol must be positive")
    ms, n2s, w = _lattice_points(delta, mu, lattice_tol)
    if ms.size == 0:
        raise DegenerateEnvelopeError(
            f"no lattice term retained for mu={mu} at lattice_tol={lattice_tol}"
        )
    lam = np.exp(-delta * delta)
    alphas = lam * np.sqrt(np.pi / 2.0) * (ms + 1j * n2s)
    phases = np.exp(-0.5j * np.pi * ms * n2s)

    n = np.arange(dim)
    logfact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, dim)))))
    r = np.abs(alphas)
    ang = np.angle(alphas)
    safe_r = np.where(r > 0, r, 1.0)
    logmag = (
        -0.5 * r[:, None] ** 2
        + n[None, :] * np.log(safe_r)[:, None]
        - 0.5 * logfact[None, :]
    )
    comps = np.exp(np.clip(logmag, -745.0, 700.0)) * np.exp(1j * ang[:, None] * n[None, :])
    zero = r == 0
    if np.any(zero):
        comps[zero] = 0.0
        comps[zero, 0] = 1.0
    vec = (w * phases) @ comps
    nrm = np.linalg.norm(vec)
    if nrm == 0:
        raise DegenerateEnvelopeError("codeword vanished after truncation")
    vec = vec / nrm
    top = float(np.sum(np.abs(vec[-2:]) ** 2))
    if top > TOP_BAND_TOL:
        raise CutoffTooSmallError(
            f"codeword keeps weight {top:.2e} in the top Fock levels at dim={dim}"
        )
    return vec, int(ms.size)


def gram_matrix(raw0: np.ndarray, raw1: np.ndarray) -> np.ndarray:
    """2x2 Gram matrix of the (unit-normalized) raw pair."""
    for v in (raw0, raw1):
        if abs(np.linalg.norm(v) - 1.0) > 1e-8:
            raise ValueError("raw codewords must be unit-normalized")
    g01 = np.vdot(raw0, raw1)
    G = np.array([[1.0, g01], [np.conj(g01), 1.0]], dtype=complex)
    if np.linalg.eigvalsh(G)[0] < 1e-12:
        raise CollinearCodewordsError("raw codewords numerically collinear; Delta too large")
    return G


def lowdin_orthonormalize(raw0: np.ndarray, raw1: np.ndarray, G: np.ndarray):
    """Symmetric orthonormalization: phi_mu = sum_nu raw_nu (G^{-1/2})_{nu mu}."""
    Gi = psd_inv_sqrt(G, 0.0)
    phi0 = raw0 * Gi[0, 0] + raw1 * Gi[1, 0]
    phi1 = raw0 * Gi[0, 1] + raw1 * Gi[1, 1]
    return phi0, phi1


def mean_photon_of_projector(PL: np.ndarray) -> float:
    """Codespace-averaged energy Tr(n P_L) / 2."""
    tr = float(np.trace(PL).real)
    if abs(tr - 2.0) > 1e-6:
        raise ValueError(f"expected a rank-2 projector (trace 2), got trace {tr:.8f}")
    n = np.arange(PL.shape[0])
    return float(np.sum(n * np.diag(PL).real)) / 2.0


def _nbar_of_vectors(phi0: np.ndarray, phi1: np.ndarray) -> float:
    n = np.arange(phi0.size)
    return 0.5 * float(np.sum(n * np.abs(phi0) ** 2) + np.sum(n * np.abs(phi1) ** 2))


@dataclass(frozen=True)
class GkpCode:
    """Calibrated code bundle: envelope, codewords, isometry and projector."""

    delta: float
    nbar: float
    phi0: np.ndarray
    phi1: np.ndarray
    isometry: np.ndarray          # dim x 2, columns phi0, phi1
    projector: np.ndarray         # dim x dim, E E^dag
    dim: int
    target_nbar: float
    lattice_terms: int = field(default=0)

    def summary(self) -> dict:
        return {
            "target_nbar": self.target_nbar,
            "delta": self.delta,
            "realized_nbar": self.nbar,
            "dim": self.dim,
            "lattice_terms_retained": self.lattice_terms,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def _build_pair(delta, dim, lattice_tol):
    r0, c0 = raw_codeword(delta, 0, dim, lattice_tol)
    r1, c1 = raw_codeword(delta, 1, dim, lattice_tol)
    G = gram_matrix(r0, r1)
    phi0, phi1 = lowdin_orthonormalize(r0, r1, G)
    return phi0, phi1, c0 + c1


def calibrate_code(
    target_nbar: float,
    dim_hint: int | None = None,
    lattice_tol: float = DEFAULT_LATTICE_TOL,
) -> GkpCode:
    """Bisect Delta until the realized codespace energy matches target_nbar.

    The map Delta -> nbar is strictly decreasing over the bracket; a strict
    sign change is required (one bracket expansion allowed), so targets below
    the family's energy floor (slightly above 1) raise CalibrationError
    rather than returning a degenerate near-collinear code.
    """
    if not 0.5 <= target_nbar <= 200.0:
        raise ValueError(f"target_nbar must be in [0.5, 200], got {target_nbar}")
    dim = int(dim_hint) if dim_hint is not None else default_cutoff(target_nbar)
    tol = CALIBRATION_TOL_REL * max(1.0, target_nbar)

    def nbar_at(d):
        phi0, phi1, terms = _build_pair(d, dim, lattice_tol)
        return _nbar_of_vectors(phi0, phi1), phi0, phi1, terms

    lo, hi = DELTA_BRACKET
    f_lo, *_ = nbar_at(lo)
    f_hi, *_ = nbar_at(hi)
    if not (f_lo >= target_nbar >= f_hi):
        lo, hi = DELTA_BRACKET_EXPANDED
        f_lo, *_ = nbar_at(lo)
        f_hi, *_ = nbar_at(hi)
        if not (f_lo >= target_nbar >= f_hi):
            raise CalibrationError(
                f"target nbar={target_nbar} not bracketed by Delta in "
                f"[{lo}, {hi}] (realized range [{f_hi:.6f}, {f_lo:.6f}]) at dim={dim}"
            )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        nb, phi0, phi1, terms = nbar_at(mid)
        if abs(nb - target_nbar) <= tol:
            E = np.stack([phi0, phi1], axis=1)
            return GkpCode(
                delta=mid,
                nbar=nb,
                phi0=phi0,
                phi1=phi1,
                isometry=E,
                projector=E @ E.conj().T,
                dim=dim,
                target_nbar=float(target_nbar),
                lattice_terms=terms,
            )
        if nb > target_nbar:
            lo = mid
        else:
            hi = mid
    raise CalibrationError(f"bisection did not converge for target nbar={target_nbar}")
