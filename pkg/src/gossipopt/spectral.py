"""Dense symmetric eigendecomposition and derived spectral quantities.

Supplies the largest and smallest positive eigenvalues, the graph condition
number chi = lambda_max / lambda_min_plus, and pseudo-inverse quadratic forms
<W^+ y, y> evaluated through the eigenbasis. The pseudo-inverse is never
materialized; quadratic forms are computed one coordinate block at a time so
that stacked (n, d) states respect the Kronecker block structure of the
lifted gossip matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MAX_DIM",
    "Spectrum",
    "SpectralSummary",
    "RangeViolationError",
    "eigendecompose",
    "spectral_summary",
    "kernel_component_norm",
    "pinv_apply",
    "pinv_quadratic_form",
]

MAX_DIM = 2000

# Relative size above which a kernel component of a dual iterate is treated
# as an algorithm bug rather than numerical noise.
KERNEL_LEAK_TOL = 1e-6


class RangeViolationError(ValueError):
    """A vector expected to lie in range(W) has a significant kernel component."""


@dataclass(frozen=True)
class Spectrum:
    """Full eigendecomposition of a symmetric matrix.

    ``eigenvalues`` ascending, ``eigenvectors`` orthonormal columns, so that
    V diag(lambda) V^T reconstructs the input.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]


@dataclass(frozen=True)
class SpectralSummary:
    lambda_max: float
    lambda_min_plus: float
    chi: float
    kernel_dim: int


def eigendecompose(w: np.ndarray, max_dim: int = MAX_DIM) -> Spectrum:
    """Eigendecompose a symmetric matrix (dense, all eigenpairs).

    Deterministic for identical input. Rejects non-finite entries and
    dimensions above ``max_dim``.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise ValueError("matrix has non-finite entries")
    if w.shape[0] > max_dim:
        raise ValueError(f"dimension {w.shape[0]} exceeds bound {max_dim}")
    vals, vecs = np.linalg.eigh(w)
    return Spectrum(eigenvalues=vals, eigenvectors=vecs)


def _zero_threshold(s: Spectrum, zero_tol: float) -> float:
    return zero_tol * float(s.eigenvalues[-1])


def spectral_summary(s: Spectrum, zero_tol: float = 1e-9) -> SpectralSummary:
    """Classify eigenvalues against zero_tol * lambda_max and summarize.

    Raises if every eigenvalue is classified zero (the zero matrix carries no
    spectral information).
    """
    lam_max = float(s.eigenvalues[-1])
    thresh = zero_tol * lam_max
    positive = s.eigenvalues[s.eigenvalues > thresh]
    if lam_max <= 0.0 or positive.size == 0:
        raise ValueError("all eigenvalues classified zero")
    lam_min_plus = float(positive[0])
    return SpectralSummary(
        lambda_max=lam_max,
        lambda_min_plus=lam_min_plus,
        chi=lam_max / lam_min_plus,
        kernel_dim=int(s.n - positive.size),
    )


def _split_coeffs(s: Spectrum, y: np.ndarray, zero_tol: float):
    """Eigenbasis coefficients of a stacked state, split kernel / positive."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if y.shape[0] != s.n:
        raise ValueError(f"state has {y.shape[0]} rows, spectrum has n={s.n}")
    coeffs = s.eigenvectors.T @ y  # row i: block coefficients along v_i
    zero_mask = s.eigenvalues <= _zero_threshold(s, zero_tol)
    return coeffs, zero_mask


def kernel_component_norm(s: Spectrum, y: np.ndarray, zero_tol: float = 1e-9) -> float:
    """Norm of the projection of ``y`` onto the zero-classified eigenspace."""
    coeffs, zero_mask = _split_coeffs(s, y, zero_tol)
    return float(np.linalg.norm(coeffs[zero_mask]))


def pinv_apply(s: Spectrum, y: np.ndarray, zero_tol: float = 1e-9) -> np.ndarray:
    """Apply the pseudo-inverse blockwise: inverts positive eigenvalues only."""
    coeffs, zero_mask = _split_coeffs(s, y, zero_tol)
    inv = np.where(zero_mask, 0.0, 1.0 / np.where(zero_mask, 1.0, s.eigenvalues))
    return s.eigenvectors @ (inv[:, None] * coeffs)


def pinv_quadratic_form(s: Spectrum, y: np.ndarray, zero_tol: float = 1e-9) -> float:
    """<W^+ y, y> for y in range(W), evaluated through the eigenbasis.

    A kernel component above KERNEL_LEAK_TOL * (1 + ||y||) signals a caller
    bug (dual iterates must stay in range(W)) and raises
    RangeViolationError. The additive 1 keeps the check meaningful for
    difference arguments y^k - y* whose norm shrinks to the float noise of
    the reference while the kernel residue stays at the reference-solve
    tolerance.
    """
    coeffs, zero_mask = _split_coeffs(s, y, zero_tol)
    total = float(np.linalg.norm(coeffs))
    if total == 0.0:
        return 0.0
    kernel = float(np.linalg.norm(coeffs[zero_mask]))
    if kernel > KERNEL_LEAK_TOL * (1.0 + total):
        raise RangeViolationError(
            f"kernel component {kernel:.3e} exceeds {KERNEL_LEAK_TOL:.0e} * (1 + ||y||) = "
            f"{KERNEL_LEAK_TOL * (1.0 + total):.3e}; dual iterate left range(W)"
        )
    pos = ~zero_mask
    block_sq = np.sum(coeffs[pos] ** 2, axis=1)
    return float(np.sum(block_sq / s.eigenvalues[pos]))
