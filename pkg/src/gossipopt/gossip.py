"""Blockwise gossip multiplication and Chebyshev-accelerated gossip.

Multiplying a stacked (n, d) state by the n x n gossip matrix realizes the
Kronecker-lifted action column by column and models exactly one
communication round. The accelerated variant applies a degree-T Chebyshev
polynomial of the gossip matrix, costing T rounds per call, and compresses
the positive spectrum into [lambda2, lambda1] with effective condition
number at most 4.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SpectralSummary

__all__ = [
    "CommCounter",
    "ChebyshevParams",
    "gossip_multiply",
    "chebyshev_params",
    "accelerated_gossip",
    "chebyshev_scalar",
]

# Below this excess over chi = 1 the coefficient c2 = (chi+1)/(chi-1) is
# numerically useless; one exact averaging round already contracts fully.
DEGENERATE_CHI_TOL = 1e-9


@dataclass
class CommCounter:
    """Monotone communication-round counter, +1 per gossip matrix product."""

    rounds: int = 0


@dataclass(frozen=True)
class ChebyshevParams:
    """Degree and coefficients of the accelerated gossip polynomial.

    lambda1 and lambda2 bound the image of the positive spectrum under the
    polynomial; chi_eff = lambda1 / lambda2 <= 4. In the degenerate chi = 1
    fallback the polynomial collapses to W / lambda_max (T = 1, c2 cancels
    out of the one-step recursion, lambda1 = lambda2 = 1).
    """

    T: int
    c1: float
    c2: float
    c3: float
    lambda1: float
    lambda2: float
    chi_eff: float
    degenerate: bool = False


def gossip_multiply(w: np.ndarray, x: np.ndarray, counter: CommCounter) -> np.ndarray:
    """One communication round: the (n, d) product W X, counter += 1."""
    x = np.asarray(x, dtype=float)
    if w.shape[0] != w.shape[1] or w.shape[0] != x.shape[0]:
        raise ValueError(f"shape mismatch: W is {w.shape}, state is {x.shape}")
    counter.rounds += 1
    return w @ x


def chebyshev_params(s: SpectralSummary) -> ChebyshevParams:
    """Coefficients for the accelerated gossip subroutine.

    T = floor(sqrt(chi)), c1 = (sqrt(chi)-1)/(sqrt(chi)+1),
    c2 = (chi+1)/(chi-1), c3 = 2 chi / ((1+chi) lambda_max). The rescaling
    of W onto the interval (0, 2) is folded into c3, so no separate matrix
    is ever formed.
    """
    chi = s.chi
    if chi < 1.0:
        raise ValueError(f"chi must be >= 1, got {chi}")
    if chi <= 1.0 + DEGENERATE_CHI_TOL:
        return ChebyshevParams(
            T=1,
            c1=0.0,
            c2=1.0,
            c3=1.0 / s.lambda_max,
            lambda1=1.0,
            lambda2=1.0,
            chi_eff=1.0,
            degenerate=True,
        )
    sqrt_chi = np.sqrt(chi)
    t = max(1, int(np.floor(sqrt_chi)))
    c1 = (sqrt_chi - 1.0) / (sqrt_chi + 1.0)
    c2 = (chi + 1.0) / (chi - 1.0)
    c3 = 2.0 * chi / ((1.0 + chi) * s.lambda_max)
    band = 2.0 * c1**t / (1.0 + c1 ** (2 * t))
    return ChebyshevParams(
        T=t,
        c1=c1,
        c2=c2,
        c3=c3,
        lambda1=1.0 + band,
        lambda2=1.0 - band,
        chi_eff=(1.0 + band) / (1.0 - band),
    )


def accelerated_gossip(
    w: np.ndarray, p: ChebyshevParams, x: np.ndarray, counter: CommCounter
) -> np.ndarray:
    """Apply the degree-T gossip polynomial to a stacked state; counter += T.

    Recursion: a_0 = 1, a_1 = c2, x_0 = x, x_1 = c2 (I - c3 W) x,
    a_{i+1} = 2 c2 a_i - a_{i-1}, x_{i+1} = 2 c2 (I - c3 W) x_i - x_{i-1},
    returning x - x_T / a_T. Consensus inputs map to zero and positive
    eigenvalues of W map into [lambda2, lambda1].
    """
    x = np.asarray(x, dtype=float)
    if w.shape[0] != w.shape[1] or w.shape[0] != x.shape[0]:
        raise ValueError(f"shape mismatch: W is {w.shape}, state is {x.shape}")
    a_prev, a_cur = 1.0, p.c2
    x_prev = x
    x_cur = p.c2 * (x - p.c3 * gossip_multiply(w, x, counter))
    for _ in range(1, p.T):
        a_prev, a_cur = a_cur, 2.0 * p.c2 * a_cur - a_prev
        x_next = 2.0 * p.c2 * (x_cur - p.c3 * gossip_multiply(w, x_cur, counter)) - x_prev
        x_prev, x_cur = x_cur, x_next
    return x - x_cur / a_cur


def chebyshev_scalar(p: ChebyshevParams, lam: float) -> float:
    """Scalar value of the gossip polynomial at eigenvalue ``lam`` of W."""
    a_prev, a_cur = 1.0, p.c2
    x_prev = 1.0
    x_cur = p.c2 * (1.0 - p.c3 * lam)
    for _ in range(1, p.T):
        a_prev, a_cur = a_cur, 2.0 * p.c2 * a_cur - a_prev
        x_next = 2.0 * p.c2 * (1.0 - p.c3 * lam) * x_cur - x_prev
        x_prev, x_cur = x_cur, x_next
    return 1.0 - x_cur / a_cur
