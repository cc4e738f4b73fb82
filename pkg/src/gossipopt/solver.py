"""The four iterative methods over immutable state snapshots.

All four solve min F(x) subject to x in ker(W) through the saddle system
grad F(x*) + y* = 0, W x* = 0 (or its three-variable recentering for the
loopless method), using only stacked gradient evaluations and gossip
products. Per iteration every method spends exactly one gradient
computation; PAPC, APAPC and the loopless method spend one communication
round, OPAPC spends T = floor(sqrt(chi)) rounds inside accelerated gossip.

A step consumes one SolverState and produces the next, which makes
trajectories replayable and property-testable; the only mutation is the
oracle/communication counters, which the states merely reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dataio import Trace, TraceRecord
from .diagnostics import lyapunov_apapc, lyapunov_loopless
from .gossip import ChebyshevParams, CommCounter, accelerated_gossip, chebyshev_params, gossip_multiply
from .oracle import Oracle
from .spectral import Spectrum, SpectralSummary, spectral_summary

__all__ = [
    "ALGORITHMS",
    "SolverParams",
    "SolverState",
    "derive_params",
    "initial_state",
    "papc_step",
    "apapc_step",
    "opapc_step",
    "loopless_step",
    "step_fn",
    "run",
]

ALGORITHMS = ("papc", "apapc", "opapc", "loopless")


@dataclass(frozen=True)
class SolverParams:
    """Step sizes for one algorithm.

    eta/theta/alpha/tau drive the PAPC family; the loopless method adds the
    dual block sizes lam (z step), beta, gamma, nu, sigma and the proven
    contraction margin rho. OPAPC carries its Chebyshev coefficients.
    """

    algorithm: str
    eta: float
    theta: float
    alpha: float
    tau: float
    chebyshev: ChebyshevParams | None = None
    lam: float | None = None
    beta: float | None = None
    gamma: float | None = None
    nu: float | None = None
    sigma: float | None = None
    rho: float | None = None


def derive_params(algorithm: str, L: float, mu: float, s: SpectralSummary) -> SolverParams:
    """Proven step sizes from the objective constants and the graph spectrum.

    apapc:  tau = min(1, sqrt(chi/kappa)/2), eta = 1/(4 tau L),
            theta = 1/(eta lambda_max), alpha = mu.
    opapc:  same family on the Chebyshev-compressed spectrum;
            tau = min(1, (1+c1^T) / (2 sqrt(kappa) (1-c1^T))),
            theta = (1+c1^(2T)) / (eta (1+c1^T)^2), alpha = mu.
    loopless: eta = 1/(2 sqrt(mu L)), alpha = mu/2, tau = sqrt(mu/L)/2,
            sigma = rho = sqrt(mu lmin / (L lmax)) / 18, nu = 3/(80 L),
            beta = 1/(80 L), theta = 18 sqrt(mu L lmax) / (5 sqrt(lmin)),
            gamma = lmin/(80 L), lam = 9 sqrt(mu L) / (2 sqrt(lmin lmax)).
    papc:   benchmark baseline, no proven schedule here; eta = 1/L,
            theta = 1/(eta lambda_max), which keeps the same
            eta * theta * lambda_max <= 1 coupling as the accelerated family.
    """
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if mu > L:
        raise ValueError(f"need mu <= L, got mu={mu} > L={L}")
    kappa = L / mu
    lmax, lmin = s.lambda_max, s.lambda_min_plus

    if algorithm == "papc":
        eta = 1.0 / L
        return SolverParams("papc", eta=eta, theta=1.0 / (eta * lmax), alpha=0.0, tau=1.0)

    if algorithm == "apapc":
        tau = min(1.0, 0.5 * math.sqrt(s.chi / kappa))
        eta = 1.0 / (4.0 * tau * L)
        theta = 1.0 / (eta * lmax)
        assert eta * theta * lmax <= 1.0 + 1e-12
        return SolverParams("apapc", eta=eta, theta=theta, alpha=mu, tau=tau)

    if algorithm == "opapc":
        cheb = chebyshev_params(s)
        c1t = cheb.c1**cheb.T
        tau = min(1.0, (1.0 + c1t) / (2.0 * math.sqrt(kappa) * (1.0 - c1t))) if c1t < 1.0 else 1.0
        if cheb.degenerate:
            tau = min(1.0, 0.5 / math.sqrt(kappa))
        eta = 1.0 / (4.0 * tau * L)
        theta = (1.0 + c1t**2) / (eta * (1.0 + c1t) ** 2)
        assert eta * theta * cheb.lambda1 <= 1.0 + 1e-12
        return SolverParams("opapc", eta=eta, theta=theta, alpha=mu, tau=tau, chebyshev=cheb)

    if algorithm == "loopless":
        sqrt_mul = math.sqrt(mu * L)
        sigma = math.sqrt(mu * lmin / (L * lmax)) / 18.0
        params = SolverParams(
            "loopless",
            eta=1.0 / (2.0 * sqrt_mul),
            theta=18.0 * math.sqrt(mu * L * lmax) / (5.0 * math.sqrt(lmin)),
            alpha=0.5 * mu,
            tau=0.5 * math.sqrt(mu / L),
            lam=9.0 * sqrt_mul / (2.0 * math.sqrt(lmin * lmax)),
            beta=1.0 / (80.0 * L),
            gamma=lmin / (80.0 * L),
            nu=3.0 / (80.0 * L),
            sigma=sigma,
            rho=sigma,
        )
        a = 1.0 + params.eta * params.alpha
        b = 1.0 + params.theta * params.beta - params.theta * params.nu
        if a * b + params.eta * params.theta <= 0.0:
            raise ValueError("loopless joint-solve denominator is not positive")
        return params

    raise ValueError(f"unknown algorithm: {algorithm!r}")


@dataclass(frozen=True, eq=False)
class SolverState:
    """One iteration snapshot; arrays are treated as immutable.

    Duals start at zero, which lies in range(W), and the momentum companions
    start at the primal point. The z block (and its companion) exists only
    for the loopless method.
    """

    oracle: Oracle
    w: np.ndarray
    comm: CommCounter
    k: int
    x: np.ndarray
    x_f: np.ndarray
    y: np.ndarray
    z: np.ndarray | None = None
    y_f: np.ndarray | None = None
    z_f: np.ndarray | None = None


def initial_state(algorithm: str, oracle: Oracle, w: np.ndarray, x0: np.ndarray) -> SolverState:
    x0 = np.asarray(x0, dtype=float)
    zeros = np.zeros_like(x0)
    comm = CommCounter()
    if algorithm == "loopless":
        return SolverState(
            oracle, w, comm, 0, x0, x0.copy(), zeros,
            z=zeros.copy(), y_f=zeros.copy(), z_f=zeros.copy(),
        )
    return SolverState(oracle, w, comm, 0, x0, x0.copy(), zeros)


def papc_step(st: SolverState, p: SolverParams) -> SolverState:
    """y+ = y + theta W (x - eta g - eta y); x+ = x - eta g - eta y+."""
    g = st.oracle.gradient(st.x)
    v = st.x - p.eta * g - p.eta * st.y
    y1 = st.y + p.theta * gossip_multiply(st.w, v, st.comm)
    x1 = st.x - p.eta * g - p.eta * y1
    return replace(st, k=st.k + 1, x=x1, x_f=x1, y=y1)


def _apapc_core(st: SolverState, p: SolverParams, gossip_term) -> SolverState:
    """Shared APAPC/OPAPC iteration; gossip_term supplies the dual update image.

    x_g = tau x + (1 - tau) x_f
    x_half = (1 + eta alpha)^-1 (x - eta (g - alpha x_g + y))
    y+ = y + theta * gossip_term(x_half)
    x+ = (1 + eta alpha)^-1 (x - eta (g - alpha x_g + y+))     [same g]
    x_f+ = x_g + (2 tau / (2 - tau)) (x+ - x)
    """
    xg = p.tau * st.x + (1.0 - p.tau) * st.x_f
    g = st.oracle.gradient(xg)
    denom = 1.0 / (1.0 + p.eta * p.alpha)
    drift = g - p.alpha * xg
    x_half = denom * (st.x - p.eta * (drift + st.y))
    y1 = st.y + p.theta * gossip_term(x_half)
    x1 = denom * (st.x - p.eta * (drift + y1))
    xf1 = xg + (2.0 * p.tau / (2.0 - p.tau)) * (x1 - st.x)
    return replace(st, k=st.k + 1, x=x1, x_f=xf1, y=y1)


def apapc_step(st: SolverState, p: SolverParams) -> SolverState:
    """Accelerated PAPC step: one gradient, one communication round."""
    return _apapc_core(st, p, lambda v: gossip_multiply(st.w, v, st.comm))


def opapc_step(st: SolverState, p: SolverParams) -> SolverState:
    """Optimal PAPC step: one gradient, T communication rounds."""
    return _apapc_core(st, p, lambda v: accelerated_gossip(st.w, p.chebyshev, v, st.comm))


def loopless_step(st: SolverState, p: SolverParams) -> SolverState:
    """One step of the loopless method: one gradient, one communication round.

    Mixing:   x_g = tau x + (1-tau) x_f;  y_g, z_g likewise with sigma.
    The x/y updates are written implicitly,
        x+ = x + eta alpha (x_g - x+) - eta gr + eta y+
        y+ = y + theta beta (y_g - y+) - theta hy + theta nu y+ - theta x+
    with gr = grad F(x_g) - (mu/2) x_g, hy = (2/mu)(y_g + z_g) + nu y_g.
    Eliminating the 2x2 linear system in (x+, y+) gives, with
    a = 1 + eta alpha, b = 1 + theta beta - theta nu,
    u = x + eta alpha x_g - eta gr, v = y + theta beta y_g - theta hy:
        y+ = (a v - theta u) / (a b + theta eta),  x+ = (u + eta y+) / a.
    The z update is diagonal: (1 + lam gamma) z+ = z + lam gamma z_g
    - lam W hz with hz = (2/mu)(y_g + z_g), the step's single gossip product.
    """
    mu = st.oracle.mu
    xg = p.tau * st.x + (1.0 - p.tau) * st.x_f
    yg = p.sigma * st.y + (1.0 - p.sigma) * st.y_f
    zg = p.sigma * st.z + (1.0 - p.sigma) * st.z_f

    gr = st.oracle.shifted_gradient_r(xg)
    hz = (2.0 / mu) * (yg + zg)
    hy = hz + p.nu * yg

    a = 1.0 + p.eta * p.alpha
    b = 1.0 + p.theta * p.beta - p.theta * p.nu
    denom = a * b + p.theta * p.eta
    if denom <= 0.0:
        raise RuntimeError(
            f"joint-solve denominator {denom} <= 0; loopless parameter invariant violated"
        )
    u = st.x + p.eta * p.alpha * xg - p.eta * gr
    v = st.y + p.theta * p.beta * yg - p.theta * hy
    y1 = (a * v - p.theta * u) / denom
    x1 = (u + p.eta * y1) / a
    z1 = (st.z + p.lam * p.gamma * zg - p.lam * gossip_multiply(st.w, hz, st.comm)) / (
        1.0 + p.lam * p.gamma
    )

    xf1 = xg + (2.0 * p.tau / (2.0 - p.tau)) * (x1 - st.x)
    yf1 = yg + p.sigma * (y1 - st.y)
    zf1 = zg + p.sigma * (z1 - st.z)
    return replace(st, k=st.k + 1, x=x1, x_f=xf1, y=y1, z=z1, y_f=yf1, z_f=zf1)


_STEPS = {
    "papc": papc_step,
    "apapc": apapc_step,
    "opapc": opapc_step,
    "loopless": loopless_step,
}


def step_fn(algorithm: str):
    try:
        return _STEPS[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm: {algorithm!r}") from None


def _state_finite(st: SolverState) -> bool:
    arrays = [st.x, st.x_f, st.y]
    if st.z is not None:
        arrays += [st.z, st.y_f, st.z_f]
    return all(np.all(np.isfinite(a)) for a in arrays)


def run(
    algorithm: str,
    oracle: Oracle,
    w: np.ndarray,
    spectrum: Spectrum,
    x0: np.ndarray | None = None,
    *,
    eps: float = 0.0,
    max_iters: int = 1000,
    reference=None,
    record_every: int = 1,
    params: SolverParams | None = None,
    zero_tol: float = 1e-9,
) -> Trace:
    """Iterate one algorithm from x0 (duals start at zero, in range(W)).

    Records (iteration, grad_evals, comm_rounds, sq_dist, lyapunov) at
    iteration 0, every ``record_every`` iterations, and at the stopping
    iteration. sq_dist is ||x - x*||^2 against the reference when one is
    given (NaN otherwise, and the eps stop is then inert). The Lyapunov
    value is filled for apapc and loopless runs with a reference; counters
    are exact snapshots of the oracle and communication counters. A
    non-finite iterate aborts the run, keeping the last good record.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm: {algorithm!r}")
    if max_iters < 0:
        raise ValueError("max_iters must be >= 0")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")

    summary = spectral_summary(spectrum, zero_tol)
    if params is None:
        params = derive_params(algorithm, oracle.L, oracle.mu, summary)
    if x0 is None:
        x0 = np.zeros((oracle.n, oracle.d))
    st = initial_state(algorithm, oracle, w, np.asarray(x0, dtype=float))
    step = step_fn(algorithm)

    def sq_dist(state: SolverState) -> float:
        if reference is None:
            return float("nan")
        diff = state.x - reference.x_star
        return float(np.vdot(diff, diff))

    def lyapunov(state: SolverState) -> float | None:
        if reference is None:
            return None
        if algorithm == "apapc":
            return lyapunov_apapc(state, reference, params, spectrum, zero_tol)
        if algorithm == "loopless":
            return lyapunov_loopless(state, reference, params, spectrum, zero_tol)
        return None

    def record(state: SolverState, sq: float) -> TraceRecord:
        return TraceRecord(
            iteration=state.k,
            grad_evals=oracle.grad_evals,
            comm_rounds=state.comm.rounds,
            sq_dist=sq,
            lyapunov=lyapunov(state),
        )

    trace = Trace(algorithm=algorithm, meta={"eps": eps, "max_iters": max_iters})
    trace.records.append(record(st, sq_dist(st)))
    converged = False
    aborted = False

    for k in range(1, max_iters + 1):
        st_next = step(st, params)
        sq_next = sq_dist(st_next)
        bad_sq = reference is not None and not math.isfinite(sq_next)
        if bad_sq or not _state_finite(st_next):
            aborted = True
            if trace.records[-1].iteration != st.k:
                trace.records.append(record(st, sq_dist(st)))
            break
        st = st_next
        sq = sq_next
        stop = reference is not None and eps > 0.0 and sq <= eps
        if k % record_every == 0 or stop or k == max_iters:
            trace.records.append(record(st, sq))
        if stop:
            converged = True
            break

    trace.meta.update(
        {
            "converged": converged,
            "aborted": aborted,
            "iterations": st.k,
            "grad_evals": oracle.grad_evals,
            "comm_rounds": st.comm.rounds,
        }
    )
    return trace
