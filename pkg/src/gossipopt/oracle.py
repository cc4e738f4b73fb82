"""Per-node objective families with stacked gradients and exact call counting.

States are stacked (n, d) arrays: row i belongs to node i. One ``gradient``
call evaluates every node's local gradient once and counts as exactly one
gradient computation. Diagnostic evaluations (function values, Bregman
divergences, reference solves) go through the uncounted path so benchmark
accounting stays exact.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Oracle", "QuadraticOracle", "LogisticOracle", "build_oracle"]

_POWER_SEED = 0x5EED
_POWER_TOL = 1e-10
_POWER_MAX_ITERS = 10_000


class Oracle:
    """Base objective F(x) = sum_i f_i(x_i) with 0 < mu <= L and a gradient counter.

    The counter makes instances stateful: callers must serialize access to a
    single oracle; distinct instances are fully independent.
    """

    kind: str = "base"

    def __init__(self, n: int, d: int, L: float, mu: float):
        if not (0 < mu <= L):
            raise ValueError(f"need 0 < mu <= L, got mu={mu}, L={L}")
        self.n = n
        self.d = d
        self.L = float(L)
        self.mu = float(mu)
        self.grad_evals = 0

    @property
    def kappa(self) -> float:
        return self.L / self.mu

    def _check_shape(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n, self.d):
            raise ValueError(f"expected shape {(self.n, self.d)}, got {x.shape}")
        return x

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Stacked gradient; counts as one gradient computation."""
        g = self._gradient(self._check_shape(x))
        self.grad_evals += 1
        return g

    def shifted_gradient_r(self, x: np.ndarray) -> np.ndarray:
        """Gradient of the recentered objective r(x) = F(x) - (mu/4)||x||^2.

        Returns grad F(x) - (mu/2) x and counts as one gradient computation
        (it contains the step's single full gradient evaluation).
        """
        x = self._check_shape(x)
        g = self._gradient(x)
        self.grad_evals += 1
        return g - 0.5 * self.mu * x

    def gradient_uncounted(self, x: np.ndarray) -> np.ndarray:
        """Diagnostic gradient evaluation; does not touch the counter."""
        return self._gradient(self._check_shape(x))

    def value(self, x: np.ndarray) -> float:
        return self._value(self._check_shape(x))

    def bregman(self, x: np.ndarray, ref: np.ndarray) -> float:
        """F(x) - F(ref) - <grad F(ref), x - ref>; uncounted."""
        x = self._check_shape(x)
        ref = self._check_shape(ref)
        g_ref = self._gradient(ref)
        return self._value(x) - self._value(ref) - float(np.vdot(g_ref, x - ref))

    def clone(self):
        """Fresh instance sharing the data but with a zeroed counter."""
        raise NotImplementedError

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _value(self, x: np.ndarray) -> float:
        raise NotImplementedError


class QuadraticOracle(Oracle):
    """f_i(x) = (s_i / 2) ||x - b_i||^2 with per-node scale s_i > 0.

    L = max_i s_i and mu = min_i s_i, both tight.
    """

    kind = "quadratic"

    def __init__(self, targets: np.ndarray, scales=1.0):
        targets = np.atleast_2d(np.asarray(targets, dtype=float))
        n, d = targets.shape
        if n < 1 or d < 1:
            raise ValueError("empty target array")
        scales = np.broadcast_to(np.asarray(scales, dtype=float), (n,)).copy()
        if np.any(scales <= 0):
            raise ValueError("quadratic scales must be positive")
        super().__init__(n, d, L=float(scales.max()), mu=float(scales.min()))
        self.targets = targets
        self.scales = scales

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        return self.scales[:, None] * (x - self.targets)

    def _value(self, x: np.ndarray) -> float:
        diff = x - self.targets
        return float(0.5 * np.sum(self.scales * np.sum(diff * diff, axis=1)))

    def bregman(self, x: np.ndarray, ref: np.ndarray) -> float:
        # Closed form (s_i / 2) ||x_i - ref_i||^2; the generic three-term
        # formula cancels catastrophically near convergence, this does not.
        diff = self._check_shape(x) - self._check_shape(ref)
        return float(0.5 * np.sum(self.scales * np.sum(diff * diff, axis=1)))

    def clone(self) -> "QuadraticOracle":
        return QuadraticOracle(self.targets, self.scales)


def _lambda_max_gram(a: np.ndarray) -> float:
    """Largest eigenvalue of A^T A by power iteration with a fixed seed."""
    d = a.shape[1]
    rng = np.random.default_rng(_POWER_SEED)
    v = rng.standard_normal(d)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return 0.0
    v /= nv
    lam = 0.0
    for _ in range(_POWER_MAX_ITERS):
        av = a @ v
        lam_new = float(av @ av)  # v normalized, so this is the Rayleigh quotient
        w = a.T @ av
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(lam_new - lam) <= _POWER_TOL * max(1.0, lam_new):
            return lam_new
        lam = lam_new
    return lam


class LogisticOracle(Oracle):
    """l2-regularized logistic loss per node.

    f_i(x) = (1/m_i) sum_j log(1 + exp(-b_ij <a_ij, x>)) + (reg/2) ||x||^2.

    mu = reg and L = max_i [lambda_max(A_i^T A_i) / (4 m_i)] + reg, the
    standard curvature bound for the logistic Hessian. Requires reg > 0,
    otherwise strong convexity is lost.
    """

    kind = "logistic"

    def __init__(self, features, labels, reg: float):
        if reg <= 0:
            raise ValueError("logistic oracle requires reg > 0")
        features = [np.atleast_2d(np.asarray(a, dtype=float)) for a in features]
        labels = [np.asarray(b, dtype=float).ravel() for b in labels]
        if len(features) == 0 or len(features) != len(labels):
            raise ValueError("need one non-empty (features, labels) shard per node")
        d = features[0].shape[1]
        for a, b in zip(features, labels):
            if a.shape[0] == 0:
                raise ValueError("empty shard")
            if a.shape[1] != d or b.shape[0] != a.shape[0]:
                raise ValueError("inconsistent shard shapes")

        n = len(features)
        lam = max(_lambda_max_gram(a) / (4.0 * a.shape[0]) for a in features)
        super().__init__(n, d, L=lam + reg, mu=reg)
        self.reg = float(reg)
        self._features = features
        self._labels = labels
        self._m = np.array([a.shape[0] for a in features])
        # flattened sample blocks, node boundaries for segment reductions
        self._a = np.vstack(features)
        self._b = np.concatenate(labels)
        self._starts = np.concatenate(([0], np.cumsum(self._m)[:-1]))
        self._inv_m = np.repeat(1.0 / self._m, self._m)

    def _margins(self, x: np.ndarray) -> np.ndarray:
        xs = np.repeat(x, self._m, axis=0)
        return self._b * np.einsum("md,md->m", self._a, xs)

    def _gradient(self, x: np.ndarray) -> np.ndarray:
        t = self._margins(x)
        # sigmoid(-t) without overflow on either tail
        z = np.exp(-np.abs(t))
        sig = np.where(t >= 0, z / (1.0 + z), 1.0 / (1.0 + z))
        coef = -self._b * sig * self._inv_m
        g = np.add.reduceat(coef[:, None] * self._a, self._starts, axis=0)
        return g + self.reg * x

    def _value(self, x: np.ndarray) -> float:
        t = self._margins(x)
        losses = np.logaddexp(0.0, -t) * self._inv_m
        return float(losses.sum() + 0.5 * self.reg * np.sum(x * x))

    def clone(self) -> "LogisticOracle":
        return LogisticOracle(self._features, self._labels, self.reg)


def build_oracle(kind: str, shards, reg: float = 0.0, scales=1.0) -> Oracle:
    """Construct an oracle from per-node data.

    ``quadratic``: shards is the (n, d) array of targets, plus ``scales``.
    ``logistic``: shards is a pair (features, labels) of per-node lists.
    """
    if kind == "quadratic":
        return QuadraticOracle(shards, scales)
    if kind == "logistic":
        features, labels = shards
        return LogisticOracle(features, labels, reg)
    raise ValueError(f"unknown oracle kind: {kind!r}")
