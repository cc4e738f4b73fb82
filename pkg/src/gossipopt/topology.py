"""Network graphs and their Laplacian gossip matrices.

A gossip matrix is a symmetric positive semidefinite matrix whose sparsity
pattern matches the network edges and whose kernel is exactly the consensus
subspace (all node values equal). One multiplication by it models one
communication round. This module builds the standard desk-scale topologies,
produces the unnormalized graph Laplacian, and checks the gossip axioms for
arbitrary candidate matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .spectral import eigendecompose, spectral_summary

__all__ = [
    "Graph",
    "ValidationReport",
    "GraphConnectivityError",
    "ring",
    "path",
    "grid",
    "complete",
    "erdos_renyi",
    "build_graph",
    "laplacian",
    "validate_gossip",
]

DEFAULT_ER_RETRIES = 100


class GraphConnectivityError(RuntimeError):
    """Random graph generation failed to produce a connected graph."""


@dataclass(frozen=True)
class Graph:
    """Undirected graph on nodes 0..n-1 with a canonical (i < j) edge set."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError(f"need at least 2 nodes, got n={self.n}")
        for i, j in self.edges:
            if not (0 <= i < j < self.n):
                raise ValueError(f"invalid edge ({i}, {j}) for n={self.n}")

    def adjacency(self) -> list[list[int]]:
        """Sorted neighbor lists."""
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        for lst in nbrs:
            lst.sort()
        return nbrs

    def degree(self, i: int) -> int:
        return sum(1 for a, b in self.edges if a == i or b == i)

    def is_connected(self) -> bool:
        nbrs = self.adjacency()
        seen = [False] * self.n
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for v in nbrs[u]:
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
        return all(seen)


def _canonical(edges) -> frozenset[tuple[int, int]]:
    return frozenset((min(i, j), max(i, j)) for i, j in edges if i != j)


def ring(n: int) -> Graph:
    """Cycle graph: node i linked to (i + 1) mod n."""
    if n < 2:
        raise ValueError(f"ring needs n >= 2, got {n}")
    return Graph(n, _canonical((i, (i + 1) % n) for i in range(n)))


def path(n: int) -> Graph:
    """Path graph: node i linked to i + 1."""
    if n < 2:
        raise ValueError(f"path needs n >= 2, got {n}")
    return Graph(n, _canonical((i, i + 1) for i in range(n - 1)))


def grid(rows: int, cols: int) -> Graph:
    """rows x cols lattice, row-major node numbering."""
    n = rows * cols
    if rows < 1 or cols < 1 or n < 2:
        raise ValueError(f"grid needs at least 2 nodes, got {rows}x{cols}")
    edges = []
    for r in range(rows):
        for c in range(cols):
            u = r * cols + c
            if c + 1 < cols:
                edges.append((u, u + 1))
            if r + 1 < rows:
                edges.append((u, u + cols))
    return Graph(n, _canonical(edges))


def complete(n: int) -> Graph:
    """Complete graph on n nodes."""
    if n < 2:
        raise ValueError(f"complete needs n >= 2, got {n}")
    return Graph(n, _canonical((i, j) for i in range(n) for j in range(i + 1, n)))


def erdos_renyi(
    n: int,
    avg_degree: float,
    seed: int,
    max_retries: int = DEFAULT_ER_RETRIES,
) -> Graph:
    """Connected Erdos-Renyi graph with edge probability avg_degree / (n - 1).

    Disconnected draws are resampled from the same seeded generator; after
    ``max_retries`` failures the generation aborts rather than silently
    returning a disconnected network.
    """
    if n < 2:
        raise ValueError(f"erdos_renyi needs n >= 2, got {n}")
    if not 0 < avg_degree < n:
        raise ValueError(f"average degree must lie in (0, n), got {avg_degree}")
    p = avg_degree / (n - 1)
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for _ in range(max_retries):
        draws = rng.random(len(pairs))
        g = Graph(n, frozenset(e for e, u in zip(pairs, draws) if u < p))
        if g.is_connected():
            return g
    raise GraphConnectivityError(
        f"no connected graph in {max_retries} draws (n={n}, "
        f"avg_degree={avg_degree}, seed={seed}); raise the degree or retry budget"
    )


def build_graph(spec: Mapping) -> Graph:
    """Build a graph from a topology descriptor.

    Recognized kinds: ``ring``/``path``/``complete`` (field ``n``),
    ``grid`` (fields ``rows``, ``cols``), ``erdos_renyi`` (fields ``n``,
    ``avg_degree``, ``seed``, optional ``max_retries``).
    """
    kind = spec.get("kind")
    if kind == "ring":
        return ring(int(spec["n"]))
    if kind == "path":
        return path(int(spec["n"]))
    if kind == "grid":
        return grid(int(spec["rows"]), int(spec["cols"]))
    if kind == "complete":
        return complete(int(spec["n"]))
    if kind == "erdos_renyi":
        return erdos_renyi(
            int(spec["n"]),
            float(spec["avg_degree"]),
            int(spec["seed"]),
            int(spec.get("max_retries", DEFAULT_ER_RETRIES)),
        )
    raise ValueError(f"unknown graph kind: {kind!r}")


def laplacian(g: Graph) -> np.ndarray:
    """Unnormalized graph Laplacian: degree on the diagonal, -1 per edge."""
    w = np.zeros((g.n, g.n))
    for i, j in g.edges:
        w[i, j] = -1.0
        w[j, i] = -1.0
        w[i, i] += 1.0
        w[j, j] += 1.0
    return w


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the four gossip-matrix axiom checks."""

    symmetric: bool
    psd: bool
    sparsity_ok: bool
    kernel_is_consensus: bool

    @property
    def passed(self) -> bool:
        return self.symmetric and self.psd and self.sparsity_ok and self.kernel_is_consensus


def validate_gossip(w: np.ndarray, g: Graph, zero_tol: float = 1e-9) -> ValidationReport:
    """Check the gossip axioms of ``w`` against graph ``g``.

    symmetric: w equals its transpose (tiny relative slack for matrices
    assembled column by column); psd: no eigenvalue below -zero_tol * lambda_max;
    sparsity_ok: nonzero entries only on the diagonal or at edges of ``g``;
    kernel_is_consensus: exactly one eigenvalue classified as zero (threshold
    zero_tol * lambda_max) and its eigenvector is the all-ones direction.
    """
    w = np.asarray(w, dtype=float)
    if w.shape != (g.n, g.n):
        raise ValueError(f"matrix shape {w.shape} does not match n={g.n}")

    scale = max(1.0, float(np.max(np.abs(w))))
    symmetric = bool(np.max(np.abs(w - w.T)) <= 1e-12 * scale)

    allowed = np.eye(g.n, dtype=bool)
    for i, j in g.edges:
        allowed[i, j] = True
        allowed[j, i] = True
    sparsity_ok = bool(np.all(w[~allowed] == 0.0))

    spec = eigendecompose(0.5 * (w + w.T))
    lam_max = float(spec.eigenvalues[-1])
    if lam_max <= 0.0:
        return ValidationReport(symmetric, False, sparsity_ok, False)
    thresh = zero_tol * lam_max
    psd = bool(spec.eigenvalues[0] >= -thresh)

    zero_idx = np.flatnonzero(spec.eigenvalues <= thresh)
    kernel_is_consensus = False
    if zero_idx.size == 1:
        v = spec.eigenvectors[:, zero_idx[0]]
        ones = np.full(g.n, 1.0 / np.sqrt(g.n))
        kernel_is_consensus = bool(abs(abs(float(v @ ones)) - 1.0) <= 1e-8)

    return ValidationReport(symmetric, psd, sparsity_ok, kernel_is_consensus)
