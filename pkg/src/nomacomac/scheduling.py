"""Subfunction planning and node selection.

The desired function over K nodes is split into ``B = K / M`` subfunctions
of M nodes each; ``L = B / D`` subfunctions share a subcarrier, so
``T = L * M`` nodes are active per subcarrier. The active nodes on a
subcarrier are the T with the largest channel gains.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .diag import CDiag, DimensionMismatch

__all__ = [
    "IndivisiblePlan",
    "SubfunctionPlan",
    "SubcarrierAssignment",
    "make_plan",
    "select_nodes",
    "assign_subcarriers",
    "participation_mask",
    "assemble_combined",
    "SupportViolation",
]


class IndivisiblePlan(ValueError):
    def __init__(self, numerator: int, divisor: int):
        self.numerator = numerator
        self.divisor = divisor
        super().__init__(f"{divisor} does not divide {numerator}")


class SupportViolation(ValueError):
    """A node carries a nonzero symbol on a subcarrier it is not assigned to."""


@dataclass(frozen=True)
class SubfunctionPlan:
    K: int
    M: int
    B: int
    D: int
    L: int
    T: int

    def groups(self) -> list[list[int]]:
        """Static partition of node indices into the B subfunction groups."""
        return [list(range(b * self.M, (b + 1) * self.M)) for b in range(self.B)]


def make_plan(K: int, M: int | None = None, D: int = 1) -> SubfunctionPlan:
    """Build a subfunction plan; ``M`` defaults to ``K`` (one subfunction).

    >>> make_plan(8, 4, 1)
    SubfunctionPlan(K=8, M=4, B=2, D=1, L=2, T=8)
    """
    M = K if M is None else M
    for name, v in (("K", K), ("M", M), ("D", D)):
        if int(v) != v or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v!r}")
    if K % M:
        raise IndivisiblePlan(K, M)
    B = K // M
    if B % D:
        raise IndivisiblePlan(B, D)
    L = B // D
    return SubfunctionPlan(K=K, M=M, B=B, D=D, L=L, T=L * M)


def select_nodes(gains: Sequence[float], T: int) -> list[int]:
    """Indices of the ``T`` largest gains, descending, ties by lower index."""
    gains = np.abs(np.asarray(gains, dtype=float))
    if not 0 <= T <= gains.size:
        raise ValueError(f"T={T} out of range for {gains.size} nodes")
    # stable sort on the negated gains keeps equal gains in index order
    order = np.argsort(-gains, kind="stable")
    return [int(i) for i in order[:T]]


@dataclass(frozen=True)
class SubcarrierAssignment:
    """Per-subcarrier active nodes, in descending gain order.

    ``nodes[i]`` lists the T nodes active on subcarrier ``i``; consecutive
    runs of M entries form the L subfunction groups on that subcarrier.
    """

    plan: SubfunctionPlan
    nodes: tuple[tuple[int, ...], ...]

    @property
    def subcarriers(self) -> int:
        return len(self.nodes)

    def groups(self, i: int) -> list[tuple[int, ...]]:
        row = self.nodes[i]
        M = self.plan.M
        return [row[j : j + M] for j in range(0, len(row), M)]

    def is_assigned(self, k: int, i: int) -> bool:
        return k in self.nodes[i]

    def mask(self) -> np.ndarray:
        """Boolean ``(K, N)`` participation mask."""
        out = np.zeros((self.plan.K, self.subcarriers), dtype=bool)
        for i, row in enumerate(self.nodes):
            out[list(row), i] = True
        return out


def assign_subcarriers(h: np.ndarray, plan: SubfunctionPlan) -> SubcarrierAssignment:
    """Select the T strongest nodes on every subcarrier of one symbol.

    Parameters
    ----------
    h : ndarray, shape (K, N)
        Channel coefficients for a single OFDM symbol.
    """
    h = np.asarray(h)
    if h.shape[0] != plan.K:
        raise DimensionMismatch(f"channel has {h.shape[0]} nodes, plan expects {plan.K}")
    rows = tuple(tuple(select_nodes(np.abs(h[:, i]), plan.T)) for i in range(h.shape[1]))
    return SubcarrierAssignment(plan=plan, nodes=rows)


def participation_mask(h: np.ndarray, T: int) -> np.ndarray:
    """Vectorized participation mask for ``h[..., K, N]``.

    Marks the T largest-gain nodes per subcarrier; identical selection to
    :func:`select_nodes` (stable ordering for ties).
    """
    K = h.shape[-2]
    if T >= K:
        return np.ones(h.shape, dtype=bool)
    order = np.argsort(-np.abs(h), axis=-2, kind="stable")
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(K).reshape(-1, 1), axis=-2)
    return ranks < T


def assemble_combined(
    symbols: Mapping[tuple[int, int], CDiag],
    powers: Mapping[tuple[int, int], CDiag] | None,
    assignment: SubcarrierAssignment,
    normalize: bool = True,
) -> list[CDiag]:
    """Combined transmit matrices ``X_k = sum_l V_k^l X_k^l``.

    Parameters
    ----------
    symbols : mapping (node, subfunction) -> CDiag
        Per-subfunction symbol matrices ``X_k^l``. Missing keys are zero.
    powers : mapping (node, subfunction) -> CDiag, optional
        Power allocations ``V_k^l``; missing entries default to identity.
    assignment : SubcarrierAssignment
    normalize : bool
        Rescale each node to unit average power over its assigned
        subcarriers. Turn off to keep the map linear.

    Returns
    -------
    list of CDiag, one per node.
    """
    K, N = assignment.plan.K, assignment.subcarriers
    mask = assignment.mask()
    acc = np.zeros((K, N), dtype=np.complex128)
    for (k, l), x in symbols.items():
        if x.n != N:
            raise DimensionMismatch(f"symbol ({k}, {l}) has dimension {x.n}, expected {N}")
        v = powers.get((k, l)) if powers else None
        if v is not None and v.n != N:
            raise DimensionMismatch(f"power ({k}, {l}) has dimension {v.n}, expected {N}")
        term = x.entries if v is None else v.entries * x.entries
        bad = np.flatnonzero((term != 0) & ~mask[k])
        if bad.size:
            raise SupportViolation(f"node {k} subfunction {l} nonzero on unassigned subcarrier {bad[0]}")
        acc[k] += term
    if normalize:
        for k in range(K):
            support = mask[k]
            if not support.any():
                continue
            power = np.mean(np.abs(acc[k, support]) ** 2)
            if power > 0:
                acc[k] /= np.sqrt(power)
    return [CDiag(row) for row in acc]
