"""Arithmetic and decompositions for diagonal complex matrices.

Every matrix in the transceiver model (channels, symbols, filters, noise)
is diagonal over the N subcarriers, so a matrix is stored as its length-N
vector of diagonal entries and all decompositions reduce to entrywise
formulas.

The entrywise operations can be instrumented with :func:`count_ops` to
tally arithmetic work (one unit per entry touched), which the complexity
benchmark relies on.
"""

from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

__all__ = [
    "CDiag",
    "SvdTriple",
    "NearSingular",
    "DimensionMismatch",
    "OpCounter",
    "count_ops",
    "dmul",
    "dadd",
    "dinv",
    "trace",
    "fro_norm_sq",
    "svd_diag",
    "eig_diag",
    "min_singular_sq",
    "unit_phase",
]

DEFAULT_EPS = 1e-12


class DimensionMismatch(ValueError):
    """Two diagonal matrices of different sizes were combined."""


class NearSingular(ArithmeticError):
    """A diagonal entry is too small to invert.

    Attributes
    ----------
    index : int
        Subcarrier (diagonal position) of the offending entry.
    node : int or None
        Node index, when the entry belongs to a per-node matrix.
    """

    def __init__(self, index: int, node: int | None = None, value: float | None = None):
        self.index = int(index)
        self.node = node
        self.value = value
        where = f"index {self.index}" if node is None else f"node {node}, index {self.index}"
        msg = f"near-singular diagonal entry at {where}"
        if value is not None:
            msg += f" (|entry| = {value:.3e})"
        super().__init__(msg)


# xxxxxxxxxx operation counting xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
class OpCounter:
    """Accumulates entrywise arithmetic operation counts."""

    def __init__(self):
        self.total = 0
        self.by_op: dict[str, int] = {}

    def add(self, op: str, n: int) -> None:
        self.total += n
        self.by_op[op] = self.by_op.get(op, 0) + n


_active_counter: contextvars.ContextVar[OpCounter | None] = contextvars.ContextVar(
    "nomacomac_op_counter", default=None
)


@contextlib.contextmanager
def count_ops() -> Iterator[OpCounter]:
    """Count entrywise operations performed inside the ``with`` block.

    >>> with count_ops() as c:
    ...     _ = dadd(CDiag.of(1, 2), CDiag.of(3, 4))
    >>> c.total
    2
    """
    counter = OpCounter()
    token = _active_counter.set(counter)
    try:
        yield counter
    finally:
        _active_counter.reset(token)


def _tally(op: str, n: int) -> None:
    counter = _active_counter.get()
    if counter is not None:
        counter.add(op, n)


# xxxxxxxxxx types xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
@dataclass(frozen=True, eq=False)
class CDiag:
    """Diagonal complex N x N matrix, stored as its diagonal.

    The entries are copied into a read-only ``complex128`` array; NaN and
    Inf are rejected.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.complex128, copy=True).reshape(-1)
        if not np.all(np.isfinite(arr)):
            raise ValueError("CDiag entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def of(cls, *values) -> "CDiag":
        return cls(np.asarray(values, dtype=np.complex128))

    @classmethod
    def identity(cls, n: int) -> "CDiag":
        return cls(np.ones(n, dtype=np.complex128))

    @classmethod
    def zeros(cls, n: int) -> "CDiag":
        return cls(np.zeros(n, dtype=np.complex128))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i):
        return self.entries[i]

    def conj(self) -> "CDiag":
        """Conjugate transpose (for a diagonal matrix, the entrywise conjugate)."""
        _tally("conj", self.n)
        return CDiag(np.conj(self.entries))

    H = property(conj)

    def scale(self, c: complex) -> "CDiag":
        _tally("scale", self.n)
        return CDiag(c * self.entries)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.entries)

    def allclose(self, other: "CDiag", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        return self.n == other.n and bool(
            np.allclose(self.entries, other.entries, atol=atol, rtol=rtol)
        )

    def __repr__(self) -> str:
        return f"CDiag({np.array2string(self.entries, precision=6)})"


class SvdTriple(NamedTuple):
    """``a = u @ diag(sigma) @ v^H`` with unit-modulus u, v."""

    u: CDiag
    sigma: CDiag
    v: CDiag

    def reconstruct(self) -> CDiag:
        return CDiag(self.u.entries * self.sigma.entries * np.conj(self.v.entries))


# xxxxxxxxxx operations xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
def _check_dims(a: CDiag, b: CDiag) -> None:
    if a.n != b.n:
        raise DimensionMismatch(f"dimension mismatch: {a.n} vs {b.n}")


def dmul(a: CDiag, b: CDiag) -> CDiag:
    """Matrix product of two diagonal matrices (entrywise product).

    >>> dmul(CDiag.of(1, 2), CDiag.of(3, 4)).entries.real
    array([3., 8.])
    """
    _check_dims(a, b)
    _tally("mul", a.n)
    return CDiag(a.entries * b.entries)


def dadd(a: CDiag, b: CDiag) -> CDiag:
    _check_dims(a, b)
    _tally("add", a.n)
    return CDiag(a.entries + b.entries)


def dinv(a: CDiag, eps: float = DEFAULT_EPS) -> CDiag:
    """Inverse of a diagonal matrix.

    Raises
    ------
    NearSingular
        If any ``|entry| <= eps``; carries the first offending index.
    """
    mags = np.abs(a.entries)
    bad = np.flatnonzero(mags <= eps)
    if bad.size:
        raise NearSingular(bad[0], value=float(mags[bad[0]]))
    _tally("inv", a.n)
    return CDiag(1.0 / a.entries)


def trace(a: CDiag) -> complex:
    _tally("add", a.n)
    return complex(np.sum(a.entries))


def fro_norm_sq(a: CDiag) -> float:
    """Squared Frobenius norm, ``sum |a_i|^2``."""
    _tally("abs2", a.n)
    _tally("add", a.n)
    return float(np.sum(np.abs(a.entries) ** 2))


def unit_phase(x: np.ndarray) -> np.ndarray:
    """Entrywise ``x / |x|``, with zero entries mapped to 1."""
    x = np.asarray(x, dtype=np.complex128)
    mag = np.abs(x)
    out = np.ones_like(x)
    nz = mag > 0
    out[nz] = x[nz] / mag[nz]
    return out


def svd_diag(a: CDiag) -> SvdTriple:
    """Singular value decomposition of a diagonal matrix.

    The phase of each entry goes into ``u`` and ``v`` is the identity, so
    the decomposition is unique. Zero entries get ``u_i = 1``.

    >>> t = svd_diag(CDiag.of(-2))
    >>> t.u.entries.real, t.sigma.entries.real, t.v.entries.real
    (array([-1.]), array([2.]), array([1.]))
    """
    _tally("abs", a.n)
    _tally("div", a.n)
    sigma = np.abs(a.entries)
    return SvdTriple(
        u=CDiag(unit_phase(a.entries)),
        sigma=CDiag(sigma),
        v=CDiag.identity(a.n),
    )


def eig_diag(a: CDiag) -> tuple[CDiag, CDiag]:
    """Eigendecomposition ``a = q diag(lambda) q^-1``.

    A diagonal matrix is already in its eigenbasis: ``q`` is the identity
    and ``lambda`` the diagonal itself. No arithmetic is performed.
    """
    return CDiag.identity(a.n), CDiag(a.entries)


def min_singular_sq(a: CDiag) -> float:
    """Smallest eigenvalue of ``Sigma^2``, i.e. ``min_i |a_i|^2``."""
    _tally("abs2", a.n)
    _tally("cmp", a.n)
    return float(np.min(np.abs(a.entries) ** 2))
