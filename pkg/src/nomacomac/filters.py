"""Receive/transmit filter design and the channel-feedback protocol.

The receive filter is ``A = sqrt(eta) F`` with F unitary. Three methods pick
F differently:

``a1``
    phase of the average sum channel ``H_s / K`` (heuristic baseline);
``a2``
    eigenvectors of the sum channel ``H_s``;
``a3``
    right singular vectors of the effective channel ``G``.

All methods then share the closed-form denoising factor and zero-forcing
transmit filters::

    eta = max_k tr((F^H H_k)(F^H H_k)^H)^-1 / P0
    B_k = A_k^H (A_k A_k^H)^-1,   A_k = A^H H_k

Per-draw functions work on :class:`~nomacomac.diag.CDiag` values and are
instrumented for operation counting; :func:`design_arrays` is the batched
equivalent used by the Monte-Carlo harness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelSet, effective_channel_g, effective_channel_g_array, sum_channel
from .diag import (
    DEFAULT_EPS,
    CDiag,
    DimensionMismatch,
    NearSingular,
    dadd,
    dinv,
    dmul,
    eig_diag,
    fro_norm_sq,
    min_singular_sq,
    svd_diag,
    trace,
    unit_phase,
)

__all__ = [
    "METHODS",
    "FilterSolution",
    "FeedbackRecord",
    "unitary_a1",
    "unitary_a2",
    "unitary_a3",
    "unitary",
    "eta_star",
    "transmit_filters",
    "design",
    "feedback_signal",
    "feedback_aggregate",
    "feedback_postprocess",
    "design_from_feedback",
    "design_arrays",
]

METHODS = ("a1", "a2", "a3")
METHOD_LABELS = {
    "a1": "average sum-channel",
    "a2": "eigenvector",
    "a3": "effective channel",
}

# relative slack on the filter invariants
_UNITARY_TOL = 1e-10
_POWER_TOL = 1e-9


def _check_method(method: str) -> str:
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    return method


@dataclass(frozen=True, eq=False)
class FilterSolution:
    """Receive filter ``a``, transmit filters ``b`` and denoising factor.

    Construction checks ``a^H a = eta I`` and ``||b_k||^2 <= p0`` for
    every node.
    """

    method: str
    a: CDiag
    b: tuple[CDiag, ...]
    eta: float
    f: CDiag
    p0: float

    def __post_init__(self):
        _check_method(self.method)
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta!r}")
        aa = np.abs(self.a.entries) ** 2
        if np.max(np.abs(aa - self.eta)) > _UNITARY_TOL * max(1.0, self.eta):
            raise ValueError("receive filter violates A^H A = eta I")
        for k, bk in enumerate(self.b):
            if bk.n != self.a.n:
                raise DimensionMismatch(f"transmit filter {k} has dimension {bk.n}")
            if fro_norm_sq(bk) > self.p0 * (1 + _POWER_TOL):
                raise ValueError(f"transmit filter {k} exceeds the power budget")

    @property
    def nodes(self) -> int:
        return len(self.b)


@dataclass(frozen=True, eq=False)
class FeedbackRecord:
    d: tuple[CDiag, ...]
    z: CDiag


# xxxxxxxxxx unitary parts xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
def unitary_a1(ch: ChannelSet, m: int) -> CDiag:
    """Phase of the average sum channel; zero entries map to 1."""
    avg = sum_channel(ch, m).scale(1.0 / ch.nodes)
    return svd_diag(avg).u


def unitary_a2(ch: ChannelSet, m: int) -> CDiag:
    """Eigenvectors of the sum channel (the identity for diagonal channels)."""
    q, _ = eig_diag(sum_channel(ch, m))
    return q


def unitary_a3(ch: ChannelSet, m: int) -> CDiag:
    """Right singular vectors ``V_G`` of the effective channel."""
    return svd_diag(effective_channel_g(ch, m)).v


_UNITARY = {"a1": unitary_a1, "a2": unitary_a2, "a3": unitary_a3}


def unitary(method: str, ch: ChannelSet, m: int) -> CDiag:
    return _UNITARY[_check_method(method)](ch, m)


# xxxxxxxxxx closed-form eta and B_k xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
def eta_star(f: CDiag, ch: ChannelSet, m: int, p0: float, eps: float = DEFAULT_EPS) -> float:
    """Denoising factor ``max_k tr((F_k F_k^H)^-1) / p0`` with ``F_k = F^H H_k``.

    Raises
    ------
    NearSingular
        If some ``F_k F_k^H`` has an entry at or below ``eps``.
    """
    if not p0 > 0:
        raise ValueError(f"P0 must be positive, got {p0!r}")
    fh = f.conj()
    best = -np.inf
    for k, hk in enumerate(ch.symbol(m)):
        fk = dmul(fh, hk)
        try:
            inv = dinv(dmul(fk, fk.conj()), eps)
        except NearSingular as exc:
            raise NearSingular(exc.index, node=k, value=exc.value) from None
        best = max(best, trace(inv).real / p0)
    return float(best)


def transmit_filters(a: CDiag, ch: ChannelSet, m: int, eps: float = DEFAULT_EPS) -> tuple[CDiag, ...]:
    """Zero-forcing transmit filters ``B_k = A_k^H (A_k A_k^H)^-1``."""
    ah = a.conj()
    out = []
    for k, hk in enumerate(ch.symbol(m)):
        ak = dmul(ah, hk)
        try:
            inv = dinv(dmul(ak, ak.conj()), eps)
        except NearSingular as exc:
            raise NearSingular(exc.index, node=k, value=exc.value) from None
        out.append(dmul(ak.conj(), inv))
    return tuple(out)


def design(method: str, ch: ChannelSet, m: int, p0: float, eps: float = DEFAULT_EPS) -> FilterSolution:
    """Closed-form filter design for one OFDM symbol."""
    f = unitary(method, ch, m)
    return _complete(method, f, ch, m, p0, eps)


def _complete(method, f, ch, m, p0, eps) -> FilterSolution:
    eta = eta_star(f, ch, m, p0, eps)
    a = f.scale(np.sqrt(eta))
    b = transmit_filters(a, ch, m, eps)
    return FilterSolution(method=method, a=a, b=b, eta=eta, f=f, p0=p0)


# xxxxxxxxxx feedback protocol xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
def feedback_signal(h_k: CDiag, eps: float = DEFAULT_EPS) -> CDiag:
    """Feedback signal ``D_k = lambda_min(Sigma_k^2) V_k Sigma_k^-1 U_k^H``.

    Depends on the node's own channel only, and satisfies
    ``H_k D_k = lambda_min(Sigma_k^2) I``.
    """
    u, sigma, v = svd_diag(h_k)
    lam = min_singular_sq(h_k)
    return dmul(dmul(v, dinv(sigma, eps)), u.conj()).scale(lam)


def feedback_aggregate(ch: ChannelSet, m: int, d: Sequence[CDiag]) -> CDiag:
    """Noiseless superposition ``Z = sum_k H_k D_k`` observed at the AP."""
    hs = ch.symbol(m)
    if len(d) != len(hs):
        raise DimensionMismatch(f"{len(d)} feedback signals for {len(hs)} nodes")
    z = None
    for hk, dk in zip(hs, d):
        term = dmul(hk, dk)
        z = term if z is None else dadd(z, term)
    return z


def feedback_postprocess(z: CDiag) -> CDiag:
    """AP post-processing: the left unitary factor ``U_Z``."""
    return svd_diag(z).u


def design_from_feedback(
    ch: ChannelSet, m: int, p0: float, eps: float = DEFAULT_EPS
) -> tuple[FilterSolution, FeedbackRecord]:
    """Rebuild the a3 solution from one round of channel feedback."""
    d = tuple(feedback_signal(hk, eps) for hk in ch.symbol(m))
    z = feedback_aggregate(ch, m, d)
    f = feedback_postprocess(z)
    return _complete("a3", f, ch, m, p0, eps), FeedbackRecord(d=d, z=z)


# xxxxxxxxxx batched design xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx
def design_arrays(
    method: str,
    h: np.ndarray,
    p0: float,
    mask: np.ndarray | None = None,
    eps: float = DEFAULT_EPS,
):
    """Batched filter design.

    Parameters
    ----------
    method : {'a1', 'a2', 'a3'}
    h : ndarray, shape (..., K, N)
    p0 : float
    mask : bool ndarray, shape (..., K, N), optional
        Node/subcarrier participation. Inactive entries get zero transmit
        filter and do not enter eta.

    Returns
    -------
    f, eta, a, b : ndarrays of shape (..., N), (...), (..., N), (..., K, N)
    """
    _check_method(method)
    if not p0 > 0:
        raise ValueError(f"P0 must be positive, got {p0!r}")
    h = np.asarray(h, dtype=np.complex128)
    if method == "a1":
        f = unit_phase(h.sum(axis=-2) / h.shape[-2])
    elif method == "a2":
        # eigenbasis of a diagonal matrix
        f = np.ones(h.shape[:-2] + h.shape[-1:], dtype=np.complex128)
    else:
        g = effective_channel_g_array(h)
        # V of the phase-into-U SVD convention
        f = np.ones_like(g)

    fk = np.conj(f)[..., np.newaxis, :] * h
    fk2 = np.abs(fk) ** 2
    _raise_if_singular(fk2, mask, eps)
    inv = np.zeros_like(fk2)
    active = np.ones(fk2.shape, dtype=bool) if mask is None else mask
    np.divide(1.0, fk2, out=inv, where=active)
    eta = inv.sum(axis=-1).max(axis=-1) / p0

    a = np.sqrt(eta)[..., np.newaxis] * f
    ak = np.conj(a)[..., np.newaxis, :] * h
    ak2 = np.abs(ak) ** 2
    b = np.zeros_like(ak)
    np.divide(np.conj(ak), ak2, out=b, where=active)
    return f, eta, a, b


def _raise_if_singular(mag2, mask, eps):
    bad = mag2 <= eps
    if mask is not None:
        bad &= mask
    if bad.any():
        idx = np.argwhere(bad)[0]
        raise NearSingular(idx[-1], node=int(idx[-2]), value=float(np.sqrt(mag2[tuple(idx)])))
