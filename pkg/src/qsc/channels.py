"""Kraus operators of the amplitude-damping (AD) and random-telegraph-noise
(RTN) channels, and their dilation into two-qubit unitaries.

A dilated unitary acts on the 4-dim basis ``|a s>`` where the dilation
qubit ``a`` is the most significant bit, so that the top-left 2x2 block is
the source Kraus operator.  When placed on a circuit with targets
``(s, a)``, qubit ``s`` is the system qubit and ``a`` the dilation qubit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .linalg import I2, Z, partial_trace, von_neumann_entropy

PSD_TOL = 1e-10
SOURCES = ("AD0", "AD1", "RTN0", "RTN1")


@dataclass(frozen=True)
class ADParams:
    """Amplitude damping parameters; ``nf = 1 - exp(alpha * beta)``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("AD parameters must be finite")
        if self.alpha * self.beta > 0:
            raise ValueError(
                f"alpha*beta = {self.alpha * self.beta!r} > 0 gives nf outside [0, 1)"
            )

    @property
    def nf(self) -> float:
        return -math.expm1(self.alpha * self.beta)


@dataclass(frozen=True)
class RTNParams:
    """Random telegraph noise: rate ``gamma``, frequency ``omega``, time ``t``."""

    gamma: float
    omega: float
    t: float

    def __post_init__(self):
        if self.gamma < 0 or self.t < 0 or not self.omega > 0:
            raise ValueError("RTN parameters require gamma >= 0, omega > 0, t >= 0")

    @property
    def p(self) -> float:
        """Noise function p(t), clamped to [-1, 1]."""
        gt = self.gamma * self.t
        value = math.exp(-gt) * (math.cos(self.omega * gt) + math.sin(self.omega * gt) / self.omega)
        return min(1.0, max(-1.0, value))

    @property
    def q(self) -> tuple[float, float]:
        q0 = 0.5 * (1.0 + self.p)
        return q0, 1.0 - q0


class KrausPair(NamedTuple):
    k0: np.ndarray
    k1: np.ndarray

    def completeness_error(self) -> float:
        total = self.k0.conj().T @ self.k0 + self.k1.conj().T @ self.k1
        return float(np.abs(total - I2).max())


@dataclass(frozen=True)
class DilatedUnitary:
    matrix: np.ndarray
    source: str
    params: Union[ADParams, RTNParams, None] = None


def ad_kraus(params: ADParams | None = None, *, nf: float | None = None) -> KrausPair:
    """AD Kraus pair from ``params``, or directly from ``nf`` in [0, 1]."""
    if (params is None) == (nf is None):
        raise TypeError("pass exactly one of params or nf")
    if nf is None:
        nf = params.nf
    if not 0.0 <= nf <= 1.0:
        raise ValueError(f"nf = {nf!r} outside [0, 1]")
    k0 = np.array([[1.0, 0.0], [0.0, math.sqrt(nf)]], dtype=complex)
    k1 = np.array([[0.0, math.sqrt(1.0 - nf)], [0.0, 0.0]], dtype=complex)
    return KrausPair(k0, k1)


def rtn_kraus(params: RTNParams) -> KrausPair:
    q0, q1 = params.q
    return KrausPair(math.sqrt(q0) * I2, math.sqrt(q1) * Z)


def sqrtm_psd_2x2(a: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Principal square root of a 2x2 Hermitian PSD matrix (closed form)."""
    a = 0.5 * (a + a.conj().T)
    tr = a[0, 0].real + a[1, 1].real
    det = (a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]).real
    gap = math.hypot(0.5 * (a[0, 0].real - a[1, 1].real), abs(a[0, 1]))
    lo = 0.5 * tr - gap
    if lo < -tol:
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {lo!r})")
    s = math.sqrt(max(det, 0.0))
    denom = tr + 2.0 * s
    if denom <= 0.0:
        return np.zeros((2, 2), dtype=complex)
    return (a + s * I2) / math.sqrt(denom)


def dilate(k: np.ndarray, source: str = "", params=None) -> DilatedUnitary:
    """Embed a contraction ``k`` as ``[[k, sqrt(I - k k^+)], [sqrt(I - k^+ k), -k^+]]``."""
    k = np.asarray(k, dtype=complex)
    if k.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got shape {k.shape}")
    kd = k.conj().T
    d = sqrtm_psd_2x2(I2 - kd @ k)
    d_dag = sqrtm_psd_2x2(I2 - k @ kd)
    u = np.block([[k, d_dag], [d, -kd]])
    return DilatedUnitary(u, source, params)


def channel_unitary(family: str, which: str, values) -> DilatedUnitary:
    """Dilated unitary for ``family`` in {AD, RTN}, ``which`` in {U0, U1}.

    ``values`` are (alpha, beta) for AD and (gamma, omega, t) for RTN.
    """
    family, which = family.upper(), which.upper()
    if which not in ("U0", "U1"):
        raise ValueError(f"unknown unitary selector {which!r}")
    if family == "AD":
        params = ADParams(*map(float, values))
        kraus = ad_kraus(params)
    elif family == "RTN":
        params = RTNParams(*map(float, values))
        kraus = rtn_kraus(params)
    else:
        raise ValueError(f"unknown channel family {family!r}")
    idx = int(which[1])
    return dilate(kraus[idx], f"{family}{idx}", params)


def entangling_check(u: DilatedUnitary | np.ndarray, probe: np.ndarray) -> float:
    """Entropy (bits) of qubit 0 after applying ``u`` to a product probe."""
    matrix = u.matrix if isinstance(u, DilatedUnitary) else np.asarray(u, dtype=complex)
    probe = np.asarray(probe, dtype=complex)
    if probe.shape != (4,):
        raise ValueError("probe must be a two-qubit statevector")
    if von_neumann_entropy(partial_trace(probe, [0])) > 1e-8:
        raise ValueError("probe is not a product state")
    return von_neumann_entropy(partial_trace(matrix @ probe, [0]))
