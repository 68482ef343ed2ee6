"""Fisher information: discrete models, quasiprobability FI, pure-state
quantum FI, Cramer-Rao bounds and the two-setting advantage figure."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DerivativeNotTraceless,
    NegativeOq,
    NotNormalized,
    ZeroInformation,
    ZeroQfi,
)
from .measurement import Hovm
from .oq import POSITIVITY_TOL, evaluate_oq, oq_derivatives
from .probe import ProbeParams, make_state

PROB_FLOOR = 1e-12
DERIV_FLOOR = 1e-9


@dataclass(frozen=True)
class FisherResult:
    """Fisher information value; diverged marks an infinite result."""

    value: float
    diverged: bool = field(default=False)

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("Fisher information cannot be negative")


def fisher_discrete(probs, derivs) -> FisherResult:
    """Sum of derivs^2 / probs over a discrete model.

    Cells with vanishing probability contribute 0 when their derivative also
    vanishes and mark the result as diverged otherwise.
    """
    probs = np.asarray(probs, dtype=float)
    derivs = np.asarray(derivs, dtype=float)
    if probs.shape != derivs.shape:
        raise ValueError("probs and derivs must have equal length")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise NotNormalized(f"probabilities sum to {probs.sum():.12f}")
    if abs(derivs.sum()) > 1e-9:
        raise DerivativeNotTraceless(f"derivatives sum to {derivs.sum():.3e}")
    total = 0.0
    for p, dp in zip(probs, derivs):
        if p <= PROB_FLOOR:
            if abs(dp) > DERIV_FLOOR:
                return FisherResult(math.inf, diverged=True)
            continue
        total += dp * dp / p
    return FisherResult(total)


def oqfi(params: ProbeParams, w: Hovm,
         positivity_tol: float = POSITIVITY_TOL) -> FisherResult:
    """Fisher information of the quasiprobability model at ``params``.

    Defined only where the quasiprobability is positive; raises NegativeOq
    otherwise.
    """
    state = make_state(params)
    dist = evaluate_oq(state, w)
    if dist.negativity > positivity_tol:
        raise NegativeOq(
            f"negativity {dist.negativity:.3e} exceeds {positivity_tol:.1e}"
        )
    derivs = oq_derivatives(state, w)
    return fisher_discrete(dist.values.ravel(), derivs.ravel())


def qfi_pure(params: ProbeParams) -> float:
    """Quantum Fisher information 4(<d psi|d psi> - |<psi|d psi>|^2)."""
    s = make_state(params)
    dd = np.vdot(s.derivative, s.derivative).real
    overlap = np.vdot(s.amplitudes, s.derivative)
    return float(4 * (dd - abs(overlap) ** 2))


def advantage(params: ProbeParams, w: Hovm) -> float:
    """log10 of the quasiprobability FI over twice the quantum FI.

    The factor 2 accounts for the two measurement settings consuming twice
    the sample budget of a single optimal measurement.
    """
    q = qfi_pure(params)
    if q <= 0:
        raise ZeroQfi("quantum Fisher information vanishes; advantage undefined")
    f = oqfi(params, w)
    if f.diverged:
        return math.inf
    if f.value == 0.0:
        return -math.inf
    return math.log10(f.value / (2 * q))


def cri_bound(fi: FisherResult, n: int) -> float:
    """Cramer-Rao lower bound 1 / (n * FI); 0 for diverged information."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if fi.diverged:
        return 0.0
    if fi.value <= 0:
        raise ZeroInformation("Fisher information is zero; bound undefined")
    return 1.0 / (n * fi.value)
