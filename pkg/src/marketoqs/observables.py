"""Moments, kurtosis and entropies of market states and probability vectors.

All logarithms are natural.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hermcore import TOL, as_matrix, eig_hermitian
from .operators import MarketState

__all__ = [
    "MomentSet",
    "expectation",
    "moments",
    "moments_from_distribution",
    "paper_excess_kurtosis",
    "standard_excess_kurtosis",
    "shannon_entropy",
    "entropy_from_eigenvalues",
    "von_neumann_entropy",
    "pinch_diagonal",
    "purity",
]


@dataclass(frozen=True)
class MomentSet:
    mean: float
    second_moment: float
    variance: float
    fourth_moment: float
    excess_kurtosis: float
    central_kurtosis: float


def expectation(rho, op) -> float:
    """``Tr[op rho]``; the imaginary residue must be negligible."""
    a = as_matrix(rho)
    o = as_matrix(op)
    if a.shape != o.shape:
        raise ValueError(f"dimension mismatch: {o.shape} vs {a.shape}")
    # Tr[O rho] = sum_ij O_ij rho_ji without forming the product
    val = np.sum(o * a.T)
    scale = max(1.0, float(np.abs(o).max()))
    if abs(val.imag) > TOL.expectation_imag * scale:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}; operator not Hermitian?")
    return float(val.real)


def paper_excess_kurtosis(second: float, fourth: float) -> float:
    """``(E[X^4] - (3 E[X^2])^2) / (3 E[X^2])^2``, moments about the grid origin."""
    if second == 0:
        raise ValueError("second moment is zero; kurtosis undefined")
    s = 3.0 * second
    return (fourth - s * s) / (s * s)


def standard_excess_kurtosis(p, x) -> float:
    """Central fourth moment over variance squared, minus 3."""
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    mu = p @ x
    c = x - mu
    var = p @ c**2
    if var <= 0:
        raise ValueError("variance is zero; kurtosis undefined")
    return float(p @ c**4 / var**2 - 3.0)


def moments_from_distribution(p, x) -> MomentSet:
    p = np.asarray(p, dtype=float)
    x = np.asarray(x, dtype=float)
    x2 = x * x
    mean = float(p @ x)
    second = float(p @ x2)
    fourth = float(p @ (x2 * x2))
    var = second - mean * mean
    try:
        central = standard_excess_kurtosis(p, x)
    except ValueError:
        central = float("nan")
    return MomentSet(mean, second, var, fourth, paper_excess_kurtosis(second, fourth), central)


def moments(state: MarketState) -> MomentSet:
    return moments_from_distribution(state.probabilities, state.grid.values)


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > TOL.prob_sum:
        raise ValueError("not a probability vector")
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def entropy_from_eigenvalues(w, clamp: float = TOL.entropy_clamp) -> float:
    w = np.clip(np.asarray(w, dtype=float), 0.0, 1.0)
    w = w[w > clamp]
    return float(-np.sum(w * np.log(w)))


def von_neumann_entropy(rho, method: str = "lapack") -> float:
    """``-Tr[rho log rho]`` from the spectrum of ``rho``."""
    return entropy_from_eigenvalues(eig_hermitian(rho, method=method))


def pinch_diagonal(state):
    """Drop all coherences in the price basis; the price law is unchanged."""
    if isinstance(state, MarketState):
        return MarketState(np.diag(state.matrix.diagonal()), state.grid)
    a = as_matrix(state)
    return np.diag(a.diagonal())


def purity(rho) -> float:
    a = as_matrix(rho)
    return float(np.sum(np.abs(a) ** 2))
