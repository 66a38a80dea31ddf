"""Brute-force references used to cross-check the fast paths.

Nothing here is fast and nothing in the time stepper imports this module.
Ladders are rebuilt from explicit index loops, dissipators are formed from
literal dense products, and the classical random walk is evolved by exact
convolution.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hermcore import as_matrix
from .operators import DissipatorSpec, LadderKernel, Model

__all__ = [
    "MAX_REFERENCE_DIM",
    "LatticeOverflow",
    "MonotonicityViolation",
    "BoundaryMassError",
    "dense_dissipator_reference",
    "random_density_matrix",
    "WalkSpec",
    "classical_walk",
    "walk_entropy",
    "walk_variance",
    "RateCheck",
    "variance_rate_analytic",
    "variance_rate_check",
    "boundary_margin",
    "self_check",
]

MAX_REFERENCE_DIM = 256


class LatticeOverflow(ValueError):
    """The walk would push probability off the end of its lattice."""


class MonotonicityViolation(AssertionError):
    """Entropy or variance of a classical walk failed to increase."""


class BoundaryMassError(ValueError):
    """State has weight too close to the grid edge for the interior sums."""


# ---------------------------------------------------------------- dissipators

def _up(n: int) -> np.ndarray:
    a = np.zeros((n, n))
    for i in range(n - 1):
        a[i + 1, i] = 1.0
    return a


def _toeplitz(kernel: LadderKernel, n: int) -> np.ndarray:
    w = kernel.width
    h = np.zeros((n, n))
    for j in range(n):
        for k in range(-w, w + 1):
            if 0 <= j + k < n:
                h[j + k, j] = kernel.tap(k)
    return h


def _lindblad_pair(rho, left, right, c):
    # c (left rho right - 1/2 {right left, rho})
    k = right @ left
    return c * (left @ rho @ right - 0.5 * (k @ rho + rho @ k))


def dense_dissipator_reference(rho, spec: DissipatorSpec) -> np.ndarray:
    """Dissipator of ``spec`` applied to ``rho`` by explicit dense products."""
    a = np.array(as_matrix(rho), dtype=complex)
    n = a.shape[0]
    if n > MAX_REFERENCE_DIM:
        raise ValueError(f"reference dissipator limited to N <= {MAX_REFERENCE_DIM}, got {n}")
    up = _up(n)
    if spec.model is Model.NG2:
        up = up @ _toeplitz(spec.kernel, n)
    down = up.T.copy()
    out = (_lindblad_pair(a, up, down, spec.sigma2)
           + _lindblad_pair(a, down, up, spec.sigma2))
    if spec.model is Model.NG1:
        out += _lindblad_pair(a, up, up, spec.nu_u2)
        out += _lindblad_pair(a, down, down, spec.nu_d2)
    return out


def random_density_matrix(n: int, rng: np.random.Generator, margin: int = 0,
                          rank: int | None = None, real: bool = False) -> np.ndarray:
    """``G G^dagger / Tr`` with Gaussian ``G``, supported on ``[margin, n - margin)``."""
    m = n - 2 * margin
    if m < 1:
        raise ValueError("margin leaves no support")
    r = m if rank is None else rank
    g = rng.standard_normal((m, r))
    if not real:
        g = g + 1j * rng.standard_normal((m, r))
    core = g @ g.conj().T
    core /= np.trace(core).real
    core = 0.5 * (core + core.conj().T)
    out = np.zeros((n, n), dtype=float if real else complex)
    out[margin:n - margin, margin:n - margin] = core
    return out


# ---------------------------------------------------------------- classical walk

@dataclass(frozen=True)
class WalkSpec:
    """Walk on a finite integer lattice.

    ``step[k]`` is the probability of moving by ``step_origin + k`` sites.
    """

    initial: np.ndarray
    step: np.ndarray
    n_steps: int
    step_origin: int | None = None

    def __post_init__(self):
        for name in ("initial", "step"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.ndim != 1 or v.size == 0 or np.any(v < 0) or abs(v.sum() - 1.0) > 1e-12:
                raise ValueError(f"{name} is not a probability vector")
            object.__setattr__(self, name, v)
        if self.n_steps < 0:
            raise ValueError("n_steps must be non-negative")
        if self.step_origin is None:
            object.__setattr__(self, "step_origin", -(self.step.size // 2))

    @property
    def degenerate(self) -> bool:
        return np.count_nonzero(self.step) < 2


def walk_entropy(p) -> float:
    p = np.asarray(p, dtype=float)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def walk_variance(p) -> float:
    p = np.asarray(p, dtype=float)
    k = np.arange(p.size, dtype=float)
    mu = p @ k
    return float(p @ (k - mu) ** 2)


def classical_walk(spec: WalkSpec, check: bool = True) -> list[np.ndarray]:
    """Distributions ``P_0 .. P_n`` of the walk, by direct convolution.

    With ``check`` (and a non-degenerate step law) every step must strictly
    raise both the Shannon entropy and the variance.
    """
    p = spec.initial.copy()
    size = p.size
    offsets = spec.step_origin + np.arange(spec.step.size)
    out = [p]
    for k in range(spec.n_steps):
        nz = np.flatnonzero(p)
        lo = nz[0] + offsets[spec.step > 0].min()
        hi = nz[-1] + offsets[spec.step > 0].max()
        if lo < 0 or hi >= size:
            raise LatticeOverflow(f"walk leaves the lattice at step {k + 1}")
        q = np.zeros(size)
        for j in range(size):
            if p[j] == 0.0:
                continue
            for s, w in zip(offsets, spec.step):
                if w:
                    q[j + s] += p[j] * w
        if check and not spec.degenerate:
            if not walk_entropy(q) > walk_entropy(p):
                raise MonotonicityViolation(f"entropy did not increase at step {k + 1}")
            if not walk_variance(q) > walk_variance(p):
                raise MonotonicityViolation(f"variance did not increase at step {k + 1}")
        out.append(q)
        p = q
    return out


# ---------------------------------------------------------------- variance rates

@dataclass(frozen=True)
class RateCheck:
    analytic: float
    finite_difference: float
    abs_diff: float

    @property
    def rel_diff(self) -> float:
        return self.abs_diff / max(abs(self.analytic), 1e-300)


def boundary_margin(spec: DissipatorSpec) -> int:
    """Sites next to each edge that must be empty for the interior sums."""
    if spec.model is Model.GAUSSIAN:
        return 1
    if spec.model is Model.NG1:
        return 2
    return spec.kernel.width + 2


def _padded(a: np.ndarray, pad: int):
    n = a.shape[0]
    big = np.zeros((n + 2 * pad, n + 2 * pad), dtype=a.dtype)
    big[pad:pad + n, pad:pad + n] = a

    def el(i, j):
        return big[i + pad, j + pad]

    return el


def variance_rate_analytic(rho, spec: DissipatorSpec, x) -> float:
    """``d E[X^2]/dt`` written as sums over matrix elements ``a_ij``.

    Indices are 0-based and out-of-range elements count as zero, which is
    exact once the state keeps clear of the edges (see :func:`boundary_margin`).
    """
    a = np.asarray(as_matrix(rho))
    x = np.asarray(x, dtype=float)
    n = a.shape[0]
    el = _padded(a, 4 + (spec.kernel.width if spec.kernel is not None else 0))
    total = 0.0 + 0.0j
    if spec.model is Model.NG2:
        k = spec.kernel
        if k.width == 1 and k.tap(-1) == k.tap(1):
            h0, h1 = k.tap(0), k.tap(1)
            for i in range(n):
                diag0 = el(i + 1, i + 1) + el(i - 1, i - 1) - 2 * el(i, i)
                diag1 = el(i + 2, i + 2) + el(i - 2, i - 2) - 2 * el(i, i)
                cross = (el(i + 1, i + 2) + el(i + 2, i + 1) + el(i - 1, i - 2) + el(i - 2, i - 1)
                         - (el(i, i + 1) + el(i + 1, i) + el(i, i - 1) + el(i - 1, i)))
                total += x[i] ** 2 * (h0 * h0 * diag0 + h1 * h1 * diag1 + h0 * h1 * cross)
        else:
            # general kernel: L = sum_m g_m S^m with g_m = h_{m-1}, S the up shift
            w = k.width
            g = {j + 1: k.tap(j) for j in range(-w, w + 1) if k.tap(j)}
            for i in range(n):
                s = 0.0
                for m, gm in g.items():
                    for q, gq in g.items():
                        d = q - m
                        s += gm * gq * (el(i - m, i - q) + el(i + m, i + q)
                                        - el(i - d, i) - el(i, i + d))
                total += x[i] ** 2 * s
        total *= spec.sigma2
    else:
        for i in range(n):
            total += spec.sigma2 * x[i] ** 2 * (el(i + 1, i + 1) + el(i - 1, i - 1) - 2 * el(i, i))
        if spec.model is Model.NG1:
            for i in range(n):
                up = el(i - 1, i + 1) - 0.5 * (el(i - 2, i) + el(i, i + 2))
                dn = el(i + 1, i - 1) - 0.5 * (el(i, i - 2) + el(i + 2, i))
                total += x[i] ** 2 * (spec.nu_u2 * up + spec.nu_d2 * dn)
    return float(np.real(total))


def _second_moment(a, x2) -> float:
    return float(np.sum(x2 * np.real(np.diagonal(a))))


def variance_rate_check(rho, spec: DissipatorSpec, x=None, dt: float = 1e-8,
                        rhs=None, mass_tol: float = 1e-14) -> RateCheck:
    """Compare :func:`variance_rate_analytic` with a forward difference.

    ``rhs(rho)`` defaults to the dense reference dissipator; pass the fast
    path to validate it instead.  ``x`` defaults to ``rho.grid.values``.
    """
    a = np.asarray(as_matrix(rho))
    if x is None:
        x = rho.grid.values
    x = np.asarray(x, dtype=float)
    n = a.shape[0]
    m = boundary_margin(spec)
    if 2 * m >= n:
        raise BoundaryMassError(f"N={n} too small for an edge margin of {m}")
    edge = np.concatenate([np.arange(m), np.arange(n - m, n)])
    if np.abs(a[edge, :]).max() > mass_tol or np.abs(a[:, edge]).max() > mass_tol:
        raise BoundaryMassError(f"state has weight within {m} sites of the edge")
    if rhs is None:
        def rhs(r):
            return dense_dissipator_reference(r, spec)
    analytic = variance_rate_analytic(a, spec, x)
    x2 = x * x
    stepped = a + dt * np.asarray(rhs(a))
    fd = (_second_moment(stepped, x2) - _second_moment(a, x2)) / dt
    return RateCheck(analytic, fd, abs(analytic - fd))


# ---------------------------------------------------------------- self check

def self_check(seed: int = 0, dims=(4, 8, 32, 64), trials: int = 100, tol: float = 1e-12):
    """Fast path vs dense reference on random states; returns ``(ok, lines)``."""
    from .dynamics import RhsModel  # only the check itself needs the fast path

    rng = np.random.default_rng(seed)
    specs = [
        DissipatorSpec.gaussian(1.0),
        DissipatorSpec.ng1(1.0, 0.5),
        DissipatorSpec.ng2(1.0, LadderKernel.three_tap(0.15)),
    ]
    lines = []
    ok = True
    for spec in specs:
        for n in dims:
            model = RhsModel(spec, n)
            worst = 0.0
            for _ in range(trials):
                rho = random_density_matrix(n, rng)
                worst = max(worst, float(np.abs(model(rho) - dense_dissipator_reference(rho, spec)).max()))
            good = worst < tol
            ok &= good
            lines.append(f"{'PASS' if good else 'FAIL'} {spec.model.value:8s} N={n:<3d} "
                         f"max|fast - dense| = {worst:.3e}")
    return ok, lines
