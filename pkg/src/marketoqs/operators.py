"""Price grid, ladder operators, convolution kernels and environment coefficients.

Every operator is built densely (the reference representation) and can be
converted to a :class:`Band` descriptor, which is what the time stepper uses.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .hermcore import TOL, validate_density

__all__ = [
    "PriceGrid",
    "MarketState",
    "LadderKernel",
    "EnvironmentState",
    "Model",
    "DissipatorSpec",
    "Band",
    "UnsupportedEnvironment",
    "price_operator",
    "ladder_up",
    "ladder_down",
    "convolution_operator",
    "dressed_ladders",
    "coefficients_from_env",
    "check_drift_vanishes",
]


class UnsupportedEnvironment(ValueError):
    """Environment state whose coefficients the Markovian generator cannot use."""


@dataclass(frozen=True)
class PriceGrid:
    """Strictly increasing price levels ``x_1 < ... < x_N``."""

    values: np.ndarray
    spacing: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("price grid must be a non-empty 1-d sequence")
        if np.any(np.diff(v) <= 0):
            raise ValueError("price grid must be strictly increasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.spacing is None and v.size > 1:
            steps = np.diff(v)
            if np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                object.__setattr__(self, "spacing", float(steps[0]))

    @classmethod
    def uniform(cls, n: int, start: float, step: float) -> "PriceGrid":
        # i*step instead of cumulative sums keeps x_i exact to one rounding
        return cls(start + np.arange(n) * step, float(step))

    def __len__(self) -> int:
        return self.values.size


@dataclass
class MarketState:
    """Market density matrix on a price grid."""

    matrix: np.ndarray
    grid: PriceGrid

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"state must be square, got {m.shape}")
        if m.shape[0] != len(self.grid):
            raise ValueError(f"state dim {m.shape[0]} does not match grid size {len(self.grid)}")
        self.matrix = np.array(m, dtype=complex)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def probabilities(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    def validate(self, tol=TOL):
        return validate_density(self.matrix, tol)


@dataclass(frozen=True)
class LadderKernel:
    """Real convolution taps ``h_k`` for ``k = -w..w`` stored left to right."""

    taps: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.taps, dtype=float)
        if t.ndim != 1 or t.size % 2 != 1:
            raise ValueError("kernel needs an odd number of taps centred on k=0")
        t.setflags(write=False)
        object.__setattr__(self, "taps", t)

    @classmethod
    def identity(cls) -> "LadderKernel":
        return cls(np.array([1.0]))

    @classmethod
    def three_tap(cls, h: float) -> "LadderKernel":
        """Symmetric kernel with ``h_{+-1}**2 = h`` and ``h_0**2 = 1 - 2h``."""
        if not 0.0 <= h <= 0.5:
            raise ValueError(f"h must lie in [0, 0.5], got {h}")
        side = np.sqrt(h)
        return cls(np.array([side, np.sqrt(1.0 - 2.0 * h), side]))

    @property
    def width(self) -> int:
        return self.taps.size // 2

    def tap(self, k: int) -> float:
        w = self.width
        return float(self.taps[k + w]) if -w <= k <= w else 0.0

    @property
    def norm2(self) -> float:
        return float(np.sum(self.taps**2))

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm2 - 1.0) <= 1e-12

    @property
    def is_identity(self) -> bool:
        nz = np.flatnonzero(self.taps)
        return nz.size == 1 and nz[0] == self.width and self.taps[self.width] == 1.0


@dataclass(frozen=True)
class EnvironmentState:
    """``K x K`` environment density matrix ``r`` with coupling ``kappa``."""

    r: np.ndarray
    kappa: float = 1.0

    def __post_init__(self):
        r = np.array(self.r, dtype=complex)
        if r.ndim != 2 or r.shape[0] != r.shape[1] or r.shape[0] < 2:
            raise ValueError("environment needs a square matrix with K >= 2")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @classmethod
    def maximally_mixed(cls, k: int, kappa: float = 1.0) -> "EnvironmentState":
        return cls(np.eye(k) / k, kappa)

    @property
    def dim(self) -> int:
        return self.r.shape[0]


class Model(str, enum.Enum):
    GAUSSIAN = "gaussian"
    NG1 = "ng1"
    NG2 = "ng2"


@dataclass(frozen=True)
class DissipatorSpec:
    model: Model
    sigma2: float
    nu_u2: float = 0.0
    nu_d2: float = 0.0
    kernel: LadderKernel | None = None

    def __post_init__(self):
        model = Model(self.model)
        object.__setattr__(self, "model", model)
        if self.sigma2 < 0 or self.nu_u2 < 0 or self.nu_d2 < 0:
            raise ValueError("dissipator weights must be non-negative")
        if model is not Model.NG1 and (self.nu_u2 or self.nu_d2):
            raise ValueError(f"{model.value} model takes no nu weights")
        if model is Model.NG1 and self.nu_u2 != self.nu_d2:
            # unequal weights break Hermiticity of the generator
            raise ValueError("ng1 requires nu_u2 == nu_d2")
        if model is Model.NG2:
            if self.kernel is None:
                raise ValueError("ng2 model needs a kernel")
        elif self.kernel is not None and not self.kernel.is_identity:
            raise ValueError(f"{model.value} model takes no kernel")
        if model is not Model.NG2:
            object.__setattr__(self, "kernel", LadderKernel.identity())

    @classmethod
    def gaussian(cls, sigma2: float) -> "DissipatorSpec":
        return cls(Model.GAUSSIAN, sigma2)

    @classmethod
    def ng1(cls, sigma2: float, nu2: float) -> "DissipatorSpec":
        return cls(Model.NG1, sigma2, nu2, nu2)

    @classmethod
    def ng2(cls, sigma2: float, kernel: LadderKernel) -> "DissipatorSpec":
        return cls(Model.NG2, sigma2, kernel=kernel)

    @classmethod
    def from_environment(cls, env: EnvironmentState, model=Model.GAUSSIAN,
                         kernel: LadderKernel | None = None) -> "DissipatorSpec":
        """Spec whose weights are read off ``env``; the drift term must vanish."""
        if not check_drift_vanishes(env):
            raise UnsupportedEnvironment("first off-diagonal band of the environment "
                                         "does not sum to zero; drift term would survive")
        sigma2, nu_u2, nu_d2 = coefficients_from_env(env)
        model = Model(model)
        if model is Model.NG1:
            return cls(model, sigma2, nu_u2, nu_d2)
        if nu_u2 or nu_d2:
            raise UnsupportedEnvironment(f"{model.value} model ignores the +-2 bands, "
                                         "but the environment populates them")
        return cls(model, sigma2, kernel=kernel)

    @property
    def bandwidth(self) -> int:
        return self.kernel.width


@dataclass(frozen=True)
class Band:
    """Diagonal storage: ``data[k, i] = M[i, i + offsets[k]]`` (zero outside)."""

    offsets: np.ndarray
    data: np.ndarray
    n: int = field(default=0)

    @classmethod
    def from_dense(cls, m: np.ndarray) -> "Band":
        m = np.asarray(m)
        if np.iscomplexobj(m) and not np.any(m.imag):
            m = m.real
        n = m.shape[0]
        offs, rows = [], []
        for o in range(-(n - 1), n):
            diag = np.diagonal(m, o)
            if np.any(diag):
                row = np.zeros(n, dtype=m.dtype)
                if o >= 0:
                    row[: n - o] = diag
                else:
                    row[-o:] = diag
                offs.append(o)
                rows.append(row)
        data = np.array(rows, dtype=m.dtype).reshape(len(rows), n)
        return cls(np.array(offs, dtype=np.int64), data, n)

    def to_dense(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=self.data.dtype)
        idx = np.arange(self.n)
        for o, row in zip(self.offsets, self.data):
            lo, hi = max(0, -o), min(self.n, self.n - o)
            m[idx[lo:hi], idx[lo:hi] + o] = row[lo:hi]
        return m

    @property
    def bandwidth(self) -> int:
        return int(np.max(np.abs(self.offsets))) if self.offsets.size else 0


def price_operator(grid: PriceGrid) -> np.ndarray:
    return np.diag(np.asarray(grid.values, dtype=float))


def ladder_up(n: int) -> np.ndarray:
    """Shift one price level up: ones on the sub-diagonal, ``A_u e_N = 0``."""
    if n < 2:
        raise ValueError("ladder operators need N >= 2")
    return np.eye(n, k=-1)


def ladder_down(n: int) -> np.ndarray:
    return ladder_up(n).T.copy()


def convolution_operator(kernel: LadderKernel, n: int) -> np.ndarray:
    """Truncated Toeplitz matrix ``H[j+k, j] = h_k`` for ``1 <= j+k <= N``."""
    w = kernel.width
    if n < 2 * w + 1:
        raise ValueError(f"kernel of width {w} does not fit N={n}")
    h = np.zeros((n, n))
    for k in range(-w, w + 1):
        if kernel.tap(k):
            h += kernel.tap(k) * np.eye(n, k=-k)
    return h


def dressed_ladders(kernel: LadderKernel, n: int) -> tuple[np.ndarray, np.ndarray]:
    """``(A_u H, (A_u H)^dagger)``."""
    up = ladder_up(n) @ convolution_operator(kernel, n)
    return up, up.conj().T.copy()


def _check_env(env: EnvironmentState):
    report = validate_density(env.r)
    if not report.valid:
        raise ValueError("environment is not a density matrix: " + "; ".join(report.failures))


def coefficients_from_env(env: EnvironmentState) -> tuple[float, float, float]:
    """Markovian weights ``(sigma2, nu_u2, nu_d2)`` of an environment state."""
    _check_env(env)
    r, kappa = env.r, env.kappa
    # sum_{l<K} r_ll = 1 - r_KK for a unit-trace state; this form avoids the
    # K - 1 rounding steps of the sum and gives 10/11 exactly for K = 11
    sigma2 = kappa * (1.0 - r[-1, -1])
    nu_u2 = 2.0 * kappa * np.sum(np.diagonal(r, 2))
    nu_d2 = 2.0 * kappa * np.sum(np.diagonal(r, -2))
    for name, val in (("nu_u2", nu_u2), ("nu_d2", nu_d2)):
        if abs(val.imag) > TOL.band_sum:
            raise UnsupportedEnvironment(f"{name} band sum is complex ({val})")
    return float(sigma2.real), float(nu_u2.real), float(nu_d2.real)


def check_drift_vanishes(env: EnvironmentState) -> bool:
    r = env.r
    return bool(abs(np.sum(np.diagonal(r, 1))) <= TOL.drift
                and abs(np.sum(np.diagonal(r, -1))) <= TOL.drift)
