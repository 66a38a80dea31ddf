"""Initial market states and the three simulation sweeps.

The initial state mixes a classical (diagonal) state with the pure state that
has the same price law::

    rho_0(theta) = theta * diag(p) + (1 - theta) * sqrt(p) sqrt(p)^T

so every ``theta`` gives the same distribution for the price but a different
entropy.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from .dynamics import IntegratorConfig, RhsModel, Trajectory, evolve
from .hermcore import NumericalFailure
from .observables import moments, shannon_entropy, von_neumann_entropy
from .operators import DissipatorSpec, LadderKernel, MarketState, PriceGrid

__all__ = [
    "DEFAULT_SIGMA2",
    "DEFAULT_ENV_DIM",
    "Sim",
    "InitialStateSpec",
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "default_grid",
    "gaussian_weights",
    "build_initial_state",
    "initial_entropy_curve",
    "run_single",
    "run_sweep",
    "summarize",
    "SWEEP_FIELDS",
    "run_sim1",
    "run_sim2",
    "run_sim3",
    "classical_entropy",
]

DEFAULT_SIGMA2 = 400.0  # (0.02 / dx)**2 with dx = 1e-3
DEFAULT_ENV_DIM = 11  # metadata only: the sims set coefficients directly
SWEEP_FIELDS = ("value", "H_initial", "H_final", "entropy_gain",
                "variance_final", "excess_kurtosis_final")


class Sim(str, enum.Enum):
    SIM1 = "sim1"
    SIM2 = "sim2"
    SIM3 = "sim3"


def default_grid(n: int = 1001) -> PriceGrid:
    """``n`` levels on ``[-0.5, 0.5]`` with step ``1 / (n - 1)``."""
    if n < 2:
        raise ValueError("grid needs at least two levels")
    return PriceGrid.uniform(n, -0.5, 1.0 / (n - 1))


@dataclass(frozen=True)
class InitialStateSpec:
    n: int = 1001
    width: float = 0.005
    theta: float = 1.0
    grid: PriceGrid | None = None

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")
        if not self.width > 0:
            raise ValueError("width must be positive")
        if self.grid is None:
            object.__setattr__(self, "grid", default_grid(self.n))
        elif len(self.grid) != self.n:
            object.__setattr__(self, "n", len(self.grid))


def gaussian_weights(x, width: float) -> np.ndarray:
    """Grid-sampled centred Gaussian, normalised to sum to one."""
    x = np.asarray(x, dtype=float)
    w = np.exp(-(x * x) / (2.0 * width * width))
    s = w.sum()
    if not s > 0:
        raise ValueError("Gaussian weights vanish on this grid")
    return w / s


def build_initial_state(spec: InitialStateSpec) -> MarketState:
    p = gaussian_weights(spec.grid.values, spec.width)
    amp = np.sqrt(p)
    rho = (1.0 - spec.theta) * np.outer(amp, amp)
    # write the diagonal directly so it equals p exactly for every theta
    np.fill_diagonal(rho, p)
    return MarketState(rho, spec.grid)


def initial_entropy_curve(thetas, n: int = 1001, width: float = 0.005):
    """``[(theta, H(rho_0(theta))), ...]`` in the order given."""
    grid = default_grid(n)
    out = []
    for th in thetas:
        st = build_initial_state(InitialStateSpec(n, width, float(th), grid))
        out.append((float(th), von_neumann_entropy(st)))
    return out


@dataclass(frozen=True)
class SweepSpec:
    sim: Sim
    values: tuple
    cfg: IntegratorConfig = IntegratorConfig()
    sigma2: float = DEFAULT_SIGMA2
    env_dim: int = DEFAULT_ENV_DIM
    theta: float = 1.0
    n: int = 1001
    width: float = 0.005

    def __post_init__(self):
        object.__setattr__(self, "sim", Sim(self.sim))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        for v in self.values:
            if self.sim is Sim.SIM1 and not 0.0 <= v <= 1.0:
                raise ValueError(f"theta {v} outside [0, 1]")
            if self.sim is Sim.SIM2 and not 0.0 <= v <= self.sigma2:
                raise ValueError(f"nu^2 {v} outside [0, sigma2]")
            if self.sim is Sim.SIM3 and not 0.0 <= v <= 0.2:
                raise ValueError(f"h {v} outside [0, 0.2]")

    def dissipator(self, value: float) -> DissipatorSpec:
        if self.sim is Sim.SIM1:
            return DissipatorSpec.gaussian(self.sigma2)
        if self.sim is Sim.SIM2:
            return DissipatorSpec.ng1(self.sigma2, value)
        return DissipatorSpec.ng2(self.sigma2, LadderKernel.three_tap(value))

    def initial(self, value: float) -> InitialStateSpec:
        theta = value if self.sim is Sim.SIM1 else self.theta
        return InitialStateSpec(self.n, self.width, theta)


@dataclass
class SweepRow:
    value: float
    H_initial: float
    H_final: float
    entropy_gain: float
    variance_final: float
    excess_kurtosis_final: float
    runtime: float
    trajectory: Trajectory = field(repr=False, default=None)
    final_distribution: np.ndarray | None = field(repr=False, default=None)

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, f) for f in SWEEP_FIELDS)


@dataclass
class SweepResult:
    sim: Sim
    rows: list[SweepRow]
    grid: PriceGrid | None = None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def __len__(self) -> int:
        return len(self.rows)


def _max_offdiag(y: np.ndarray) -> float:
    d = np.abs(y)
    np.fill_diagonal(d, 0.0)
    return float(d.max()) if d.size else 0.0


def run_single(init: InitialStateSpec, spec: DissipatorSpec, cfg: IntegratorConfig,
               require_diagonal: bool = False, on_checkpoint=None):
    """Evolve one initial state; returns ``(row_without_value, final_state)``.

    With ``require_diagonal`` the state must stay diagonal to 1e-12 at every
    checkpoint, otherwise :class:`NumericalFailure` is raised.
    """
    rho0 = build_initial_state(init)
    model = RhsModel(spec, rho0.n)

    def hook(cp, y):
        if require_diagonal:
            off = _max_offdiag(y)
            if off >= 1e-12:
                raise NumericalFailure(f"classical state developed coherences ({off:.3e}) "
                                       f"at step {cp.step}")
        if on_checkpoint is not None:
            on_checkpoint(cp, y)

    t0 = time.perf_counter()
    final, traj = evolve(rho0, model, cfg, on_checkpoint=hook)
    runtime = time.perf_counter() - t0
    return final, traj, runtime


def run_sweep(sweep: SweepSpec, keep_distributions: bool = False) -> SweepResult:
    """Run every sweep value in order, one independent evolution each."""
    rows = []
    grid = None
    for v in sweep.values:
        init = sweep.initial(v)
        grid = init.grid
        classical = init.theta == 1.0 and sweep.sim is Sim.SIM1
        final, traj, runtime = run_single(init, sweep.dissipator(v), sweep.cfg,
                                          require_diagonal=classical)
        rows.append(summarize(v, final, traj, runtime, keep_distributions))
    return SweepResult(sweep.sim, rows, grid)


def summarize(value: float, final: MarketState, traj: Trajectory, runtime: float = 0.0,
              keep_distribution: bool = False) -> SweepRow:
    """One sweep row from a finished run."""
    h0 = traj.initial.vn_entropy
    h1 = traj.final.vn_entropy
    m = moments(final)
    return SweepRow(float(value), h0, h1, h1 - h0, m.variance, m.excess_kurtosis, runtime,
                    traj, final.probabilities if keep_distribution else None)


def run_sim1(thetas, cfg: IntegratorConfig = IntegratorConfig(), sigma2: float = DEFAULT_SIGMA2,
             n: int = 1001, **kw) -> SweepResult:
    """Gaussian model swept over the initial mixing parameter ``theta``."""
    return run_sweep(SweepSpec(Sim.SIM1, thetas, cfg, sigma2, n=n), **kw)


def run_sim2(nu_values, theta: float = 1.0, cfg: IntegratorConfig = IntegratorConfig(),
             sigma2: float = DEFAULT_SIGMA2, n: int = 1001, **kw) -> SweepResult:
    """NG1 model with ``nu_u2 = nu_d2 = value`` for each value."""
    return run_sweep(SweepSpec(Sim.SIM2, nu_values, cfg, sigma2, theta=theta, n=n), **kw)


def run_sim3(h_values, theta: float = 1.0, cfg: IntegratorConfig = IntegratorConfig(),
             sigma2: float = DEFAULT_SIGMA2, n: int = 1001, **kw) -> SweepResult:
    """NG2 model with the three-tap kernel ``(sqrt h, sqrt(1-2h), sqrt h)``."""
    return run_sweep(SweepSpec(Sim.SIM3, h_values, cfg, sigma2, theta=theta, n=n), **kw)


def classical_entropy(state: MarketState) -> float:
    """Shannon entropy of the price law of ``state``."""
    return shannon_entropy(state.probabilities)
