"""Right-hand sides of the three market master equations and a fixed-step
integrator with trace and positivity monitoring.

The generators share one shape,

    d rho/dt = sum_t c_t B_t rho C_t - 1/2 (K rho + rho K),

with banded ``B_t, C_t, K``.  :class:`RhsModel` assembles those bands from a
:class:`~marketoqs.operators.DissipatorSpec` and evaluates them with a fused
numba kernel that touches each output element once.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields

import numpy as np

from . import _kernels
from .hermcore import TOL, NumericalFailure, as_matrix, eig_hermitian
from .observables import entropy_from_eigenvalues, moments_from_distribution
from .operators import (Band, DissipatorSpec, LadderKernel, MarketState, Model,
                        dressed_ladders, ladder_down, ladder_up)

__all__ = [
    "Method",
    "IntegratorConfig",
    "Checkpoint",
    "Trajectory",
    "RhsModel",
    "gaussian_rhs",
    "ng1_rhs",
    "ng2_rhs",
    "evolve",
]

# real-axis stability limits (with a little headroom for RK4's 2.785)
_STABILITY = {"euler": 2.0, "rk4": 2.5}


class Method(str, enum.Enum):
    EULER = "euler"
    RK4 = "rk4"


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration settings.

    ``substeps`` splits every recorded step into equal sub-steps; ``None``
    picks the smallest count that keeps RK4 inside its stability region.
    Euler is never sub-stepped automatically: an unstable Euler step raises.
    """

    dt: float = 1e-3
    steps: int = 1000
    method: Method = Method.RK4
    checkpoint_every: int = 100
    renormalize_trace: bool = True
    substeps: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")
        if self.checkpoint_every < 1:
            raise ValueError("checkpoint_every must be >= 1")
        if self.substeps is not None and self.substeps < 1:
            raise ValueError("substeps must be >= 1")

    @property
    def horizon(self) -> float:
        return self.dt * self.steps


@dataclass(frozen=True)
class Checkpoint:
    step: int
    t: float
    mean: float
    second_moment: float
    variance: float
    excess_kurtosis: float
    vn_entropy: float
    trace_error: float
    min_eig: float


CHECKPOINT_FIELDS = tuple(f.name for f in fields(Checkpoint))


@dataclass
class Trajectory:
    checkpoints: list[Checkpoint] = field(default_factory=list)
    substeps: int = 1

    def __len__(self) -> int:
        return len(self.checkpoints)

    def __iter__(self):
        return iter(self.checkpoints)

    def __getitem__(self, i) -> Checkpoint:
        return self.checkpoints[i]

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(c, name) for c in self.checkpoints])

    @property
    def initial(self) -> Checkpoint:
        return self.checkpoints[0]

    @property
    def final(self) -> Checkpoint:
        return self.checkpoints[-1]


def _norm_bound(m: np.ndarray) -> float:
    # ||M||_2 <= sqrt(||M||_1 ||M||_inf)
    a = np.abs(m)
    return math.sqrt(a.sum(axis=0).max() * a.sum(axis=1).max()) if a.size else 0.0


class RhsModel:
    """Banded evaluation of one dissipator on ``n`` price levels."""

    def __init__(self, spec: DissipatorSpec, n: int):
        self.spec = spec
        self.n = n
        terms = []  # (coef, B, C) dense
        k = np.zeros((n, n))
        if spec.model in (Model.GAUSSIAN, Model.NG2):
            kernel = spec.kernel if spec.model is Model.NG2 else LadderKernel.identity()
            up, down = dressed_ladders(kernel, n)
        else:
            up, down = ladder_up(n), ladder_down(n)
        if spec.sigma2:
            terms += [(spec.sigma2, up, down), (spec.sigma2, down, up)]
            k += spec.sigma2 * (up @ down + down @ up)
        if spec.model is Model.NG1:
            if spec.nu_u2:
                terms.append((spec.nu_u2, up, up))
                k += spec.nu_u2 * (up @ up)
            if spec.nu_d2:
                terms.append((spec.nu_d2, down, down))
                k += spec.nu_d2 * (down @ down)
        self.terms = terms
        self.anticommutator = k

        ob, oc, pb, pc, coef = [], [], [], [], []
        for c, b_dense, c_dense in terms:
            bb, cb = Band.from_dense(b_dense), Band.from_dense(c_dense)
            for o1, row1 in zip(bb.offsets, bb.data):
                for o2, row2 in zip(cb.offsets, cb.data):
                    ob.append(o1)
                    oc.append(o2)
                    pb.append(row1)
                    pc.append(row2)
                    coef.append(c)
        self._p_ob = np.array(ob, dtype=np.int64)
        self._p_oc = np.array(oc, dtype=np.int64)
        self._p_b = np.array(pb, dtype=float).reshape(len(pb), n)
        self._p_c = np.array(pc, dtype=float).reshape(len(pc), n)
        self._p_coef = np.array(coef, dtype=float)
        kb = Band.from_dense(-0.5 * k)
        self._k_off = kb.offsets
        self._k_dat = np.ascontiguousarray(kb.data, dtype=float).reshape(len(kb.offsets), n)

        self.spectral_bound = (sum(c * _norm_bound(b) * _norm_bound(cc) for c, b, cc in terms)
                               + _norm_bound(k))
        self._radius = None

    @classmethod
    def build(cls, spec: DissipatorSpec, n: int) -> "RhsModel":
        return cls(spec, n)

    @property
    def bandwidth(self) -> int:
        offs = np.concatenate([self._p_ob, self._p_oc, self._k_off, [0]])
        return int(np.abs(offs).max())

    def __call__(self, rho, out: np.ndarray | None = None) -> np.ndarray:
        a = as_matrix(rho)
        if a.shape != (self.n, self.n):
            raise ValueError(f"state shape {a.shape} does not match model dim {self.n}")
        a = np.ascontiguousarray(a)
        if out is None:
            out = np.empty_like(a)
        _kernels.banded_dissipator(a, out, self._p_ob, self._p_oc, self._p_b, self._p_c,
                                   self._p_coef, self._k_off, self._k_dat)
        return out

    @property
    def stability_radius(self) -> float:
        """Safe upper estimate of the generator's spectral radius.

        The terms come in adjoint pairs with equal weights, so the generator is
        self-adjoint in the Hilbert-Schmidt product and power iteration on a
        smaller copy converges to its spectral radius, which barely depends on
        ``n``.  The estimate gets a 5% margin and never exceeds the norm bound.
        """
        if self._radius is None:
            small = self if self.n <= _RADIUS_DIM else RhsModel(self.spec, _RADIUS_DIM)
            est = _power_radius(small, _RADIUS_ITERS)
            self._radius = min(self.spectral_bound, _RADIUS_MARGIN * est)
        return self._radius

    def auto_substeps(self, dt: float, method: Method) -> int:
        return max(1, math.ceil(dt * self.stability_radius / _STABILITY[Method(method).value]))


_RADIUS_DIM = 201
_RADIUS_ITERS = 200
_RADIUS_MARGIN = 1.05


def _power_radius(model: RhsModel, iters: int) -> float:
    rng = np.random.default_rng(12345)
    g = rng.standard_normal((model.n, model.n))
    x = g + g.T
    x /= np.linalg.norm(x)
    y = np.empty_like(x)
    lam = 0.0
    for _ in range(iters):
        model(x, y)
        lam = float(np.vdot(x, y))
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        x = y / nrm
    return abs(lam)


_MODEL_CACHE: dict = {}


def _cached(spec: DissipatorSpec, n: int) -> RhsModel:
    key = (spec.model, spec.sigma2, spec.nu_u2, spec.nu_d2,
           tuple(spec.kernel.taps) if spec.kernel is not None else None, n)
    model = _MODEL_CACHE.get(key)
    if model is None:
        if len(_MODEL_CACHE) > 32:
            _MODEL_CACHE.clear()
        model = _MODEL_CACHE[key] = RhsModel(spec, n)
    return model


def gaussian_rhs(rho, sigma2: float) -> np.ndarray:
    a = as_matrix(rho)
    return _cached(DissipatorSpec.gaussian(sigma2), a.shape[0])(a)


def ng1_rhs(rho, sigma2: float, nu_u2: float, nu_d2: float | None = None) -> np.ndarray:
    a = as_matrix(rho)
    nu_d2 = nu_u2 if nu_d2 is None else nu_d2
    return _cached(DissipatorSpec(Model.NG1, sigma2, nu_u2, nu_d2), a.shape[0])(a)


def ng2_rhs(rho, sigma2: float, kernel: LadderKernel) -> np.ndarray:
    a = as_matrix(rho)
    return _cached(DissipatorSpec.ng2(sigma2, kernel), a.shape[0])(a)


def _observe(y: np.ndarray, x: np.ndarray, step: int, t: float, trace_error: float) -> Checkpoint:
    w = eig_hermitian(y)
    m = moments_from_distribution(y.diagonal().real.copy(), x)
    return Checkpoint(step, t, m.mean, m.second_moment, m.variance, m.excess_kurtosis,
                      entropy_from_eigenvalues(w), trace_error, float(w[0]))


def _check(cp: Checkpoint):
    if not cp.trace_error <= TOL.run_trace:
        raise NumericalFailure(f"trace drift {cp.trace_error:.3e} at step {cp.step}")
    if not cp.min_eig >= -TOL.run_psd:
        raise NumericalFailure(f"state lost positivity (min eigenvalue {cp.min_eig:.3e}) "
                               f"at step {cp.step}")


def evolve(rho0: MarketState, model: RhsModel, cfg: IntegratorConfig = IntegratorConfig(),
           on_checkpoint=None) -> tuple[MarketState, Trajectory]:
    """Integrate ``rho0`` for ``cfg.steps`` steps of size ``cfg.dt``.

    A checkpoint is recorded at step 0, every ``cfg.checkpoint_every`` steps and
    at the last step.  ``trace_error`` is the largest ``|Tr rho - 1|`` seen since
    the previous checkpoint, measured before any renormalisation.  Positivity
    is checked only at checkpoints.
    """
    report = rho0.validate()
    if not report.valid:
        raise ValueError("initial state is not a density matrix: " + "; ".join(report.failures))
    if rho0.n != model.n:
        raise ValueError(f"state dim {rho0.n} does not match model dim {model.n}")

    method = cfg.method
    if cfg.substeps is not None:
        sub = cfg.substeps
    elif method is Method.EULER:
        sub = 1
    else:
        sub = model.auto_substeps(cfg.dt, method)
    h = cfg.dt / sub
    if method is Method.EULER:
        spec = model.spec
        weight = 4.0 * (spec.sigma2 + spec.nu_u2 + spec.nu_d2)
        worst = max(weight, model.stability_radius)
        if h * worst >= _STABILITY["euler"]:
            raise ValueError(f"Euler step unstable: dt*rate = {h * worst:.3f} >= 2")

    m0 = rho0.matrix
    # imaginary parts stay exactly zero under real generators
    y = np.ascontiguousarray(m0.real if not np.any(m0.imag) else m0).copy()
    x = rho0.grid.values
    traj = Trajectory(substeps=sub)

    def record(step, err):
        cp = _observe(y, x, step, step * cfg.dt, err)
        traj.checkpoints.append(cp)
        if on_checkpoint is not None:
            on_checkpoint(cp, y)
        _check(cp)

    record(0, float(abs(_kernels.trace_of(y) - 1.0)))
    k1, k2, k3, k4, tmp = (np.empty_like(y) for _ in range(5))
    drift = 0.0
    for step in range(1, cfg.steps + 1):
        for _ in range(sub):
            if method is Method.RK4:
                model(y, k1)
                _kernels.axpy_into(tmp, y, 0.5 * h, k1)
                model(tmp, k2)
                _kernels.axpy_into(tmp, y, 0.5 * h, k2)
                model(tmp, k3)
                _kernels.axpy_into(tmp, y, h, k3)
                model(tmp, k4)
                _kernels.rk4_combine(y, h, k1, k2, k3, k4)
            else:
                model(y, k1)
                _kernels.axpy_into(y, y, h, k1)
        tr = _kernels.trace_of(y)
        drift = max(drift, float(abs(tr - 1.0)))
        if cfg.renormalize_trace:
            y /= tr.real
        if step % cfg.checkpoint_every == 0 or step == cfg.steps:
            if _kernels.hermitian_defect(y) > TOL.hermitian:
                raise NumericalFailure(f"state lost Hermiticity at step {step}")
            record(step, drift)
            drift = 0.0

    final = MarketState(y, rho0.grid)
    report = final.validate()
    if report.trace_error > TOL.run_trace or report.min_eig < -TOL.run_psd:
        raise NumericalFailure("final state failed validation: " + "; ".join(report.failures))
    return final, traj
