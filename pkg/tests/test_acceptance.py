"""End-to-end acceptance checks at full size (N = 1001, 1000 RK4 steps).

Each test records a one-line verdict that is printed in the terminal summary.
The simulation fixtures are module-scoped so every sweep runs once.
"""
import numpy as np
import pytest

from marketoqs.dynamics import IntegratorConfig, RhsModel
from marketoqs.observables import pinch_diagonal, von_neumann_entropy
from marketoqs.operators import DissipatorSpec, EnvironmentState, LadderKernel, coefficients_from_env
from marketoqs.oracle import (WalkSpec, boundary_margin, classical_walk, random_density_matrix,
                              self_check, variance_rate_check, walk_entropy, walk_variance)
from marketoqs.scenarios import (InitialStateSpec, Sim, SweepSpec, default_grid, run_single,
                                 run_sweep, summarize)

from conftest import CRITERIA, rho_classical, rho_quantum

THETAS = (0.0, 0.25, 0.5, 0.75, 1.0)
SIGMA2 = 400.0
NUS = tuple(f * SIGMA2 for f in (0.0, 0.25, 0.5, 0.75, 1.0))
HS = (0.0, 0.05, 0.10, 0.15, 0.20)
CFG = IntegratorConfig(dt=1e-3, steps=1000, checkpoint_every=100)


def record(num, ok, detail):
    CRITERIA[num] = (bool(ok), detail)
    print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def ranks(v):
    r = np.empty(len(v))
    r[np.argsort(v, kind="stable")] = np.arange(len(v))
    return r


def spearman(a, b):
    ra, rb = ranks(np.asarray(a)), ranks(np.asarray(b))
    ra -= ra.mean()
    rb -= rb.mean()
    return float(ra @ rb / np.sqrt((ra @ ra) * (rb @ rb)))


@pytest.fixture(scope="module")
def sim1():
    rows, offdiag = [], []
    for th in THETAS:
        seen = []

        def probe(cp, y):
            d = np.abs(y)
            np.fill_diagonal(d, 0.0)
            seen.append(float(d.max()))

        final, traj, rt = run_single(InitialStateSpec(theta=th), DissipatorSpec.gaussian(SIGMA2),
                                     CFG, on_checkpoint=probe if th == 1.0 else None)
        rows.append(summarize(th, final, traj, rt))
        if th == 1.0:
            offdiag = seen
    return rows, offdiag


@pytest.fixture(scope="module")
def sim2():
    classical = run_sweep(SweepSpec(Sim.SIM2, NUS, CFG, SIGMA2, theta=1.0))
    pure = run_sweep(SweepSpec(Sim.SIM2, (0.0, SIGMA2), CFG, SIGMA2, theta=0.0))
    return classical, pure


@pytest.fixture(scope="module")
def sim3():
    return run_sweep(SweepSpec(Sim.SIM3, HS, CFG, SIGMA2, theta=1.0))


def test_criterion_01_toy_entropies():
    hc = von_neumann_entropy(rho_classical())
    hq = von_neumann_entropy(rho_quantum())
    ok = abs(hc - 1.04) < 5e-3 and abs(hq - 0.69) < 5e-3
    ok &= abs(hc - 1.0397) < 1e-4 and abs(hq - 0.6931) < 1e-4
    record(1, ok, f"H(classical)={hc:.6f}  H(quantum)={hq:.6f}")


def test_criterion_02_coefficients():
    s2, nu, nd = coefficients_from_env(EnvironmentState.maximally_mixed(11, 1.0))
    ok = s2 == 10 / 11 and nu == 0.0 and nd == 0.0
    record(2, ok, f"sigma2={s2!r} (10/11={10 / 11!r}) nu_u2={nu} nu_d2={nd}")


@pytest.mark.slow
def test_criterion_03_diagonal_preserved(sim1):
    _, offdiag = sim1
    worst = max(offdiag)
    ok = len(offdiag) == 11 and worst < 1e-12
    record(3, ok, f"max off-diagonal over {len(offdiag)} checkpoints = {worst:.3e}")


@pytest.mark.slow
def test_criterion_04_variance_theta_invariant(sim1):
    rows, _ = sim1
    v = np.array([r.variance_final for r in rows])
    spread = float(np.ptp(v) / np.abs(v).max())
    record(4, spread < 1e-8, f"relative spread of variance_final = {spread:.3e}")


@pytest.mark.slow
def test_criterion_05_entropy_gain_decreasing(sim1):
    rows, _ = sim1
    g = np.array([r.entropy_gain for r in rows])
    record(5, bool(np.all(np.diff(g) < 0)), "gains " + " ".join(f"{x:.6f}" for x in g))


@pytest.mark.slow
def test_criterion_06_gaussian_variance_growth(sim1):
    rows, _ = sim1
    dx = default_grid().spacing
    traj = rows[-1].trajectory
    expected = traj.initial.variance + 2 * SIGMA2 * dx**2 * CFG.horizon
    got = traj.final.variance
    rel = abs(got - expected) / expected
    record(6, rel < 0.01, f"var(T)={got:.10e} expected {expected:.10e} rel err {rel:.2e}")


def test_criterion_07_rate_formulas():
    n = 64
    x = default_grid(n).values
    rng = np.random.default_rng(7)
    specs = {
        "gaussian": DissipatorSpec.gaussian(SIGMA2),
        "ng1": DissipatorSpec.ng1(SIGMA2, 0.6 * SIGMA2),
        "ng2": DissipatorSpec.ng2(SIGMA2, LadderKernel.three_tap(0.15)),
    }
    worst = {}
    for name, spec in specs.items():
        model = RhsModel(spec, n)
        w = 0.0
        for _ in range(20):
            rho = random_density_matrix(n, rng, margin=boundary_margin(spec))
            w = max(w, variance_rate_check(rho, spec, x, rhs=model).rel_diff)
        worst[name] = w
    ok = all(v < 1e-6 for v in worst.values())
    record(7, ok, "max rel diff " + " ".join(f"{k}={v:.2e}" for k, v in worst.items()))


def test_criterion_08_oracle_equivalence():
    ok, lines = self_check(seed=8, dims=(4, 8, 32, 64), trials=100, tol=1e-12)
    worst = max(float(l.rsplit("=", 1)[1]) for l in lines)
    record(8, ok, f"{len(lines)} model/dim cells x 100 states, worst max-abs diff {worst:.3e}")


@pytest.mark.slow
def test_criterion_09_conservation(sim1, sim2, sim3):
    rng = np.random.default_rng(9)
    specs = [DissipatorSpec.gaussian(SIGMA2), DissipatorSpec.ng1(SIGMA2, SIGMA2),
             DissipatorSpec.ng2(SIGMA2, LadderKernel.three_tap(0.2))]
    worst_tr, worst_h = 0.0, 0.0
    for spec in specs:
        for n in (4, 8, 32, 64):
            model = RhsModel(spec, n)
            for _ in range(100):
                out = model(random_density_matrix(n, rng))
                worst_tr = max(worst_tr, abs(np.trace(out)) / n)
                worst_h = max(worst_h, float(np.abs(out - out.conj().T).max()))
    trajs = [r.trajectory for r in sim1[0]]
    trajs += [r.trajectory for r in sim2[0].rows + sim2[1].rows + sim3.rows]
    run_tr = max(t.column("trace_error").max() for t in trajs)
    run_eig = min(t.column("min_eig").min() for t in trajs)
    # RHS outputs are scaled by sigma2 = 400; the bounds are absolute
    ok = worst_tr < 1e-12 and worst_h < 1e-13 and run_tr < 1e-8 and run_eig > -1e-6
    record(9, ok, f"|tr RHS|/N={worst_tr:.1e} herm={worst_h:.1e} "
                  f"runs: trace err={run_tr:.1e} min eig={run_eig:.1e} ({len(trajs)} runs)")


def test_criterion_10_pinching():
    rng = np.random.default_rng(10)
    violations, worst = 0, np.inf
    for _ in range(1000):
        n = int(rng.integers(2, 33))
        rank = int(rng.integers(1, n + 1))
        rho = random_density_matrix(n, rng, rank=rank)
        gap = von_neumann_entropy(pinch_diagonal(rho)) - von_neumann_entropy(rho)
        worst = min(worst, gap)
        violations += gap < -1e-12
    record(10, violations == 0, f"violations={violations} smallest gap={worst:.3e}")


@pytest.mark.slow
def test_criterion_11_sim2(sim2):
    classical, pure = sim2
    v = classical.column("variance_final")
    k = classical.column("excess_kurtosis_final")
    g = classical.column("entropy_gain")
    flat = float(np.ptp(v) / np.abs(v).max())
    pv = pure.column("variance_final")
    pure_change = float(abs(pv[1] - pv[0]) / abs(pv[0]))
    ok = (flat < 0.01 and np.all(np.diff(k) > 0) and np.all(np.diff(g) < 0)
          and pure_change > 0.05)
    record(11, ok, f"classical var spread={flat:.1e} kurt={np.round(k, 5).tolist()} "
                   f"gain={np.round(g, 5).tolist()} pure var change={pure_change:.1%}")


@pytest.mark.slow
def test_criterion_12_sim3(sim1, sim3):
    g = sim3.column("entropy_gain")
    k = sim3.column("excess_kurtosis_final")
    rho = spearman(g, k)
    gaussian = sim1[0][-1].trajectory.checkpoints
    same = sim3.rows[0].trajectory.checkpoints == gaussian
    record(12, rho < 0 and same,
           f"spearman(gain, kurtosis)={rho:.3f} h=0 identical to Gaussian: {same} "
           f"kurt={np.round(k, 5).tolist()}")


def test_criterion_13_classical_walk():
    rng = np.random.default_rng(13)
    done = 0
    for _ in range(20):
        width = int(rng.integers(2, 6))
        step = rng.random(width) + 0.01
        step /= step.sum()
        size = 1 + 2 * 50 * width + 10
        init = np.zeros(size)
        init[size // 2] = 1.0
        ps = classical_walk(WalkSpec(init, step, 50))
        h = np.array([walk_entropy(p) for p in ps])
        v = np.array([walk_variance(p) for p in ps])
        done += bool(np.all(np.diff(h) > 0) and np.all(np.diff(v) > 0))
    record(13, done == 20, f"{done}/20 random step laws strictly increase H and Var over 50 steps")
