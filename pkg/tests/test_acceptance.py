"""Acceptance suite: one test per criterion, one PASS line per criterion.

Run with `pytest tests/test_acceptance.py -v -s`.  Criteria 5-9 share three
full convergence sweeps (workers 8, 1, 2) plus an exact-Green rerun and a
two-blob run at production problem sizes; expect a multi-hour wall time on
a small machine (the O(N^2) kernels see ~1e12 particle pairs in total).
"""

import json
import math
import time
import warnings

import numpy as np
import pytest

from vortexblob import blob, diagnostics
from vortexblob.cli import ExperimentConfig, run_experiment
from vortexblob.cutoff import SmoothedLog, build_cutoffs
from vortexblob.geometry import UnitDisk, gamma, pt
from vortexblob.pointvortex import VortexConfig, integrate, select_rho0

ONE_REV = 3 * math.pi**2

SWEEP_EPS = (0.2, 0.1, 0.05)
SWEEP_T = 5.0
SWEEP_DT = 1e-3
SWEEP_N_TARGET = 4000
SWEEP_RECORD = 250


def report(criterion, text, elapsed=None):
    suffix = f"  [{elapsed:.2f}s]" if elapsed is not None else ""
    print(f"\nPASS criterion {criterion}: {text}{suffix}")


def sweep_config(outdir, workers):
    return ExperimentConfig(
        scenario="sweep", z0=(0.5, 0.0), epsilons=SWEEP_EPS, T=SWEEP_T,
        dt=SWEEP_DT, n_target=SWEEP_N_TARGET, record_every=SWEEP_RECORD,
        mode="cutoff", output_dir=str(outdir), seed=0, workers=workers,
    )


def run_quiet(cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return run_experiment(cfg)


@pytest.fixture(scope="session")
def disk():
    return UnitDisk()


@pytest.fixture(scope="session")
def warm_kernels(disk):
    # compile every jitted kernel before anything is timed
    cl = blob.make_initial_cloud(disk, pt(0.5, 0.0), 0.1, 1.0, 32)
    cuts = build_cutoffs(disk, 0.45)
    for mode in (blob.FieldMode.SINGLE_BLOB, blob.FieldMode.EXACT_GREEN):
        fld = blob.RegularizedField(domain=disk, cutoffs=cuts, smoothed=None, mode=mode)
        blob.step(fld, cl, 1e-4, workers=1)
        blob.boundary_force(fld, cl, pt(0.3, 0.0))
    fldk = blob.RegularizedField(
        domain=disk, cutoffs=cuts, smoothed=SmoothedLog(0.45), mode=blob.FieldMode.K_BLOB
    )
    blob.step(fldk, cl, 1e-4, workers=1)
    blob.gamma_momentum_residual(cl)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fld = blob.RegularizedField(
            domain=disk, cutoffs=cuts, smoothed=None, mode=blob.FieldMode.SINGLE_BLOB
        )
        traj = blob.run(fld, cl, 0.002, 1e-3, record_every=1)
        diagnostics.measure_force_bounds(fld, traj)
    return True


@pytest.fixture(scope="session")
def sweep_w8(tmp_path_factory, warm_kernels):
    out = tmp_path_factory.mktemp("acc") / "sweep_w8"
    t0 = time.perf_counter()
    man = run_quiet(sweep_config(out, workers=8))
    print(f"\n[sweep workers=8 took {time.perf_counter() - t0:.0f}s]")
    return man, out


@pytest.fixture(scope="session")
def sweep_w1(tmp_path_factory, warm_kernels):
    out = tmp_path_factory.mktemp("acc_w1") / "sweep_w1"
    t0 = time.perf_counter()
    man = run_quiet(sweep_config(out, workers=1))
    print(f"\n[sweep workers=1 took {time.perf_counter() - t0:.0f}s]")
    return man, out


@pytest.fixture(scope="session")
def sweep_w2(tmp_path_factory, warm_kernels):
    out = tmp_path_factory.mktemp("acc_w2") / "sweep_w2"
    t0 = time.perf_counter()
    man = run_quiet(sweep_config(out, workers=2))
    print(f"\n[sweep workers=2 took {time.perf_counter() - t0:.0f}s]")
    return man, out


@pytest.fixture(scope="session")
def exact_green_run(tmp_path_factory, warm_kernels):
    out = tmp_path_factory.mktemp("acc_eg") / "run"
    cfg = ExperimentConfig(
        scenario="single_blob", z0=(0.5, 0.0), T=SWEEP_T, dt=SWEEP_DT,
        epsilon=0.1, n_target=SWEEP_N_TARGET, record_every=SWEEP_RECORD,
        mode="exact_green", output_dir=str(out), seed=0, workers=8,
    )
    t0 = time.perf_counter()
    man = run_quiet(cfg)
    print(f"\n[exact-green run took {time.perf_counter() - t0:.0f}s]")
    return man, out


@pytest.fixture(scope="session")
def kblob_run(disk, warm_kernels):
    # two same-sign blobs, library-level so clouds stay inspectable
    eps = 0.05
    cfg = VortexConfig(np.array([[0.4, 0.0], [-0.4, 0.0]]), np.array([0.5, 0.5]))
    t0 = time.perf_counter()
    ode = integrate(disk, cfg, 3.0, 1e-3)
    rho0 = select_rho0(ode, disk)
    cuts = build_cutoffs(disk, rho0)
    clouds = [
        blob.make_initial_cloud(disk, cfg.positions[i], eps, 0.5, 1000)
        for i in range(2)
    ]
    cloud0 = blob.merge_clouds(clouds)
    fld = blob.RegularizedField(
        domain=disk, cutoffs=cuts, smoothed=SmoothedLog(rho0), mode=blob.FieldMode.K_BLOB
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        traj = blob.run(fld, cloud0, 3.0, 1e-3, record_every=SWEEP_RECORD, workers=8)
    print(f"\n[k-blob run took {time.perf_counter() - t0:.0f}s]")
    return dict(eps=eps, ode=ode, rho0=rho0, traj=traj, cloud0=cloud0)


def member_dir(out, eps):
    return out / f"eps_{eps!r}"


def load_diag(path):
    return np.atleast_1d(np.genfromtxt(path, delimiter=",", names=True))


class TestCriterion1:
    def test_green_function_correctness(self, disk):
        t0 = time.perf_counter()
        rng = np.random.default_rng(1)
        # boundary vanishing: 256 boundary points pulled inward by 1e-6,
        # 32 interior sources
        bpts = disk.boundary_points(256) * (1.0 - 1e-6)
        r = np.sqrt(rng.uniform(0, 0.9**2, 32))
        th = rng.uniform(0, 2 * math.pi, 32)
        sources = np.column_stack([r * np.cos(th), r * np.sin(th)])
        worst_g = 0.0
        for x in sources:
            for yb in bpts:
                g = gamma(x, yb) - disk.regular_part(x, yb)
                worst_g = max(worst_g, abs(g))
        assert worst_g < 1e-4

        # symmetry
        worst_sym = 0.0
        for _ in range(200):
            a = sources[rng.integers(0, 32)]
            b = sources[rng.integers(0, 32)]
            if np.array_equal(a, b):
                continue
            ga = gamma(a, b) - disk.regular_part(a, b)
            gb = gamma(b, a) - disk.regular_part(b, a)
            worst_sym = max(worst_sym, abs(ga - gb))
        assert worst_sym < 1e-12

        # gradient of the Robin function against central differences
        step = 1e-6
        worst_rel = 0.0
        for _ in range(100):
            rr = math.sqrt(rng.uniform(0.1**2, 0.85**2))
            ph = rng.uniform(0, 2 * math.pi)
            x = pt(rr * math.cos(ph), rr * math.sin(ph))
            g = disk.grad_robin(x)
            scale = max(1.0, float(np.hypot(*g)))
            for k in range(2):
                dx = np.zeros(2)
                dx[k] = step
                fd = (disk.robin(x + dx) - disk.robin(x - dx)) / (2 * step)
                worst_rel = max(worst_rel, abs(g[k] - fd) / scale)
        assert worst_rel < 1e-8

        elapsed = time.perf_counter() - t0
        assert elapsed < 1.0
        report(1, f"|G|_boundary={worst_g:.2e}, symmetry={worst_sym:.2e}, "
                  f"grad rel err={worst_rel:.2e}", elapsed)


class TestCriterion2:
    def test_kirchhoff_routh_conservation(self, disk):
        t0 = time.perf_counter()
        cfg = VortexConfig(np.array([[0.5, 0.0]]), np.array([1.0]))
        sol = integrate(disk, cfg, 30.0, 1e-3)
        # W = -H for a single unit vortex, so W drift is H drift
        h_drift = float(np.max(np.abs(sol.hamiltonian - sol.hamiltonian[0])))
        radii = np.hypot(sol.positions[:, 0, 0], sol.positions[:, 0, 1])
        r_drift = float(np.max(np.abs(radii - 0.5)))
        assert h_drift < 1e-8
        assert r_drift < 1e-8

        orbit = integrate(disk, cfg, ONE_REV, 1e-3)
        close = float(np.hypot(orbit.positions[-1, 0, 0] - 0.5,
                               orbit.positions[-1, 0, 1]))
        assert close < 1e-5
        elapsed = time.perf_counter() - t0
        assert elapsed < 5.0
        report(2, f"H drift={h_drift:.2e}, |z| drift={r_drift:.2e}, "
                  f"orbit closure={close:.2e}", elapsed)


class TestCriterion3:
    def test_rk4_order(self, disk):
        t0 = time.perf_counter()
        cfg = VortexConfig(np.array([[0.5, 0.0]]), np.array([1.0]))

        def orbit_err(dt):
            sol = integrate(disk, cfg, ONE_REV, dt)
            return float(np.hypot(sol.positions[-1, 0, 0] - 0.5,
                                  sol.positions[-1, 0, 1]))

        # dt large enough that the dt^4 term dominates roundoff
        e1, e2 = orbit_err(0.2), orbit_err(0.1)
        ratio = e1 / e2
        assert ratio >= 15.0
        elapsed = time.perf_counter() - t0
        assert elapsed < 10.0
        report(3, f"halving dt: closed-orbit error {e1:.3e} -> {e2:.3e} "
                  f"(factor {ratio:.1f})", elapsed)


class TestCriterion4:
    def test_momentum_identity(self, disk, warm_kernels):
        cl = blob.make_initial_cloud(disk, pt(0.5, 0.0), 0.1, 1.0, 2000)
        assert cl.n >= 1900
        t0 = time.perf_counter()
        res = blob.gamma_momentum_residual(cl)
        elapsed = time.perf_counter() - t0
        mag = float(np.hypot(*res))
        assert mag < 1e-12
        assert elapsed < 1.0
        report(4, f"pairwise log-kernel momentum residual={mag:.2e} "
                  f"on N={cl.n}", elapsed)


class TestCriterion5:
    def test_localization_sweep(self, sweep_w8):
        man, out = sweep_w8
        sweep = json.loads((out / "sweep.json").read_text())
        errs = sweep["sup_center_err"]
        ratios = [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]
        assert all(r >= 1.5 for r in ratios)
        assert sweep["fitted_center_slope"] >= 0.8
        assert sweep["fitted_support_slope"] >= 0.3
        for m in man.members:
            assert m["events"]["exit_domain"] == 0
            assert m["events"]["enter_inner_band"] == 0
            ev_rows = (member_dir(out, m["epsilon"]) / "events.csv").read_text().splitlines()
            assert len(ev_rows) == 1  # header only
        report(
            5,
            f"sup|m-z| per eps={['%.3e' % e for e in errs]}, halving ratios="
            f"{['%.1f' % r for r in ratios]}, center slope="
            f"{sweep['fitted_center_slope']:.2f}, support slope="
            f"{sweep['fitted_support_slope']:.2f}, zero events",
        )


class TestCriterion6:
    def test_gronwall_envelope(self, sweep_w8):
        man, out = sweep_w8
        eps = 0.1
        member = next(m for m in man.members if m["epsilon"] == eps)
        diag = load_diag(member_dir(out, eps) / "diagnostics_blob0.csv")
        inertia = diag["I"]
        times = diag["t"]
        assert inertia[0] <= 4 * eps * eps
        l2 = member["l2"]
        envelope = inertia[0] * np.exp(2.0 * l2 * times)
        violations = int(np.sum(inertia > envelope))
        assert violations == 0
        report(6, f"I(0)={inertia[0]:.3e} <= 4 eps^2={4*eps*eps:.3e}; "
                  f"0 envelope violations with measured L2={l2:.3f}")


class TestCriterion7:
    def test_mode_equivalence(self, sweep_w8, exact_green_run):
        man_s, out_s = sweep_w8
        man_e, out_e = exact_green_run
        d_cut = load_diag(member_dir(out_s, 0.1) / "diagnostics_blob0.csv")
        d_eg = load_diag(out_e / "diagnostics_blob0.csv")
        assert np.array_equal(d_cut["t"], d_eg["t"])
        rho0 = man_s.rho0
        # precondition: every particle stayed on the theta plateau
        assert np.min(d_cut["clearance"]) > rho0 / 2
        assert np.min(d_eg["clearance"]) > rho0 / 2
        diff = np.max(
            np.hypot(d_cut["mx"] - d_eg["mx"], d_cut["my"] - d_eg["my"])
        )
        assert diff < 1e-6
        report(7, f"cutoff vs exact-Green center difference={diff:.2e} "
                  f"over {len(d_cut)} recorded times")


class TestCriterion8:
    def test_two_blob_tracking(self, kblob_run, disk):
        eps = kblob_run["eps"]
        traj = kblob_run["traj"]
        ode = kblob_run["ode"]
        worst = 0.0
        for b in range(2):
            dists = diagnostics.compare_to_ode(traj, ode, blob=b, vortex=b)
            worst = max(worst, float(np.max(dists)))
        assert worst <= 5 * eps

        for b in range(2):
            a0 = diagnostics.blob_circulation(kblob_run["cloud0"], b)
            for c in traj.clouds:
                assert diagnostics.blob_circulation(c, b) == a0
        leak = diagnostics.distribution_check(traj.clouds[0], traj.clouds[-1])
        assert leak == 0.0
        report(8, f"per-blob sup|m_i-z_i|={worst:.3e} <= 5 eps={5*eps}; "
                  f"circulation exact; distribution discrepancy={leak}")


class TestCriterion9:
    def test_worker_count_determinism(self, sweep_w8, sweep_w1, sweep_w2):
        man8, _ = sweep_w8
        man1, _ = sweep_w1
        man2, _ = sweep_w2
        assert man1.outputs == man8.outputs
        assert man2.outputs == man8.outputs
        n = len(man8.outputs)
        report(9, f"all {n} output digests identical across workers 1, 2, 8")
