import json
import math
import warnings

import numpy as np
import pytest

from vortexblob import cli
from vortexblob.cli import (
    ExperimentConfig,
    PipelineError,
    emit_plot_data,
    main,
    parse_config,
    run_experiment,
    serialize_config,
    validate_config,
)
from vortexblob.errors import ConfigurationError

ONE_REV = 3 * math.pi**2


def write_cfg(tmp_path, text, name="exp.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def quiet_experiment(cfg):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return run_experiment(cfg)


class TestConfigFormat:
    def test_round_trip_single_blob(self):
        cfg = ExperimentConfig(
            scenario="single_blob", z0=(0.5, 0.0), T=5.0, dt=1e-3, epsilon=0.1,
            n_target=4000, record_every=250, mode="cutoff", output_dir="x",
            seed=3, workers=2,
        )
        assert parse_config(serialize_config(cfg)) == cfg

    def test_round_trip_k_blob(self):
        cfg = ExperimentConfig(
            scenario="k_blob", vortices=((0.4, 0.0, 0.5), (-0.4, 0.0, 0.5)),
            T=3.0, dt=1e-3, epsilon=0.05, n_target=1000, output_dir="y",
        )
        assert parse_config(serialize_config(cfg)) == cfg

    def test_round_trip_sweep(self):
        cfg = ExperimentConfig(
            scenario="sweep", z0=(0.5, 0.0), epsilons=(0.2, 0.1, 0.05),
            T=5.0, dt=1e-3, n_target=4000, output_dir="z", workers=8,
        )
        assert parse_config(serialize_config(cfg)) == cfg

    def test_comments_and_blank_lines(self):
        cfg = parse_config(
            "# experiment\nscenario = point_vortex\n\nvortex_1 = 0.5, 0.0, 1.0  # r=0.5\nT = 2.0\n"
        )
        assert cfg.scenario == "point_vortex"
        assert cfg.vortices == ((0.5, 0.0, 1.0),)
        assert cfg.T == 2.0

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigurationError, match="unknown key"):
            parse_config("scenario = sweep\nfoo = 1\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigurationError, match="duplicate"):
            parse_config("scenario = sweep\nT = 1\nT = 2\n")

    def test_missing_scenario_rejected(self):
        with pytest.raises(ConfigurationError, match="scenario"):
            parse_config("T = 1\n")

    def test_bad_vortex_numbering(self):
        with pytest.raises(ConfigurationError, match="vortex_1..vortex_k"):
            parse_config("scenario = k_blob\nvortex_2 = 0.1, 0.2, 1.0\n")

    def test_malformed_line(self):
        with pytest.raises(ConfigurationError, match="key = value"):
            parse_config("scenario sweep\n")


class TestValidation:
    def test_z0_outside_disk(self):
        cfg = ExperimentConfig(scenario="single_blob", z0=(1.5, 0.0), epsilon=0.1)
        with pytest.raises(ConfigurationError, match="interior"):
            validate_config(cfg)

    def test_blob_overlapping_boundary(self):
        cfg = ExperimentConfig(scenario="single_blob", z0=(0.95, 0.0), epsilon=0.2)
        with pytest.raises(ConfigurationError, match="overlaps"):
            validate_config(cfg)

    def test_epsilons_must_decrease(self):
        cfg = ExperimentConfig(scenario="sweep", z0=(0.5, 0.0), epsilons=(0.1, 0.2))
        with pytest.raises(ConfigurationError, match="decreasing"):
            validate_config(cfg)

    def test_k_blob_rejects_exact_green(self):
        cfg = ExperimentConfig(
            scenario="k_blob", vortices=((0.4, 0.0, 0.5),), epsilon=0.05,
            mode="exact_green",
        )
        with pytest.raises(ConfigurationError, match="cutoff"):
            validate_config(cfg)

    def test_coincident_vortices(self):
        cfg = ExperimentConfig(
            scenario="point_vortex", vortices=((0.4, 0.0, 0.5), (0.4, 0.0, 0.5)),
        )
        with pytest.raises(ConfigurationError, match="distinct"):
            validate_config(cfg)

    def test_bad_scenario(self):
        with pytest.raises(ConfigurationError, match="scenario"):
            validate_config(ExperimentConfig(scenario="blob_storm"))


class TestPointVortexScenario:
    def test_closed_orbit_csv(self, tmp_path):
        cfg = ExperimentConfig(
            scenario="point_vortex", vortices=((0.5, 0.0, 1.0),),
            T=ONE_REV, dt=1e-3, output_dir=str(tmp_path / "run"),
        )
        man = run_experiment(cfg)
        assert man.status == "complete"
        data = np.genfromtxt(tmp_path / "run" / "ode.csv", delimiter=",", names=True)
        assert math.hypot(data["z1x"][-1] - 0.5, data["z1y"][-1]) < 1e-5
        # W column is the conserved quantity
        assert np.max(np.abs(data["W"] - data["W"][0])) < 1e-8

    def test_rerun_reproduces_digests(self, tmp_path):
        common = dict(scenario="point_vortex", vortices=((0.5, 0.0, 1.0),),
                      T=1.0, dt=1e-3)
        m1 = run_experiment(ExperimentConfig(output_dir=str(tmp_path / "a"), **common))
        m2 = run_experiment(ExperimentConfig(output_dir=str(tmp_path / "b"), **common))
        assert m1.outputs == m2.outputs


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("sb")
    cfg = ExperimentConfig(
        scenario="single_blob", z0=(0.5, 0.0), T=0.2, dt=1e-3, epsilon=0.1,
        n_target=100, record_every=50, output_dir=str(out / "run"), workers=2,
    )
    return cfg, quiet_experiment(cfg), out / "run"


class TestSingleBlobScenario:
    def test_outputs_and_manifest(self, small_run):
        cfg, man, outdir = small_run
        names = {o["path"] for o in man.outputs}
        assert names == {"ode.csv", "diagnostics_blob0.csv", "particles.csv", "events.csv"}
        assert man.rho0 == pytest.approx(0.45, abs=1e-9)
        assert man.n_particles is not None and abs(man.n_particles - 100) < 15
        assert man.l1_measured > 0 and man.l2_measured > 0
        assert man.event_counts == {"exit_domain": 0, "enter_inner_band": 0}
        assert (outdir / "manifest.json").is_file()
        saved = json.loads((outdir / "manifest.json").read_text())
        assert saved["status"] == "complete"
        assert saved["config"]["epsilon"] == 0.1
        assert saved["csv_header_version"] == 1

    def test_diagnostics_header(self, small_run):
        _, _, outdir = small_run
        header = (outdir / "diagnostics_blob0.csv").read_text().splitlines()[0]
        assert header == "t,mx,my,I,R_supp,dist_ode,clearance"

    def test_particles_csv_parses_to_finite_floats(self, small_run):
        _, _, outdir = small_run
        parts = np.genfromtxt(outdir / "particles.csv", delimiter=",", names=True)
        assert parts.dtype.names == ("snapshot", "t", "blob_id", "x", "y", "weight")
        for col in ("t", "x", "y", "weight"):
            assert np.isfinite(parts[col]).all()
        # weight column round-trips the exact float64 values
        first_weight = float(
            (outdir / "particles.csv").read_text().splitlines()[1].split(",")[5]
        )
        assert first_weight == parts["weight"][0]

    def test_rerun_digests_identical_across_workers(self, small_run, tmp_path):
        cfg, man, _ = small_run
        from dataclasses import replace

        cfg1 = replace(cfg, output_dir=str(tmp_path / "w1"), workers=1)
        man1 = quiet_experiment(cfg1)
        assert man1.outputs == man.outputs

    def test_plot_outputs(self, small_run):
        _, _, outdir = small_run
        written = emit_plot_data(outdir / "manifest.json")
        names = {p.name for p in written}
        assert "trajectory.svg" in names
        assert "timeseries.svg" in names
        assert "plot_timeseries.gnuplot" in names


class TestKBlobScenario:
    def test_small_run(self, tmp_path):
        cfg = ExperimentConfig(
            scenario="k_blob", vortices=((0.4, 0.0, 0.5), (-0.4, 0.0, 0.5)),
            T=0.2, dt=1e-3, epsilon=0.05, n_target=64, record_every=100,
            output_dir=str(tmp_path / "kb"), workers=2,
        )
        man = quiet_experiment(cfg)
        names = {o["path"] for o in man.outputs}
        assert "diagnostics_blob0.csv" in names
        assert "diagnostics_blob1.csv" in names
        parts = np.genfromtxt(tmp_path / "kb" / "particles.csv", delimiter=",", names=True)
        assert set(np.unique(parts["blob_id"]).astype(int)) == {0, 1}
        assert np.isfinite(parts["x"]).all() and np.isfinite(parts["weight"]).all()


@pytest.fixture(scope="module")
def tiny_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sw") / "sweep"
    cfg = ExperimentConfig(
        scenario="sweep", z0=(0.5, 0.0), epsilons=(0.2, 0.1, 0.05),
        T=0.1, dt=1e-3, n_target=64, record_every=50,
        output_dir=str(out), workers=2,
    )
    return cfg, quiet_experiment(cfg), out


class TestSweepScenario:
    def test_member_dirs_and_sweep_json(self, tiny_sweep):
        cfg, man, out = tiny_sweep
        for eps in (0.2, 0.1, 0.05):
            assert (out / f"eps_{eps!r}" / "ode.csv").is_file()
            assert (out / f"eps_{eps!r}" / "particles.csv").is_file()
        sweep = json.loads((out / "sweep.json").read_text())
        assert sweep["epsilons"] == [0.2, 0.1, 0.05]
        assert len(sweep["sup_center_err"]) == 3
        assert isinstance(sweep["fitted_center_slope"], float)
        assert len(man.members) == 3

    def test_sweep_plot(self, tiny_sweep):
        _, _, out = tiny_sweep
        written = emit_plot_data(out)
        names = {p.name for p in written}
        assert "loglog.svg" in names
        assert "plot_sweep.gnuplot" in names


class TestErrorSurface:
    def test_validation_failure_names_stage(self, tmp_path):
        cfg = ExperimentConfig(
            scenario="single_blob", z0=(1.5, 0.0), epsilon=0.1,
            output_dir=str(tmp_path / "bad"),
        )
        with pytest.raises(PipelineError) as exc:
            run_experiment(cfg)
        assert exc.value.stage == "validate"

    def test_partial_manifest_on_late_failure(self, tmp_path, monkeypatch):
        out = tmp_path / "late"
        cfg = ExperimentConfig(
            scenario="single_blob", z0=(0.5, 0.0), T=0.05, dt=1e-3, epsilon=0.1,
            n_target=64, output_dir=str(out), workers=1,
        )

        def boom(*a, **k):
            raise OSError("disk full")

        monkeypatch.setattr(cli, "_write_particles_csv", boom)
        with pytest.raises(PipelineError) as exc:
            quiet_experiment(cfg)
        assert "blob" in exc.value.stage
        saved = json.loads((out / "manifest.json").read_text())
        assert saved["status"] == "partial"
        assert saved["failed_stage"] == exc.value.stage

    def test_plot_missing_manifest(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            emit_plot_data(tmp_path / "nope" / "manifest.json")

    def test_plot_empty_trajectory_refused(self, tmp_path):
        out = tmp_path / "empty"
        out.mkdir()
        (out / "ode.csv").write_text("t,z1x,z1y,W\n")
        man = {
            "outputs": [{"path": "ode.csv", "sha256": "0" * 64}],
            "config": {"scenario": "point_vortex"},
        }
        (out / "manifest.json").write_text(json.dumps(man))
        with pytest.raises(ConfigurationError, match="empty"):
            emit_plot_data(out)


class TestMainExitCodes:
    def test_validate_ok(self, tmp_path, capsys):
        p = write_cfg(tmp_path, "scenario = point_vortex\nvortex_1 = 0.5, 0.0, 1.0\n")
        assert main(["validate", str(p)]) == 0
        captured = capsys.readouterr()
        assert "ok" in captured.out
        assert "workers = 0" in captured.out  # effective values echoed

    def test_validation_failure_exit_2(self, tmp_path, capsys):
        p = write_cfg(tmp_path, "scenario = single_blob\nz0 = 1.5, 0.0\nepsilon = 0.1\n")
        assert main(["validate", str(p)]) == 2
        assert "error" in capsys.readouterr().err

    def test_run_invalid_config_exit_2(self, tmp_path, capsys):
        p = write_cfg(
            tmp_path,
            f"scenario = single_blob\nz0 = 1.5, 0.0\nepsilon = 0.1\n"
            f"output_dir = {tmp_path / 'o'}\n",
        )
        assert main(["run", str(p)]) == 2
        assert "stage validate" in capsys.readouterr().err

    def test_numerical_halt_exit_3(self, tmp_path, capsys):
        p = write_cfg(
            tmp_path,
            "scenario = point_vortex\n"
            "vortex_1 = 0.1, 0.0, 1.0\nvortex_2 = 0.1002, 0.0, 1.0\n"
            f"T = 1.0\ndt = 0.01\noutput_dir = {tmp_path / 'o'}\n",
        )
        assert main(["run", str(p)]) == 3
        assert "stage ode" in capsys.readouterr().err

    def test_sweep_verb_requires_sweep_scenario(self, tmp_path, capsys):
        p = write_cfg(tmp_path, "scenario = point_vortex\nvortex_1 = 0.5, 0.0, 1.0\n")
        assert main(["sweep", str(p)]) == 2

    def test_missing_config_file_exit_4(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "missing.cfg")]) == 4

    def test_run_ok_exit_0(self, tmp_path, capsys):
        p = write_cfg(
            tmp_path,
            "scenario = point_vortex\nvortex_1 = 0.5, 0.0, 1.0\n"
            f"T = 0.1\ndt = 0.01\noutput_dir = {tmp_path / 'ok'}\n",
        )
        assert main(["run", str(p)]) == 0
        assert "complete" in capsys.readouterr().out


class TestOutputRootOverride:
    def test_env_var_prefixes_relative_dirs(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path / "root"))
        cfg = ExperimentConfig(
            scenario="point_vortex", vortices=((0.5, 0.0, 1.0),),
            T=0.1, dt=0.01, output_dir="rel",
        )
        run_experiment(cfg)
        assert (tmp_path / "root" / "rel" / "ode.csv").is_file()

    def test_absolute_dir_wins(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUTPUT_ROOT_ENV, str(tmp_path / "root"))
        out = tmp_path / "abs"
        cfg = ExperimentConfig(
            scenario="point_vortex", vortices=((0.5, 0.0, 1.0),),
            T=0.1, dt=0.01, output_dir=str(out),
        )
        run_experiment(cfg)
        assert (out / "ode.csv").is_file()
