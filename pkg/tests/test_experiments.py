import numpy as np
import pytest

from leo_adiabatic.config import ConfigError, RunConfig
from leo_adiabatic.evolution import evolve, mc_average
from leo_adiabatic.experiments import FIGURES, UnknownFigureError, run_figure, run_sweep, shape_pulses

SERIES = {"fig1a": 5, "fig1b": 9, "fig2": 4, "fig3": 5, "fig4": 10, "fig5": 5}


@pytest.fixture(scope="module")
def figures():
    return {f: run_figure(f, seed=0, trials=200) for f in FIGURES}


@pytest.mark.parametrize("fig", FIGURES)
def test_figure_series_and_checks(figures, fig):
    run = figures[fig]
    assert len(run.datasets) == SERIES[fig]
    failed = [c for c in run.checks if not c.passed]
    assert not failed, failed


def test_fig1a_series_echo_parameters(figures):
    ds = figures["fig1a"].dataset("fig1a_S0.100")
    assert "pulse.I = 20.0" in ds.header and "figure = fig1a" in ds.header
    assert ds.columns == ["t", "F"] and ds.rows == 201
    assert ds.column("F")[-1] >= 0.99


def test_fig1b_sweeps_duty_at_fixed_period(figures):
    names = [d.name for d in figures["fig1b"].datasets]
    assert names == [f"fig1b_delta{d}" for d in range(1, 10)]
    assert "pulse.tau_steps = 3" in figures["fig1b"].dataset("fig1b_delta7").header


def test_fig3_waveforms(figures):
    wn = figures["fig3"].dataset("fig3_white-noise")
    assert wn.columns == ["t", "f", "f_trials_mean"]
    # the per-realization band keeps the mean per-step S in (0.047, 0.053)
    assert 0.047 < wn.column("f").mean() * 0.005 < 0.053
    assert 0.047 < wn.column("f_trials_mean").mean() * 0.005 < 0.053
    sine = figures["fig3"].dataset("fig3_sine")
    assert sine.column("f").max() <= 20.0


def test_fig5_baseline_decays(figures):
    base = figures["fig5"].dataset("fig5_fidelity_baseline").column("F")
    assert np.all(np.diff(base) <= 0) and base[-1] < 0.99


def test_unknown_figure():
    with pytest.raises(UnknownFigureError, match="fig9x"):
        run_figure("fig9x")


def test_stochastic_figures_are_seed_reproducible():
    a = run_figure("fig4", seed=3, trials=60)
    b = run_figure("fig4", seed=3, trials=60)
    c = run_figure("fig4", seed=4, trials=60)
    for x, y, z in zip(a.datasets, b.datasets, c.datasets):
        assert np.array_equal(x.data, y.data) and x.header == y.header
        if "noise" in x.name or "random" in x.name:
            assert not np.array_equal(x.data, z.data)
        else:
            assert np.array_equal(x.data, z.data)


def test_shape_pulses_average_near_ten():
    for kind, p in shape_pulses().items():
        w = np.mean([p.with_stream(i).average_frequency(0.0, 1.0) for i in range(200)])
        target = 5.0 if kind == "sine-a10" else 10.0
        assert abs(w - target) < 0.6, kind


# ---- sweeps ----------------------------------------------------------------

def test_sweep_over_S_increases_fidelity():
    ds = run_sweep(RunConfig.default(), "S", [0.0, 0.05, 0.1])
    assert ds.rows == 3 and ds.columns == ["value", "F_T", "avg_freq_0T"]
    F = ds.column("F_T")
    assert F[0] < F[1] < F[2]
    np.testing.assert_allclose(ds.column("avg_freq_0T"), [0, 5, 10], atol=1e-12)


def test_single_point_sweep_equals_evolve():
    cfg = RunConfig.default(["pulse.kind=regular-rect"])
    ds = run_sweep(cfg, "I", [20.0])
    direct = evolve(RunConfig.default(["pulse.kind=regular-rect", "pulse.I=20.0"]).build_evolution())
    assert ds.column("F_T")[0] == direct.final_fidelity


def test_xi_sweep_frame_gap_converges_quadratically():
    ds = run_sweep(RunConfig.default(["pulse.kind=regular-rect", "pulse.I=20"]), "xi", [0.005, 0.0025], frame_gap=True)
    gap = ds.column("frame_gap")
    assert gap[0] < 5e-4
    assert 3.5 < gap[0] / gap[1] < 4.5


def test_delta_duty_T_and_trials_axes():
    base = RunConfig.default(["pulse.kind=regular-rect", "pulse.I=20"])
    d = run_sweep(base, "delta-steps", [1, 10, 25])
    assert np.ptp(d.column("F_T")) < 0.02
    duty = run_sweep(RunConfig.default(["pulse.kind=regular-rect", "pulse.I=20", "pulse.delta_steps=5", "pulse.tau_steps=5"]),
                     "duty", [0.2, 0.5, 0.8])
    np.testing.assert_allclose(duty.column("avg_freq_0T"), [4, 10, 16], atol=1e-12)
    T = run_sweep(RunConfig.default(), "T", [1.0, 10.0])
    assert T.column("F_T")[1] > 0.995
    noise = RunConfig.default(["pulse.kind=white-noise", "pulse.eta=20", "mc.seed=2"])
    tr = run_sweep(noise, "trials", [1, 40])
    direct = mc_average(noise.build_evolution(), 40, seed=2)
    assert tr.column("F_T")[1] == direct.final_fidelity


def test_sweep_errors():
    with pytest.raises(ConfigError, match="empty"):
        run_sweep(RunConfig.default(), "S", [])
    with pytest.raises(ConfigError, match="unknown sweep axis"):
        run_sweep(RunConfig.default(), "omega", [1.0])
    with pytest.raises(ConfigError, match="integer"):
        run_sweep(RunConfig.default(["pulse.kind=regular-rect"]), "delta-steps", [1.5])
    with pytest.raises(ConfigError, match="not defined"):
        run_sweep(RunConfig.default(["pulse.kind=sine"]), "S", [0.1])


def test_sweep_from_config_section():
    cfg = RunConfig.from_text("[sweep]\naxis = S\ngrid = 0, 0.1\n")
    ds = run_sweep(cfg)
    assert ds.name == "sweep_S" and ds.rows == 2
    assert "sweep.axis = S" in ds.header
