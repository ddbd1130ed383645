"""Named figure reproductions, parameter sweeps and their threshold checks."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .config import ConfigError, RunConfig
from .evolution import EvolutionConfig, Trajectory, evolve, mc_average
from .models import Frame, TwoLevelModel, XYChainModel
from .output import Dataset
from .pulses import PulseTrain, average_frequency_curve

log = logging.getLogger(__name__)

FIGURES = ("fig1a", "fig1b", "fig2", "fig3", "fig4", "fig5")
SWEEP_AXES = ("S", "I", "delta-steps", "duty", "T", "xi", "trials")
DEFAULT_TRIALS = 1000


class UnknownFigureError(ValueError):
    pass


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def __post_init__(self):
        self.passed = bool(self.passed)

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class FigureRun:
    figure: str
    datasets: list[Dataset]
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def dataset(self, name: str) -> Dataset:
        for ds in self.datasets:
            if ds.name == name:
                return ds
        raise KeyError(name)


def describe(config: EvolutionConfig, **extra) -> list[str]:
    """Parameter echo lines for a dataset header."""
    m = config.model
    lines = [f"model = {m.name}"]
    lines += [f"model.{f.name} = {getattr(m, f.name)}" for f in fields(m)]
    lines += [f"evolution.frame = {config.frame.value}", f"evolution.xi = {config.xi}",
              f"evolution.store_every = {config.store_every}", f"evolution.initial = {config.initial}"]
    if config.energy_shift:
        lines.append(f"evolution.energy_shift = {config.energy_shift}")
    lines += [f"pulse.{k} = {v}" for k, v in config.pulse.metadata().items()]
    if config.pulse.stochastic or config.pulse.kind != "zero":
        lines.append(f"pulse.xi = {config.pulse.xi}")
    lines += [f"{k} = {v}" for k, v in extra.items()]
    return lines


def simulate(config: EvolutionConfig, trials: int = 1, seed: int = 0, jobs: int = 1) -> Trajectory:
    """evolve for deterministic pulses, mc_average for stochastic ones."""
    if config.pulse.stochastic:
        return mc_average(config, trials, seed, jobs)
    return evolve(config)


def trajectory_dataset(name: str, traj: Trajectory, header: list[str], seed=None, rho: bool = False) -> Dataset:
    cols = ["t", "F"]
    data = [traj.times, traj.fidelity]
    if traj.trials_mean_fidelity is not None:
        cols.append("F_trials_mean")
        data.append(traj.trials_mean_fidelity)
    if rho:
        r = traj.rho if traj.rho is not None else np.einsum("ti,tj->tij", traj.states, traj.states.conj())
        d = r.shape[-1]
        for i in range(d):
            for j in range(d):
                cols += [f"rho_re_{i}{j}", f"rho_im_{i}{j}"]
                data += [r[:, i, j].real, r[:, i, j].imag]
    return Dataset(name, cols, np.column_stack(data), header, seed)


def avg_freq_dataset(name: str, config: EvolutionConfig, traj: Trajectory, header: list[str], seed=None) -> Dataset:
    if traj.avg_freq is not None:
        s, w = traj.avg_freq_s, traj.avg_freq
    else:
        s = traj.times[:-1]
        w = average_frequency_curve(config.pulse, s, config.T)
    return Dataset(name, ["s", "avg_freq"], np.column_stack([s, w]), header, seed)


def _two_level(pulse: PulseTrain, T: float = 1.0, xi: float = 0.005) -> EvolutionConfig:
    pulse = replace(pulse, xi=xi, horizon=T)
    return EvolutionConfig(model=TwoLevelModel(T=T), pulse=pulse, xi=xi)


def _rect(I: float, delta: int, tau: int) -> PulseTrain:
    return PulseTrain(kind="regular-rect", I=I, delta_steps=delta, tau_steps=tau)


def _strictly_increasing(x) -> bool:
    return bool(np.all(np.diff(np.asarray(x)) > 0))


def _fig1a(seed, trials, jobs) -> FigureRun:
    run = FigureRun("fig1a", [])
    finals = []
    for I in (0.0, 5.0, 8.0, 10.0, 20.0):
        cfg = _two_level(_rect(I, 1, 1))
        S = I * cfg.xi
        traj = evolve(cfg)
        finals.append(traj.final_fidelity)
        run.datasets.append(trajectory_dataset(f"fig1a_S{S:.3f}", traj, describe(cfg, figure="fig1a", S=f"{S:.3f}")))
    run.checks.append(Check("fig1a: F(T) >= 0.99 at S=0.1", finals[-1] >= 0.99, f"F(T) = {finals[-1]:.6f}"))
    run.checks.append(Check("fig1a: F(T) strictly increasing in S", _strictly_increasing(finals),
                            "F(T) = " + ", ".join(f"{f:.6f}" for f in finals)))
    return run


def _fig1b(seed, trials, jobs) -> FigureRun:
    run = FigureRun("fig1b", [])
    S_on = 0.03
    for delta in range(1, 10):
        cfg = _two_level(_rect(S_on / 0.005, delta, 10 - delta))
        traj = evolve(cfg)
        run.datasets.append(trajectory_dataset(
            f"fig1b_delta{delta}", traj, describe(cfg, figure="fig1b", S_per_on_step=S_on, ratio=f"{delta}/{10 - delta}")))
    return run


def _fig2(seed, trials, jobs) -> FigureRun:
    run = FigureRun("fig2", [])
    finals = []
    for delta in (1, 10, 25, 50):
        cfg = _two_level(_rect(20.0, delta, delta))
        traj = evolve(cfg)
        finals.append(traj.final_fidelity)
        run.datasets.append(trajectory_dataset(f"fig2_delta{delta}", traj, describe(cfg, figure="fig2")))
    spread = max(finals) - min(finals)
    run.checks.append(Check("fig2: spread of F(T) < 0.02", spread < 0.02,
                            f"spread = {spread:.6f}; F(T) = " + ", ".join(f"{f:.6f}" for f in finals)))
    return run


def shape_pulses() -> dict[str, PulseTrain]:
    """The four pulse shapes tuned to <omega2(0, T)> ~ 10 omega1, plus the literal sine reading."""
    return {
        "regular-rect": _rect(20.0, 5, 5),
        "random-rect": PulseTrain(kind="random-rect", period_steps=20, s_max=0.1, s_reading="period-mean"),
        "white-noise": PulseTrain(kind="white-noise", eta=20.0, s_band=(0.047, 0.053)),
        "sine": PulseTrain(kind="sine", a=20.0, b=50.0),
        "sine-a10": PulseTrain(kind="sine", a=10.0, b=50.0),
    }


UNIVERSAL_SHAPES = ("regular-rect", "random-rect", "white-noise", "sine")


def _fig3(seed, trials, jobs) -> FigureRun:
    run = FigureRun("fig3", [])
    for kind, pulse in shape_pulses().items():
        cfg = _two_level(replace(pulse, seed=seed))
        n = cfg.n_steps
        t = np.arange(n) * cfg.xi
        f = cfg.pulse.step_means(n)
        cols, data = ["t", "f"], [t, f]
        if cfg.pulse.stochastic:
            mean = np.mean([replace(cfg.pulse, stream=i).step_means(n) for i in range(trials)], axis=0)
            cols.append("f_trials_mean")
            data.append(mean)
        run.datasets.append(Dataset(f"fig3_{kind}", cols, np.column_stack(data),
                                    describe(cfg, figure="fig3", trials=trials, seed=seed), seed))
    return run


def _fig4(seed, trials, jobs) -> FigureRun:
    run = FigureRun("fig4", [])
    finals = {}
    for kind, pulse in shape_pulses().items():
        cfg = _two_level(replace(pulse, seed=seed))
        traj = simulate(cfg, trials, seed, jobs)
        n_trials = trials if cfg.pulse.stochastic else 1
        head = describe(cfg, figure="fig4", trials=n_trials, seed=seed)
        if cfg.pulse.stochastic:
            head.append("fidelity = sqrt(<E0|mean rho|E0>)")
        run.datasets.append(avg_freq_dataset(f"fig4_avgfreq_{kind}", cfg, traj, head, seed))
        run.datasets.append(trajectory_dataset(f"fig4_fidelity_{kind}", traj, head, seed))
        w0 = run.datasets[-2].column("avg_freq")[0]
        finals[kind] = traj.final_fidelity
        if kind in UNIVERSAL_SHAPES:
            run.checks.append(Check(f"fig4: <omega2(0,T)> ~ 10 for {kind}", 9.0 <= w0 <= 11.0, f"<omega2(0,T)> = {w0:.4f}"))
            run.checks.append(Check(f"fig4: F(T) = 0.994 +- 0.005 for {kind}", abs(finals[kind] - 0.994) <= 0.005,
                                    f"F(T) = {finals[kind]:.6f}"))
    return run


def _fig5(seed, trials, jobs) -> FigureRun:
    run = FigureRun("fig5", [])
    xi = 0.001
    model = XYChainModel(T=1.0)
    finals = {}
    for I in (0.0, 20.0, 30.0):
        pulse = PulseTrain() if I == 0 else replace(_rect(I, 5, 5), xi=xi)
        cfg = EvolutionConfig(model=model, pulse=pulse, xi=xi)
        traj = evolve(cfg)
        finals[I] = traj
        tag = "baseline" if I == 0 else f"I{I:g}"
        head = describe(cfg, figure="fig5")
        run.datasets.append(trajectory_dataset(f"fig5_fidelity_{tag}", traj, head))
        if I:
            run.datasets.append(avg_freq_dataset(f"fig5_avgfreq_{tag}", cfg, traj, head))
    f20, f30 = finals[20.0].final_fidelity, finals[30.0].final_fidelity
    base = finals[0.0].fidelity
    run.checks.append(Check("fig5: F(T) > 0.993 at <omega2> ~ 10", f20 > 0.993, f"F(T) = {f20:.6f}"))
    run.checks.append(Check("fig5: F(T) > 0.995 at <omega2> ~ 15", f30 > 0.995, f"F(T) = {f30:.6f}"))
    run.checks.append(Check("fig5: baseline decays monotonically", bool(np.all(np.diff(base) <= 0)),
                            f"max increment = {np.max(np.diff(base)):.3e}"))
    return run


_FIGURE_RUNNERS = {"fig1a": _fig1a, "fig1b": _fig1b, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5}


def run_figure(fig_id: str, seed: int = 0, trials: int = DEFAULT_TRIALS, jobs: int = 1) -> FigureRun:
    """Datasets and threshold checks for one named figure."""
    if fig_id not in _FIGURE_RUNNERS:
        raise UnknownFigureError(f"unknown figure id {fig_id!r}; known: {', '.join(FIGURES)}")
    run = _FIGURE_RUNNERS[fig_id](seed, trials, jobs)
    for c in run.checks:
        log.info("%s %s: %s", "PASS" if c.passed else "FAIL", c.name, c.detail)
    return run


# ---- sweeps ---------------------------------------------------------------

def _as_int(axis: str, v: float) -> int:
    if abs(v - round(v)) > 1e-9:
        raise ConfigError(f"sweep axis {axis} needs integer values, got {v}")
    return int(round(v))


def _point_overrides(base: RunConfig, axis: str, v: float) -> list[str]:
    p = base["pulse"]
    pulse_xi = p["xi"] if p["xi"] is not None else base["evolution"]["xi"]
    kind = p["kind"]
    if axis in ("S", "I"):
        if kind not in ("zero", "regular-rect", "white-noise"):
            raise ConfigError(f"sweep axis {axis} is not defined for pulse kind {kind!r}")
        I = v / pulse_xi if axis == "S" else v
        if kind == "white-noise":
            return [f"pulse.eta={2 * I!r}"]
        return ["pulse.kind=regular-rect", f"pulse.I={I!r}"]
    if axis == "delta-steps":
        d = _as_int(axis, v)
        ratio = p["tau_steps"] / p["delta_steps"] if p["delta_steps"] else 1.0
        return [f"pulse.delta_steps={d}", f"pulse.tau_steps={_as_int(axis, d * ratio)}"]
    if axis == "duty":
        period = p["delta_steps"] + p["tau_steps"]
        d = _as_int(axis, v * period)
        return [f"pulse.delta_steps={d}", f"pulse.tau_steps={period - d}"]
    if axis == "T":
        return [f"model.T={v!r}"]
    if axis == "xi":
        # the pulse keeps its own grid so only the integrator step changes
        return [f"evolution.xi={v!r}", f"pulse.xi={pulse_xi!r}"]
    if axis == "trials":
        return [f"mc.trials={_as_int(axis, v)}"]
    raise ConfigError(f"unknown sweep axis {axis!r}; known: {', '.join(SWEEP_AXES)}")


def run_sweep(base: RunConfig, axis: str | None = None, grid=None, frame_gap: bool | None = None) -> Dataset:
    """One row per grid point: value, F(T), <omega2(0, T)> [, F_lab(T), frame_gap]."""
    axis = base["sweep"]["axis"] if axis is None else axis
    grid = base["sweep"]["grid"] if grid is None else tuple(grid)
    frame_gap = base["sweep"]["frame_gap"] if frame_gap is None else frame_gap
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; known: {', '.join(SWEEP_AXES)}")
    if len(grid) == 0:
        raise ConfigError("sweep grid is empty")
    mc = base["mc"]
    rows = []
    for v in grid:
        point = base.with_overrides(_point_overrides(base, axis, float(v)))
        cfg = point.build_evolution()
        trials = point["mc"]["trials"]
        traj = simulate(cfg, trials, mc["seed"], mc["jobs"])
        if traj.avg_freq is not None:
            w0 = traj.avg_freq[0]
        else:
            w0 = cfg.pulse.average_frequency(0.0, cfg.T)
        row = [float(v), traj.final_fidelity, w0]
        if frame_gap:
            lab = simulate(replace(cfg, frame=Frame.LAB), trials, mc["seed"], mc["jobs"])
            row += [lab.final_fidelity, float(np.max(np.abs(lab.fidelity - traj.fidelity)))]
        rows.append(row)
    cols = ["value", "F_T", "avg_freq_0T"] + (["F_lab_T", "frame_gap"] if frame_gap else [])
    header = base.echo() + [f"sweep.axis = {axis}", "sweep.grid = " + ", ".join(repr(float(g)) for g in grid)]
    return Dataset(f"sweep_{axis}", cols, np.array(rows, dtype=float), header, mc["seed"])
