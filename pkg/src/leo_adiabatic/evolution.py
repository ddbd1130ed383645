"""Stepped Schrodinger propagation, fidelity traces and ensemble averaging.

Each step of length xi uses exp(-i H(t_mid) xi) with t_mid at the step
midpoint (second order). The control enters through its exact window
integral over the step divided by xi, so the per-step pulse action equals S
exactly.
"""
from __future__ import annotations

import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .linalg import matvec, propagator_step
from .models import Frame, TwoLevelModel, XYChainModel
from .pulses import PulseTrain, average_frequency_curve

log = logging.getLogger(__name__)

NORM_TOL = 1e-9
MAX_XI = 0.01


class InvariantError(RuntimeError):
    """A conservation law or configuration invariant was violated."""


@dataclass(frozen=True)
class EvolutionConfig:
    model: TwoLevelModel | XYChainModel
    pulse: PulseTrain = field(default_factory=PulseTrain)
    frame: Frame = Frame.ADIABATIC
    xi: float = 0.005
    initial: str | tuple = "ground"
    store_every: int = 1
    energy_shift: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "frame", Frame(self.frame))
        self.n_steps  # validates T/xi

    @property
    def T(self) -> float:
        return self.model.T

    @property
    def n_steps(self) -> int:
        if not self.xi > 0:
            raise InvariantError("xi must be positive")
        if self.xi > MAX_XI / self.model.omega1 * (1 + 1e-12):
            raise InvariantError(f"xi = {self.xi} exceeds {MAX_XI}/omega1")
        n = self.T / self.xi
        if abs(n - round(n)) > 1e-9 * max(1.0, n) or round(n) < 1:
            raise InvariantError(f"T/xi = {n} is not a positive integer")
        return int(round(n))


@dataclass
class Trajectory:
    times: np.ndarray
    fidelity: np.ndarray
    states: np.ndarray | None = None
    rho: np.ndarray | None = None
    trials_mean_fidelity: np.ndarray | None = None
    avg_freq_s: np.ndarray | None = None
    avg_freq: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def final_fidelity(self) -> float:
        return float(self.fidelity[-1])


def fidelity(state: np.ndarray, model, t: float, frame: Frame | str = Frame.LAB) -> float:
    """|<E0(t)|psi>| for a pure state, sqrt(<E0|rho|E0>) for a density matrix.

    In the adiabatic frame E0 is the first basis vector.
    """
    state = np.asarray(state, dtype=complex)
    frame = Frame(frame)
    g = np.eye(model.dim, dtype=complex)[0] if frame is Frame.ADIABATIC else model.ground_state(t)
    if state.ndim == 1:
        norm = np.linalg.norm(state)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm {norm!r})")
        return float(abs(np.vdot(g, state)))
    tr = np.trace(state).real
    if abs(tr - 1.0) > NORM_TOL:
        raise ValueError(f"density matrix trace {tr!r} differs from 1")
    pop = np.vdot(g, state @ g).real
    return float(np.sqrt(max(pop, 0.0)))


def _initial_state(config: EvolutionConfig) -> np.ndarray:
    d = config.model.dim
    if isinstance(config.initial, str):
        if config.initial != "ground":
            raise InvariantError(f"unknown initial state {config.initial!r}")
        if config.frame is Frame.ADIABATIC:
            return np.eye(d, dtype=complex)[0]
        return config.model.ground_state(0.0).astype(complex)
    psi = np.asarray(config.initial, dtype=complex)
    if psi.shape != (d,):
        raise InvariantError(f"initial amplitudes must have length {d}")
    if abs(np.linalg.norm(psi) - 1.0) > NORM_TOL:
        raise InvariantError("initial amplitudes are not normalized")
    return psi


def _generator_parts(config: EvolutionConfig, t: float) -> tuple[np.ndarray, np.ndarray]:
    """(H with f = 0, control direction) at time t; H(f) = H0 + f * P."""
    m = config.model
    if config.frame is Frame.ADIABATIC:
        H0 = m.adiabatic_hamiltonian(0.0, t)
        P = np.zeros((m.dim, m.dim), dtype=complex)
        P[0, 0] = 1.0
    else:
        H0 = m.hamiltonian_lab(t)
        P = m.lab_control(1.0, t)
    if config.energy_shift:
        H0 = H0 + config.energy_shift * np.eye(m.dim)
    return H0, P


def _stored_steps(n: int, k: int) -> list[int]:
    if k < 1:
        raise InvariantError("store_every must be >= 1")
    stored = list(range(0, n + 1, k))
    if stored[-1] != n:
        stored.append(n)
    return stored


def propagate(config: EvolutionConfig, f_steps: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evolve a batch of pulse realizations in lockstep.

    ``f_steps`` has shape (batch, n_steps): per-step mean control values.
    Returns (stored times, states (batch, n_store, d), fidelity (batch, n_store)).
    """
    n = config.n_steps
    xi = config.xi
    model = config.model
    f_steps = np.atleast_2d(np.asarray(f_steps, dtype=float))
    if f_steps.shape[1] != n:
        raise InvariantError(f"expected {n} control values per realization, got {f_steps.shape[1]}")
    batch = f_steps.shape[0]
    stored = _stored_steps(n, config.store_every)
    psi = np.broadcast_to(_initial_state(config), (batch, model.dim)).copy()
    states = np.empty((batch, len(stored), model.dim), dtype=complex)
    fid = np.empty((batch, len(stored)))
    j = 0
    for step in range(n + 1):
        if step > 0:
            H0, P = _generator_parts(config, (step - 0.5) * xi)
            H = H0[None] + f_steps[:, step - 1, None, None] * P[None]
            psi = matvec(propagator_step(H, xi), psi)
            drift = np.max(np.abs(np.sqrt((np.abs(psi) ** 2).sum(axis=-1)) - 1.0))
            if drift > NORM_TOL:
                raise InvariantError(f"norm drifted by {drift:.3e} at step {step}")
        if j < len(stored) and stored[j] == step:
            states[:, j] = psi
            g = _reference_state(config, step * xi)
            fid[:, j] = np.abs(psi @ g.conj())
            j += 1
    return np.array(stored) * xi, states, fid


def _reference_state(config: EvolutionConfig, t: float) -> np.ndarray:
    if config.frame is Frame.ADIABATIC:
        return np.eye(config.model.dim, dtype=complex)[0]
    return config.model.ground_state(t)


def evolve(config: EvolutionConfig, pulse: PulseTrain | None = None) -> Trajectory:
    """Propagate the initial state over [0, T] and record the fidelity trace."""
    pulse = config.pulse if pulse is None else pulse
    times, states, fid = propagate(config, pulse.step_means(config.n_steps, config.xi)[None])
    return Trajectory(
        times=times,
        fidelity=fid[0],
        states=states[0],
        meta={"model": config.model.name, "frame": config.frame.value, "pulse": pulse.metadata(),
              "xi": config.xi, "T": config.T},
    )


MC_CHUNK = 250


def _run_chunk(config: EvolutionConfig, trials: range, seed: int):
    trains = [replace(config.pulse, seed=seed, stream=i) for i in trials]
    f_steps = np.stack([tr.step_means(config.n_steps, config.xi) for tr in trains])
    times, states, fid = propagate(config, f_steps)
    freq = np.stack([average_frequency_curve(tr, times[:-1], config.T) for tr in trains])
    return states, fid, freq


def mc_average(config: EvolutionConfig, trials: int, seed: int, jobs: int = 1) -> Trajectory:
    """Average |psi><psi| over independent pulse realizations.

    Trial i uses the stream (seed, i). The fidelity is taken from the averaged
    density matrix; the mean of per-trial fidelities is kept alongside. Sums
    run in trial order, so results do not depend on ``jobs``.
    """
    if trials < 1:
        raise InvariantError("trials must be >= 1")
    if not config.pulse.stochastic and trials > 1:
        warnings.warn(f"pulse kind {config.pulse.kind!r} is deterministic; running a single trial", stacklevel=2)
        trials = 1
    chunks = [range(i, min(i + MC_CHUNK, trials)) for i in range(0, trials, MC_CHUNK)]
    jobs = max(1, min(jobs, len(chunks)))
    if jobs == 1:
        parts = [_run_chunk(config, c, seed) for c in chunks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_chunk, [config] * len(chunks), chunks, [seed] * len(chunks)))
    states = np.concatenate([p[0] for p in parts])
    fids = np.concatenate([p[1] for p in parts])
    freqs = np.concatenate([p[2] for p in parts])
    rho_bar = np.einsum("bti,btj->tij", states, states.conj(), optimize=False) / trials
    times = np.array(_stored_steps(config.n_steps, config.store_every)) * config.xi
    F = np.array([fidelity(r, config.model, t, config.frame) for r, t in zip(rho_bar, times)])
    log.info("mc_average: %d trials, F(T) = %.6f", trials, F[-1])
    return Trajectory(
        times=times,
        fidelity=F,
        rho=rho_bar,
        trials_mean_fidelity=fids.mean(axis=0),
        avg_freq_s=times[:-1],
        avg_freq=freqs.mean(axis=0),
        meta={
            "model": config.model.name,
            "frame": config.frame.value,
            "pulse": config.pulse.metadata(),
            "xi": config.xi,
            "T": config.T,
            "trials": trials,
            "seed": seed,
            "fidelity": "sqrt(<E0|mean rho|E0>)",
        },
    )
