"""Control functions f(t) and their window integrals.

Five kinds are supported:

``zero``          f = 0.
``regular-rect``  periods of (delta_steps + tau_steps) grid steps, each
                  starting with an ON segment of delta_steps steps at value I.
``random-rect``   periods of ``period_steps`` steps; per period a ratio
                  r = Delta/tau ~ U[0, 1] and an integral S ~ U[0, s_max] are
                  drawn (see ``s_reading``).
``white-noise``   eta * u with u ~ U[0, 1], redrawn on every grid bin.
``sine``          a sin^2(b t).

Stochastic kinds are materialized eagerly on the grid up to ``horizon`` from
an independent PCG64 stream keyed by (seed, stream), so the same
(parameters, seed, stream) always gives a bitwise-identical realization.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

KINDS = ("zero", "regular-rect", "random-rect", "white-noise", "sine")
STOCHASTIC = ("random-rect", "white-noise")
S_READINGS = ("period-mean", "on-step")
MAX_BAND_DRAWS = 100_000


def rng_for(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent PCG64 stream for (seed, stream), e.g. (run seed, trial index)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed) & (2**64 - 1), int(stream)])))


@dataclass(frozen=True)
class PulseTrain:
    kind: str = "zero"
    I: float = 0.0
    delta_steps: int = 1
    tau_steps: int = 1
    eta: float = 0.0
    a: float = 0.0
    b: float = 0.0
    xi: float = 0.005
    horizon: float = 1.0
    seed: int = 0
    stream: int = 0
    period_steps: int = 20
    s_max: float = 0.1
    # "period-mean": S is the mean per-step integral over a period, so a
    # period contributes S * period_steps; "on-step": S is the integral of
    # one ON step, I = S / xi.
    s_reading: str = "period-mean"
    s_band: tuple[float, float] | None = None
    _bins: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)
    _cum: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown pulse kind {self.kind!r}; known: {', '.join(KINDS)}")
        if not self.xi > 0:
            raise ValueError("xi must be positive")
        if self.kind == "regular-rect":
            if self.delta_steps < 0 or self.tau_steps < 0 or self.delta_steps + self.tau_steps == 0:
                raise ValueError("regular-rect needs non-negative delta/tau steps with a positive sum")
            if self.I < 0:
                raise ValueError("pulse strength I must be non-negative")
        if self.kind == "white-noise" and self.eta < 0:
            raise ValueError("eta must be non-negative")
        if self.kind == "sine" and self.a < 0:
            raise ValueError("sine amplitude must be non-negative")
        if self.s_reading not in S_READINGS:
            raise ValueError(f"s_reading must be one of {S_READINGS}")
        if self.kind in STOCHASTIC:
            bins = self._realize()
            cum = np.concatenate([[0.0], np.cumsum(bins) * self.xi])
            object.__setattr__(self, "_bins", bins)
            object.__setattr__(self, "_cum", cum)

    @property
    def stochastic(self) -> bool:
        return self.kind in STOCHASTIC

    @property
    def n_bins(self) -> int:
        return int(np.ceil(self.horizon / self.xi - 1e-9))

    def with_stream(self, stream: int) -> "PulseTrain":
        return replace(self, stream=stream)

    def _realize(self) -> np.ndarray:
        rng = rng_for(self.seed, self.stream)
        n = self.n_bins
        if self.kind == "white-noise":
            for _ in range(MAX_BAND_DRAWS):
                bins = self.eta * rng.random(n)
                if self.s_band is None:
                    return bins
                mean_s = bins.mean() * self.xi
                if self.s_band[0] < mean_s < self.s_band[1]:
                    return bins
            raise RuntimeError(f"no white-noise realization in S band {self.s_band}")
        # random-rect
        P = self.period_steps
        n_periods = -(-n // P)
        bins = np.zeros(n_periods * P)
        for k in range(n_periods):
            r = rng.random()
            S = self.s_max * rng.random()
            on = int(round(P * r / (1.0 + r)))
            if self.s_reading == "period-mean":
                on = max(on, 1)
                value = S * P / (on * self.xi)
            else:
                value = S / self.xi
            bins[k * P : k * P + on] = value
        return bins[:n]

    def value(self, t: float) -> float:
        """f(t); ON segments are half-open [start, end)."""
        if t < 0:
            raise ValueError(f"negative time {t!r}")
        k = self.kind
        if k == "zero":
            return 0.0
        if k == "regular-rect":
            period = (self.delta_steps + self.tau_steps) * self.xi
            r = t - np.floor(t / period) * period
            return self.I if r < self.delta_steps * self.xi else 0.0
        if k == "sine":
            return self.a * np.sin(self.b * t) ** 2
        idx = int(np.floor(t / self.xi))
        if idx >= len(self._bins):
            if t > self.horizon * (1 + 1e-12):
                raise ValueError(f"time {t!r} beyond realized horizon {self.horizon}")
            idx = len(self._bins) - 1
        return float(self._bins[idx])

    def antiderivative(self, t):
        """F(t) = integral of f over [0, t]; accepts a scalar or an array."""
        ts = np.asarray(t, dtype=float)
        if np.any(ts < 0):
            raise ValueError(f"negative time in {t!r}")
        k = self.kind
        if k == "zero":
            out = np.zeros_like(ts)
        elif k == "regular-rect":
            on = self.delta_steps * self.xi
            period = (self.delta_steps + self.tau_steps) * self.xi
            m = np.floor(ts / period)
            r = ts - m * period
            out = self.I * (m * on + np.clip(r, 0.0, on))
        elif k == "sine":
            if self.b == 0:
                out = np.zeros_like(ts)
            else:
                out = 0.5 * self.a * (ts - np.sin(2 * self.b * ts) / (2 * self.b))
        else:
            if np.any(ts > self.horizon * (1 + 1e-12) + 1e-15):
                raise ValueError(f"time beyond realized horizon {self.horizon}")
            idx = np.minimum(np.floor(ts / self.xi).astype(int), len(self._bins) - 1)
            out = self._cum[idx] + self._bins[idx] * (ts - idx * self.xi)
        return float(out) if out.ndim == 0 else out

    def window_integral(self, s: float, t: float) -> float:
        if s > t:
            raise ValueError(f"reversed window ({s}, {t})")
        if s == t:
            return 0.0
        return self.antiderivative(t) - self.antiderivative(s)

    def average_frequency(self, s: float, t: float) -> float:
        """<omega2(s, t)> = window integral / (t - s)."""
        if not s < t:
            raise ValueError(f"average frequency needs s < t, got ({s}, {t})")
        return self.window_integral(s, t) / (t - s)

    def step_means(self, n_steps: int, xi: float | None = None) -> np.ndarray:
        """Per-step mean values (window integral / xi) over a grid of n_steps."""
        xi = self.xi if xi is None else xi
        return np.diff(self.antiderivative(np.arange(n_steps + 1) * xi)) / xi

    def metadata(self) -> dict[str, object]:
        meta: dict[str, object] = {"kind": self.kind}
        if self.kind == "regular-rect":
            meta.update(I=self.I, delta_steps=self.delta_steps, tau_steps=self.tau_steps)
        elif self.kind == "random-rect":
            meta.update(period_steps=self.period_steps, s_max=self.s_max, s_reading=self.s_reading,
                        ratio_distribution="Delta/tau ~ U[0,1]", seed=self.seed, stream=self.stream)
        elif self.kind == "white-noise":
            meta.update(eta=self.eta, s_band=self.s_band, seed=self.seed, stream=self.stream)
        elif self.kind == "sine":
            meta.update(a=self.a, b=self.b)
        return meta


def average_frequency_curve(train: PulseTrain, s_grid, T: float) -> np.ndarray:
    """<omega2(s, T)> for each s in s_grid (all s < T)."""
    s_grid = np.asarray(s_grid, dtype=float)
    if np.any(s_grid >= T):
        raise ValueError("average frequency needs s < T")
    return (train.antiderivative(T) - train.antiderivative(s_grid)) / (T - s_grid)
