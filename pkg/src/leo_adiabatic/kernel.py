"""Feshbach PQ reduction of the adiabatic-frame dynamics.

P is the tracked state E0 (first row/column of the adiabatic generator), Q
the rest. With h = H_PP, R = H_PQ, W = H_QP, D = H_QQ and
p(t) = exp(i int_0^t h) P(t), the exact reduced equation is

    dp/dt = int_0^t g'(t, s) p(s) ds,
    g'(t, s) = -R(t) G(t, s) W(s) exp(i int_s^t h),

where G is the time-ordered propagator generated by D. |p(t)| equals the
fidelity of the full adiabatic-frame evolution.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import matmul, propagator_step
from .models import TwoLevelModel, XYChainModel
from .pulses import PulseTrain


@dataclass(frozen=True)
class PQSplit:
    h: complex
    D: np.ndarray
    R: np.ndarray
    W: np.ndarray


@dataclass
class ReducedAmplitude:
    times: np.ndarray
    p: np.ndarray

    @property
    def abs_p(self) -> np.ndarray:
        return np.abs(self.p)


def pq_split(model, f: float, t: float) -> PQSplit:
    H = model.adiabatic_hamiltonian(f, t)
    return PQSplit(h=H[0, 0], D=H[1:, 1:], R=H[0, 1:], W=H[1:, 0])


def _check_window(s: float, t: float) -> None:
    if s > t:
        raise ValueError(f"reversed window ({s}, {t})")


def kernel_closed(model, train: PulseTrain, s: float, t: float, offset: float | None = None) -> complex:
    """Closed-form memory kernel of either model.

    two-level:  -(omega^2/4) exp{i [<omega2(s,t)> - omega1] (t - s)}
    xy-chain-3: -(Omega^2/4) cos[Omega (t - s)/2] exp{i [<omega2(s,t)> - omega1] (t - s)}

    ``offset`` replaces the -omega1 in the exponent; it exists only to test
    alternative exponents against the numerical kernel.
    """
    if not isinstance(model, (TwoLevelModel, XYChainModel)):
        raise TypeError(f"no closed-form kernel for {model!r}")
    _check_window(s, t)
    tau = t - s
    offset = -model.omega1 if offset is None else offset
    phase = np.exp(1j * (train.window_integral(s, t) + offset * tau))
    if isinstance(model, TwoLevelModel):
        return complex(-(model.omega ** 2) / 4 * phase)
    return complex(-(model.Omega ** 2) / 4 * np.cos(model.Omega * tau / 2) * phase)


def _h0(model, t: float) -> float:
    return model.adiabatic_hamiltonian(0.0, t)[0, 0].real


def kernel_numeric(model, train: PulseTrain, s: float, t: float, xi: float | None = None) -> complex:
    """g'(t, s) with G(t, s) from stepped midpoint propagation of D over [s, t]."""
    _check_window(s, t)
    xi = train.xi if xi is None else xi
    n = int(np.ceil((t - s) / xi - 1e-9))
    G = np.eye(model.dim - 1, dtype=complex)
    h_int = 0.0
    if n > 0:
        dt = (t - s) / n
        for k in range(n):
            tm = s + (k + 0.5) * dt
            G = propagator_step(pq_split(model, 0.0, tm).D, dt) @ G
            h_int += _h0(model, tm) * dt
    h_int += train.window_integral(s, t)
    R = pq_split(model, 0.0, t).R
    W = pq_split(model, 0.0, s).W
    return complex(-(R @ G @ W) * np.exp(1j * h_int))


def kernel_grid(model, train: PulseTrain, T: float, xi: float) -> np.ndarray:
    """Lower-triangular K[n, m] = g'(t_n, s_m) on the grid t_k = k xi, k = 0..N.

    G(t_{n+1}, s_m) = U_n G(t_n, s_m) reuses the previous row, so the whole
    table costs O(N^2) small-matrix products.
    """
    N = int(round(T / xi))
    if abs(N * xi - T) > 1e-9 * max(1.0, T):
        raise ValueError(f"xi = {xi} does not divide T = {T}")
    q = model.dim - 1
    times = np.arange(N + 1) * xi
    h0_cum = np.zeros(N + 1)
    for k in range(N):
        h0_cum[k + 1] = h0_cum[k] + _h0(model, (k + 0.5) * xi) * xi
    h_cum = h0_cum + train.antiderivative(times)
    W = np.array([pq_split(model, 0.0, tk).W for tk in times])  # (N+1, q)
    K = np.zeros((N + 1, N + 1), dtype=complex)
    G = np.eye(q, dtype=complex)[None]  # G(t_n, s_m) for m = 0..n
    for n in range(N + 1):
        if n > 0:
            U = propagator_step(pq_split(model, 0.0, (n - 0.5) * xi).D, xi)
            G = np.concatenate([matmul(U[None], G), np.eye(q, dtype=complex)[None]])
        R = pq_split(model, 0.0, times[n]).R
        RG = np.einsum("i,mij->mj", R, G)
        K[n, : n + 1] = -np.einsum("mj,mj->m", RG, W[: n + 1]) * np.exp(1j * (h_cum[n] - h_cum[: n + 1]))
    return K


def closed_kernel_grid(model, train: PulseTrain, T: float, xi: float, offset: float | None = None) -> np.ndarray:
    N = int(round(T / xi))
    times = np.arange(N + 1) * xi
    K = np.zeros((N + 1, N + 1), dtype=complex)
    for n in range(N + 1):
        for m in range(n + 1):
            K[n, m] = kernel_closed(model, train, times[m], times[n], offset)
    return K


def volterra_solve(kernel, T: float, xi: float, corrector_passes: int = 1) -> ReducedAmplitude:
    """Solve dp/dt = int_0^t K(t, s) p(s) ds with p(0) = 1.

    ``kernel`` is either a lower-triangular table K[n, m] on the grid
    t_k = k xi, or a callable K(t, s). The history integral uses the
    trapezoidal rule; time stepping is a Heun predictor-corrector. Both are
    second order.
    """
    N = T / xi
    if abs(N - round(N)) > 1e-9 * max(1.0, N) or round(N) < 1:
        raise ValueError(f"xi = {xi} does not divide T = {T}")
    N = int(round(N))
    times = np.arange(N + 1) * xi
    if callable(kernel):
        K = np.zeros((N + 1, N + 1), dtype=complex)
        for n in range(N + 1):
            for m in range(n + 1):
                K[n, m] = kernel(times[n], times[m])
    else:
        K = np.asarray(kernel, dtype=complex)
        if K.shape[0] < N + 1 or K.shape[1] < N + 1:
            raise ValueError(f"kernel table {K.shape} too small for {N + 1} grid points")

    def history(n: int, p: np.ndarray) -> complex:
        # xi * trapezoid of K[n, m] p[m] over m = 0..n
        if n == 0:
            return 0.0
        v = K[n, : n + 1] * p[: n + 1]
        return xi * (v.sum() - 0.5 * (v[0] + v[-1]))

    p = np.zeros(N + 1, dtype=complex)
    p[0] = 1.0
    rate = history(0, p)
    for n in range(N):
        p[n + 1] = p[n] + xi * rate
        for _ in range(corrector_passes):
            rate_next = history(n + 1, p)
            p[n + 1] = p[n] + 0.5 * xi * (rate + rate_next)
        rate = history(n + 1, p)
    return ReducedAmplitude(times=times, p=p)


def reduce(model, train: PulseTrain, T: float, xi: float) -> ReducedAmplitude:
    """volterra_solve applied to the numerical kernel table."""
    return volterra_solve(kernel_grid(model, train, T, xi), T, xi)


def compare_kernels(model, train: PulseTrain, points: int = 20, offsets: dict[str, float] | None = None) -> dict[str, float]:
    """Max |numeric - closed| on a points x points (s <= t) grid over [0, T].

    For each named exponent offset the closed form is re-evaluated with that
    offset in place of -omega1; the smallest discrepancy identifies the
    exponent the dynamics follows.
    """
    grid = np.linspace(0.0, model.T, points)
    if offsets is None:
        offsets = {"-omega1": -model.omega1}
        if isinstance(model, XYChainModel):
            r2 = np.sqrt(2) * model.omega1
            offsets.update({"-sqrt2*omega1": -r2, "+sqrt2*omega1": r2, "+omega1": model.omega1})
    pairs = [(s, t) for t in grid for s in grid if s <= t]
    numeric = np.array([kernel_numeric(model, train, s, t) for s, t in pairs])
    report = {}
    for name, off in offsets.items():
        closed = np.array([kernel_closed(model, train, s, t, off) for s, t in pairs])
        report[name] = float(np.max(np.abs(numeric - closed)))
    return report
