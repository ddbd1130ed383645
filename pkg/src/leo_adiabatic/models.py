"""Time-dependent Hamiltonian families with analytic instantaneous eigensystems.

Both models expose the same surface:

* ``hamiltonian_lab(t)``: lab-frame matrix.
* ``eigensystem(t)``: closed-form eigenvalues and eigenvector columns ordered
  by their t=0 labels (column 0 is the tracked state E0), continuous in t.
* ``frame_unitary(t)``: U(t) = sum_k |E_k(t)><E_k(0)|, so U(0) = I.
* ``adiabatic_hamiltonian(f, t)``: generator in the instantaneous eigenbasis
  with the control f added on E0.
* ``lab_control(f, t)``: the same control seen in the lab frame,
  f |E0(t)><E0(t)|.

Energies are in units of omega1 and times in units of 1/omega1 (hbar = 1).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .linalg import propagator_step

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

_T_SLACK = 1e-9


class Frame(str, Enum):
    LAB = "lab"
    ADIABATIC = "adiabatic"


def _check_time(t: float, T: float) -> None:
    if not (-_T_SLACK * max(1.0, T) <= t <= T * (1 + _T_SLACK) + _T_SLACK):
        raise ValueError(f"time {t!r} outside [0, {T}]")


@dataclass(frozen=True)
class TwoLevelModel:
    """A spin-1/2 in a field of fixed magnitude rotating from z towards x.

    H(t) = (omega1/2) [cos(omega t) sigma_z + sin(omega t) sigma_x], written in
    the (|up>, |down>) basis. ``omega`` defaults to 1/T: with that rate the
    bare evolution stays above F = 0.995 for T = 10/omega1, and pulses with
    an average control frequency of 10 omega1 give F(1/omega1) ~ 0.994.
    """

    omega1: float = 1.0
    T: float = 1.0
    omega: float | None = None
    name: str = field(default="two-level", init=False)
    dim: int = field(default=2, init=False)

    def __post_init__(self):
        if not self.omega1 > 0:
            raise ValueError("omega1 must be positive")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.omega is None:
            object.__setattr__(self, "omega", 1.0 / self.T)

    def hamiltonian_lab(self, t: float) -> np.ndarray:
        _check_time(t, self.T)
        a = self.omega * t
        return 0.5 * self.omega1 * (np.cos(a) * SIGMA_Z + np.sin(a) * SIGMA_X)

    def eigensystem(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        _check_time(t, self.T)
        half = 0.5 * self.omega * t
        c, s = np.cos(half), np.sin(half)
        V = np.array([[-s, c], [c, s]], dtype=complex)
        return np.array([-0.5 * self.omega1, 0.5 * self.omega1]), V

    def adiabatic_hamiltonian(self, f: float, t: float) -> np.ndarray:
        _check_time(t, self.T)
        w1, w = self.omega1, self.omega
        return np.array([[-0.5 * w1 + f, -0.5j * w], [0.5j * w, 0.5 * w1]], dtype=complex)

    # Shared frame helpers.
    def ground_state(self, t: float) -> np.ndarray:
        return self.eigensystem(t)[1][:, 0]

    def frame_unitary(self, t: float) -> np.ndarray:
        return _frame_unitary(self, t)

    def lab_control(self, f: float, t: float) -> np.ndarray:
        return _lab_control(self, f, t)


GENERATORS = ("fixed-gap", "exact")


@dataclass(frozen=True)
class XYChainModel:
    """Three-spin XY chain restricted to its single-excitation sector.

    Couplings J(t) = J sin(Omega t) and fields h_i(t) = h_i cos(Omega t) with
    J = h1 = omega1, h2 = 0, h3 = -omega1 and Omega = pi/(2T) give

        H(t) = omega1 [[cos, sin, 0], [sin, 0, sin], [0, sin, -cos]].

    Its eigenvalues are 0 and +-omega1 sqrt(1 + sin^2(Omega t)) (equal to
    {-sqrt2, 0, sqrt2} omega1 at Omega t = pi/2), with closed-form eigenvectors
    given in :meth:`eigensystem`. E0 is the ground state, |2> at t = 0.

    ``generator`` selects the adiabatic-frame matrix used for evolution:

    ``"fixed-gap"``
        Levels fixed at (+sqrt2, 0, -sqrt2) omega1 with nearest-neighbour
        couplings Omega/2, the static-diagonal gauge of
        :meth:`interaction_picture_matrix` (phases exp(+-i sqrt2 omega1 t))
        with the state order reversed. The pulsed, tracked state sits
        sqrt2 omega1 above its neighbour.
    ``"exact"``
        U^dagger H U - i U^dagger dU/dt built from the closed-form
        eigensystem of the lab matrix above, with f on the ground state.
        Lab-frame evolution reproduces it to O(xi^2).
    """

    omega1: float = 1.0
    T: float = 1.0
    generator: str = "fixed-gap"
    name: str = field(default="xy-chain-3", init=False)
    dim: int = field(default=3, init=False)

    def __post_init__(self):
        if not self.omega1 > 0:
            raise ValueError("omega1 must be positive")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r} ({'|'.join(GENERATORS)})")

    @property
    def Omega(self) -> float:
        return np.pi / (2.0 * self.T)

    def hamiltonian_lab(self, t: float) -> np.ndarray:
        _check_time(t, self.T)
        c, s = np.cos(self.Omega * t), np.sin(self.Omega * t)
        return self.omega1 * np.array([[c, s, 0], [s, 0, s], [0, s, -c]], dtype=complex)

    def _dH_dt(self, t: float) -> np.ndarray:
        c, s = np.cos(self.Omega * t), np.sin(self.Omega * t)
        return self.omega1 * self.Omega * np.array([[-s, c, 0], [c, 0, c], [0, c, s]], dtype=complex)

    def eigensystem(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        _check_time(t, self.T)
        c, s = np.cos(self.Omega * t), np.sin(self.Omega * t)
        lam = np.sqrt(1.0 + s * s)
        ground = np.array([lam - c, -2 * s, lam + c]) / (2 * lam)
        middle = np.array([-s, c, s]) / lam
        top = np.array([lam + c, 2 * s, lam - c]) / (2 * lam)
        V = np.column_stack([ground, middle, top]).astype(complex)
        return self.omega1 * np.array([-lam, 0.0, lam]), V

    def berry_coupling(self, t: float) -> np.ndarray:
        """-i <E_m|dE_n/dt> for m != n via <E_m|dH/dt|E_n> / (E_n - E_m).

        The eigenvectors are real, so the diagonal Berry terms vanish.
        """
        E, V = self.eigensystem(t)
        dH = V.conj().T @ self._dH_dt(t) @ V
        M = np.zeros((3, 3), dtype=complex)
        for m in range(3):
            for n in range(3):
                if m != n:
                    M[m, n] = -1j * dH[m, n] / (E[n] - E[m])
        return M

    def interaction_picture_matrix(self, f: float, t: float) -> np.ndarray:
        """Interaction-picture form of the fixed-gap generator; the pulsed state is last."""
        _check_time(t, self.T)
        a = 0.5 * self.Omega * np.exp(-1j * np.sqrt(2) * self.omega1 * t)
        return np.array(
            [[0, -1j * a, 0], [1j * np.conj(a), 0, -1j * a], [0, 1j * np.conj(a), f]],
            dtype=complex,
        )

    def adiabatic_hamiltonian(self, f: float, t: float) -> np.ndarray:
        _check_time(t, self.T)
        if self.generator == "exact":
            E, _ = self.eigensystem(t)
            H = np.diag(E).astype(complex) + self.berry_coupling(t)
            H[0, 0] += f
            return H
        gap = np.sqrt(2) * self.omega1
        c = 0.5j * self.Omega
        return np.array(
            [[gap + f, c, 0], [-c, 0, c], [0, -c, -gap]],
            dtype=complex,
        )

    def ground_state(self, t: float) -> np.ndarray:
        return self.eigensystem(t)[1][:, 0]

    def frame_unitary(self, t: float) -> np.ndarray:
        return _frame_unitary(self, t)

    def lab_control(self, f: float, t: float) -> np.ndarray:
        return _lab_control(self, f, t)


def _frame_unitary(model, t: float) -> np.ndarray:
    V = model.eigensystem(t)[1]
    V0 = model.eigensystem(0.0)[1]
    return V @ V0.conj().T


def _lab_control(model, f: float, t: float) -> np.ndarray:
    g = model.ground_state(t)
    return f * np.outer(g, g.conj())


MODELS = {"two-level": TwoLevelModel, "xy-chain-3": XYChainModel}


def make_model(name: str, **params):
    try:
        cls = MODELS[name]
    except KeyError:
        raise ValueError(f"unknown model {name!r}; known: {', '.join(MODELS)}") from None
    return cls(**params)


@dataclass(frozen=True)
class ParityKickReport:
    anticommutator: float
    taus: tuple[float, float]
    errors: tuple[float, float]
    ratio: float
    small_tau: float
    small_tau_error: float

    @property
    def passed(self) -> bool:
        return self.anticommutator == 0.0 and 3.5 <= self.ratio <= 4.5 and self.small_tau_error < 1e-8


def parity_kick_check(model: TwoLevelModel, tau: float | None = None) -> ParityKickReport:
    """Check the rotation LEO R_L = -iZ against the bare adiabatic generator.

    R_L must anticommute with the leakage part H_L (the off-diagonal block),
    and the kicked pair exp(-iH tau) R_L^dag exp(-iH tau) R_L must approach
    exp(-2i H_d tau) with an O(tau^2) error.
    """
    if not isinstance(model, TwoLevelModel):
        raise TypeError("parity-kick check is defined for the two-level model only")
    if tau is None:
        tau = 1e-3 / model.omega1
    H = model.adiabatic_hamiltonian(0.0, 0.0)
    H_d = np.diag(np.diag(H))
    H_L = H - H_d
    R = -1j * SIGMA_Z
    anti = float(np.max(np.abs(R @ H_L + H_L @ R)))

    def error(tt: float) -> float:
        U = propagator_step(H, tt)
        kicked = U @ R.conj().T @ U @ R
        return float(np.max(np.abs(kicked - propagator_step(H_d, 2 * tt))))

    e1, e2 = error(tau), error(tau / 2)
    small = 1e-6 / model.omega1
    return ParityKickReport(
        anticommutator=anti,
        taus=(tau, tau / 2),
        errors=(e1, e2),
        ratio=e1 / e2,
        small_tau=small,
        small_tau_error=error(small),
    )
