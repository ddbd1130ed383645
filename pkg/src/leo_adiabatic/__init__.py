"""Adiabatic evolution accelerated by leakage-elimination control pulses.

Two models (a driven two-level system and a three-site XY chain), pulse
trains, stepped propagation in the lab and adiabatic frames, the PQ memory
kernel reduction and the experiment runner behind the ``leo-adiabatic`` CLI.
"""
from .evolution import EvolutionConfig, Trajectory, evolve, fidelity, mc_average
from .kernel import kernel_closed, kernel_numeric, reduce, volterra_solve
from .linalg import hermitian_eig, propagator_step
from .models import Frame, TwoLevelModel, XYChainModel, make_model, parity_kick_check
from .pulses import PulseTrain

__all__ = [
    "EvolutionConfig", "Frame", "PulseTrain", "Trajectory", "TwoLevelModel", "XYChainModel",
    "evolve", "fidelity", "hermitian_eig", "kernel_closed", "kernel_numeric", "make_model",
    "mc_average", "parity_kick_check", "propagator_step", "reduce", "volterra_solve",
]
__version__ = "0.1.0"
