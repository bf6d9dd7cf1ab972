"""Python bindings for the PMSN spiking neuron engine."""

from ._pmsn import (
    EnergyRow,
    Params,
    energy_estimate,
    forward,
    impulse,
    init_params,
    __version__,
)

__all__ = ["EnergyRow", "Params", "energy_estimate", "forward", "impulse", "init_params", "__version__"]
