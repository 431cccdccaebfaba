"""Exact analysis and simulation of the 2-choices consensus dynamics with node failures."""

from . import birth_death, drift, graphs, oracle, simulate, spectral

__all__ = ["birth_death", "drift", "graphs", "oracle", "simulate", "spectral"]
__version__ = "0.1.0"
