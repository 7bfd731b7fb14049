"""Blockage early-warning workbench: mmWave trace synthesis and Rocket-style classification."""

__version__ = "0.1.0"
