"""Train-ground mm-wave RX beamforming simulator with value-based beam control."""

__version__ = "0.1.0"
