"""Decentralized black-box consensus optimization with adaptive per-agent
swarms, trajectory-driven cooperation weights, and phased guidance
scheduling."""

__version__ = "0.1.0"
