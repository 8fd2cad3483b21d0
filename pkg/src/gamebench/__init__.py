"""Deterministic, state-verifiable benchmark harness for multimodal game agents."""

__version__ = "0.1.0"
