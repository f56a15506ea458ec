"""Quantum volume test laboratory: circuits, transpiler, simulators, estimator, bounds."""
