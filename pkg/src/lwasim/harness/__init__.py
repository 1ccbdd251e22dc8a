"""Simulation harness: event loop, traffic, metrics."""
