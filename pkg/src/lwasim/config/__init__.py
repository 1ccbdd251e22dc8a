"""Scenario configuration and built-in presets."""
