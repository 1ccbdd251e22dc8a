"""Segmentation/concatenation framing for the LTE path."""
