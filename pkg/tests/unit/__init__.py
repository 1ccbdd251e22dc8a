"""Unit tests for lwasim."""
