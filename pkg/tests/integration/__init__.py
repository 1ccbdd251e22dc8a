"""Integration tests for lwasim."""
