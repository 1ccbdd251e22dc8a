"""lwasim test suite."""
