"""lwasim - LTE-WiFi split-bearer protocol engine and dual-link simulator."""

__version__ = "0.1.0"
