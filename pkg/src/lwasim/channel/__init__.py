"""Link models for the LTE and WiFi paths."""
