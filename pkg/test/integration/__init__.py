"""Integration tests for grsreach."""
