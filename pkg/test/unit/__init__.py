"""Unit tests for grsreach."""
