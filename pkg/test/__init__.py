"""Test package for grsreach."""
