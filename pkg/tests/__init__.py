"""Test package for tail-risk-index."""
