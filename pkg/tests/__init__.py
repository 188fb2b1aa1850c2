"""Regression tests for sparsetime."""
