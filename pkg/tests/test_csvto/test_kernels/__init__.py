"""Tests for csvto.kernels."""
