"""Tests for csvto.benchmarks."""
