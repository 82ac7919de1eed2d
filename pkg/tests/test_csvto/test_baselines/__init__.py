"""Tests for csvto.baselines."""
