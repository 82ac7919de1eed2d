"""Tests for csvto.solver."""
