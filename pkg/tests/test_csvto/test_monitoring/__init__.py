"""Tests for csvto.monitoring."""
