"""Tests for csvto.geometry."""
