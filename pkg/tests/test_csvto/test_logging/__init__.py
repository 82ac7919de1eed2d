"""Tests for csvto.logging."""
