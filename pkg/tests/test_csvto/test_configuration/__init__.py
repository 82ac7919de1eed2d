"""Tests for csvto.configuration."""
