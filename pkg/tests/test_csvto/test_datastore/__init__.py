"""Tests for csvto.datastore."""
