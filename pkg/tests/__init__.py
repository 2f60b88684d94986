"""Tests for transport_bounds."""
