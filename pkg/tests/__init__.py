"""Tests for the specres library."""
