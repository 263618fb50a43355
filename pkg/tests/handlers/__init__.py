"""Tests for command handlers."""
