"""Shared utilities: logging setup and result artifact writers."""
