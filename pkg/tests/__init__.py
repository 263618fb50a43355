"""Test suite for chirpmai."""
