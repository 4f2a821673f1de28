"""Unit tests for the DSR consensus toolkit."""
