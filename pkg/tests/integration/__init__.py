"""Integration tests for the DSR consensus toolkit."""
