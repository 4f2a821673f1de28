"""Tests package for the DSR consensus toolkit."""
