"""Keeps the tests directory importable as a plain directory on sys.path."""
