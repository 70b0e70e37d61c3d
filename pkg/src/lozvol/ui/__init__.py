"""Console output and loguru setup for lozvol."""
