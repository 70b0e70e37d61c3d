"""Instance files, pipeline orchestration and random suites."""
