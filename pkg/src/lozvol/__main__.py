#!/usr/bin/env python3
"""Entry point for lozvol when run as a module."""

from lozvol.main import main

if __name__ == "__main__":
    main()
