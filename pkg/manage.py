#!/usr/bin/env python
"""Command-line entry point: pipeline and administrative tasks."""
import os
import sys


def main():
    """Run pipeline or administrative tasks."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'robustNMT.settings')
    try:
        from Common.cli import main as run
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    sys.exit(run(sys.argv))


if __name__ == '__main__':
    main()
