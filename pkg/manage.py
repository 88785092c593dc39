#!/usr/bin/env python
"""SSIMuse command line: compare, audit, bench and sweep live here as
management commands, next to Django's own (migrate, test)."""
import os
import sys


def main():
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'SSIMuse.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the packages in requirements.txt "
            "(pip install -r requirements.txt) and try again."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
