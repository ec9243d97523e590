"""Ermöglicht den Start via `python -m epo_labor`."""

from .cli import main

raise SystemExit(main())
