"""Tests für statische Textkonsistenz der sichtbaren Berichts- und CLI-Texte."""

from __future__ import annotations

import subprocess
import sys
from pathlib import Path

PROJEKT_WURZEL = Path(__file__).resolve().parents[1]


def test_textkonsistenz_check_ohne_treffer() -> None:
    """Der Konsistenzcheck soll ohne gemischte englische Begriffe durchlaufen."""
    prozess = subprocess.run(
        [sys.executable, "scripts/check_text_consistency.py"],
        check=False,
        capture_output=True,
        text=True,
        cwd=PROJEKT_WURZEL,
    )
    assert prozess.returncode == 0, prozess.stdout + prozess.stderr
