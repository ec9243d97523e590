"""Pytest-Konfiguration für konsistente Importpfade und skriptgesteuerte Testumgebungen."""

from __future__ import annotations

import os
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

# Stellt sicher, dass `src/` für alle Tests importierbar ist.
PROJEKT_WURZEL = Path(__file__).resolve().parents[1]
SRC_PFAD = PROJEKT_WURZEL / "src"
if str(SRC_PFAD) not in sys.path:
    sys.path.insert(0, str(SRC_PFAD))

# Testläufe schreiben ihre Logs nicht ins Projektverzeichnis.
os.environ.setdefault("EPO_LABOR_LOGS", tempfile.mkdtemp(prefix="epo-labor-logs-"))

from epo_labor.umgebungen import entferne_umgebung, registriere_umgebung  # noqa: E402

ZAEHL_UMGEBUNG = "test-zaehler"
EPISODENLAENGE = 10


class ZaehlUmgebung:
    """Skriptgesteuerte Umgebung: genau zehn Schritte je Episode, +1 für Aktion 1.

    Jede Episode endet unabhängig von den Aktionen nach ``EPISODENLAENGE``
    Schritten; damit sind Schrittzahlen exakt vorhersagbar.
    """

    obs_dim = 2
    action_count = 2
    max_noops = 0

    def anfangszustand(self, rng: np.random.Generator) -> tuple[float, ...]:
        return (0.0,)

    def beobachtung(self, intern: tuple[float, ...]) -> np.ndarray:
        return np.array([intern[0] / EPISODENLAENGE, 1.0])

    def uebergang(self, intern: tuple[float, ...], action: int) -> tuple[tuple[float, ...], float, bool]:
        zaehler = intern[0] + 1.0
        return (zaehler,), (1.0 if action == 1 else 0.0), zaehler >= EPISODENLAENGE

    def noop_aktion(self, index: int) -> int:
        return 0


@pytest.fixture
def zaehl_umgebung():
    """Registriert die Zählumgebung für die Dauer eines Tests."""
    registriere_umgebung(ZAEHL_UMGEBUNG, ZaehlUmgebung)
    yield ZAEHL_UMGEBUNG
    entferne_umgebung(ZAEHL_UMGEBUNG)
