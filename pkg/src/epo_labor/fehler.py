"""Domänenspezifische Ausnahmen für Netz, Umgebungen, Training und Experimente."""

from __future__ import annotations

from typing import Any


class EpoFehler(Exception):
    """Basisklasse aller fachlichen Fehler in EPO-Labor."""


class VertragsVerletzung(EpoFehler, ValueError):
    """Signalisiert eine verletzte Vor- oder Nachbedingung einer Operation."""


class DimensionsFehler(VertragsVerletzung):
    """Dimensionen von Beobachtung, Layout oder Checkpoint passen nicht zusammen."""


class KonfigurationsFehler(EpoFehler, ValueError):
    """Ungültige Konfiguration; ``schluessel`` benennt den betroffenen Eintrag."""

    def __init__(self, nachricht: str, *, schluessel: str | None = None) -> None:
        super().__init__(nachricht)
        self.schluessel = schluessel


class NumerikFehler(EpoFehler, ArithmeticError):
    """Nicht-endliche Zwischenwerte in Vorwärts-/Rückwärtsrechnung oder Verlust."""

    def __init__(
        self,
        nachricht: str,
        *,
        schicht: str | None = None,
        diagnose: dict[str, Any] | None = None,
    ) -> None:
        super().__init__(nachricht)
        self.schicht = schicht
        self.diagnose = diagnose or {}


class CheckpointFehler(EpoFehler):
    """Checkpoint-Datei ist unlesbar oder hat ein unbekanntes Format."""
