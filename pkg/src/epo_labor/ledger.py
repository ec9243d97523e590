"""Exakte Stichprobenbuchhaltung und Metrikstrom eines Laufs.

Das Ledger zählt jeden Umgebungsschritt genau einmal in einer Kategorie
(Pre-Training, Fine-Tuning, Fitnessbewertung, Baseline). ``charge`` ist der
einzige schreibende Einstieg und ist threadsicher.
"""

from __future__ import annotations

import csv
import json
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import (
    KATEGORIE_BASELINE,
    KATEGORIE_EVAL,
    KATEGORIE_FINETUNE,
    KATEGORIE_PRETRAIN,
    LEDGER_KATEGORIEN,
)
from .fehler import VertragsVerletzung
from .logging_setup import konfiguriere_logger

logger = konfiguriere_logger(__name__, dateiname="ledger.log")

# Spaltennamen im persistierten Format.
SPALTEN = {
    KATEGORIE_PRETRAIN: "steps_pretrain",
    KATEGORIE_FINETUNE: "steps_finetune",
    KATEGORIE_EVAL: "steps_eval",
    KATEGORIE_BASELINE: "steps_baseline",
}


class SampleLedger:
    """Monoton wachsende Schrittzähler je Kategorie."""

    def __init__(self, **startwerte: int) -> None:
        self._lock = threading.Lock()
        self._zaehler = {kategorie: 0 for kategorie in LEDGER_KATEGORIEN}
        for spalte, wert in startwerte.items():
            kategorie = _kategorie_aus_spalte(spalte)
            if int(wert) < 0:
                raise VertragsVerletzung(f"Ledger-Startwert für '{spalte}' darf nicht negativ sein.")
            self._zaehler[kategorie] = int(wert)

    def charge(self, kategorie: str, schritte: int) -> "SampleLedger":
        """Bucht ``schritte`` atomar auf ``kategorie``."""
        if kategorie not in self._zaehler:
            raise VertragsVerletzung(f"Unbekannte Ledger-Kategorie '{kategorie}'.")
        if schritte < 0:
            raise VertragsVerletzung("Es können keine negativen Schritte gebucht werden.")
        with self._lock:
            self._zaehler[kategorie] += int(schritte)
        return self

    @property
    def steps_pretrain(self) -> int:
        return self._zaehler[KATEGORIE_PRETRAIN]

    @property
    def steps_finetune(self) -> int:
        return self._zaehler[KATEGORIE_FINETUNE]

    @property
    def steps_eval(self) -> int:
        return self._zaehler[KATEGORIE_EVAL]

    @property
    def steps_baseline(self) -> int:
        return self._zaehler[KATEGORIE_BASELINE]

    def total(self) -> int:
        with self._lock:
            return sum(self._zaehler.values())

    def snapshot(self) -> dict[str, int]:
        """Konsistenter Lesestand inklusive ``steps_total``."""
        with self._lock:
            stand = {SPALTEN[kategorie]: wert for kategorie, wert in self._zaehler.items()}
        stand["steps_total"] = sum(stand.values())
        return stand

    def als_json(self) -> str:
        return json.dumps(self.snapshot(), indent=2, sort_keys=True)

    @classmethod
    def aus_json(cls, text: str) -> "SampleLedger":
        daten = json.loads(text)
        return cls(**{spalte: wert for spalte, wert in daten.items() if spalte != "steps_total"})

    def __eq__(self, anderes: object) -> bool:
        if not isinstance(anderes, SampleLedger):
            return NotImplemented
        return self.snapshot() == anderes.snapshot()

    def __repr__(self) -> str:
        return f"SampleLedger({self.snapshot()})"


def _kategorie_aus_spalte(spalte: str) -> str:
    for kategorie, name in SPALTEN.items():
        if spalte in (kategorie, name):
            return kategorie
    raise VertragsVerletzung(f"Unbekannte Ledger-Kategorie '{spalte}'.")


def ledger_delta(vorher: dict[str, int], nachher: dict[str, int]) -> dict[str, int]:
    """Differenz zweier Snapshots je Spalte."""
    return {spalte: nachher[spalte] - vorher.get(spalte, 0) for spalte in nachher}


@dataclass(frozen=True)
class MetrikZeile:
    """Eine Zeile des Metrikstroms."""

    env_schritte: int
    wall_clock_s: float
    name: str
    wert: float


class MetricsStream:
    """Zeitreihe skalarer Metriken; Umgebungsschritte sind nicht fallend.

    Die Wall-Clock-Spalte dient nur der Darstellung und fließt in keine
    algorithmische Entscheidung ein.
    """

    SPALTEN = ("env_steps", "wall_clock_s", "name", "value")

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._start = time.perf_counter()
        self._zeilen: list[MetrikZeile] = []

    def protokolliere(self, env_schritte: int, name: str, wert: float) -> None:
        with self._lock:
            if self._zeilen and env_schritte < self._zeilen[-1].env_schritte:
                raise VertragsVerletzung(
                    f"Metrik '{name}': Umgebungsschritte fallen ({env_schritte} < {self._zeilen[-1].env_schritte})."
                )
            self._zeilen.append(
                MetrikZeile(
                    env_schritte=int(env_schritte),
                    wall_clock_s=time.perf_counter() - self._start,
                    name=name,
                    wert=float(wert),
                )
            )

    @property
    def zeilen(self) -> tuple[MetrikZeile, ...]:
        with self._lock:
            return tuple(self._zeilen)

    def schreibe_csv(self, pfad: Path) -> Path:
        pfad.parent.mkdir(parents=True, exist_ok=True)
        with pfad.open("w", encoding="utf-8", newline="") as datei:
            writer = csv.writer(datei)
            writer.writerow(self.SPALTEN)
            for zeile in self.zeilen:
                writer.writerow([zeile.env_schritte, f"{zeile.wall_clock_s:.6f}", zeile.name, repr(zeile.wert)])
        return pfad


@dataclass(frozen=True)
class Zusammenfassung:
    """Kennzahlen eines Laufs im Stil der Ergebnistabellen."""

    mittelwert: float
    standardabweichung: float
    bester: float
    episoden: int
    stichproben: int
    aufschluesselung: dict[str, int]

    def als_dict(self) -> dict[str, object]:
        return {
            "mean_reward": self.mittelwert,
            "std_reward": self.standardabweichung,
            "best_reward": self.bester,
            "episodes": self.episoden,
            "total_samples": self.stichproben,
            "breakdown": dict(self.aufschluesselung),
        }


def summarize(episoden_belohnungen: Sequence[float], ledger: SampleLedger) -> Zusammenfassung:
    """Verdichtet die Abschlussbewertung und den Ledger-Stand."""
    if len(episoden_belohnungen) == 0:
        raise VertragsVerletzung("Zusammenfassung benötigt mindestens eine Episode.")
    werte = np.asarray(episoden_belohnungen, dtype=np.float64)
    stand = ledger.snapshot()
    return Zusammenfassung(
        mittelwert=float(werte.mean()),
        standardabweichung=float(werte.std()),
        bester=float(werte.max()),
        episoden=int(werte.shape[0]),
        stichproben=stand["steps_total"],
        aufschluesselung={spalte: wert for spalte, wert in stand.items() if spalte != "steps_total"},
    )
