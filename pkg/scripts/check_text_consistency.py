"""Statischer Konsistenzcheck für bekannte englische Berichts- und CLI-Begriffe.

Geprüft werden nur die Dateien mit sichtbaren Texten; Spalten- und
Konfigurationsschlüssel (``steps_total``, ``evo.mutation_prob`` ...) bleiben
bewusst englisch und fallen nicht unter die Liste.
"""

from __future__ import annotations

from pathlib import Path
import sys

DATEIEN = [
    Path("CHANGELOG.md"),
    Path("docs/experimente.md"),
    Path("src/epo_labor/texte.py"),
    Path("src/epo_labor/report.py"),
    Path("src/epo_labor/cli.py"),
]

# Bekannte englische Begriffe, die in sichtbaren Texten vermieden werden sollen.
ENGLISCHE_UI_BEGRIFFE = {
    "Executive Summary": "Zusammenfassung",
    "Summary": "Zusammenfassung",
    "Sample Efficiency": "Stichprobeneffizienz",
    "Artifacts": "Artefakte",
    "Generation History": "Generationsverlauf",
    "Mean Reward": "Mittlere Belohnung",
    "Done": "Erledigt oder erfolgreich",
    "Warning": "Warnung",
    "Info": "Hinweis",
}


def main() -> int:
    """Führt den Konsistenzcheck aus und liefert einen aussagekräftigen Exit-Code."""
    treffer: list[str] = []

    for datei in DATEIEN:
        inhalt = datei.read_text(encoding="utf-8")
        for englisch, empfehlung in ENGLISCHE_UI_BEGRIFFE.items():
            if englisch in inhalt:
                treffer.append(f"{datei}: '{englisch}' gefunden → Empfehlung: '{empfehlung}'")

    if treffer:
        print("Textkonsistenzprüfung fehlgeschlagen. Gefundene Begriffe:")
        for eintrag in treffer:
            print(f"- {eintrag}")
        return 1

    print("Textkonsistenzprüfung erfolgreich: Keine unerwünschten englischen Begriffe gefunden.")
    return 0


if __name__ == "__main__":
    sys.exit(main())
