"""Zentrale Berichts- und Konsolentexte für konsistente Formulierungen.

Dieses Modul bündelt Statuspräfixe, Berichtsüberschriften und Spaltentitel,
damit CLI-Ausgaben und Markdown-Berichte einheitlich bleiben.
"""

from __future__ import annotations


# Einheitliche Statuspräfixe für Konsole und Berichte.
STATUS_ERFOLG = "✅ Erfolgreich"
STATUS_WARNUNG = "⚠️ Warnung"
STATUS_HINWEIS = "ℹ️ Hinweis"
STATUS_FEHLER = "❌ Fehler"


# Standardtexte für den Laufbericht eines Experiments.
BERICHT_TITEL = "EPO-Experimentbericht"
BERICHT_KOPFBEREICH = "Kopfbereich"
BERICHT_ZUSAMMENFASSUNG = "Zusammenfassung"
BERICHT_LEDGER = "Stichprobenaufschlüsselung"
BERICHT_VERLAUF = "Generationsverlauf"
BERICHT_ARTEFAKTE = "Artefakte"


# Vergleichsbericht über mehrere Läufe.
VERGLEICH_TITEL = "Methodenvergleich"
VERGLEICH_TABELLE = "Leistungskennzahlen"
VERGLEICH_REDUKTION = "Stichprobeneffizienz"


# Spaltentitel der Ergebnistabellen.
SPALTE_METHODE = "Methode"
SPALTE_SEEDS = "Seeds"
SPALTE_MITTEL = "Mittlere Belohnung"
SPALTE_KI = "95-%-Halbbreite"
SPALTE_BESTE = "Beste Belohnung"
SPALTE_STICHPROBEN = "Stichproben"


# Fortschrittsmeldungen der Kommandozeile.
FORTSCHRITT_SEED = "Variante {variante}, Seed {seed} abgeschlossen"
