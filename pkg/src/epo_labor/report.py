"""Erzeugung standardisierter Markdown-Berichte für Experimente und Methodenvergleiche."""

from __future__ import annotations

from datetime import datetime

from .models import GenerationReport, Operator, SeedErgebnis, VariantenStatistik, Vergleich
from .texte import (
    BERICHT_ARTEFAKTE,
    BERICHT_KOPFBEREICH,
    BERICHT_LEDGER,
    BERICHT_TITEL,
    BERICHT_VERLAUF,
    BERICHT_ZUSAMMENFASSUNG,
    SPALTE_BESTE,
    SPALTE_KI,
    SPALTE_METHODE,
    SPALTE_MITTEL,
    SPALTE_SEEDS,
    SPALTE_STICHPROBEN,
    STATUS_ERFOLG,
    STATUS_HINWEIS,
    STATUS_WARNUNG,
    VERGLEICH_REDUKTION,
    VERGLEICH_TABELLE,
    VERGLEICH_TITEL,
)

# Nur die letzten Generationen erscheinen im Verlauf; history.csv ist vollständig.
VERLAUF_LIMIT = 15


def _render_tabelle(ueberschriften: list[str], zeilen: list[list[str]]) -> list[str]:
    """Erstellt eine Markdown-Tabelle in einheitlicher Formatierung."""
    if not zeilen:
        return ["| Hinweis |", "| --- |", f"| {STATUS_HINWEIS}: keine Daten vorhanden |"]

    kopf = "| " + " | ".join(ueberschriften) + " |"
    trenner = "| " + " | ".join("---" for _ in ueberschriften) + " |"
    inhalt = ["| " + " | ".join(zelle for zelle in zeile) + " |" for zeile in zeilen]
    return [kopf, trenner, *inhalt]


def _statistik_tabelle(statistiken: list[VariantenStatistik] | tuple[VariantenStatistik, ...]) -> list[str]:
    return _render_tabelle(
        [SPALTE_METHODE, SPALTE_SEEDS, SPALTE_MITTEL, SPALTE_KI, SPALTE_BESTE, SPALTE_STICHPROBEN],
        [
            [
                eintrag.variante,
                str(eintrag.anzahl),
                f"{eintrag.mittelwert:.3f}",
                f"± {eintrag.halbbreite:.3f}",
                f"{eintrag.beste_belohnung:.3f}",
                f"{eintrag.stichproben:,.0f}".replace(",", "."),
            ]
            for eintrag in statistiken
        ],
    )


def render_vergleich(vergleich: Vergleich) -> str:
    """Vergleichstabelle samt relativer Stichprobenreduktion gegenüber der ersten Methode."""
    referenz = vergleich.methoden[0].variante if vergleich.methoden else "nicht gesetzt"
    zeilen: list[str] = [
        f"# {VERGLEICH_TITEL}",
        "",
        f"- Umgebung: {vergleich.env_id}",
        f"- Referenzmethode: {referenz}",
        "",
        f"## {VERGLEICH_TABELLE}",
        *_statistik_tabelle(vergleich.methoden),
        "",
        f"## {VERGLEICH_REDUKTION}",
    ]
    if not vergleich.reduktionen:
        zeilen.append(f"- {STATUS_HINWEIS}: keine Vergleichsmethoden vorhanden")
    for methode, prozent in vergleich.reduktionen.items():
        status = STATUS_ERFOLG if prozent > 0 else STATUS_WARNUNG
        zeilen.append(f"- {status}: {referenz} benötigt {prozent:.1f} % weniger Stichproben als {methode}")
    return "\n".join(zeilen).strip() + "\n"


def _verlauf_tabelle(historie: list[GenerationReport]) -> list[str]:
    return _render_tabelle(
        ["Generation", "Beste Fitness", "Mittlere Fitness", "Feinjustiert", "Mutiert", "Gekreuzt", "Schritte gesamt"],
        [
            [
                str(report.generation),
                f"{report.best_fitness:.3f}",
                f"{report.mean_fitness:.3f}",
                str(report.nachkommen.get(Operator.FINETUNED_OFFSPRING, 0)),
                str(report.nachkommen.get(Operator.MUTATED_OFFSPRING, 0)),
                str(report.nachkommen.get(Operator.CROSSOVER_OFFSPRING, 0)),
                str(report.ledger_stand.get("steps_total", 0)),
            ]
            for report in historie[-VERLAUF_LIMIT:]
        ],
    )


def render_laufbericht(
    *,
    modus: str,
    env_id: str,
    lauf_id: str,
    statistiken: list[VariantenStatistik],
    seeds: list[SeedErgebnis],
    ledger: dict[str, dict[str, int]] | None = None,
    historien: dict[str, list[GenerationReport]] | None = None,
) -> str:
    """Experimentbericht mit Kopfbereich, Zusammenfassung, Ledger und Verlauf."""
    erzeugt_am = datetime.now().isoformat(timespec="seconds")
    zeilen: list[str] = [
        f"# {BERICHT_TITEL}",
        "",
        f"## {BERICHT_KOPFBEREICH}",
        f"- Modus: {modus}",
        f"- Umgebung: {env_id}",
        f"- Datum: {erzeugt_am}",
        f"- Lauf-ID: {lauf_id}",
        f"- Seeds je Variante: {len({s.seed for s in seeds})}",
        "",
        f"## {BERICHT_ZUSAMMENFASSUNG}",
        *_statistik_tabelle(statistiken),
        "",
    ]

    if ledger:
        zeilen.append(f"## {BERICHT_LEDGER}")
        spalten = ["steps_pretrain", "steps_finetune", "steps_eval", "steps_baseline", "steps_total"]
        zeilen.extend(
            _render_tabelle(
                ["Lauf", *spalten],
                [[name, *(str(stand.get(spalte, 0)) for spalte in spalten)] for name, stand in ledger.items()],
            )
        )
        zeilen.append("")

    for name, historie in (historien or {}).items():
        zeilen.append(f"## {BERICHT_VERLAUF}: {name}")
        zeilen.extend(_verlauf_tabelle(historie))
        zeilen.append("")

    zeilen.extend(
        [
            f"## {BERICHT_ARTEFAKTE}",
            "- Je Seed: config.snapshot, history.csv, metrics.csv, ledger.json, best.checkpoint",
            "- Je Experiment: aggregate.csv, aggregate_summary.csv, curves.csv",
            "",
        ]
    )
    return "\n".join(zeilen).strip() + "\n"
