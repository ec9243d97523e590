"""Kommandozeilen-Einstieg für Experimente, Vergleiche, Hyperparametersuche und Checkpoint-Bewertung."""

from __future__ import annotations

import argparse
from pathlib import Path
from typing import Sequence

from .config import MODI, MODUS_HYPERSUCHE, STANDARD_BERICHT_EPISODEN, EnvConfig
from .experimente import bewerte_checkpoint, compare, run_experiment
from .fehler import EpoFehler, KonfigurationsFehler
from .konfiguration import aufloesen
from .logging_setup import erstelle_lauf_id, konfiguriere_logger, setze_lauf_id
from .report import render_vergleich

logger = konfiguriere_logger(__name__, dateiname="cli.log")


def _ergaenze_laufoptionen(parser: argparse.ArgumentParser, *, mit_modus: bool) -> None:
    parser.add_argument("--config", default=None, help="Experimentdatei mit Punkt-Schlüsseln (key=value)")
    if mit_modus:
        parser.add_argument("--mode", choices=MODI, default=None, help="Experimentmodus")
    parser.add_argument("--env", default=None, help="Umgebungs-ID, z. B. cartpole oder catch-sparse")
    parser.add_argument("--seeds", default=None, help="Seeds als Liste/Bereich, z. B. 1-10 oder 1,2,3")
    parser.add_argument("--budget-steps", default=None, help="Schrittbudget je Lauf ('none' deaktiviert)")
    parser.add_argument("--budget-seconds", default=None, help="Wall-Clock-Budget je Lauf in Sekunden")
    parser.add_argument("--out", default=None, help="Ausgabeverzeichnis")
    parser.add_argument(
        "--set",
        dest="zuweisungen",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Überschreibt einen Konfigurationsschlüssel (mehrfach erlaubt)",
    )


def baue_parser() -> argparse.ArgumentParser:
    """Erstellt den CLI-Parser mit klaren Unterbefehlen."""
    parser = argparse.ArgumentParser(
        prog="epo-labor",
        description="Evolutionäre Policy-Optimierung im Desk-Maßstab",
    )
    sub = parser.add_subparsers(dest="kommando", required=True)

    lauf = sub.add_parser("run", help="Experiment ausführen (PPO, EPO, Ablationen, Sweeps)")
    _ergaenze_laufoptionen(lauf, mit_modus=True)

    suche = sub.add_parser("hypersearch", help="Zufallssuche über m, E und P")
    _ergaenze_laufoptionen(suche, mit_modus=False)

    vergleich = sub.add_parser("compare", help="Läufe vergleichen und Stichprobenreduktion berechnen")
    vergleich.add_argument("verzeichnisse", nargs="+", help="Variantenverzeichnisse; das erste ist die Referenz")
    vergleich.add_argument("--out", default=None, help="Optionale Zieldatei für den Markdown-Vergleich")

    bewertung = sub.add_parser("eval-checkpoint", help="Checkpoint über mehrere Episoden bewerten")
    bewertung.add_argument("checkpoint", help="Pfad zur Checkpoint-Datei")
    bewertung.add_argument("--env", required=True, help="Umgebungs-ID")
    bewertung.add_argument("--episodes", type=int, default=STANDARD_BERICHT_EPISODEN, help="Anzahl Episoden")
    bewertung.add_argument("--seed", type=int, default=0, help="Seed der Bewertungsepisoden")
    bewertung.add_argument("--horizon", type=int, default=200, help="Maximale Episodenlänge")

    return parser


def _flags(args: argparse.Namespace) -> dict[str, str | None]:
    return {
        "mode": getattr(args, "mode", None),
        "env.id": args.env,
        "run.seeds": args.seeds,
        "budget.steps": args.budget_steps,
        "budget.seconds": args.budget_seconds,
        "run.out": args.out,
    }


def _fortschritt(text: str) -> None:
    print(f"- {text}")


def main(argv: Sequence[str] | None = None) -> int:
    """Startet die CLI und führt den ausgewählten Arbeitsmodus aus."""
    parser = baue_parser()
    args = parser.parse_args(argv)
    lauf_id = erstelle_lauf_id()
    setze_lauf_id(lauf_id)
    logger.info("CLI gestartet mit Kommando: %s", args.kommando)

    try:
        if args.kommando in ("run", "hypersearch"):
            flags = _flags(args)
            if args.kommando == "hypersearch":
                flags["mode"] = MODUS_HYPERSUCHE
            try:
                config = aufloesen(Path(args.config) if args.config else None, args.zuweisungen, flags)
                ergebnis = run_experiment(config, fortschritt=_fortschritt)
            except KonfigurationsFehler as exc:
                parser.error(f"Ungültige Konfiguration ({exc.schluessel}): {exc}")
            for eintrag in ergebnis.statistiken:
                print(
                    f"{eintrag.variante}: mittlere Belohnung {eintrag.mittelwert:.3f} "
                    f"± {eintrag.halbbreite:.3f} bei {eintrag.stichproben:.0f} Stichproben"
                )
            print(f"Ergebnisse: {ergebnis.out}")
            print(f"Lauf-ID: {lauf_id}")
            return 0

        if args.kommando == "compare":
            try:
                vergleich = compare([Path(v) for v in args.verzeichnisse])
            except KonfigurationsFehler as exc:
                parser.error(f"Läufe nicht vergleichbar ({exc.schluessel}): {exc}")
            markdown = render_vergleich(vergleich)
            if args.out:
                Path(args.out).write_text(markdown, encoding="utf-8")
                logger.info("Vergleich geschrieben: %s", args.out)
            print(markdown, end="")
            return 0

        if args.kommando == "eval-checkpoint":
            try:
                env_config = EnvConfig(env_id=args.env, horizon=args.horizon)
            except KonfigurationsFehler as exc:
                parser.error(f"Ungültige Konfiguration ({exc.schluessel}): {exc}")
            zusammenfassung = bewerte_checkpoint(Path(args.checkpoint), env_config, args.episodes, args.seed)
            print(
                f"Mittlere Belohnung {zusammenfassung.mittelwert:.3f} (Std {zusammenfassung.standardabweichung:.3f}, "
                f"beste {zusammenfassung.bester:.3f}) über {zusammenfassung.episoden} Episoden"
            )
            return 0
    except (EpoFehler, OSError):
        logger.exception("Kommando %s fehlgeschlagen", args.kommando)
        print(f"Fehler bei '{args.kommando}'. Details im Log (Lauf-ID {lauf_id}).")
        return 1

    parser.print_help()
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
