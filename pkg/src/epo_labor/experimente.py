"""Experimentläufe je Modus, Seed-Verzeichnisse, Aggregation und Methodenvergleich.

Ablauf: Konfiguration prüfen -> Varianten auflösen -> Seeds ausführen ->
Seed-Dateien schreiben -> Aggregate ausschließlich aus den Seed-Dateien
berechnen -> Bericht.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .checkpoint import Checkpoint, lade_checkpoint, speichere_checkpoint
from .config import (
    KATEGORIE_BASELINE,
    KATEGORIE_EVAL,
    MODUS_EPO,
    MODUS_EPO_NOPT,
    MODUS_EPO_TL,
    MODUS_HYPERSUCHE,
    MODUS_PPO,
    MODUS_PURE_EVO,
    MODUS_SWEEP_FINETUNE,
    MODUS_SWEEP_PRETRAIN,
    EnvConfig,
    EpoConfig,
)
from .fehler import DimensionsFehler, KonfigurationsFehler, VertragsVerletzung
from .hypersuche import run_search, schreibe_suchergebnisse
from .konfiguration import ExperimentConfig, schreibe_snapshot
from .ledger import MetricsStream, SampleLedger, Zusammenfassung, summarize
from .logging_setup import hole_lauf_id, konfiguriere_logger, setze_lauf_id
from .models import GenerationReport, SeedErgebnis, VariantenStatistik, Vergleich
from .netz import ParameterVector, initialisiere_parameter
from .orchestrator import BudgetWaechter, load_population_seed, run
from .ppo import UpdateDiagnose, train
from .report import render_laufbericht
from .texte import FORTSCHRITT_SEED
from .umgebungen import evaluate_policy, hole_umgebung, spec_fuer_umgebung
from .zufall import ZWECK_ABSCHLUSS, ZWECK_BEWERTUNG, ZWECK_INIT, ZWECK_PRETRAIN, generator, leite_seed

logger = konfiguriere_logger(__name__, dateiname="experimente.log")

HISTORIE_SPALTEN = (
    "generation",
    "best_fitness",
    "mean_fitness",
    "steps_pretrain",
    "steps_finetune",
    "steps_eval",
    "steps_total",
    "complete",
)
AGGREGAT_SPALTEN = ("variant", "seed", "final_mean_reward", "best_reward", "steps_total", "generations")
ZUSAMMENFASSUNG_SPALTEN = ("variant", "n", "mean_reward", "ci95_halfwidth", "best_reward", "mean_steps_total")
KURVEN_SPALTEN = ("variant", "generation", "n", "mean_best_fitness", "ci95_halfwidth", "mean_steps_total")

SNAPSHOT_DATEI = "config.snapshot"
HISTORIE_DATEI = "history.csv"
LEDGER_DATEI = "ledger.json"
METRIK_DATEI = "metrics.csv"
CHECKPOINT_DATEI = "best.checkpoint"

FortschrittCallback = Callable[[str], None]


@dataclass(frozen=True)
class Variante:
    """Eine konkret ausführbare Variante eines Experiments."""

    name: str
    modus: str
    epo: EpoConfig
    checkpoint: Path | None = None


@dataclass
class ExperimentErgebnis:
    out: Path
    seeds: list[SeedErgebnis] = field(default_factory=list)
    statistiken: list[VariantenStatistik] = field(default_factory=list)


# --- Statistik ----------------------------------------------------------------


def konfidenz_halbbreite(werte: Sequence[float], niveau: float = 0.95) -> float:
    """Halbbreite des Konfidenzintervalls; t-Verteilung bis n=30, sonst Normalapproximation."""
    n = len(werte)
    if n < 2:
        return 0.0
    standardfehler = float(np.std(np.asarray(werte, dtype=np.float64), ddof=1)) / math.sqrt(n)
    quantil = stats.t.ppf(0.5 + niveau / 2, df=n - 1) if n <= 30 else stats.norm.ppf(0.5 + niveau / 2)
    return float(quantil) * standardfehler


def stichproben_reduktion(stichproben_a: float, stichproben_b: float) -> float:
    """Relative Stichprobenersparnis von A gegenüber B in Prozent: ``(1 - a / b) * 100``."""
    if stichproben_b <= 0:
        raise VertragsVerletzung("Die Vergleichsmethode muss mindestens eine Stichprobe verbraucht haben.")
    return (1.0 - stichproben_a / stichproben_b) * 100.0


# --- Varianten ----------------------------------------------------------------


def loese_varianten(config: ExperimentConfig) -> list[Variante]:
    """Übersetzt den Modus in die auszuführenden Varianten."""
    epo = config.epo
    if config.mode == MODUS_PPO:
        return [Variante("ppo", MODUS_PPO, epo)]
    if config.mode == MODUS_EPO:
        return [Variante("epo", MODUS_EPO, epo)]
    if config.mode == MODUS_EPO_NOPT:
        return [Variante("epo-nopt", MODUS_EPO_NOPT, replace(epo, pretrain_steps=0))]
    if config.mode == MODUS_PURE_EVO:
        return [Variante("pure-evo", MODUS_PURE_EVO, replace(epo, pretrain_steps=0, finetune_steps=0))]
    if config.mode == MODUS_EPO_TL:
        return [Variante("epo-tl", MODUS_EPO_TL, replace(epo, pretrain_steps=0), checkpoint=config.checkpoint)]
    if config.mode == MODUS_SWEEP_PRETRAIN:
        return [Variante(f"pretrain-{wert}", MODUS_EPO, replace(epo, pretrain_steps=wert)) for wert in config.sweep_pretrain]
    if config.mode == MODUS_SWEEP_FINETUNE:
        return [Variante(f"finetune-{wert}", MODUS_EPO, replace(epo, finetune_steps=wert)) for wert in config.sweep_finetune]
    raise KonfigurationsFehler(f"Modus '{config.mode}' erzeugt keine Varianten.", schluessel="mode")


def pruefe_experiment(config: ExperimentConfig) -> list[Variante]:
    """Validiert modusabhängige Felder, bevor ein Umgebungsschritt stattfindet."""
    spec_fuer_umgebung(config.epo.env.env_id, config.epo.hidden)
    if config.mode == MODUS_HYPERSUCHE:
        return []
    varianten = loese_varianten(config)
    for variante in varianten:
        if variante.checkpoint is not None:
            load_population_seed(variante.checkpoint, variante.epo)
        if variante.modus == MODUS_PPO and variante.epo.budget.steps is not None:
            if variante.epo.budget.steps < variante.epo.ppo.rollout_length:
                raise KonfigurationsFehler(
                    "Das Schrittbudget der PPO-Baseline liegt unter einer Rollout-Länge.", schluessel="budget.steps"
                )
    if len({v.name for v in varianten}) != len(varianten):
        raise KonfigurationsFehler("Sweep-Werte müssen eindeutig sein.", schluessel=f"sweep.{config.mode.split('-')[1]}")
    return varianten


# --- Einzelläufe --------------------------------------------------------------


def _ppo_baseline(
    epo: EpoConfig, seed: int, metrics: MetricsStream
) -> tuple[ParameterVector, list[GenerationReport], SampleLedger]:
    """Reine PPO-Baseline; jede Aktualisierung erscheint als Zeile im Verlauf.

    Die Verlaufsfitness ist wie bei EPO eine gierige Bewertung über
    ``fitness_episodes`` Episoden mit festem Seed. Diese Bewertungsschritte
    werden nicht gebucht; die Trainingsbelohnung steht nur im Metrikstrom.
    """
    spec = spec_fuer_umgebung(epo.env.env_id, epo.hidden)
    ledger = SampleLedger()
    rollout = epo.ppo.rollout_length
    if epo.budget.steps is not None:
        gesamt = (epo.budget.steps // rollout) * rollout
    else:
        gesamt = rollout * 10**9
    waechter = BudgetWaechter(replace(epo.budget, steps=None) if epo.budget.seconds is not None else epo.budget)
    historie: list[GenerationReport] = []
    bewertungs_seed = leite_seed(seed, ZWECK_BEWERTUNG)

    def _beobachte(diagnose: UpdateDiagnose) -> None:
        stand = ledger.snapshot()
        metrics.protokolliere(stand["steps_total"], "mean_reward", diagnose.mittlere_belohnung)
        metrics.protokolliere(stand["steps_total"], "loss", diagnose.verlust)
        metrics.protokolliere(stand["steps_total"], "clip_fraction", diagnose.clip_anteil)
        metrics.protokolliere(stand["steps_total"], "entropy", diagnose.entropie)
        if diagnose.params is None:
            raise VertragsVerletzung("PPO-Diagnose ohne Gewichte; die Baseline kann nicht bewertet werden.")
        fitness = evaluate_policy(diagnose.params, spec, epo.env, epo.fitness_episodes, bewertungs_seed).mittelwert
        metrics.protokolliere(stand["steps_total"], "best_fitness", fitness)
        historie.append(
            GenerationReport(
                generation=len(historie),
                fitness={},
                best_fitness=fitness,
                mean_fitness=fitness,
                elite_ids=(),
                ledger_stand=stand,
            )
        )

    params = initialisiere_parameter(spec, generator(seed, ZWECK_INIT))
    params = train(
        params,
        spec,
        epo.env,
        gesamt,
        epo.ppo,
        leite_seed(seed, ZWECK_PRETRAIN),
        ledger,
        KATEGORIE_BASELINE,
        beobachter=_beobachte,
        abbruch=(lambda: waechter.erschoepft(ledger)) if epo.budget.seconds is not None else None,
    )
    return params, historie, ledger


def schreibe_historie(pfad: Path, historie: Sequence[GenerationReport]) -> Path:
    """``history.csv`` ohne Wall-Clock-Spalten; Floats mit ``repr`` für Bit-Exaktheit.

    ``complete`` ist ``0`` für eine durch das Budget abgebrochene Generation.
    """
    pfad.parent.mkdir(parents=True, exist_ok=True)
    with pfad.open("w", encoding="utf-8", newline="") as datei:
        writer = csv.writer(datei, lineterminator="\n")
        writer.writerow(HISTORIE_SPALTEN)
        for report in historie:
            stand = report.ledger_stand
            writer.writerow(
                [
                    report.generation,
                    repr(float(report.best_fitness)),
                    repr(float(report.mean_fitness)),
                    stand.get("steps_pretrain", 0),
                    stand.get("steps_finetune", 0),
                    stand.get("steps_eval", 0),
                    stand.get("steps_total", 0),
                    int(report.vollstaendig),
                ]
            )
    return pfad


def lese_historie(pfad: Path) -> list[dict[str, float]]:
    with pfad.open(encoding="utf-8", newline="") as datei:
        return [{schluessel: float(wert) for schluessel, wert in zeile.items()} for zeile in csv.DictReader(datei)]


def fuehre_seed_aus(config: ExperimentConfig, variante: Variante, seed: int) -> SeedErgebnis:
    """Führt eine Variante für einen Seed aus und schreibt das Seed-Verzeichnis."""
    verzeichnis = config.out / variante.name / f"seed-{seed}"
    verzeichnis.mkdir(parents=True, exist_ok=True)
    schreibe_snapshot(
        verzeichnis / SNAPSHOT_DATEI,
        replace(config, mode=variante.modus, epo=variante.epo, seeds=(seed,), checkpoint=variante.checkpoint),
    )
    logger.info("Starte Variante %s mit Seed %s", variante.name, seed)

    metrics = MetricsStream()
    if variante.modus == MODUS_PPO:
        params, historie, ledger = _ppo_baseline(variante.epo, seed, metrics)
    else:
        ergebnis = run(variante.epo, seed, checkpoint=variante.checkpoint, metrics=metrics)
        params, historie, ledger = ergebnis.bester.params, ergebnis.historie, ergebnis.ledger

    spec = spec_fuer_umgebung(variante.epo.env.env_id, variante.epo.hidden)
    # Abschlussbewertung: Berichtsschritte, nicht Teil der Trainingsstichproben.
    abschluss = evaluate_policy(params, spec, variante.epo.env, config.report_eval_episodes, leite_seed(seed, ZWECK_ABSCHLUSS))
    zusammenfassung = summarize(abschluss.belohnungen, ledger)

    schreibe_historie(verzeichnis / HISTORIE_DATEI, historie)
    metrics.schreibe_csv(verzeichnis / METRIK_DATEI)
    speichere_checkpoint(
        verzeichnis / CHECKPOINT_DATEI,
        Checkpoint(spec=spec, params=params, seed=seed, env_id=variante.epo.env.env_id, ledger=ledger.snapshot()),
    )
    inhalt = {
        "variant": variante.name,
        "seed": seed,
        "env_id": variante.epo.env.env_id,
        "generations": len(historie),
        "ledger": ledger.snapshot(),
        "final_eval": zusammenfassung.als_dict(),
        "final_eval_rewards": list(abschluss.belohnungen),
        "final_eval_steps": abschluss.schritte,
    }
    (verzeichnis / LEDGER_DATEI).write_text(json.dumps(inhalt, indent=2, sort_keys=True), encoding="utf-8")

    return SeedErgebnis(
        variante=variante.name,
        seed=seed,
        mittlere_belohnung=zusammenfassung.mittelwert,
        beste_belohnung=zusammenfassung.bester,
        stichproben=zusammenfassung.stichproben,
        generationen=len(historie),
    )


# --- Aggregation --------------------------------------------------------------


def _seed_nummer(pfad: Path) -> int:
    return int(pfad.name.split("-", maxsplit=1)[1])


def _seed_verzeichnisse(verzeichnis: Path) -> list[Path]:
    if (verzeichnis / LEDGER_DATEI).is_file():
        return [verzeichnis]
    return sorted(
        (p for p in verzeichnis.glob("seed-*") if (p / LEDGER_DATEI).is_file()),
        key=_seed_nummer,
    )


def lese_seed_ergebnis(verzeichnis: Path) -> tuple[SeedErgebnis, str]:
    """Liest ein Seed-Ergebnis samt Umgebungs-ID aus ``ledger.json``."""
    inhalt = json.loads((verzeichnis / LEDGER_DATEI).read_text(encoding="utf-8"))
    ergebnis = SeedErgebnis(
        variante=str(inhalt["variant"]),
        seed=int(inhalt["seed"]),
        mittlere_belohnung=float(inhalt["final_eval"]["mean_reward"]),
        beste_belohnung=float(inhalt["final_eval"]["best_reward"]),
        stichproben=int(inhalt["ledger"]["steps_total"]),
        generationen=int(inhalt["generations"]),
    )
    return ergebnis, str(inhalt["env_id"])


def statistik(name: str, ergebnisse: Sequence[SeedErgebnis]) -> VariantenStatistik:
    belohnungen = [e.mittlere_belohnung for e in ergebnisse]
    return VariantenStatistik(
        variante=name,
        anzahl=len(ergebnisse),
        mittelwert=float(np.mean(belohnungen)),
        halbbreite=konfidenz_halbbreite(belohnungen),
        beste_belohnung=float(max(e.beste_belohnung for e in ergebnisse)),
        stichproben=float(np.mean([e.stichproben for e in ergebnisse])),
    )


def _kurven(varianten: dict[str, list[Path]]) -> list[list[object]]:
    zeilen: list[list[object]] = []
    for name, verzeichnisse in varianten.items():
        historien = [lese_historie(v / HISTORIE_DATEI) for v in verzeichnisse]
        for generation in range(max((len(h) for h in historien), default=0)):
            vorhanden = [h[generation] for h in historien if len(h) > generation]
            beste = [zeile["best_fitness"] for zeile in vorhanden]
            zeilen.append(
                [
                    name,
                    generation,
                    len(vorhanden),
                    repr(float(np.mean(beste))),
                    repr(konfidenz_halbbreite(beste)),
                    repr(float(np.mean([zeile["steps_total"] for zeile in vorhanden]))),
                ]
            )
    return zeilen


def _schreibe_csv(pfad: Path, kopf: Sequence[str], zeilen: Sequence[Sequence[object]]) -> None:
    with pfad.open("w", encoding="utf-8", newline="") as datei:
        writer = csv.writer(datei, lineterminator="\n")
        writer.writerow(kopf)
        writer.writerows(zeilen)


def aggregiere(out: Path, varianten: Sequence[str]) -> tuple[list[SeedErgebnis], list[VariantenStatistik]]:
    """Berechnet Aggregate ausschließlich aus den Seed-Dateien unter ``out``."""
    seeds: list[SeedErgebnis] = []
    statistiken: list[VariantenStatistik] = []
    verzeichnisse: dict[str, list[Path]] = {}
    for name in varianten:
        verzeichnisse[name] = _seed_verzeichnisse(out / name)
        ergebnisse = [lese_seed_ergebnis(v)[0] for v in verzeichnisse[name]]
        if not ergebnisse:
            continue
        seeds.extend(ergebnisse)
        statistiken.append(statistik(name, ergebnisse))

    _schreibe_csv(
        out / "aggregate.csv",
        AGGREGAT_SPALTEN,
        [
            [e.variante, e.seed, repr(e.mittlere_belohnung), repr(e.beste_belohnung), e.stichproben, e.generationen]
            for e in seeds
        ],
    )
    _schreibe_csv(
        out / "aggregate_summary.csv",
        ZUSAMMENFASSUNG_SPALTEN,
        [
            [s.variante, s.anzahl, repr(s.mittelwert), repr(s.halbbreite), repr(s.beste_belohnung), repr(s.stichproben)]
            for s in statistiken
        ],
    )
    _schreibe_csv(out / "curves.csv", KURVEN_SPALTEN, _kurven(verzeichnisse))
    return seeds, statistiken


# --- Öffentliche Einstiege ----------------------------------------------------


def run_experiment(config: ExperimentConfig, *, fortschritt: FortschrittCallback | None = None) -> ExperimentErgebnis:
    """Führt alle Varianten und Seeds aus und schreibt Aggregate und Bericht."""
    varianten = pruefe_experiment(config)
    config.out.mkdir(parents=True, exist_ok=True)
    schreibe_snapshot(config.out / SNAPSHOT_DATEI, config)
    lauf_id = hole_lauf_id()

    if config.mode == MODUS_HYPERSUCHE:
        return _hypersuche(config, fortschritt)

    auftraege = [(variante, seed) for variante in varianten for seed in config.seeds]
    logger.info("Experiment %s: %s Variante(n) x %s Seed(s)", config.mode, len(varianten), len(config.seeds))

    def _ausfuehren(variante: Variante, seed: int) -> SeedErgebnis:
        setze_lauf_id(lauf_id)
        return fuehre_seed_aus(config, variante, seed)

    with ThreadPoolExecutor(max_workers=min(config.epo.max_workers, len(auftraege))) as executor:
        futures = {executor.submit(_ausfuehren, variante, seed): (variante, seed) for variante, seed in auftraege}
        for future in as_completed(futures):
            ergebnis = future.result()
            if fortschritt is not None:
                fortschritt(FORTSCHRITT_SEED.format(variante=ergebnis.variante, seed=ergebnis.seed))

    namen = [v.name for v in varianten]
    seeds, statistiken = aggregiere(config.out, namen)
    erster_seed = config.seeds[0]
    historien = {
        f"{name} (Seed {erster_seed})": _historie_als_reports(config.out / name / f"seed-{erster_seed}" / HISTORIE_DATEI)
        for name in namen
    }
    ledger = {
        f"{e.variante}/seed-{e.seed}": json.loads(
            (config.out / e.variante / f"seed-{e.seed}" / LEDGER_DATEI).read_text(encoding="utf-8")
        )["ledger"]
        for e in seeds
    }
    bericht = render_laufbericht(
        modus=config.mode,
        env_id=config.epo.env.env_id,
        lauf_id=lauf_id,
        statistiken=statistiken,
        seeds=seeds,
        ledger=ledger,
        historien=historien,
    )
    (config.out / "bericht.md").write_text(bericht, encoding="utf-8")
    logger.info("Experiment abgeschlossen: %s", config.out)
    return ExperimentErgebnis(out=config.out, seeds=seeds, statistiken=statistiken)


def _historie_als_reports(pfad: Path) -> list[GenerationReport]:
    return [
        GenerationReport(
            generation=int(zeile["generation"]),
            fitness={},
            best_fitness=zeile["best_fitness"],
            mean_fitness=zeile["mean_fitness"],
            elite_ids=(),
            ledger_stand={schluessel: int(wert) for schluessel, wert in zeile.items() if schluessel.startswith("steps_")},
            vollstaendig=bool(zeile.get("complete", 1.0)),
        )
        for zeile in lese_historie(pfad)
    ]


def _hypersuche(config: ExperimentConfig, fortschritt: FortschrittCallback | None) -> ExperimentErgebnis:
    rangliste = run_search(
        config.suche.space,
        config.suche.trials,
        config.suche.repeats,
        config.epo.budget,
        config.suche.seed,
        basis=config.epo,
        max_workers=config.epo.max_workers,
    )
    pfad = schreibe_suchergebnisse(config.out / "search_results.csv", rangliste)
    if fortschritt is not None:
        fortschritt(f"Suchergebnisse geschrieben: {pfad}")
    return ExperimentErgebnis(out=config.out)


def compare(verzeichnisse: Sequence[Path]) -> Vergleich:
    """Vergleicht Läufe; die erste Methode ist die Referenz der Stichprobenreduktion."""
    if len(verzeichnisse) < 2:
        raise VertragsVerletzung("Für einen Vergleich werden mindestens zwei Laufverzeichnisse benötigt.")
    methoden: list[VariantenStatistik] = []
    umgebungen: set[str] = set()
    for verzeichnis in verzeichnisse:
        seed_verzeichnisse = _seed_verzeichnisse(Path(verzeichnis))
        if not seed_verzeichnisse:
            raise VertragsVerletzung(f"In '{verzeichnis}' wurden keine Seed-Ergebnisse gefunden.")
        gelesen = [lese_seed_ergebnis(v) for v in seed_verzeichnisse]
        umgebungen.update(env for _, env in gelesen)
        methoden.append(statistik(Path(verzeichnis).name, [e for e, _ in gelesen]))
    if len(umgebungen) != 1:
        raise KonfigurationsFehler(
            f"Läufe stammen aus unterschiedlichen Umgebungen: {', '.join(sorted(umgebungen))}.", schluessel="env.id"
        )
    referenz = methoden[0]
    reduktionen = {m.variante: stichproben_reduktion(referenz.stichproben, m.stichproben) for m in methoden[1:]}
    return Vergleich(env_id=umgebungen.pop(), methoden=tuple(methoden), reduktionen=reduktionen)


def bewerte_checkpoint(pfad: Path, env_config: EnvConfig, episoden: int, seed: int) -> Zusammenfassung:
    """Lädt einen Checkpoint und bewertet ihn über ``episoden`` Episoden."""
    checkpoint = lade_checkpoint(pfad)
    umgebung = hole_umgebung(env_config.env_id)
    if checkpoint.spec.input_dim != umgebung.obs_dim or checkpoint.spec.action_count != umgebung.action_count:
        raise DimensionsFehler(
            f"Checkpoint passt nicht zu '{env_config.env_id}' "
            f"({checkpoint.spec.input_dim}/{checkpoint.spec.action_count} statt {umgebung.obs_dim}/{umgebung.action_count})."
        )
    bewertung = evaluate_policy(checkpoint.params, checkpoint.spec, env_config, episoden, seed)
    ledger = SampleLedger().charge(KATEGORIE_EVAL, bewertung.schritte)
    return summarize(bewertung.belohnungen, ledger)
