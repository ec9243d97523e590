"""Geseedete Zufallssuche über Mutationswahrscheinlichkeit, Elite-Anzahl und Populationsgröße."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from .config import Budget, EpoConfig, EvoConfig, pruefe
from .logging_setup import hole_lauf_id, konfiguriere_logger, setze_lauf_id
from .orchestrator import run
from .zufall import ZWECK_SUCHE, ZWECK_WIEDERHOLUNG, generator, leite_seed

logger = konfiguriere_logger(__name__, dateiname="hypersuche.log")

SUCHERGEBNIS_SPALTEN = ("trial", "mutation_prob", "elite_count", "population_size", "mean_reward", "repeats")

# Liefert (Belohnung, verbrauchte Umgebungsschritte) eines Trial-Laufs.
TrialRunner = Callable[[EpoConfig, int], tuple[float, int]]


@dataclass(frozen=True)
class SearchSpace:
    """Suchbereiche (inklusive Grenzen); Standard entspricht dem Referenzraster."""

    mutation_prob: tuple[float, float] = (0.1, 0.5)
    elite_count: tuple[int, int] = (2, 6)
    population_size: tuple[int, int] = (6, 16)

    def __post_init__(self) -> None:
        lo, hi = self.mutation_prob
        pruefe(0.0 <= lo <= hi <= 1.0, "search.mutation_prob", "Bereich muss in [0, 1] liegen und geordnet sein")
        pruefe(1 <= self.elite_count[0] <= self.elite_count[1], "search.elite_count", "Bereich muss geordnet sein, Minimum >= 1")
        pruefe(
            self.population_size[0] <= self.population_size[1],
            "search.population_size",
            "Bereich muss geordnet sein",
        )
        pruefe(
            self.elite_count[0] < self.population_size[1],
            "search.population_size",
            "keine Kombination mit Elite-Anzahl < Populationsgröße möglich",
        )


@dataclass(frozen=True)
class TrialResult:
    """Ergebnis eines Trials über alle Wiederholungen."""

    trial: int
    config: EvoConfig
    belohnungen: tuple[float, ...]
    budget: Budget
    schritte: int = 0
    fehler: str | None = None

    @property
    def repeats(self) -> int:
        return len(self.belohnungen)

    @property
    def mean_reward(self) -> float:
        if not self.belohnungen:
            return math.nan
        return math.fsum(self.belohnungen) / len(self.belohnungen)


def sample_config(space: SearchSpace, seed: int, basis: EvoConfig | None = None) -> EvoConfig:
    """Zieht gleichverteilt; Elite/Population werden nachgezogen bis ``E < P``."""
    basis = basis if basis is not None else EvoConfig()
    rng = generator(seed, ZWECK_SUCHE)
    lo, hi = space.mutation_prob
    while True:
        mutation_prob = lo if lo == hi else float(rng.uniform(lo, hi))
        elite_count = int(rng.integers(space.elite_count[0], space.elite_count[1] + 1))
        population_size = int(rng.integers(space.population_size[0], space.population_size[1] + 1))
        if elite_count < population_size:
            return replace(basis, mutation_prob=mutation_prob, elite_count=elite_count, population_size=population_size)


def standard_trial(config: EpoConfig, seed: int) -> tuple[float, int]:
    """Voller EPO-Lauf; Belohnung ist die zuletzt bewertete beste Fitness."""
    ergebnis = run(config, seed)
    fitness = ergebnis.bester.fitness
    return (fitness.roh if fitness is not None else math.nan), ergebnis.ledger.total()


@dataclass
class _TrialPlan:
    trial: int
    config: EpoConfig
    belohnungen: list[float] = field(default_factory=list)


def _fuehre_trial_aus(
    plan: _TrialPlan, wiederholungs_seeds: list[int], runner: TrialRunner, budget: Budget, lauf_id: str
) -> TrialResult:
    setze_lauf_id(lauf_id)
    schritte = 0
    try:
        for wiederholungs_seed in wiederholungs_seeds:
            belohnung, verbraucht = runner(plan.config, wiederholungs_seed)
            plan.belohnungen.append(float(belohnung))
            schritte += int(verbraucht)
    except Exception as exc:  # noqa: BLE001 - Trialfehler werden protokolliert, nicht propagiert
        logger.exception("Trial %s fehlgeschlagen", plan.trial)
        return TrialResult(
            trial=plan.trial,
            config=plan.config.evo,
            belohnungen=tuple(plan.belohnungen),
            budget=budget,
            schritte=schritte,
            fehler=f"{type(exc).__name__}: {exc}",
        )
    logger.info(
        "Trial %s: m=%.3f E=%s P=%s -> %.4f",
        plan.trial,
        plan.config.evo.mutation_prob,
        plan.config.evo.elite_count,
        plan.config.evo.population_size,
        math.fsum(plan.belohnungen) / len(plan.belohnungen),
    )
    return TrialResult(
        trial=plan.trial, config=plan.config.evo, belohnungen=tuple(plan.belohnungen), budget=budget, schritte=schritte
    )


def _sortierschluessel(ergebnis: TrialResult) -> tuple[bool, float, int]:
    fehlgeschlagen = ergebnis.fehler is not None or math.isnan(ergebnis.mean_reward)
    return (fehlgeschlagen, 0.0 if fehlgeschlagen else -ergebnis.mean_reward, ergebnis.trial)


def run_search(
    space: SearchSpace,
    trials: int,
    repeats: int,
    budget: Budget,
    seed: int,
    *,
    basis: EpoConfig | None = None,
    trial_runner: TrialRunner | None = None,
    max_workers: int = 1,
) -> list[TrialResult]:
    """Führt ``trials`` Konfigurationen mit je ``repeats`` Läufen aus; Rangliste absteigend.

    Alle Konfigurationen teilen dieselben Wiederholungsseeds.
    """
    pruefe(trials >= 1, "search.trials", "muss mindestens 1 sein")
    pruefe(repeats >= 1, "search.repeats", "muss mindestens 1 sein")
    basis = basis if basis is not None else EpoConfig()
    runner = trial_runner if trial_runner is not None else standard_trial
    lauf_id = hole_lauf_id()

    wiederholungs_seeds = [leite_seed(seed, r, ZWECK_WIEDERHOLUNG) for r in range(repeats)]
    plaene = [
        _TrialPlan(
            trial=k,
            config=replace(basis, evo=sample_config(space, leite_seed(seed, k, ZWECK_SUCHE), basis.evo), budget=budget),
        )
        for k in range(trials)
    ]
    logger.info("Hyperparametersuche: %s Trials x %s Wiederholungen", trials, repeats)

    ergebnisse: list[TrialResult] = []
    with ThreadPoolExecutor(max_workers=max(1, min(max_workers, trials))) as executor:
        futures = [
            executor.submit(_fuehre_trial_aus, plan, wiederholungs_seeds, runner, budget, lauf_id) for plan in plaene
        ]
        for future in as_completed(futures):
            ergebnisse.append(future.result())
    return sorted(ergebnisse, key=_sortierschluessel)


def schreibe_suchergebnisse(pfad: Path, rangliste: list[TrialResult]) -> Path:
    """Schreibt ``search_results.csv`` in Ranglistenreihenfolge."""
    pfad.parent.mkdir(parents=True, exist_ok=True)
    with pfad.open("w", encoding="utf-8", newline="") as datei:
        writer = csv.writer(datei)
        writer.writerow(SUCHERGEBNIS_SPALTEN)
        for ergebnis in rangliste:
            writer.writerow(
                [
                    ergebnis.trial,
                    repr(ergebnis.config.mutation_prob),
                    ergebnis.config.elite_count,
                    ergebnis.config.population_size,
                    repr(ergebnis.mean_reward),
                    ergebnis.repeats,
                ]
            )
    return pfad
