"""End-to-End-Ablauf eines EPO-Laufs.

Ablauf: Pre-Training -> Klone -> Generationsschleife
(Bewertung -> Eliten -> Kreuzung -> Mutation oder Fine-Tuning).

Phasen sind Barrieren: Bewertungen laufen parallel, die Auswahl und alle
Zufallsentscheidungen seriell, Fine-Tunings wieder parallel. Alle Seeds
hängen nur von ``(lauf_seed, generation, index)`` ab, nie von der
Abschlussreihenfolge der Worker.
"""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .checkpoint import lade_checkpoint
from .config import (
    KATEGORIE_EVAL,
    KATEGORIE_FINETUNE,
    KATEGORIE_PRETRAIN,
    SEED_POLITIK_FEST,
    Budget,
    EpoConfig,
)
from .evo_ops import crossover, crossover_alpha, fitness_record, mutate, mutation_scaling, select_elites, verschiebe_fitness
from .fehler import DimensionsFehler, VertragsVerletzung
from .ledger import MetricsStream, SampleLedger, ledger_delta
from .logging_setup import hole_lauf_id, konfiguriere_logger, setze_lauf_id
from .models import Abstammung, GenerationReport, Operator, PopulationMember
from .netz import NetworkSpec, ParameterVector, initialisiere_parameter
from .ppo import UpdateDiagnose, finetune_config, train
from .umgebungen import Bewertung, evaluate_policy, spec_fuer_umgebung
from .zufall import (
    ZWECK_BEWERTUNG,
    ZWECK_FEINTUNING,
    ZWECK_GENERATION,
    ZWECK_INIT,
    ZWECK_MUTATION,
    ZWECK_NACHKOMME,
    ZWECK_PRETRAIN,
    generator,
    leite_seed,
)

logger = konfiguriere_logger(__name__, dateiname="orchestrator.log")

ProgressCallback = Callable[[GenerationReport], None]


class BudgetWaechter:
    """Prüft Schritt- und Wall-Clock-Budget eines Laufs."""

    def __init__(self, budget: Budget) -> None:
        self.budget = budget
        self._start = time.monotonic()

    def erschoepft(self, ledger: SampleLedger, geplant: int = 0) -> bool:
        if self.budget.steps is not None and ledger.total() + geplant >= self.budget.steps:
            return True
        if self.budget.seconds is not None and time.monotonic() - self._start >= self.budget.seconds:
            return True
        return False


def _spec(config: EpoConfig) -> NetworkSpec:
    return spec_fuer_umgebung(config.env.env_id, config.hidden)


def _metrik_beobachter(metrics: MetricsStream | None, ledger: SampleLedger) -> Callable[[UpdateDiagnose], None] | None:
    if metrics is None:
        return None

    def _beobachte(diagnose: UpdateDiagnose) -> None:
        stand = ledger.total()
        metrics.protokolliere(stand, "mean_reward", diagnose.mittlere_belohnung)
        metrics.protokolliere(stand, "loss", diagnose.verlust)
        metrics.protokolliere(stand, "clip_fraction", diagnose.clip_anteil)
        metrics.protokolliere(stand, "entropy", diagnose.entropie)

    return _beobachte


def _klone(params: ParameterVector, anzahl: int, ids: Iterator[int]) -> list[PopulationMember]:
    return [
        PopulationMember(id=next(ids), params=params, fitness=None, lineage=Abstammung((), Operator.INITIAL_CLONE))
        for _ in range(anzahl)
    ]


def initialize(
    config: EpoConfig,
    seed: int,
    *,
    ledger: SampleLedger | None = None,
    metrics: MetricsStream | None = None,
    ids: Iterator[int] | None = None,
) -> tuple[list[PopulationMember], SampleLedger]:
    """Pre-Training des Basismodells und Klonen in die Startpopulation."""
    ledger = ledger if ledger is not None else SampleLedger()
    ids = ids if ids is not None else itertools.count()
    spec = _spec(config)
    basis = initialisiere_parameter(spec, generator(seed, ZWECK_INIT))

    if config.pretrain_steps > 0:
        logger.info("Pre-Training startet: %s Schritte auf %s", config.pretrain_steps, config.env.env_id)
        pretrain_config = config.ppo
        if config.pretrain_steps < pretrain_config.rollout_length:
            pretrain_config = finetune_config(pretrain_config, config.pretrain_steps)
        basis = train(
            basis,
            spec,
            config.env,
            config.pretrain_steps,
            pretrain_config,
            leite_seed(seed, ZWECK_PRETRAIN),
            ledger,
            KATEGORIE_PRETRAIN,
            beobachter=_metrik_beobachter(metrics, ledger),
        )
        logger.info("Pre-Training beendet: %s Schritte gebucht", ledger.steps_pretrain)

    return _klone(basis, config.initial_clones, ids), ledger


def load_population_seed(
    pfad: Path, config: EpoConfig, *, ids: Iterator[int] | None = None
) -> list[PopulationMember]:
    """Klont die Startpopulation aus einem Checkpoint statt aus frischem Pre-Training."""
    checkpoint = lade_checkpoint(pfad)
    erwartet = _spec(config)
    gefunden = checkpoint.spec
    if gefunden.input_dim != erwartet.input_dim or gefunden.action_count != erwartet.action_count:
        raise DimensionsFehler(
            f"Checkpoint ({gefunden.input_dim} Eingaben, {gefunden.action_count} Aktionen) passt nicht zu "
            f"'{config.env.env_id}' ({erwartet.input_dim} Eingaben, {erwartet.action_count} Aktionen)."
        )
    if gefunden.hidden != erwartet.hidden:
        raise DimensionsFehler(f"Checkpoint-Hidden-Layer {gefunden.hidden} weichen von {erwartet.hidden} ab.")
    logger.info("Startpopulation aus Checkpoint %s (Quelle: %s)", pfad, checkpoint.env_id or "unbekannt")
    params = ParameterVector(values=checkpoint.params.values, layout=erwartet.layout())
    return _klone(params, config.initial_clones, ids if ids is not None else itertools.count())


def _bewerte(
    mitglied: PopulationMember,
    spec: NetworkSpec,
    config: EpoConfig,
    seed: int,
    ledger: SampleLedger,
    lauf_id: str,
) -> Bewertung:
    setze_lauf_id(lauf_id)
    bewertung = evaluate_policy(mitglied.params, spec, config.env, config.fitness_episodes, seed)
    ledger.charge(KATEGORIE_EVAL, bewertung.schritte)
    return bewertung


def _feintune(
    params: ParameterVector,
    spec: NetworkSpec,
    config: EpoConfig,
    seed: int,
    ledger: SampleLedger,
    lauf_id: str,
) -> ParameterVector:
    setze_lauf_id(lauf_id)
    return train(
        params,
        spec,
        config.env,
        config.finetune_steps,
        finetune_config(config.ppo, config.finetune_steps),
        seed,
        ledger,
        KATEGORIE_FINETUNE,
    )


@dataclass
class _Nachkomme:
    id: int
    params: ParameterVector
    eltern: tuple[int, int]
    operator: Operator
    feintune_seed: int | None = None


def run_generation(
    population: list[PopulationMember],
    config: EpoConfig,
    gen_seed: int,
    ledger: SampleLedger,
    *,
    generation: int = 0,
    bewertungs_seed: int | None = None,
    ids: Iterator[int] | None = None,
    waechter: BudgetWaechter | None = None,
) -> tuple[list[PopulationMember], GenerationReport]:
    """Bewertet, selektiert und füllt die Population mit Nachkommen auf ``P`` auf."""
    if not population:
        raise VertragsVerletzung("Eine Generation benötigt eine nichtleere Population.")
    spec = _spec(config)
    lauf_id = hole_lauf_id()
    ids = ids if ids is not None else itertools.count(max(m.id for m in population) + 1)
    eval_seed = bewertungs_seed if bewertungs_seed is not None else leite_seed(gen_seed, ZWECK_BEWERTUNG)
    vorher = ledger.snapshot()

    # Phase 1: parallele Bewertung mit gemeinsamen Episodenseeds.
    bewertungen: dict[int, Bewertung] = {}
    with ThreadPoolExecutor(max_workers=min(config.max_workers, len(population))) as executor:
        futures = {
            executor.submit(_bewerte, mitglied, spec, config, eval_seed, ledger, lauf_id): index
            for index, mitglied in enumerate(population)
        }
        for future in as_completed(futures):
            bewertungen[futures[future]] = future.result()

    roh = [bewertungen[index].mittelwert for index in range(len(population))]
    verschoben = verschiebe_fitness(roh)
    bewertet = [
        replace(
            mitglied,
            fitness=fitness_record(roh[index], verschoben[index], config.fitness_episodes, bewertungen[index].schritte),
        )
        for index, mitglied in enumerate(population)
    ]

    # Phase 2: serielle Auswahl und Nachkommenentscheidungen.
    elites = select_elites(bewertet, config.evo.elite_count)
    evo = config.evo
    nachkommen: list[_Nachkomme] = []
    geplant = 0
    vollstaendig = True
    for k in range(evo.population_size - len(elites)):
        if waechter is not None and waechter.erschoepft(ledger, geplant):
            vollstaendig = False
            logger.info("Budget erschöpft in Generation %s nach %s Nachkommen.", generation, k)
            break
        rng = generator(gen_seed, k, ZWECK_NACHKOMME)
        if len(elites) >= 2:
            i, j = (int(wert) for wert in rng.choice(len(elites), size=2, replace=False))
        else:
            i = j = 0
        vater, mutter = elites[i], elites[j]
        f1, f2 = vater.fitness.verschoben, mutter.fitness.verschoben  # type: ignore[union-attr]
        kind = crossover(vater.params, mutter.params, crossover_alpha(f1, f2, evo.epsilon))

        if rng.random() < evo.mutation_prob:
            skalierung = mutation_scaling(f1, f2, evo.epsilon, evo.clamp_min, evo.clamp_max)
            kind = mutate(
                kind,
                skalierung,
                leite_seed(gen_seed, k, ZWECK_MUTATION),
                sigma_mode=evo.sigma_mode,
                klemme_min=evo.clamp_min,
                klemme_max=evo.clamp_max,
            )
            nachkommen.append(_Nachkomme(next(ids), kind, (vater.id, mutter.id), Operator.MUTATED_OFFSPRING))
        else:
            if config.finetune_steps > 0:
                feintune_seed = leite_seed(gen_seed, k, ZWECK_FEINTUNING)
                nachkommen.append(
                    _Nachkomme(next(ids), kind, (vater.id, mutter.id), Operator.FINETUNED_OFFSPRING, feintune_seed)
                )
                geplant += config.finetune_steps
            else:
                nachkommen.append(_Nachkomme(next(ids), kind, (vater.id, mutter.id), Operator.CROSSOVER_OFFSPRING))

    # Phase 3: parallele Fine-Tunings.
    zu_trainieren = [n for n in nachkommen if n.feintune_seed is not None]
    if zu_trainieren:
        with ThreadPoolExecutor(max_workers=min(config.max_workers, len(zu_trainieren))) as executor:
            futures_ft = {
                executor.submit(_feintune, n.params, spec, config, n.feintune_seed, ledger, lauf_id): n
                for n in zu_trainieren
            }
            for future in as_completed(futures_ft):
                futures_ft[future].params = future.result()

    naechste = [replace(elite, lineage=Abstammung((elite.id,), Operator.ELITE_CARRYOVER)) for elite in elites]
    naechste.extend(
        PopulationMember(id=n.id, params=n.params, fitness=None, lineage=Abstammung(n.eltern, n.operator))
        for n in nachkommen
    )

    nachher = ledger.snapshot()
    zaehlung = {
        operator: 0
        for operator in (Operator.MUTATED_OFFSPRING, Operator.FINETUNED_OFFSPRING, Operator.CROSSOVER_OFFSPRING)
    }
    for n in nachkommen:
        zaehlung[n.operator] += 1
    report = GenerationReport(
        generation=generation,
        fitness={mitglied.id: mitglied.fitness.roh for mitglied in bewertet},  # type: ignore[union-attr]
        best_fitness=float(max(roh)),
        mean_fitness=float(np.mean(roh)),
        elite_ids=tuple(elite.id for elite in elites),
        nachkommen=zaehlung,
        ledger_delta=ledger_delta(vorher, nachher),
        ledger_stand=nachher,
        vollstaendig=vollstaendig,
    )
    logger.info(
        "Generation %s: beste Fitness %.4f, Mittel %.4f, %s mutiert, %s feinjustiert, %s nur gekreuzt, "
        "Schritte gesamt %s",
        generation,
        report.best_fitness,
        report.mean_fitness,
        zaehlung[Operator.MUTATED_OFFSPRING],
        zaehlung[Operator.FINETUNED_OFFSPRING],
        zaehlung[Operator.CROSSOVER_OFFSPRING],
        nachher["steps_total"],
    )
    return naechste, report


@dataclass
class EpoErgebnis:
    """Bestes Mitglied, Generationsverlauf und finales Ledger eines Laufs."""

    bester: PopulationMember
    historie: list[GenerationReport]
    ledger: SampleLedger
    spec: NetworkSpec
    metrics: MetricsStream = field(default_factory=MetricsStream)


def run(
    config: EpoConfig,
    seed: int,
    *,
    checkpoint: Path | None = None,
    metrics: MetricsStream | None = None,
    progress: ProgressCallback | None = None,
) -> EpoErgebnis:
    """Generationsschleife bis zur Budgeterschöpfung; mindestens eine Bewertung."""
    metrics = metrics if metrics is not None else MetricsStream()
    ids = itertools.count()
    ledger = SampleLedger()
    if checkpoint is not None:
        population = load_population_seed(checkpoint, config, ids=ids)
    else:
        population, ledger = initialize(config, seed, ledger=ledger, metrics=metrics, ids=ids)

    waechter = BudgetWaechter(config.budget)
    fester_seed = leite_seed(seed, ZWECK_BEWERTUNG) if config.eval_seed_policy == SEED_POLITIK_FEST else None
    historie: list[GenerationReport] = []
    generation = 0
    while True:
        population, report = run_generation(
            population,
            config,
            leite_seed(seed, generation, ZWECK_GENERATION),
            ledger,
            generation=generation,
            bewertungs_seed=fester_seed,
            ids=ids,
            waechter=waechter,
        )
        historie.append(report)
        metrics.protokolliere(ledger.total(), "best_fitness", report.best_fitness)
        metrics.protokolliere(ledger.total(), "mean_fitness", report.mean_fitness)
        if progress is not None:
            progress(report)
        if not report.vollstaendig or waechter.erschoepft(ledger):
            break
        generation += 1

    # Eliten stehen absteigend am Anfang der Folgepopulation.
    bester = population[0]
    logger.info(
        "EPO-Lauf beendet nach %s Generation(en): beste Fitness %.4f, Schritte %s",
        len(historie),
        bester.fitness.roh if bester.fitness else float("nan"),
        ledger.total(),
    )
    return EpoErgebnis(bester=bester, historie=historie, ledger=ledger, spec=_spec(config), metrics=metrics)
