"""Datamodelle für Population, Abstammung und Generationsberichte."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .netz import ParameterVector


class Operator(Enum):
    """Herkunft eines Populationsmitglieds."""

    INITIAL_CLONE = "initial-clone"
    ELITE_CARRYOVER = "elite-carryover"
    MUTATED_OFFSPRING = "mutated-offspring"
    FINETUNED_OFFSPRING = "finetuned-offspring"
    CROSSOVER_OFFSPRING = "crossover-offspring"


@dataclass(frozen=True)
class FitnessRecord:
    """Fitness eines Mitglieds in der zuletzt bewerteten Generation.

    ``roh`` ist die mittlere Episodenbelohnung, ``verschoben`` der um das
    Generationsminimum verschobene, nicht-negative Wert für die Operatoren.
    """

    roh: float
    verschoben: float
    episoden: int
    schritte: int


@dataclass(frozen=True)
class Abstammung:
    eltern: tuple[int, ...]
    operator: Operator


@dataclass(frozen=True, eq=False)
class PopulationMember:
    """Gewichte, letzte Fitness und Abstammung eines Individuums."""

    id: int
    params: ParameterVector
    fitness: FitnessRecord | None
    lineage: Abstammung


@dataclass
class GenerationReport:
    """Ergebnis einer Generation; Grundlage für ``history.csv``.

    ``vollstaendig`` ist ``False``, wenn das Budget während der
    Nachkommenerzeugung erschöpft war; der Lauf endet dann.
    """

    generation: int
    fitness: dict[int, float]
    best_fitness: float
    mean_fitness: float
    elite_ids: tuple[int, ...]
    nachkommen: dict[Operator, int] = field(default_factory=dict)
    ledger_delta: dict[str, int] = field(default_factory=dict)
    ledger_stand: dict[str, int] = field(default_factory=dict)
    vollstaendig: bool = True

    @property
    def anzahl_nachkommen(self) -> int:
        return sum(self.nachkommen.values())


@dataclass(frozen=True)
class SeedErgebnis:
    """Kennzahlen eines einzelnen Seeds, wie sie im Seed-Verzeichnis liegen."""

    variante: str
    seed: int
    mittlere_belohnung: float
    beste_belohnung: float
    stichproben: int
    generationen: int


@dataclass(frozen=True)
class VariantenStatistik:
    """Über Seeds aggregierte Kennzahlen einer Variante."""

    variante: str
    anzahl: int
    mittelwert: float
    halbbreite: float
    beste_belohnung: float
    stichproben: float


@dataclass(frozen=True)
class Vergleich:
    """Vergleich mehrerer Läufe; ``reduktionen`` relativ zur ersten Methode in Prozent."""

    env_id: str
    methoden: tuple[VariantenStatistik, ...]
    reduktionen: dict[str, float]
