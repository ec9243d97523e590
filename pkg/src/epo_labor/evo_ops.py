"""Evolutionäre Operatoren: Elitismus, fitnessgewichtete Kreuzung, adaptive Mutation.

Alle Funktionen sind rein; Zufall entsteht ausschließlich aus expliziten Seeds.
Die Operatoren erwarten verschobene, also nicht-negative Fitnesswerte
(siehe :func:`verschiebe_fitness`).
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .config import SIGMA_MODUS_STD, SIGMA_MODUS_VAR
from .fehler import VertragsVerletzung
from .models import FitnessRecord, PopulationMember
from .netz import ParameterVector
from .zufall import generator

__all__ = [
    "FitnessRecord",
    "crossover",
    "crossover_alpha",
    "mutate",
    "mutation_scaling",
    "select_elites",
    "verschiebe_fitness",
]

KLEMME_MIN = 0.01
KLEMME_MAX = 0.1


def verschiebe_fitness(roh_werte: Sequence[float]) -> list[float]:
    """Verschiebt die Rohfitness einer Generation um ihr Minimum (Ergebnis >= 0)."""
    if len(roh_werte) == 0:
        return []
    minimum = min(roh_werte)
    return [float(wert - minimum) for wert in roh_werte]


def select_elites(population: Sequence[PopulationMember], elite_count: int) -> list[PopulationMember]:
    """Top-``elite_count`` nach Rohfitness, absteigend; Gleichstand nach Listenposition."""
    if not population:
        raise VertragsVerletzung("Elitenauswahl benötigt eine nichtleere Population.")
    if elite_count < 1:
        raise VertragsVerletzung("Die Elite-Anzahl muss mindestens 1 sein.")
    for mitglied in population:
        if mitglied.fitness is None:
            raise VertragsVerletzung(f"Mitglied {mitglied.id} wurde noch nicht bewertet.")
    reihenfolge = sorted(range(len(population)), key=lambda index: (-population[index].fitness.roh, index))  # type: ignore[union-attr]
    return [population[index] for index in reihenfolge[: min(elite_count, len(population))]]


def crossover_alpha(f1: float, f2: float, epsilon: float = 1e-8) -> float:
    """Mischkoeffizient ``f1 / (f1 + f2 + eps)``."""
    if f1 < 0 or f2 < 0:
        raise VertragsVerletzung("Kreuzung erwartet verschobene, nicht-negative Fitnesswerte.")
    return f1 / (f1 + f2 + epsilon)


def crossover(p1: ParameterVector, p2: ParameterVector, alpha: float) -> ParameterVector:
    """Elementweise Konvexkombination ``alpha * p1 + (1 - alpha) * p2``."""
    if not p1.kompatibel(p2):
        raise VertragsVerletzung("Kreuzung: Eltern haben unterschiedliche Layouts.")
    if not 0.0 <= alpha <= 1.0:
        raise VertragsVerletzung(f"Kreuzung: alpha={alpha} liegt außerhalb von [0, 1].")
    kind = alpha * p1.values + (1.0 - alpha) * p2.values
    # Rundung darf die Konvexhülle der Eltern nicht verlassen.
    kind = np.clip(kind, np.minimum(p1.values, p2.values), np.maximum(p1.values, p2.values))
    return p1.mit_werten(kind)


def mutation_scaling(
    f1: float,
    f2: float,
    epsilon: float = 1e-8,
    klemme_min: float = KLEMME_MIN,
    klemme_max: float = KLEMME_MAX,
) -> float:
    """``max(min, min(max, |f1 - f2| / max(f1 + f2, eps)))``."""
    if f1 < 0 or f2 < 0:
        raise VertragsVerletzung("Mutation erwartet verschobene, nicht-negative Fitnesswerte.")
    verhaeltnis = abs(f1 - f2) / max(f1 + f2, epsilon)
    return max(klemme_min, min(klemme_max, verhaeltnis))


def mutate(
    child: ParameterVector,
    scaling: float,
    seed: int,
    *,
    sigma_mode: str = SIGMA_MODUS_STD,
    klemme_min: float = KLEMME_MIN,
    klemme_max: float = KLEMME_MAX,
) -> ParameterVector:
    """Addiert i.i.d. Gaußrauschen auf jede Koordinate.

    ``sigma_mode="std"``: Standardabweichung = Skalierung.
    ``sigma_mode="var"``: Varianz = Skalierung.
    """
    if not klemme_min <= scaling <= klemme_max:
        raise VertragsVerletzung(f"Skalierung {scaling} liegt außerhalb von [{klemme_min}, {klemme_max}].")
    if sigma_mode == SIGMA_MODUS_STD:
        sigma = scaling
    elif sigma_mode == SIGMA_MODUS_VAR:
        sigma = math.sqrt(scaling)
    else:
        raise VertragsVerletzung(f"Unbekannter Sigma-Modus '{sigma_mode}'.")
    rauschen = generator(seed).normal(0.0, sigma, size=len(child))
    return child.mit_werten(child.values + rauschen)


def fitness_record(roh: float, verschoben: float, episoden: int, schritte: int) -> FitnessRecord:
    if verschoben < 0:
        raise VertragsVerletzung("Verschobene Fitness darf nicht negativ sein.")
    return FitnessRecord(roh=float(roh), verschoben=float(verschoben), episoden=episoden, schritte=schritte)
