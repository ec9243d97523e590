"""Ableitung reproduzierbarer Seeds aus strukturierten Schlüsseln.

Alle Zufallsströme des Systems entstehen aus einem expliziten Seed-Tupel,
z. B. ``(lauf_seed, generation, mitglied_id, ZWECK_BEWERTUNG)``; einen globalen
Zufallsgenerator gibt es nicht.
"""

from __future__ import annotations

import numpy as np

# Zweckkennungen, damit sich Ströme mit gleichen Zahlen nicht überlappen.
ZWECK_EPISODE = 1
ZWECK_AKTION = 2
ZWECK_BEWERTUNG = 3
ZWECK_NACHKOMME = 4
ZWECK_MUTATION = 5
ZWECK_FEINTUNING = 6
ZWECK_PRETRAIN = 7
ZWECK_INIT = 8
ZWECK_MINIBATCH = 9
ZWECK_SUCHE = 10
ZWECK_ABSCHLUSS = 11
ZWECK_WIEDERHOLUNG = 12
ZWECK_GENERATION = 13


def leite_seed(*teile: int) -> int:
    """Leitet aus nicht-negativen Ganzzahlen einen 63-Bit-Seed ab."""
    zustand = np.random.SeedSequence([int(teil) for teil in teile]).generate_state(1, dtype=np.uint64)
    return int(zustand[0]) >> 1


def generator(*teile: int) -> np.random.Generator:
    """Liefert einen unabhängigen Generator für das Seed-Tupel."""
    return np.random.default_rng(np.random.SeedSequence([int(teil) for teil in teile]))
