"""Tests für Elitenauswahl, fitnessgewichtete Kreuzung und adaptive Mutation."""

from __future__ import annotations

import numpy as np
import pytest

from epo_labor.config import SIGMA_MODUS_VAR
from epo_labor.evo_ops import (
    crossover,
    crossover_alpha,
    fitness_record,
    mutate,
    mutation_scaling,
    select_elites,
    verschiebe_fitness,
)
from epo_labor.fehler import VertragsVerletzung
from epo_labor.models import Abstammung, Operator, PopulationMember
from epo_labor.netz import NetworkSpec, ParameterVector, nullparameter

_SPEC = NetworkSpec(input_dim=1, hidden=(1,), action_count=1)


def _mitglieder(roh_werte: list[float]) -> list[PopulationMember]:
    verschoben = verschiebe_fitness(roh_werte)
    return [
        PopulationMember(
            id=index,
            params=nullparameter(_SPEC),
            fitness=fitness_record(roh, verschoben[index], 5, 50),
            lineage=Abstammung((), Operator.INITIAL_CLONE),
        )
        for index, roh in enumerate(roh_werte)
    ]


def _vektor(werte) -> ParameterVector:
    return ParameterVector(values=np.asarray(werte, dtype=np.float64), layout=_SPEC.layout())


def _zufallsvektoren(rng: np.random.Generator) -> tuple[ParameterVector, ParameterVector]:
    return _vektor(rng.normal(0, 3, size=6)), _vektor(rng.normal(0, 3, size=6))


# --- Eliten ---------------------------------------------------------------------


def test_eliten_absteigend_nach_rohfitness() -> None:
    eliten = select_elites(_mitglieder([5.0, 3.0, 8.0, 1.0]), 2)

    assert [e.fitness.roh for e in eliten] == [8.0, 5.0]


def test_gleichstand_nach_listenposition() -> None:
    eliten = select_elites(_mitglieder([2.0] * 5), 3)

    assert [e.id for e in eliten] == [0, 1, 2]


def test_kleine_population_liefert_alle_mitglieder() -> None:
    assert len(select_elites(_mitglieder([1.0, 2.0]), 3)) == 2


def test_eliten_enthalten_immer_das_beste_mitglied() -> None:
    rng = np.random.default_rng(0)
    for _ in range(500):
        werte = list(rng.normal(size=int(rng.integers(1, 12))))
        eliten = select_elites(_mitglieder(werte), int(rng.integers(1, 5)))
        assert eliten[0].fitness.roh == max(werte)


def test_unbewertete_mitglieder_werden_abgewiesen() -> None:
    mitglied = PopulationMember(0, nullparameter(_SPEC), None, Abstammung((), Operator.INITIAL_CLONE))
    with pytest.raises(VertragsVerletzung):
        select_elites([mitglied], 1)
    with pytest.raises(VertragsVerletzung):
        select_elites([], 1)


def test_fitnessverschiebung_ist_nicht_negativ() -> None:
    assert verschiebe_fitness([-21.0, -15.0, -18.0]) == [0.0, 6.0, 3.0]


# --- Kreuzung -------------------------------------------------------------------


def test_alpha_beispiele() -> None:
    assert crossover_alpha(1.0, 1.0) == pytest.approx(0.5)
    assert crossover_alpha(3.0, 1.0) == pytest.approx(0.75)
    assert crossover_alpha(0.0, 0.0) == 0.0
    with pytest.raises(VertragsVerletzung):
        crossover_alpha(-1.0, 2.0)


def test_alpha_liegt_in_halboffenem_intervall_und_waechst_mit_f1() -> None:
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        f1, f2 = rng.exponential(2.0, size=2)
        alpha = crossover_alpha(f1, f2)
        assert 0.0 <= alpha < 1.0
        assert crossover_alpha(f1 + 0.5, f2) > alpha


def test_kreuzung_endpunkte_und_mittelpunkt() -> None:
    p1, p2 = _zufallsvektoren(np.random.default_rng(2))

    assert np.array_equal(crossover(p1, p2, 1.0).values, p1.values)
    assert np.array_equal(crossover(p1, p2, 0.0).values, p2.values)
    kind = crossover(_vektor([2.0, 0, 0, 0, 0, 0]), _vektor([0.0, 2, 0, 0, 0, 0]), 0.5)
    assert list(kind.values[:2]) == [1.0, 1.0]


def test_kreuzung_bleibt_in_konvexer_huelle_der_eltern() -> None:
    rng = np.random.default_rng(3)
    for _ in range(10_000):
        p1, p2 = _zufallsvektoren(rng)
        kind = crossover(p1, p2, float(rng.uniform()))
        assert np.all(kind.values >= np.minimum(p1.values, p2.values))
        assert np.all(kind.values <= np.maximum(p1.values, p2.values))


def test_fittere_eltern_ziehen_das_kind_naeher_heran() -> None:
    rng = np.random.default_rng(4)
    for _ in range(2_000):
        p1, p2 = _zufallsvektoren(rng)
        f2 = float(rng.exponential())
        f1 = f2 + float(rng.uniform(0.01, 3.0))
        kind = crossover(p1, p2, crossover_alpha(f1, f2))
        verschieden = p1.values != p2.values
        assert np.all(np.abs(kind.values - p1.values)[verschieden] < np.abs(kind.values - p2.values)[verschieden])


def test_kreuzung_weist_fremdes_layout_und_alpha_ab() -> None:
    p1, p2 = _zufallsvektoren(np.random.default_rng(5))
    fremd = nullparameter(NetworkSpec(input_dim=2, hidden=(1,), action_count=1))

    with pytest.raises(VertragsVerletzung):
        crossover(p1, fremd, 0.5)
    with pytest.raises(VertragsVerletzung):
        crossover(p1, p2, 1.5)


# --- Mutation -------------------------------------------------------------------


def test_skalierung_beispiele() -> None:
    assert mutation_scaling(2.0, 2.0) == 0.01
    assert mutation_scaling(3.0, 1.0) == 0.1
    assert mutation_scaling(1.05, 0.95) == pytest.approx(0.05)


def test_skalierung_bleibt_in_klemmgrenzen() -> None:
    rng = np.random.default_rng(6)
    for _ in range(10_000):
        f1, f2 = rng.exponential(1.0, size=2)
        skalierung = mutation_scaling(f1, f2)
        assert 0.01 <= skalierung <= 0.1
        roh = abs(f1 - f2) / max(f1 + f2, 1e-8)
        assert (skalierung == 0.01) == (roh <= 0.01)


def _grosser_vektor(laenge: int) -> ParameterVector:
    spec = NetworkSpec(input_dim=laenge - 5, hidden=(1,), action_count=1)
    return nullparameter(spec)


def test_mutationsrauschen_hat_skalierung_als_standardabweichung() -> None:
    kind = _grosser_vektor(10_000)

    klein = mutate(kind, 0.01, seed=7)
    gross = mutate(kind, 0.1, seed=8)

    assert 0.008 <= float(np.std(klein.values)) <= 0.012
    assert float(np.std(gross.values)) / float(np.std(klein.values)) == pytest.approx(10.0, rel=0.05)


def test_mutation_ist_deterministisch_je_seed() -> None:
    kind = _grosser_vektor(100)

    assert np.array_equal(mutate(kind, 0.05, seed=1).values, mutate(kind, 0.05, seed=1).values)
    assert not np.array_equal(mutate(kind, 0.05, seed=1).values, mutate(kind, 0.05, seed=2).values)


def test_varianzmodus_nutzt_wurzel_der_skalierung() -> None:
    kind = _grosser_vektor(10_000)

    mutiert = mutate(kind, 0.04, seed=3, sigma_mode=SIGMA_MODUS_VAR)

    assert float(np.std(mutiert.values)) == pytest.approx(0.2, rel=0.05)


def test_mutation_ausserhalb_der_klemmgrenzen_wird_abgewiesen() -> None:
    with pytest.raises(VertragsVerletzung):
        mutate(_grosser_vektor(100), 0.5, seed=0)
