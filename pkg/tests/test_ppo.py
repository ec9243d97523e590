"""Tests für Rollout-Sammlung, GAE, geklemmtes Surrogat und das PPO-Training."""

from __future__ import annotations

import math

import numpy as np
import pytest

from epo_labor.config import KATEGORIE_FINETUNE, KATEGORIE_PRETRAIN, EnvConfig, PPOConfig
from epo_labor.fehler import VertragsVerletzung
from epo_labor.ledger import SampleLedger
from epo_labor.netz import NetworkSpec, initialisiere_parameter, log_softmax
from epo_labor.ppo import (
    PPOVerlust,
    Rollout,
    clipped_surrogate,
    collect_rollout,
    compute_gae,
    finetune_config,
    normalisiere_vorteile,
    ppo_loss,
    train,
)
from epo_labor.umgebungen import entferne_umgebung, registriere_umgebung, spec_fuer_umgebung


class DreiSchrittUmgebung:
    """Episoden mit genau drei Schritten."""

    obs_dim = 1
    action_count = 2
    max_noops = 0

    def anfangszustand(self, rng):
        return (0.0,)

    def beobachtung(self, intern):
        return np.array([intern[0]])

    def uebergang(self, intern, action):
        return (intern[0] + 1.0,), 1.0, intern[0] + 1.0 >= 3.0

    def noop_aktion(self, index):
        return 0


def _rollout(belohnungen, werte, dones, bootstrap=0.0) -> Rollout:
    laenge = len(belohnungen)
    return Rollout(
        beobachtungen=np.zeros((laenge, 1)),
        aktionen=np.zeros(laenge, dtype=np.int64),
        log_probs=np.zeros(laenge),
        belohnungen=np.asarray(belohnungen, dtype=np.float64),
        werte=np.asarray(werte, dtype=np.float64),
        dones=np.asarray(dones, dtype=bool),
        bootstrap_wert=bootstrap,
    )


def _brute_force_gae(rollout: Rollout, gamma: float, lam: float) -> np.ndarray:
    laenge = len(rollout)
    naechste_werte = np.append(rollout.werte[1:], rollout.bootstrap_wert)
    deltas = rollout.belohnungen + gamma * naechste_werte * (1.0 - rollout.dones) - rollout.werte
    vorteile = np.zeros(laenge)
    for t in range(laenge):
        summe, faktor = 0.0, 1.0
        for k in range(t, laenge):
            summe += faktor * deltas[k]
            if rollout.dones[k]:
                break
            faktor *= gamma * lam
        vorteile[t] = summe
    return vorteile


# --- geklemmtes Surrogat --------------------------------------------------------


def test_surrogat_klemmt_positive_vorteile_bei_1_2() -> None:
    assert clipped_surrogate(np.array([1.5]), np.array([1.0]), 0.2)[0] == pytest.approx(1.2)


def test_surrogat_nimmt_bei_negativem_vorteil_den_pessimistischen_term() -> None:
    assert clipped_surrogate(np.array([0.5]), np.array([-1.0]), 0.2)[0] == pytest.approx(-0.8)


def test_surrogat_ueberschreitet_nie_die_geklemmte_schranke() -> None:
    rng = np.random.default_rng(0)
    for _ in range(200):
        ratio = np.exp(rng.normal(0.0, 0.7, size=64))
        vorteile = rng.normal(0.0, 2.0, size=64)
        eps = float(rng.uniform(0.05, 0.5))

        werte = clipped_surrogate(ratio, vorteile, eps)

        assert np.all(werte <= np.maximum((1 - eps) * vorteile, (1 + eps) * vorteile) + 1e-12)


def test_ppo_verlust_mit_verhaeltnis_1_5_liefert_1_2() -> None:
    logits = np.array([[0.3, -0.2]])
    neue = log_softmax(logits)[0, 0]
    verlust = PPOVerlust(
        aktionen=np.array([0]),
        alte_log_probs=np.array([neue - math.log(1.5)]),
        advantages=np.array([1.0]),
        returns=np.array([0.0]),
        config=PPOConfig(vf_coef=0.0, ent_coef=0.0),
    )

    auswertung = verlust.auswerten(logits, np.array([0.0]), params=None)  # type: ignore[arg-type]

    assert auswertung.diagnose["surrogate"] == pytest.approx(1.2)
    assert auswertung.diagnose["mean_ratio"] == pytest.approx(1.5)
    assert auswertung.diagnose["clip_fraction"] == 1.0
    assert auswertung.wert == pytest.approx(-1.2)


# --- Rollouts -----------------------------------------------------------------


def test_rollout_laenge_eins(zaehl_umgebung: str) -> None:
    spec = spec_fuer_umgebung(zaehl_umgebung, (4,))
    params = initialisiere_parameter(spec, np.random.default_rng(0))

    rollout = collect_rollout(params, spec, EnvConfig(env_id=zaehl_umgebung), 1, seed=3)

    assert len(rollout) == 1
    assert len(rollout.transitionen()) == 1
    assert rollout.transitionen()[0].log_prob <= 0.0


def test_rollout_ist_deterministisch_und_setzt_episoden_zurueck(zaehl_umgebung: str) -> None:
    spec = spec_fuer_umgebung(zaehl_umgebung, (4,))
    params = initialisiere_parameter(spec, np.random.default_rng(0))
    config = EnvConfig(env_id=zaehl_umgebung)

    a = collect_rollout(params, spec, config, 25, seed=7)
    b = collect_rollout(params, spec, config, 25, seed=7)

    assert np.array_equal(a.aktionen, b.aktionen)
    assert np.array_equal(a.belohnungen, b.belohnungen)
    assert a.episodengrenzen == [9, 19]
    assert len(a.episoden_belohnungen) == 2
    # Letzter Schritt ist kein Episodenende: Bootstrap aus der Wertschätzung.
    assert not a.dones[-1]


def test_episode_der_laenge_drei_markiert_index_zwei() -> None:
    registriere_umgebung("test-drei", DreiSchrittUmgebung)
    try:
        spec = spec_fuer_umgebung("test-drei", (3,))
        params = initialisiere_parameter(spec, np.random.default_rng(1))

        rollout = collect_rollout(params, spec, EnvConfig(env_id="test-drei", horizon=100), 10, seed=0)

        assert rollout.dones[2]
        assert rollout.episodengrenzen == [2, 5, 8]
        assert rollout.episoden_belohnungen == [3.0, 3.0, 3.0]
    finally:
        entferne_umgebung("test-drei")


def test_horizont_gilt_als_episodenende(zaehl_umgebung: str) -> None:
    spec = spec_fuer_umgebung(zaehl_umgebung, (4,))
    params = initialisiere_parameter(spec, np.random.default_rng(0))

    rollout = collect_rollout(params, spec, EnvConfig(env_id=zaehl_umgebung, horizon=4), 8, seed=0)

    assert rollout.episodengrenzen == [3, 7]
    assert rollout.bootstrap_wert == 0.0


# --- GAE ------------------------------------------------------------------------


def test_gae_mit_gamma_null_ist_einschrittvorteil() -> None:
    rollout = _rollout([1.0, -2.0, 0.5], [0.3, 0.1, -0.4], [False, False, False], bootstrap=5.0)

    vorteile, returns = compute_gae(rollout, gamma=0.0, gae_lambda=0.7)

    np.testing.assert_allclose(vorteile, [0.7, -2.1, 0.9])
    np.testing.assert_allclose(returns, vorteile + rollout.werte)


def test_gae_unverzinste_returns() -> None:
    rollout = _rollout([1.0, 1.0], [0.0, 0.0], [False, True])

    vorteile, _ = compute_gae(rollout, gamma=1.0, gae_lambda=1.0)

    np.testing.assert_allclose(vorteile, [2.0, 1.0])


def test_gae_entspricht_brute_force_doppelschleife() -> None:
    rng = np.random.default_rng(42)
    for laenge in (1, 5, 20, 50):
        for _ in range(20):
            rollout = _rollout(
                rng.normal(size=laenge),
                rng.normal(size=laenge),
                rng.random(laenge) < 0.15,
                bootstrap=float(rng.normal()),
            )
            gamma, lam = float(rng.uniform(0.8, 1.0)), float(rng.uniform(0.0, 1.0))

            vorteile, _ = compute_gae(rollout, gamma, lam)

            np.testing.assert_allclose(vorteile, _brute_force_gae(rollout, gamma, lam), rtol=0, atol=1e-10)


def test_gae_benoetigt_nichtleeren_rollout() -> None:
    with pytest.raises(VertragsVerletzung):
        compute_gae(_rollout([], [], []), 0.99, 0.95)


def test_normalisierte_vorteile_haben_mittel_null_und_std_eins() -> None:
    vorteile = normalisiere_vorteile(np.random.default_rng(0).normal(3.0, 7.0, size=128))

    assert abs(vorteile.mean()) < 1e-6
    assert abs(vorteile.std() - 1.0) < 1e-6
    assert normalisiere_vorteile(np.array([4.0]))[0] == 4.0


# --- Verlust und Training -------------------------------------------------------


def test_verhaeltnis_ist_eins_bei_unveraenderten_parametern(zaehl_umgebung: str) -> None:
    spec = spec_fuer_umgebung(zaehl_umgebung, (6,))
    params = initialisiere_parameter(spec, np.random.default_rng(2))
    rollout = collect_rollout(params, spec, EnvConfig(env_id=zaehl_umgebung), 30, seed=1)
    rollout.advantages, rollout.returns = compute_gae(rollout, 0.99, 0.95)

    _, diagnose = ppo_loss(params, spec, rollout, PPOConfig())

    assert diagnose["mean_ratio"] == pytest.approx(1.0, abs=1e-9)
    assert diagnose["clip_fraction"] == 0.0
    assert diagnose["surrogate"] == pytest.approx(float(np.mean(rollout.advantages)), abs=1e-9)


def test_ppo_loss_ohne_vorteile_ist_vertragsverletzung(zaehl_umgebung: str) -> None:
    spec = spec_fuer_umgebung(zaehl_umgebung, (4,))
    params = initialisiere_parameter(spec, np.random.default_rng(2))
    rollout = collect_rollout(params, spec, EnvConfig(env_id=zaehl_umgebung), 5, seed=1)

    with pytest.raises(VertragsVerletzung):
        ppo_loss(params, spec, rollout, PPOConfig())


def test_train_bucht_ganze_rollouts_im_ledger(zaehl_umgebung: str) -> None:
    spec = spec_fuer_umgebung(zaehl_umgebung, (8,))
    params = initialisiere_parameter(spec, np.random.default_rng(0))
    config = PPOConfig(rollout_length=32, minibatch_size=16, epochs=2)
    ledger = SampleLedger()
    beobachtet = []

    neu = train(params, spec, EnvConfig(env_id=zaehl_umgebung), 100, config, 5, ledger, KATEGORIE_PRETRAIN, beobachter=beobachtet.append)

    assert ledger.steps_pretrain == 128
    assert ledger.total() == 128
    assert [d.zeitschritt for d in beobachtet] == [32, 64, 96, 128]
    assert not np.array_equal(neu.values, params.values)


def test_train_unter_einer_rollout_laenge_wird_abgewiesen(zaehl_umgebung: str) -> None:
    spec = spec_fuer_umgebung(zaehl_umgebung, (4,))
    params = initialisiere_parameter(spec, np.random.default_rng(0))

    with pytest.raises(VertragsVerletzung):
        train(params, spec, EnvConfig(env_id=zaehl_umgebung), 10, PPOConfig(rollout_length=32), 0, SampleLedger(), KATEGORIE_PRETRAIN)


def test_finetuning_bucht_genau_die_finetune_schritte(zaehl_umgebung: str) -> None:
    spec = spec_fuer_umgebung(zaehl_umgebung, (4,))
    params = initialisiere_parameter(spec, np.random.default_rng(0))
    ledger = SampleLedger()

    train(params, spec, EnvConfig(env_id=zaehl_umgebung), 50, finetune_config(PPOConfig(epochs=1), 50), 0, ledger, KATEGORIE_FINETUNE)

    assert ledger.snapshot() == {
        "steps_pretrain": 0,
        "steps_finetune": 50,
        "steps_eval": 0,
        "steps_baseline": 0,
        "steps_total": 50,
    }


def test_train_ist_deterministisch(zaehl_umgebung: str) -> None:
    spec = spec_fuer_umgebung(zaehl_umgebung, (4,))
    params = initialisiere_parameter(spec, np.random.default_rng(0))
    config = PPOConfig(rollout_length=20, minibatch_size=10, epochs=2)
    env = EnvConfig(env_id=zaehl_umgebung)

    a = train(params, spec, env, 40, config, 9, SampleLedger(), KATEGORIE_PRETRAIN)
    b = train(params, spec, env, 40, config, 9, SampleLedger(), KATEGORIE_PRETRAIN)

    assert np.array_equal(a.values, b.values)


def test_abbruch_stoppt_vor_dem_naechsten_zyklus(zaehl_umgebung: str) -> None:
    spec = NetworkSpec(input_dim=2, hidden=(4,), action_count=2)
    params = initialisiere_parameter(spec, np.random.default_rng(0))
    ledger = SampleLedger()

    train(
        params,
        spec,
        EnvConfig(env_id=zaehl_umgebung),
        200,
        PPOConfig(rollout_length=20, minibatch_size=10, epochs=1),
        0,
        ledger,
        KATEGORIE_PRETRAIN,
        abbruch=lambda: ledger.total() >= 40,
    )

    assert ledger.total() == 40
