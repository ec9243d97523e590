"""PPO mit geklemmtem Surrogat, GAE-Vorteilen, Werteverlust und Entropiebonus.

Der Trainer dient für Pre-Training, Fine-Tuning von Nachkommen und als
eigenständige Baseline. Jeder Umgebungsschritt wird pro Rollout im
:class:`~epo_labor.ledger.SampleLedger` gebucht.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .config import EnvConfig, PPOConfig
from .fehler import NumerikFehler, VertragsVerletzung
from .ledger import SampleLedger
from .logging_setup import konfiguriere_logger
from .netz import (
    AdamState,
    NetworkSpec,
    ParameterVector,
    VerlustAuswertung,
    adam_step,
    entropie_batch,
    forward,
    forward_batch,
    log_softmax,
    softmax,
    wert_und_gradient,
)
from .umgebungen import EnvState, reset, step
from .zufall import ZWECK_AKTION, ZWECK_EPISODE, ZWECK_MINIBATCH, generator, leite_seed

logger = konfiguriere_logger(__name__, dateiname="ppo.log")


@dataclass(frozen=True, eq=False)
class Transition:
    """Ein Übergang mit Log-Wahrscheinlichkeit zum Sammelzeitpunkt."""

    observation: np.ndarray
    action: int
    log_prob: float
    reward: float
    value: float
    done: bool


@dataclass(eq=False)
class Rollout:
    """Geordnete Übergänge als Spaltenarrays plus berechnete Vorteile.

    ``endzustand`` ist der Umgebungszustand nach dem letzten Übergang und
    erlaubt die Fortsetzung im nächsten Sammelzyklus.
    """

    beobachtungen: np.ndarray
    aktionen: np.ndarray
    log_probs: np.ndarray
    belohnungen: np.ndarray
    werte: np.ndarray
    dones: np.ndarray
    bootstrap_wert: float = 0.0
    advantages: np.ndarray | None = None
    returns: np.ndarray | None = None
    episoden_belohnungen: list[float] = field(default_factory=list)
    endzustand: EnvState | None = None
    laufende_belohnung: float = 0.0

    def __len__(self) -> int:
        return int(self.aktionen.shape[0])

    @property
    def schritte(self) -> int:
        return len(self)

    def transitionen(self) -> list[Transition]:
        return [
            Transition(
                observation=self.beobachtungen[index],
                action=int(self.aktionen[index]),
                log_prob=float(self.log_probs[index]),
                reward=float(self.belohnungen[index]),
                value=float(self.werte[index]),
                done=bool(self.dones[index]),
            )
            for index in range(len(self))
        ]

    @property
    def episodengrenzen(self) -> list[int]:
        return [int(index) for index in np.flatnonzero(self.dones)]

    def mittlere_belohnung(self) -> float:
        """Mittel abgeschlossener Episoden, sonst die laufende Teilsumme."""
        if self.episoden_belohnungen:
            return float(np.mean(self.episoden_belohnungen))
        return float(self.laufende_belohnung)


def collect_rollout(
    params: ParameterVector,
    spec: NetworkSpec,
    env_config: EnvConfig,
    length: int,
    seed: int,
    *,
    startzustand: EnvState | None = None,
    laufende_belohnung: float = 0.0,
) -> Rollout:
    """Sammelt genau ``length`` Übergänge mit Aktionen aus der Softmax-Policy.

    Episodenenden führen zu einem automatischen Reset; das Erreichen des
    Horizonts gilt ebenfalls als Episodenende.
    """
    if length < 1:
        raise VertragsVerletzung("Ein Rollout benötigt mindestens einen Schritt.")

    aktions_rng = generator(seed, ZWECK_AKTION)
    episode = 0
    zustand = startzustand if startzustand is not None and not startzustand.terminated else None
    if zustand is None:
        zustand = reset(env_config, leite_seed(seed, episode, ZWECK_EPISODE))
        episode += 1
        laufende_belohnung = 0.0

    beobachtungen = np.zeros((length, spec.input_dim))
    aktionen = np.zeros(length, dtype=np.int64)
    log_probs = np.zeros(length)
    belohnungen = np.zeros(length)
    werte = np.zeros(length)
    dones = np.zeros(length, dtype=bool)
    episoden_belohnungen: list[float] = []

    for index in range(length):
        logits, wert = forward(params, spec, zustand.observation)
        wahrscheinlichkeiten = softmax(logits)
        aktion = int(aktions_rng.choice(logits.shape[0], p=wahrscheinlichkeiten))
        ergebnis = step(zustand, aktion)

        beobachtungen[index] = zustand.observation
        aktionen[index] = aktion
        log_probs[index] = float(log_softmax(logits)[aktion])
        belohnungen[index] = ergebnis.reward
        werte[index] = wert
        dones[index] = ergebnis.done
        laufende_belohnung += ergebnis.reward

        if ergebnis.done:
            episoden_belohnungen.append(laufende_belohnung)
            laufende_belohnung = 0.0
            zustand = reset(env_config, leite_seed(seed, episode, ZWECK_EPISODE))
            episode += 1
        else:
            zustand = ergebnis.state

    bootstrap = 0.0 if dones[-1] else forward(params, spec, zustand.observation)[1]
    return Rollout(
        beobachtungen=beobachtungen,
        aktionen=aktionen,
        log_probs=log_probs,
        belohnungen=belohnungen,
        werte=werte,
        dones=dones,
        bootstrap_wert=float(bootstrap),
        episoden_belohnungen=episoden_belohnungen,
        endzustand=zustand,
        laufende_belohnung=laufende_belohnung,
    )


def compute_gae(
    rollout: Rollout, gamma: float, gae_lambda: float, bootstrap_wert: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Generalisierte Vorteilsschätzung; ``returns = advantages + values``."""
    if len(rollout) == 0:
        raise VertragsVerletzung("GAE benötigt einen nichtleeren Rollout.")
    bootstrap = rollout.bootstrap_wert if bootstrap_wert is None else float(bootstrap_wert)

    laenge = len(rollout)
    advantages = np.zeros(laenge)
    naechster_vorteil = 0.0
    naechster_wert = bootstrap
    for t in range(laenge - 1, -1, -1):
        nicht_fertig = 0.0 if rollout.dones[t] else 1.0
        delta = rollout.belohnungen[t] + gamma * naechster_wert * nicht_fertig - rollout.werte[t]
        naechster_vorteil = delta + gamma * gae_lambda * nicht_fertig * naechster_vorteil
        advantages[t] = naechster_vorteil
        naechster_wert = rollout.werte[t]
    return advantages, advantages + rollout.werte


def normalisiere_vorteile(advantages: np.ndarray) -> np.ndarray:
    """Standardisiert Vorteile; Batches der Größe 1 bleiben unverändert."""
    if advantages.shape[0] <= 1:
        return advantages
    return (advantages - advantages.mean()) / (advantages.std() + 1e-8)


def clipped_surrogate(ratio: np.ndarray, advantages: np.ndarray, clip_eps: float) -> np.ndarray:
    """Pro-Stichprobe ``min(r * A, clip(r, 1 - eps, 1 + eps) * A)``."""
    ratio = np.asarray(ratio, dtype=np.float64)
    advantages = np.asarray(advantages, dtype=np.float64)
    return np.minimum(ratio * advantages, np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * advantages)


class PPOVerlust:
    """Verlust ``-mean(Surrogat) + c_v * Werteverlust - c_e * Entropie`` mit Ableitungen."""

    def __init__(
        self,
        aktionen: np.ndarray,
        alte_log_probs: np.ndarray,
        advantages: np.ndarray,
        returns: np.ndarray,
        config: PPOConfig,
    ) -> None:
        self.aktionen = np.asarray(aktionen, dtype=np.int64)
        self.alte_log_probs = np.asarray(alte_log_probs, dtype=np.float64)
        self.advantages = np.asarray(advantages, dtype=np.float64)
        self.returns = np.asarray(returns, dtype=np.float64)
        self.config = config

    def auswerten(self, logits: np.ndarray, werte: np.ndarray, params: ParameterVector) -> VerlustAuswertung:
        anzahl = self.aktionen.shape[0]
        zeilen = np.arange(anzahl)
        log_p = log_softmax(logits)
        p = np.exp(log_p)
        neue_log_probs = log_p[zeilen, self.aktionen]

        ratio = np.exp(neue_log_probs - self.alte_log_probs)
        eps = self.config.clip_eps
        surr1 = ratio * self.advantages
        surr2 = np.clip(ratio, 1.0 - eps, 1.0 + eps) * self.advantages
        surrogat = np.minimum(surr1, surr2)

        entropien = entropie_batch(logits)
        wertefehler = werte - self.returns
        policy_verlust = -float(surrogat.mean())
        werte_verlust = float(np.mean(wertefehler * wertefehler))
        entropie = float(entropien.mean())
        verlust = policy_verlust + self.config.vf_coef * werte_verlust - self.config.ent_coef * entropie

        diagnose = {
            "loss": verlust,
            "surrogate": float(surrogat.mean()),
            "policy_loss": policy_verlust,
            "value_loss": werte_verlust,
            "entropy": entropie,
            "mean_ratio": float(ratio.mean()),
            "clip_fraction": float(np.mean(np.abs(ratio - 1.0) > eps)),
            "approx_kl": float(np.mean(self.alte_log_probs - neue_log_probs)),
        }
        if not math.isfinite(verlust):
            raise NumerikFehler("PPO-Verlust ist nicht endlich.", diagnose=diagnose)

        one_hot = np.zeros_like(p)
        one_hot[zeilen, self.aktionen] = 1.0
        # Gradient nur dort, wo der ungeklemmte Term das Minimum bildet.
        gewicht = np.where(surr1 <= surr2, ratio * self.advantages, 0.0)
        d_logits = -(gewicht[:, None] * (one_hot - p)) / anzahl
        d_logits += self.config.ent_coef * p * (log_p + entropien[:, None]) / anzahl
        d_werte = 2.0 * self.config.vf_coef * wertefehler / anzahl

        return VerlustAuswertung(wert=verlust, d_logits=d_logits, d_werte=d_werte, diagnose=diagnose)


def _verlust_fuer(rollout: Rollout, indizes: np.ndarray, config: PPOConfig, *, normalisieren: bool) -> PPOVerlust:
    if rollout.advantages is None or rollout.returns is None:
        raise VertragsVerletzung("Der Rollout hat noch keine berechneten Vorteile.")
    advantages = rollout.advantages[indizes]
    if normalisieren:
        advantages = normalisiere_vorteile(advantages)
    return PPOVerlust(
        aktionen=rollout.aktionen[indizes],
        alte_log_probs=rollout.log_probs[indizes],
        advantages=advantages,
        returns=rollout.returns[indizes],
        config=config,
    )


def ppo_loss(
    params: ParameterVector, spec: NetworkSpec, rollout: Rollout, config: PPOConfig
) -> tuple[float, dict[str, float]]:
    """Skalarer PPO-Verlust über den gesamten Rollout (Vorteile wie gespeichert)."""
    verlust = _verlust_fuer(rollout, np.arange(len(rollout)), config, normalisieren=False)
    logits, werte = forward_batch(params, spec, rollout.beobachtungen)
    auswertung = verlust.auswerten(logits, werte, params)
    return auswertung.wert, auswertung.diagnose


def _klemme_gradientennorm(gradient: ParameterVector, max_norm: float) -> ParameterVector:
    norm = float(np.linalg.norm(gradient.values))
    if norm <= max_norm:
        return gradient
    return gradient.mit_werten(gradient.values * (max_norm / (norm + 1e-12)))


@dataclass(frozen=True)
class UpdateDiagnose:
    """Kennzahlen eines Sammel-/Update-Zyklus für den Metrikstrom.

    ``params`` sind die Gewichte nach dem Update, z. B. für eine Zwischenbewertung.
    """

    zeitschritt: int
    mittlere_belohnung: float
    verlust: float
    clip_anteil: float
    entropie: float
    params: ParameterVector | None = field(default=None, compare=False, repr=False)


def _aktualisiere(
    params: ParameterVector,
    spec: NetworkSpec,
    adam: AdamState,
    rollout: Rollout,
    config: PPOConfig,
    rng: np.random.Generator,
) -> tuple[ParameterVector, AdamState, dict[str, float]]:
    anzahl = len(rollout)
    groesse = min(config.minibatch_size, anzahl)
    diagnosen: list[dict[str, float]] = []
    for _ in range(config.epochs):
        reihenfolge = rng.permutation(anzahl)
        for start in range(0, anzahl, groesse):
            indizes = reihenfolge[start : start + groesse]
            verlust = _verlust_fuer(rollout, indizes, config, normalisieren=config.normalize_advantage)
            auswertung, gradient = wert_und_gradient(params, spec, rollout.beobachtungen[indizes], verlust)
            gradient = _klemme_gradientennorm(gradient, config.max_grad_norm)
            params, adam = adam_step(params, gradient, adam)
            diagnosen.append(auswertung.diagnose)
    gemittelt = {schluessel: float(np.mean([d[schluessel] for d in diagnosen])) for schluessel in diagnosen[0]}
    return params, adam, gemittelt


def train(
    params: ParameterVector,
    spec: NetworkSpec,
    env_config: EnvConfig,
    total_timesteps: int,
    config: PPOConfig,
    seed: int,
    ledger: SampleLedger,
    kategorie: str,
    *,
    beobachter: Callable[[UpdateDiagnose], None] | None = None,
    abbruch: Callable[[], bool] | None = None,
) -> ParameterVector:
    """Führt ``ceil(total_timesteps / rollout_length)`` Sammel-/Update-Zyklen aus.

    Jeder Aufruf startet mit frischem Adam-Zustand. Der optionale ``abbruch``
    wird vor jedem Zyklus geprüft (Wall-Clock-Budget der Baseline).
    """
    if total_timesteps < config.rollout_length:
        raise VertragsVerletzung(
            f"total_timesteps ({total_timesteps}) liegt unter der Rollout-Länge ({config.rollout_length})."
        )
    zyklen = math.ceil(total_timesteps / config.rollout_length)
    adam = AdamState.neu(
        params, lr=config.learning_rate, beta1=config.adam_beta1, beta2=config.adam_beta2, eps=config.adam_eps
    )
    update_rng = generator(seed, ZWECK_MINIBATCH)
    logger.debug("PPO-Training: %s Zyklen à %s Schritte (Kategorie %s)", zyklen, config.rollout_length, kategorie)

    zustand: EnvState | None = None
    laufend = 0.0
    verbraucht = 0
    for zyklus in range(zyklen):
        if abbruch is not None and abbruch():
            logger.info("PPO-Training nach %s Zyklen abgebrochen (Budget).", zyklus)
            break
        rollout = collect_rollout(
            params,
            spec,
            env_config,
            config.rollout_length,
            leite_seed(seed, zyklus),
            startzustand=zustand,
            laufende_belohnung=laufend,
        )
        ledger.charge(kategorie, rollout.schritte)
        verbraucht += rollout.schritte
        rollout.advantages, rollout.returns = compute_gae(rollout, config.gamma, config.gae_lambda)
        params, adam, diagnose = _aktualisiere(params, spec, adam, rollout, config, update_rng)
        zustand, laufend = rollout.endzustand, rollout.laufende_belohnung

        if beobachter is not None:
            beobachter(
                UpdateDiagnose(
                    zeitschritt=verbraucht,
                    mittlere_belohnung=rollout.mittlere_belohnung(),
                    verlust=diagnose["loss"],
                    clip_anteil=diagnose["clip_fraction"],
                    entropie=diagnose["entropy"],
                    params=params,
                )
            )
    return params


def finetune_config(config: PPOConfig, finetune_steps: int) -> PPOConfig:
    """PPO-Konfiguration für Fine-Tuning: ein Zyklus mit Rollout-Länge = Fine-Tune-Schritte."""
    return replace(config, rollout_length=finetune_steps, minibatch_size=min(config.minibatch_size, finetune_steps))
