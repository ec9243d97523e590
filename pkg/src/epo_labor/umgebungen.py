"""Deterministische, seedbare Desk-Umgebungen als Ersatz für Atari.

- ``cartpole``: dichte Belohnung (+1 je Schritt), klassische Wagen-Pendel-Dynamik.
- ``catch-dense``: 5 Spalten x 7 Zeilen, Ball fällt, Schläger fängt; +1/-1 am Ende.
- ``catch-sparse``: wie ``catch-dense``, aber 0 statt -1 bei einem Fehlgriff.

Zustände sind unveränderlich; :func:`step` liefert immer einen neuen Zustand.
Weitere Umgebungen lassen sich über :func:`registriere_umgebung` ergänzen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol

import numpy as np

from .config import UMGEBUNG_CARTPOLE, UMGEBUNG_CATCH_DENSE, UMGEBUNG_CATCH_SPARSE, EnvConfig
from .fehler import KonfigurationsFehler, VertragsVerletzung
from .netz import NetworkSpec, ParameterVector, forward, softmax
from .zufall import ZWECK_AKTION, ZWECK_EPISODE, generator, leite_seed

InternerZustand = tuple[float, ...]


class Umgebung(Protocol):
    """Reine Übergangsfunktion einer Umgebung ohne eigenen Zustand."""

    obs_dim: int
    action_count: int
    max_noops: int

    def anfangszustand(self, rng: np.random.Generator) -> InternerZustand:
        ...

    def beobachtung(self, intern: InternerZustand) -> np.ndarray:
        ...

    def uebergang(self, intern: InternerZustand, action: int) -> tuple[InternerZustand, float, bool]:
        ...

    def noop_aktion(self, index: int) -> int:
        ...


class CartPole:
    """Wagen-Pendel mit Euler-Integration (Standardparameter, Schwelle 12 Grad / 2,4 m)."""

    obs_dim = 4
    action_count = 2
    max_noops = 30

    gravity = 9.8
    masscart = 1.0
    masspole = 0.1
    length = 0.5
    force_mag = 10.0
    tau = 0.02
    theta_threshold = 12 * 2 * math.pi / 360
    x_threshold = 2.4

    def anfangszustand(self, rng: np.random.Generator) -> InternerZustand:
        return tuple(float(wert) for wert in rng.uniform(-0.05, 0.05, size=4))

    def beobachtung(self, intern: InternerZustand) -> np.ndarray:
        return np.array(intern, dtype=np.float64)

    def uebergang(self, intern: InternerZustand, action: int) -> tuple[InternerZustand, float, bool]:
        x, x_dot, theta, theta_dot = intern
        total_mass = self.masscart + self.masspole
        polemass_length = self.masspole * self.length
        force = self.force_mag if action == 1 else -self.force_mag
        costheta = math.cos(theta)
        sintheta = math.sin(theta)
        temp = (force + polemass_length * theta_dot * theta_dot * sintheta) / total_mass
        thetaacc = (self.gravity * sintheta - costheta * temp) / (
            self.length * (4.0 / 3.0 - self.masspole * costheta * costheta / total_mass)
        )
        xacc = temp - polemass_length * thetaacc * costheta / total_mass
        x = x + self.tau * x_dot
        x_dot = x_dot + self.tau * xacc
        theta = theta + self.tau * theta_dot
        theta_dot = theta_dot + self.tau * thetaacc
        beendet = x < -self.x_threshold or x > self.x_threshold or theta < -self.theta_threshold or theta > self.theta_threshold
        return (x, x_dot, theta, theta_dot), 1.0, beendet

    def noop_aktion(self, index: int) -> int:
        # Abwechselnde Stöße heben sich im Mittel auf.
        return index % 2


class Catch:
    """Ball fällt pro Schritt eine Zeile; Aktionen 0=links, 1=bleiben, 2=rechts."""

    obs_dim = 3
    action_count = 3
    breite = 5
    hoehe = 7
    max_noops = hoehe - 2

    def __init__(self, *, fehlgriff_belohnung: float) -> None:
        self.fehlgriff_belohnung = fehlgriff_belohnung

    def anfangszustand(self, rng: np.random.Generator) -> InternerZustand:
        return (float(rng.integers(0, self.breite)), 0.0, float(self.breite // 2))

    def beobachtung(self, intern: InternerZustand) -> np.ndarray:
        ball_x, ball_y, schlaeger_x = intern
        return np.array(
            [ball_x / (self.breite - 1), ball_y / (self.hoehe - 1), schlaeger_x / (self.breite - 1)],
            dtype=np.float64,
        )

    def uebergang(self, intern: InternerZustand, action: int) -> tuple[InternerZustand, float, bool]:
        ball_x, ball_y, schlaeger_x = intern
        schlaeger_x = float(min(max(schlaeger_x + (action - 1), 0), self.breite - 1))
        ball_y += 1.0
        if ball_y >= self.hoehe - 1:
            belohnung = 1.0 if ball_x == schlaeger_x else self.fehlgriff_belohnung
            return (ball_x, ball_y, schlaeger_x), belohnung, True
        return (ball_x, ball_y, schlaeger_x), 0.0, False

    def noop_aktion(self, index: int) -> int:
        return 1


_REGISTRY: dict[str, Callable[[], Umgebung]] = {
    UMGEBUNG_CARTPOLE: CartPole,
    UMGEBUNG_CATCH_DENSE: lambda: Catch(fehlgriff_belohnung=-1.0),
    UMGEBUNG_CATCH_SPARSE: lambda: Catch(fehlgriff_belohnung=0.0),
}


def registriere_umgebung(env_id: str, fabrik: Callable[[], Umgebung]) -> None:
    """Registriert eine zusätzliche Umgebung (z. B. skriptgesteuert für Tests)."""
    _REGISTRY[env_id] = fabrik


def entferne_umgebung(env_id: str) -> None:
    _REGISTRY.pop(env_id, None)


def hole_umgebung(env_id: str) -> Umgebung:
    """Instanziiert eine registrierte Umgebung oder meldet einen Konfigurationsfehler."""
    fabrik = _REGISTRY.get(env_id)
    if fabrik is None:
        raise KonfigurationsFehler(
            f"Unbekannte Umgebung '{env_id}' (bekannt: {', '.join(sorted(_REGISTRY))}).", schluessel="env.id"
        )
    return fabrik()


def spec_fuer_umgebung(env_id: str, hidden: tuple[int, ...]) -> NetworkSpec:
    """Baut die NetworkSpec passend zu Beobachtungs- und Aktionsraum."""
    umgebung = hole_umgebung(env_id)
    return NetworkSpec(input_dim=umgebung.obs_dim, hidden=hidden, action_count=umgebung.action_count)


@dataclass(frozen=True, eq=False)
class EnvState:
    """Unveränderlicher Episodenzustand; ``step_index`` zählt nur Agentenschritte."""

    config: EnvConfig
    observation: np.ndarray
    step_index: int
    terminated: bool
    intern: InternerZustand
    noop_schritte: int = 0


@dataclass(frozen=True, eq=False)
class StepResult:
    """Ergebnis eines Schritts inklusive Folgezustand."""

    state: EnvState
    observation: np.ndarray
    reward: float
    done: bool


def reset(config: EnvConfig, episode_seed: int) -> EnvState:
    """Startet eine Episode deterministisch aus ``(config, episode_seed)``.

    Vor der Rückgabe wird eine gesetzte Anzahl No-op-Aktionen angewandt. Eine
    No-op-Transition, die die Episode beenden würde, wird verworfen und beendet
    die No-op-Phase. No-ops zählen nicht als Agentenschritte.
    """
    umgebung = hole_umgebung(config.env_id)
    rng = generator(config.seed, episode_seed, ZWECK_EPISODE)
    intern = umgebung.anfangszustand(rng)
    geplant = min(int(rng.integers(config.noop_min, config.noop_max + 1)), umgebung.max_noops)

    angewandt = 0
    for index in range(geplant):
        kandidat, _, beendet = umgebung.uebergang(intern, umgebung.noop_aktion(index))
        if beendet:
            break
        intern = kandidat
        angewandt += 1

    return EnvState(
        config=config,
        observation=umgebung.beobachtung(intern),
        step_index=0,
        terminated=False,
        intern=intern,
        noop_schritte=angewandt,
    )


def step(state: EnvState, action: int) -> StepResult:
    """Führt eine Agentenaktion aus; ``done`` bei Terminierung oder Horizont."""
    if state.terminated:
        raise VertragsVerletzung("Schritt auf einem bereits beendeten Zustand ist nicht erlaubt.")
    umgebung = hole_umgebung(state.config.env_id)
    if not 0 <= int(action) < umgebung.action_count:
        raise VertragsVerletzung(f"Aktion {action} liegt außerhalb von [0, {umgebung.action_count}).")

    intern, belohnung, beendet = umgebung.uebergang(state.intern, int(action))
    schritt = state.step_index + 1
    fertig = bool(beendet or schritt >= state.config.horizon)
    beobachtung = umgebung.beobachtung(intern)
    folgezustand = EnvState(
        config=state.config,
        observation=beobachtung,
        step_index=schritt,
        terminated=fertig,
        intern=intern,
        noop_schritte=state.noop_schritte,
    )
    return StepResult(state=folgezustand, observation=beobachtung, reward=float(belohnung), done=fertig)


@dataclass(frozen=True)
class Bewertung:
    """Ergebnis einer Policy-Bewertung über mehrere Episoden."""

    mittelwert: float
    belohnungen: tuple[float, ...]
    schritte: int


def episoden_seed(seed: int, episode: int) -> int:
    """Seed der ``episode``-ten Bewertungsepisode; identisch für alle Mitglieder."""
    return leite_seed(seed, episode, ZWECK_EPISODE)


def evaluate_policy(
    params: ParameterVector,
    spec: NetworkSpec,
    config: EnvConfig,
    episodes: int,
    seed: int,
) -> Bewertung:
    """Bewertet eine Policy gierig (argmax) bzw. stochastisch bei ``eval_stochastic``."""
    if episodes < 1:
        raise VertragsVerletzung("Die Bewertung benötigt mindestens eine Episode.")

    belohnungen: list[float] = []
    schritte = 0
    for episode in range(episodes):
        zustand = reset(config, episoden_seed(seed, episode))
        aktions_rng = generator(seed, episode, ZWECK_AKTION) if config.eval_stochastic else None
        summe = 0.0
        while not zustand.terminated:
            logits, _ = forward(params, spec, zustand.observation)
            if aktions_rng is None:
                aktion = int(np.argmax(logits))
            else:
                aktion = int(aktions_rng.choice(logits.shape[0], p=softmax(logits)))
            ergebnis = step(zustand, aktion)
            summe += ergebnis.reward
            schritte += 1
            zustand = ergebnis.state
        belohnungen.append(summe)

    return Bewertung(mittelwert=float(np.mean(belohnungen)), belohnungen=tuple(belohnungen), schritte=schritte)
