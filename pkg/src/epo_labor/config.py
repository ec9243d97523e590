"""Zentrale Konfigurationen für Umgebungen, PPO, Evolution und EPO-Läufe.

Alle Konfigurationen sind eingefrorene Dataclasses und prüfen ihre Invarianten
direkt bei der Erzeugung. Abweichende Werte entstehen über ``dataclasses.replace``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .fehler import KonfigurationsFehler

UMGEBUNG_CARTPOLE = "cartpole"
UMGEBUNG_CATCH_DENSE = "catch-dense"
UMGEBUNG_CATCH_SPARSE = "catch-sparse"

NOOP_OBERGRENZE = 30
STANDARD_HIDDEN: tuple[int, ...] = (64, 64)

# Werte der Ablationen für Pre-Training- und Fine-Tuning-Dauer.
STANDARD_PRETRAIN_SWEEP: tuple[int, ...] = (0, 10_000, 20_000, 30_000, 40_000)
STANDARD_FINETUNE_SWEEP: tuple[int, ...] = (0, 500, 1_000)

SEED_POLITIK_GENERATION = "shared-per-generation"
SEED_POLITIK_FEST = "fixed"
SEED_POLITIKEN: tuple[str, ...] = (SEED_POLITIK_GENERATION, SEED_POLITIK_FEST)

SIGMA_MODUS_STD = "std"
SIGMA_MODUS_VAR = "var"

# Ledger-Kategorien der Stichprobenzählung.
KATEGORIE_PRETRAIN = "pretrain"
KATEGORIE_FINETUNE = "finetune"
KATEGORIE_EVAL = "eval"
KATEGORIE_BASELINE = "baseline"
LEDGER_KATEGORIEN: tuple[str, ...] = (KATEGORIE_PRETRAIN, KATEGORIE_FINETUNE, KATEGORIE_EVAL, KATEGORIE_BASELINE)

# Experimentmodi der Kommandozeile.
MODUS_PPO = "ppo"
MODUS_EPO = "epo"
MODUS_EPO_NOPT = "epo-nopt"
MODUS_PURE_EVO = "pure-evo"
MODUS_EPO_TL = "epo-tl"
MODUS_SWEEP_PRETRAIN = "sweep-pretrain"
MODUS_SWEEP_FINETUNE = "sweep-finetune"
MODUS_HYPERSUCHE = "hypersearch"
MODI: tuple[str, ...] = (
    MODUS_PPO,
    MODUS_EPO,
    MODUS_EPO_NOPT,
    MODUS_PURE_EVO,
    MODUS_EPO_TL,
    MODUS_SWEEP_PRETRAIN,
    MODUS_SWEEP_FINETUNE,
    MODUS_HYPERSUCHE,
)

STANDARD_BERICHT_EPISODEN = 20


def pruefe(bedingung: bool, schluessel: str, nachricht: str) -> None:
    if not bedingung:
        raise KonfigurationsFehler(f"Ungültiger Wert für '{schluessel}': {nachricht}", schluessel=schluessel)


@dataclass(frozen=True)
class EnvConfig:
    """Beschreibt eine Umgebung inklusive Horizont und No-op-Bereich."""

    env_id: str = UMGEBUNG_CARTPOLE
    horizon: int = 200
    seed: int = 0
    noop_min: int = 0
    noop_max: int = 0
    eval_stochastic: bool = False

    def __post_init__(self) -> None:
        pruefe(bool(self.env_id.strip()), "env.id", "Umgebungs-ID darf nicht leer sein")
        pruefe(self.horizon >= 1, "env.horizon", "Horizont muss mindestens 1 sein")
        pruefe(
            0 <= self.noop_min <= self.noop_max <= NOOP_OBERGRENZE,
            "env.noop_max",
            f"No-op-Bereich muss in [0, {NOOP_OBERGRENZE}] liegen und geordnet sein",
        )


@dataclass(frozen=True)
class PPOConfig:
    """PPO-Hyperparameter mit Stable-Baselines-nahen Standardwerten."""

    clip_eps: float = 0.2
    gamma: float = 0.99
    gae_lambda: float = 0.95
    epochs: int = 10
    minibatch_size: int = 64
    rollout_length: int = 512
    vf_coef: float = 0.5
    ent_coef: float = 0.0
    learning_rate: float = 3e-4
    max_grad_norm: float = 0.5
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    normalize_advantage: bool = True

    def __post_init__(self) -> None:
        pruefe(0.0 < self.clip_eps < 1.0, "ppo.clip_eps", "muss in (0, 1) liegen")
        pruefe(0.0 <= self.gamma <= 1.0, "ppo.gamma", "muss in [0, 1] liegen")
        pruefe(0.0 <= self.gae_lambda <= 1.0, "ppo.gae_lambda", "muss in [0, 1] liegen")
        pruefe(self.epochs >= 1, "ppo.epochs", "muss mindestens 1 sein")
        pruefe(self.minibatch_size >= 1, "ppo.minibatch_size", "muss mindestens 1 sein")
        pruefe(self.rollout_length >= 1, "ppo.rollout_length", "muss mindestens 1 sein")
        pruefe(self.learning_rate > 0.0, "ppo.learning_rate", "muss positiv sein")
        pruefe(self.max_grad_norm > 0.0, "ppo.max_grad_norm", "muss positiv sein")
        pruefe(self.vf_coef >= 0.0, "ppo.vf_coef", "darf nicht negativ sein")
        pruefe(self.ent_coef >= 0.0, "ppo.ent_coef", "darf nicht negativ sein")


@dataclass(frozen=True)
class EvoConfig:
    """Hyperparameter der evolutionären Operatoren (Optima: m=0.3, E=3, P=8)."""

    mutation_prob: float = 0.3
    elite_count: int = 3
    population_size: int = 8
    epsilon: float = 1e-8
    clamp_min: float = 0.01
    clamp_max: float = 0.1
    sigma_mode: str = SIGMA_MODUS_STD

    def __post_init__(self) -> None:
        pruefe(0.0 <= self.mutation_prob <= 1.0, "evo.mutation_prob", "muss in [0, 1] liegen")
        pruefe(self.elite_count >= 1, "evo.elite_count", "muss mindestens 1 sein")
        pruefe(
            self.elite_count < self.population_size,
            "evo.population_size",
            "muss größer als die Elite-Anzahl sein",
        )
        pruefe(self.epsilon > 0.0, "evo.epsilon", "muss positiv sein")
        pruefe(0.0 < self.clamp_min <= self.clamp_max, "evo.clamp_max", "Klemmgrenzen müssen geordnet sein")
        pruefe(self.sigma_mode in (SIGMA_MODUS_STD, SIGMA_MODUS_VAR), "evo.sigma_mode", "erlaubt sind std|var")


@dataclass(frozen=True)
class Budget:
    """Laufbudget in Umgebungsschritten und/oder Wall-Clock-Sekunden."""

    steps: int | None = 200_000
    seconds: float | None = None

    def __post_init__(self) -> None:
        pruefe(
            self.steps is not None or self.seconds is not None,
            "budget.steps",
            "mindestens ein Budget (Schritte oder Sekunden) ist erforderlich",
        )
        pruefe(self.steps is None or self.steps > 0, "budget.steps", "muss positiv sein")
        pruefe(self.seconds is None or self.seconds > 0, "budget.seconds", "muss positiv sein")


@dataclass(frozen=True)
class EpoConfig:
    """Gesamtkonfiguration eines EPO-Laufs (Konstanten des Grundalgorithmus als Standard)."""

    env: EnvConfig = field(default_factory=EnvConfig)
    evo: EvoConfig = field(default_factory=EvoConfig)
    ppo: PPOConfig = field(default_factory=PPOConfig)
    hidden: tuple[int, ...] = STANDARD_HIDDEN
    pretrain_steps: int = 30_000
    finetune_steps: int = 500
    fitness_episodes: int = 5
    initial_clones: int = 2
    eval_seed_policy: str = SEED_POLITIK_GENERATION
    budget: Budget = field(default_factory=Budget)
    max_workers: int = 4

    def __post_init__(self) -> None:
        pruefe(len(self.hidden) >= 1 and all(h >= 1 for h in self.hidden), "net.hidden", "mindestens eine Schicht >= 1")
        pruefe(self.pretrain_steps >= 0, "epo.pretrain_steps", "darf nicht negativ sein")
        pruefe(self.finetune_steps >= 0, "epo.finetune_steps", "darf nicht negativ sein")
        pruefe(self.fitness_episodes >= 1, "epo.fitness_episodes", "muss mindestens 1 sein")
        pruefe(self.initial_clones >= 1, "epo.initial_clones", "muss mindestens 1 sein")
        pruefe(self.eval_seed_policy in SEED_POLITIKEN, "epo.eval_seed_policy", f"erlaubt sind {', '.join(SEED_POLITIKEN)}")
        pruefe(self.max_workers >= 1, "run.max_workers", "muss mindestens 1 sein")
