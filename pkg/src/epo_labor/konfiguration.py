"""Experimentkonfiguration im flachen Punkt-Schlüssel-Format.

Beispiel::

    # Kommentare beginnen mit '#'
    mode=epo
    env.id=catch-sparse
    evo.mutation_prob=0.3
    run.seeds=1,2,3

Vorrang: Standardwerte < Konfigurationsdatei < ``--set key=value`` < explizite Flags.
Der aufgelöste Snapshot wird im selben Format geschrieben und reproduziert
einen Lauf bit-exakt.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Callable, Mapping

from .config import (
    MODI,
    MODUS_EPO_TL,
    MODUS_HYPERSUCHE,
    STANDARD_BERICHT_EPISODEN,
    STANDARD_FINETUNE_SWEEP,
    STANDARD_PRETRAIN_SWEEP,
    EpoConfig,
    EvoConfig,
    PPOConfig,
    pruefe,
)
from .fehler import KonfigurationsFehler
from .hypersuche import SearchSpace


@dataclass(frozen=True)
class SuchEinstellungen:
    space: SearchSpace = field(default_factory=SearchSpace)
    trials: int = 8
    repeats: int = 3
    seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    """Vollständig aufgelöste Experimentkonfiguration."""

    mode: str = "epo"
    epo: EpoConfig = field(default_factory=EpoConfig)
    seeds: tuple[int, ...] = (0,)
    out: Path = Path("ergebnisse")
    checkpoint: Path | None = None
    report_eval_episodes: int = STANDARD_BERICHT_EPISODEN
    sweep_pretrain: tuple[int, ...] = STANDARD_PRETRAIN_SWEEP
    sweep_finetune: tuple[int, ...] = STANDARD_FINETUNE_SWEEP
    suche: SuchEinstellungen = field(default_factory=SuchEinstellungen)

    def __post_init__(self) -> None:
        pruefe(self.mode in MODI, "mode", f"erlaubt sind {', '.join(MODI)}")
        pruefe(len(self.seeds) >= 1, "run.seeds", "mindestens ein Seed ist erforderlich")
        pruefe(all(seed >= 0 for seed in self.seeds), "run.seeds", "Seeds dürfen nicht negativ sein")
        pruefe(len(set(self.seeds)) == len(self.seeds), "run.seeds", "Seeds müssen eindeutig sein")
        pruefe(self.report_eval_episodes >= 1, "report.eval_episodes", "muss mindestens 1 sein")
        pruefe(
            self.mode != MODUS_EPO_TL or self.checkpoint is not None,
            "epo.checkpoint",
            "Modus epo-tl benötigt einen Checkpoint",
        )
        pruefe(all(wert >= 0 for wert in self.sweep_pretrain), "sweep.pretrain", "Werte dürfen nicht negativ sein")
        pruefe(all(wert >= 0 for wert in self.sweep_finetune), "sweep.finetune", "Werte dürfen nicht negativ sein")
        if self.mode == MODUS_HYPERSUCHE:
            pruefe(self.suche.trials >= 1, "search.trials", "muss mindestens 1 sein")
            pruefe(self.suche.repeats >= 1, "search.repeats", "muss mindestens 1 sein")


# --- Wertkonvertierung -------------------------------------------------------


def _bool(text: str) -> bool:
    wert = text.strip().lower()
    if wert in ("true", "1", "ja", "yes"):
        return True
    if wert in ("false", "0", "nein", "no"):
        return False
    raise ValueError(f"'{text}' ist kein Wahrheitswert")


def _int_liste(text: str) -> tuple[int, ...]:
    """Kommaliste mit optionalen Bereichen, z. B. ``1-3,7`` -> ``(1, 2, 3, 7)``."""
    werte: list[int] = []
    for teil in (t.strip() for t in text.split(",")):
        if not teil:
            continue
        if "-" in teil[1:]:
            start, ende = teil.split("-", maxsplit=1)
            werte.extend(range(int(start), int(ende) + 1))
        else:
            werte.append(int(teil))
    return tuple(werte)


def _float_paar(text: str) -> tuple[float, float]:
    teile = [float(t) for t in text.split(",")]
    if len(teile) != 2:
        raise ValueError("erwartet zwei Werte 'min,max'")
    return teile[0], teile[1]


def _int_paar(text: str) -> tuple[int, int]:
    teile = [int(t) for t in text.split(",")]
    if len(teile) != 2:
        raise ValueError("erwartet zwei Werte 'min,max'")
    return teile[0], teile[1]


def _optional(konverter: Callable[[str], Any]) -> Callable[[str], Any]:
    def _konvertiere(text: str) -> Any:
        if text.strip().lower() in ("", "none", "null"):
            return None
        return konverter(text)

    return _konvertiere


def _pfad(text: str) -> Path:
    return Path(text.strip())


def _text(text: str) -> str:
    return text.strip()


def _zahl(wert: Any) -> str:
    if isinstance(wert, bool):
        return "true" if wert else "false"
    if isinstance(wert, float):
        return repr(wert)
    return str(wert)


def _liste(werte: tuple[Any, ...]) -> str:
    return ",".join(_zahl(wert) for wert in werte)


# Schlüssel -> (Gruppe, Feld, Konverter). Gruppen: env, ppo, evo, epo, budget, experiment, suche.
_SCHLUESSEL: dict[str, tuple[str, str, Callable[[str], Any]]] = {
    "mode": ("experiment", "mode", _text),
    "env.id": ("env", "env_id", _text),
    "env.horizon": ("env", "horizon", int),
    "env.seed": ("env", "seed", int),
    "env.noop_min": ("env", "noop_min", int),
    "env.noop_max": ("env", "noop_max", int),
    "env.eval_stochastic": ("env", "eval_stochastic", _bool),
    "net.hidden": ("epo", "hidden", _int_liste),
    "epo.pretrain_steps": ("epo", "pretrain_steps", int),
    "epo.finetune_steps": ("epo", "finetune_steps", int),
    "epo.fitness_episodes": ("epo", "fitness_episodes", int),
    "epo.initial_clones": ("epo", "initial_clones", int),
    "epo.eval_seed_policy": ("epo", "eval_seed_policy", _text),
    "epo.checkpoint": ("experiment", "checkpoint", _optional(_pfad)),
    "budget.steps": ("budget", "steps", _optional(int)),
    "budget.seconds": ("budget", "seconds", _optional(float)),
    "run.seeds": ("experiment", "seeds", _int_liste),
    "run.out": ("experiment", "out", _pfad),
    "run.max_workers": ("epo", "max_workers", int),
    "report.eval_episodes": ("experiment", "report_eval_episodes", int),
    "sweep.pretrain": ("experiment", "sweep_pretrain", _int_liste),
    "sweep.finetune": ("experiment", "sweep_finetune", _int_liste),
    "search.trials": ("suche", "trials", int),
    "search.repeats": ("suche", "repeats", int),
    "search.seed": ("suche", "seed", int),
    "search.mutation_prob": ("space", "mutation_prob", _float_paar),
    "search.elite_count": ("space", "elite_count", _int_paar),
    "search.population_size": ("space", "population_size", _int_paar),
}


def _konverter_fuer(typ: Any) -> Callable[[str], Any]:
    # Annotationen liegen wegen ``from __future__ import annotations`` als Text vor.
    name = typ if isinstance(typ, str) else getattr(typ, "__name__", "")
    return {"bool": _bool, "int": int, "float": float}.get(name, _text)


for _gruppe, _klasse in (("ppo", PPOConfig), ("evo", EvoConfig)):
    for _feld in fields(_klasse):
        _SCHLUESSEL[f"{_gruppe}.{_feld.name}"] = (_gruppe, _feld.name, _konverter_fuer(_feld.type))

BEKANNTE_SCHLUESSEL: tuple[str, ...] = tuple(sorted(_SCHLUESSEL))


def parse_zuweisung(zeile: str) -> tuple[str, str]:
    """Zerlegt ``key=value``; unbekannte Schlüssel werden abgewiesen."""
    if "=" not in zeile:
        raise KonfigurationsFehler(f"Zuweisung '{zeile}' hat nicht die Form key=value.", schluessel=zeile.strip())
    schluessel, wert = zeile.split("=", maxsplit=1)
    schluessel = schluessel.strip()
    if schluessel not in _SCHLUESSEL:
        raise KonfigurationsFehler(f"Unbekannter Konfigurationsschlüssel '{schluessel}'.", schluessel=schluessel)
    return schluessel, wert.strip()


def lese_konfigurationstext(text: str) -> dict[str, str]:
    werte: dict[str, str] = {}
    for rohzeile in text.splitlines():
        zeile = rohzeile.strip()
        if not zeile or zeile.startswith("#"):
            continue
        schluessel, wert = parse_zuweisung(zeile)
        werte[schluessel] = wert
    return werte


def lese_konfigurationsdatei(pfad: Path) -> dict[str, str]:
    try:
        text = Path(pfad).read_text(encoding="utf-8")
    except OSError as exc:
        raise KonfigurationsFehler(f"Konfigurationsdatei '{pfad}' ist nicht lesbar: {exc}", schluessel="--config") from exc
    return lese_konfigurationstext(text)


def baue_experiment(werte: Mapping[str, str]) -> ExperimentConfig:
    """Löst Rohwerte (Punkt-Schlüssel -> Text) gegen die Standardwerte auf."""
    gruppen: dict[str, dict[str, Any]] = {}
    for schluessel, rohwert in werte.items():
        if schluessel not in _SCHLUESSEL:
            raise KonfigurationsFehler(f"Unbekannter Konfigurationsschlüssel '{schluessel}'.", schluessel=schluessel)
        gruppe, feld, konverter = _SCHLUESSEL[schluessel]
        try:
            gruppen.setdefault(gruppe, {})[feld] = konverter(rohwert)
        except (TypeError, ValueError) as exc:
            raise KonfigurationsFehler(
                f"Wert '{rohwert}' für '{schluessel}' ist ungültig: {exc}", schluessel=schluessel
            ) from exc

    standard = ExperimentConfig()
    epo = replace(
        standard.epo,
        env=replace(standard.epo.env, **gruppen.get("env", {})),
        ppo=replace(standard.epo.ppo, **gruppen.get("ppo", {})),
        evo=replace(standard.epo.evo, **gruppen.get("evo", {})),
        budget=replace(standard.epo.budget, **gruppen.get("budget", {})),
        **gruppen.get("epo", {}),
    )
    suche = replace(
        standard.suche,
        space=replace(standard.suche.space, **gruppen.get("space", {})),
        **gruppen.get("suche", {}),
    )
    return replace(standard, epo=epo, suche=suche, **gruppen.get("experiment", {}))


def serialisiere_experiment(config: ExperimentConfig) -> str:
    """Schreibt alle Schlüssel sortiert; Floats mit voller Präzision."""
    epo = config.epo
    werte: dict[str, str] = {
        "mode": config.mode,
        "env.id": epo.env.env_id,
        "env.horizon": _zahl(epo.env.horizon),
        "env.seed": _zahl(epo.env.seed),
        "env.noop_min": _zahl(epo.env.noop_min),
        "env.noop_max": _zahl(epo.env.noop_max),
        "env.eval_stochastic": _zahl(epo.env.eval_stochastic),
        "net.hidden": _liste(epo.hidden),
        "epo.pretrain_steps": _zahl(epo.pretrain_steps),
        "epo.finetune_steps": _zahl(epo.finetune_steps),
        "epo.fitness_episodes": _zahl(epo.fitness_episodes),
        "epo.initial_clones": _zahl(epo.initial_clones),
        "epo.eval_seed_policy": epo.eval_seed_policy,
        "epo.checkpoint": "none" if config.checkpoint is None else config.checkpoint.as_posix(),
        "budget.steps": "none" if epo.budget.steps is None else _zahl(epo.budget.steps),
        "budget.seconds": "none" if epo.budget.seconds is None else _zahl(float(epo.budget.seconds)),
        "run.seeds": _liste(config.seeds),
        "run.out": config.out.as_posix(),
        "run.max_workers": _zahl(epo.max_workers),
        "report.eval_episodes": _zahl(config.report_eval_episodes),
        "sweep.pretrain": _liste(config.sweep_pretrain),
        "sweep.finetune": _liste(config.sweep_finetune),
        "search.trials": _zahl(config.suche.trials),
        "search.repeats": _zahl(config.suche.repeats),
        "search.seed": _zahl(config.suche.seed),
        "search.mutation_prob": _liste(tuple(float(w) for w in config.suche.space.mutation_prob)),
        "search.elite_count": _liste(config.suche.space.elite_count),
        "search.population_size": _liste(config.suche.space.population_size),
    }
    for feld in fields(PPOConfig):
        werte[f"ppo.{feld.name}"] = _zahl(getattr(epo.ppo, feld.name))
    for feld in fields(EvoConfig):
        werte[f"evo.{feld.name}"] = _zahl(getattr(epo.evo, feld.name))
    return "".join(f"{schluessel}={werte[schluessel]}\n" for schluessel in sorted(werte))


def schreibe_snapshot(pfad: Path, config: ExperimentConfig) -> Path:
    pfad.parent.mkdir(parents=True, exist_ok=True)
    pfad.write_text(serialisiere_experiment(config), encoding="utf-8")
    return pfad


def lade_snapshot(pfad: Path) -> ExperimentConfig:
    return baue_experiment(lese_konfigurationsdatei(pfad))


def aufloesen(
    datei: Path | None = None,
    zuweisungen: list[str] | None = None,
    flags: Mapping[str, str | None] | None = None,
) -> ExperimentConfig:
    """Kombiniert Datei, ``--set``-Zuweisungen und Flags in dieser Vorrangfolge."""
    werte: dict[str, str] = {}
    if datei is not None:
        werte.update(lese_konfigurationsdatei(datei))
    for zuweisung in zuweisungen or []:
        schluessel, wert = parse_zuweisung(zuweisung)
        werte[schluessel] = wert
    for schluessel, wert in (flags or {}).items():
        if wert is not None:
            werte[schluessel] = wert
    return baue_experiment(werte)
