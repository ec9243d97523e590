"""Versioniertes Checkpoint-Format (JSON) mit bit-exaktem Round-Trip der Gewichte."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .fehler import CheckpointFehler, NumerikFehler
from .logging_setup import konfiguriere_logger
from .netz import NetworkSpec, ParameterVector

logger = konfiguriere_logger(__name__, dateiname="checkpoint.log")

CHECKPOINT_FORMAT = "epo-labor-checkpoint/1"


@dataclass
class Checkpoint:
    """Gewichte samt NetworkSpec, Seed, Umgebungs-ID und Ledger-Snapshot."""

    spec: NetworkSpec
    params: ParameterVector
    seed: int
    env_id: str = ""
    ledger: dict[str, int] = field(default_factory=dict)


def speichere_checkpoint(pfad: Path, checkpoint: Checkpoint) -> Path:
    """Schreibt den Checkpoint; Floats werden mit voller Dezimalpräzision (repr) abgelegt."""
    inhalt: dict[str, Any] = {
        "format": CHECKPOINT_FORMAT,
        "network": checkpoint.spec.als_dict(),
        "seed": int(checkpoint.seed),
        "env_id": checkpoint.env_id,
        "ledger": {schluessel: int(wert) for schluessel, wert in checkpoint.ledger.items()},
        "werte": [float(wert) for wert in checkpoint.params.values],
    }
    pfad.parent.mkdir(parents=True, exist_ok=True)
    pfad.write_text(json.dumps(inhalt, indent=1), encoding="utf-8")
    logger.info("Checkpoint gespeichert: %s (%s Parameter)", pfad, len(checkpoint.params))
    return pfad


def lade_checkpoint(pfad: Path) -> Checkpoint:
    """Liest einen Checkpoint und prüft Format-Tag und Layout."""
    try:
        inhalt = json.loads(Path(pfad).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointFehler(f"Checkpoint '{pfad}' konnte nicht gelesen werden: {exc}") from exc

    if not isinstance(inhalt, dict) or inhalt.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointFehler(f"Unbekanntes Checkpoint-Format in '{pfad}'.")

    try:
        spec = NetworkSpec.aus_dict(inhalt["network"])
        params = ParameterVector(values=np.array(inhalt["werte"], dtype=np.float64), layout=spec.layout())
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointFehler(f"Checkpoint '{pfad}' ist unvollständig: {exc}") from exc
    except NumerikFehler as exc:
        raise CheckpointFehler(f"Checkpoint '{pfad}' enthält nicht-endliche Gewichte: {exc}") from exc

    return Checkpoint(
        spec=spec,
        params=params,
        seed=int(inhalt.get("seed", 0)),
        env_id=str(inhalt.get("env_id", "")),
        ledger={str(k): int(v) for k, v in dict(inhalt.get("ledger", {})).items()},
    )
