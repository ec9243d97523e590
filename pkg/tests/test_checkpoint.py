"""Tests für das versionierte Checkpoint-Format."""

from __future__ import annotations

import json

import numpy as np
import pytest

from epo_labor.checkpoint import CHECKPOINT_FORMAT, Checkpoint, lade_checkpoint, speichere_checkpoint
from epo_labor.fehler import CheckpointFehler
from epo_labor.netz import NetworkSpec, initialisiere_parameter


def test_checkpoint_round_trip_ist_bit_exakt(tmp_path) -> None:
    spec = NetworkSpec(input_dim=3, hidden=(5, 4), action_count=3)
    params = initialisiere_parameter(spec, np.random.default_rng(9))
    params = params.mit_werten(params.values + np.random.default_rng(1).normal(0, 1e-3, len(params)))

    pfad = speichere_checkpoint(
        tmp_path / "sub" / "best.checkpoint",
        Checkpoint(spec=spec, params=params, seed=42, env_id="catch-dense", ledger={"steps_total": 7}),
    )
    geladen = lade_checkpoint(pfad)

    assert geladen.spec == spec
    assert np.array_equal(geladen.params.values, params.values)
    assert (geladen.seed, geladen.env_id, geladen.ledger) == (42, "catch-dense", {"steps_total": 7})
    assert json.loads(pfad.read_text(encoding="utf-8"))["format"] == CHECKPOINT_FORMAT


def test_unbekanntes_format_wird_abgewiesen(tmp_path) -> None:
    pfad = tmp_path / "alt.checkpoint"
    pfad.write_text(json.dumps({"format": "irgendwas/0"}), encoding="utf-8")

    with pytest.raises(CheckpointFehler):
        lade_checkpoint(pfad)


def test_unvollstaendiger_checkpoint_wird_abgewiesen(tmp_path) -> None:
    pfad = tmp_path / "kaputt.checkpoint"
    pfad.write_text(
        json.dumps({"format": CHECKPOINT_FORMAT, "network": {"input_dim": 2, "hidden": [3], "action_count": 2}, "werte": [0.0]}),
        encoding="utf-8",
    )

    with pytest.raises(CheckpointFehler):
        lade_checkpoint(pfad)


def test_fehlende_datei_meldet_checkpointfehler(tmp_path) -> None:
    with pytest.raises(CheckpointFehler):
        lade_checkpoint(tmp_path / "fehlt.checkpoint")


@pytest.mark.parametrize("wert", [float("nan"), float("inf"), float("-inf")])
def test_nicht_endliche_gewichte_melden_checkpointfehler(tmp_path, wert: float) -> None:
    spec = NetworkSpec(input_dim=2, hidden=(3,), action_count=2)
    pfad = speichere_checkpoint(
        tmp_path / "best.checkpoint",
        Checkpoint(spec=spec, params=initialisiere_parameter(spec, np.random.default_rng(0)), seed=1),
    )
    inhalt = json.loads(pfad.read_text(encoding="utf-8"))
    inhalt["werte"][0] = wert
    pfad.write_text(json.dumps(inhalt), encoding="utf-8")

    with pytest.raises(CheckpointFehler, match="nicht-endliche"):
        lade_checkpoint(pfad)
