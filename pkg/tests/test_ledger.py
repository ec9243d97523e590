"""Tests für Stichprobenbuchhaltung, Metrikstrom und Laufzusammenfassung."""

from __future__ import annotations

import csv
import unittest
from concurrent.futures import ThreadPoolExecutor

import pytest

from epo_labor.config import KATEGORIE_BASELINE, KATEGORIE_EVAL, KATEGORIE_FINETUNE, KATEGORIE_PRETRAIN
from epo_labor.fehler import VertragsVerletzung
from epo_labor.ledger import MetricsStream, SampleLedger, ledger_delta, summarize


class TestSampleLedger(unittest.TestCase):
    """Prüft Buchungen, Snapshots und Serialisierung des Ledgers."""

    def test_buchung_von_null_schritten_aendert_nichts(self) -> None:
        ledger = SampleLedger(steps_eval=5)
        vorher = ledger.snapshot()

        ledger.charge(KATEGORIE_EVAL, 0)

        self.assertEqual(vorher, ledger.snapshot())

    def test_hundert_parallele_buchungen_gehen_nicht_verloren(self) -> None:
        ledger = SampleLedger()

        with ThreadPoolExecutor(max_workers=100) as executor:
            list(executor.map(lambda _: ledger.charge(KATEGORIE_FINETUNE, 1), range(100)))

        self.assertEqual(100, ledger.steps_finetune)
        self.assertEqual(100, ledger.total())

    def test_snapshot_enthaelt_summe_aller_kategorien(self) -> None:
        ledger = SampleLedger()
        ledger.charge(KATEGORIE_PRETRAIN, 30_000).charge(KATEGORIE_EVAL, 400).charge(KATEGORIE_FINETUNE, 1_500)

        self.assertEqual(
            {
                "steps_pretrain": 30_000,
                "steps_finetune": 1_500,
                "steps_eval": 400,
                "steps_baseline": 0,
                "steps_total": 31_900,
            },
            ledger.snapshot(),
        )

    def test_json_round_trip_ist_exakt(self) -> None:
        ledger = SampleLedger(steps_pretrain=3, steps_finetune=5, steps_eval=7, steps_baseline=11)

        self.assertEqual(ledger, SampleLedger.aus_json(ledger.als_json()))

    def test_unbekannte_kategorie_und_negative_schritte(self) -> None:
        ledger = SampleLedger()
        with self.assertRaises(VertragsVerletzung):
            ledger.charge("training", 1)
        with self.assertRaises(VertragsVerletzung):
            ledger.charge(KATEGORIE_EVAL, -1)
        with self.assertRaises(VertragsVerletzung):
            SampleLedger(steps_sonstiges=1)

    def test_delta_zweier_snapshots(self) -> None:
        ledger = SampleLedger(steps_pretrain=10)
        vorher = ledger.snapshot()
        ledger.charge(KATEGORIE_EVAL, 4)

        delta = ledger_delta(vorher, ledger.snapshot())

        self.assertEqual(4, delta["steps_eval"])
        self.assertEqual(0, delta["steps_pretrain"])
        self.assertEqual(4, delta["steps_total"])


def test_metrikstrom_weist_fallende_schrittzahlen_ab() -> None:
    stream = MetricsStream()
    stream.protokolliere(100, "mean_reward", 1.0)
    stream.protokolliere(100, "loss", 0.5)

    with pytest.raises(VertragsVerletzung):
        stream.protokolliere(99, "mean_reward", 2.0)
    assert [z.name for z in stream.zeilen] == ["mean_reward", "loss"]


def test_metrikstrom_schreibt_csv(tmp_path) -> None:
    stream = MetricsStream()
    stream.protokolliere(10, "entropy", 0.693)

    pfad = stream.schreibe_csv(tmp_path / "metrics.csv")

    with pfad.open(encoding="utf-8", newline="") as datei:
        zeilen = list(csv.reader(datei))
    assert zeilen[0] == ["env_steps", "wall_clock_s", "name", "value"]
    assert zeilen[1][0] == "10"
    assert zeilen[1][2:] == ["entropy", "0.693"]


def test_zusammenfassung_einer_episode() -> None:
    zusammenfassung = summarize([4.0], SampleLedger())

    assert zusammenfassung.mittelwert == zusammenfassung.bester == 4.0


def test_zusammenfassung_mittel_und_bestwert() -> None:
    zusammenfassung = summarize([1.0, 2.0, 3.0], SampleLedger(steps_eval=60))

    assert zusammenfassung.mittelwert == pytest.approx(2.0)
    assert zusammenfassung.bester == 3.0
    assert zusammenfassung.stichproben == 60
    assert zusammenfassung.als_dict()["episodes"] == 3


def test_ppo_lauf_bucht_ausschliesslich_baseline() -> None:
    ledger = SampleLedger().charge(KATEGORIE_BASELINE, 2_048)

    aufschluesselung = summarize([1.0], ledger).aufschluesselung

    assert aufschluesselung == {"steps_pretrain": 0, "steps_finetune": 0, "steps_eval": 0, "steps_baseline": 2_048}


def test_leere_historie_ist_vertragsverletzung() -> None:
    with pytest.raises(VertragsVerletzung):
        summarize([], SampleLedger())
