"""Tests für Logformat, Handler-Wiederverwendung und Lauf-ID im Kontext."""

from __future__ import annotations

import pytest

from epo_labor.logging_setup import erstelle_lauf_id, hole_lauf_id, konfiguriere_logger, setze_lauf_id


def test_lauf_id_hat_praefix_und_ist_eindeutig() -> None:
    a, b = erstelle_lauf_id(), erstelle_lauf_id()

    assert a.startswith("lauf-")
    assert a != b


def test_leere_lauf_id_wird_zum_platzhalter() -> None:
    setze_lauf_id("   ")

    assert hole_lauf_id() == "-"


def test_logdatei_muss_auf_log_enden() -> None:
    with pytest.raises(ValueError):
        konfiguriere_logger("epo_labor.test", dateiname="protokoll.txt")


def test_logger_teilen_den_handler_je_datei_und_schreiben_die_lauf_id() -> None:
    a = konfiguriere_logger("epo_labor.test.a", dateiname="test_logging.log")
    b = konfiguriere_logger("epo_labor.test.b", dateiname="test_logging.log")
    konfiguriere_logger("epo_labor.test.a", dateiname="test_logging.log")

    assert len(a.handlers) == 1
    assert a.handlers[0] is b.handlers[0]

    setze_lauf_id("lauf-test-1234")
    a.info("Testeintrag")
    handler = a.handlers[0]
    handler.flush()

    with open(handler.baseFilename, encoding="utf-8") as datei:
        inhalt = datei.read()
    assert "run_id=lauf-test-1234 | Testeintrag" in inhalt
