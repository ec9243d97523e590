"""Tests für Markdown-Rendering inkl. stabiler Abschnittsreihenfolge."""

import unittest

from epo_labor.models import GenerationReport, Operator, SeedErgebnis, VariantenStatistik, Vergleich
from epo_labor.report import VERLAUF_LIMIT, render_laufbericht, render_vergleich


def _statistik(name: str, stichproben: float) -> VariantenStatistik:
    return VariantenStatistik(
        variante=name, anzahl=3, mittelwert=42.5, halbbreite=1.25, beste_belohnung=50.0, stichproben=stichproben
    )


class TestReport(unittest.TestCase):
    """Prüft die Markdown-Ausgabe auf zentrale Inhalte."""

    def test_vergleich_nennt_referenz_und_reduktion(self) -> None:
        vergleich = Vergleich(
            env_id="catch-sparse",
            methoden=(_statistik("epo", 820_000), _statistik("ppo", 1_120_000)),
            reduktionen={"ppo": 26.785714285714285},
        )

        md = render_vergleich(vergleich)

        self.assertIn("- Referenzmethode: epo", md)
        self.assertIn("epo benötigt 26.8 % weniger Stichproben als ppo", md)
        self.assertIn("| epo | 3 | 42.500 | ± 1.250 | 50.000 | 820.000 |", md)

    def test_negative_reduktion_wird_als_warnung_markiert(self) -> None:
        vergleich = Vergleich(
            env_id="cartpole",
            methoden=(_statistik("pure-evo", 2_000), _statistik("epo", 1_000)),
            reduktionen={"epo": -100.0},
        )

        self.assertIn("⚠️ Warnung: pure-evo benötigt -100.0 %", render_vergleich(vergleich))

    def test_laufbericht_ohne_daten_zeigt_hinweis(self) -> None:
        md = render_laufbericht(modus="epo", env_id="cartpole", lauf_id="lauf-test", statistiken=[], seeds=[])

        self.assertIn("keine Daten vorhanden", md)
        self.assertNotIn("## Stichprobenaufschlüsselung", md)

    def test_verlauf_zeigt_nur_die_letzten_generationen(self) -> None:
        historie = [
            GenerationReport(
                generation=g,
                fitness={},
                best_fitness=float(g),
                mean_fitness=0.0,
                elite_ids=(),
                nachkommen={Operator.FINETUNED_OFFSPRING: 2, Operator.MUTATED_OFFSPRING: 3, Operator.CROSSOVER_OFFSPRING: 1},
                ledger_stand={"steps_total": 100 * g},
            )
            for g in range(VERLAUF_LIMIT + 5)
        ]

        md = render_laufbericht(
            modus="epo", env_id="cartpole", lauf_id="lauf-test", statistiken=[], seeds=[], historien={"epo": historie}
        )

        self.assertNotIn("| 4 | 4.000 |", md)
        self.assertIn(f"| {VERLAUF_LIMIT + 4} | {VERLAUF_LIMIT + 4}.000 | 0.000 | 2 | 3 | 1 |", md)

    def test_snapshot_abschnittsreihenfolge_bleibt_stabil(self) -> None:
        """Sichert die Reihenfolge der Pflichtabschnitte gegen versehentliche Regressionen."""
        md = render_laufbericht(
            modus="epo",
            env_id="catch-dense",
            lauf_id="lauf-20261019-101500-abcd1234",
            statistiken=[_statistik("epo", 1_000)],
            seeds=[SeedErgebnis("epo", 1, 40.0, 45.0, 1_000, 3)],
            ledger={"epo/seed-1": {"steps_eval": 400, "steps_total": 1_000}},
            historien={"epo (Seed 1)": []},
        )

        abschnitte = [
            "## Kopfbereich",
            "## Zusammenfassung",
            "## Stichprobenaufschlüsselung",
            "## Generationsverlauf: epo (Seed 1)",
            "## Artefakte",
        ]
        positionen = [md.index(abschnitt) for abschnitt in abschnitte]
        self.assertEqual(positionen, sorted(positionen))
        self.assertIn("| epo/seed-1 | 0 | 0 | 400 | 0 | 1000 |", md)


if __name__ == "__main__":
    unittest.main()
