"""Richtungsreproduktion im Desk-Maßstab und PPO-Lernsanity.

Die Prüfungen laufen deutlich länger als die Unit-Tests (Größenordnung
30 Minuten mit Standardwerten) und liegen deshalb außerhalb von ``tests/``.

Geprüft wird:
- catch-sparse bei gleichem Schrittbudget: EPO ist in mindestens 8 von 10
  Seeds mindestens so gut wie reine Evolution und in mindestens 6 von 10
  Seeds mindestens so gut wie PPO.
- Reine Evolution belegt im Mittel den letzten Platz.
- Pre-Training-Sweep: der Zugewinn von 30.000 auf 40.000 Schritte ist nicht
  größer als der von 20.000 auf 30.000.
- PPO lernt auf cartpole: nach 50.000 Schritten ist die mittlere
  Bewertungsbelohnung in mindestens 9 von 10 Seeds höher als untrainiert.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from epo_labor.config import KATEGORIE_BASELINE, EnvConfig, PPOConfig  # noqa: E402
from epo_labor.experimente import run_experiment  # noqa: E402
from epo_labor.konfiguration import baue_experiment  # noqa: E402
from epo_labor.ledger import SampleLedger  # noqa: E402
from epo_labor.logging_setup import erstelle_lauf_id, konfiguriere_logger, setze_lauf_id  # noqa: E402
from epo_labor.models import SeedErgebnis  # noqa: E402
from epo_labor.netz import initialisiere_parameter  # noqa: E402
from epo_labor.ppo import train  # noqa: E402
from epo_labor.texte import STATUS_ERFOLG, STATUS_FEHLER  # noqa: E402
from epo_labor.umgebungen import evaluate_policy, spec_fuer_umgebung  # noqa: E402
from epo_labor.zufall import ZWECK_INIT, generator  # noqa: E402

logger = konfiguriere_logger(__name__, dateiname="desk_reproduktion.log")

PPO_SANITY_SCHRITTE = 50_000
BEWERTUNGS_EPISODEN = 10


def _nach_seed(ergebnisse: list[SeedErgebnis]) -> dict[int, float]:
    return {e.seed: e.mittlere_belohnung for e in ergebnisse}


def _experiment(modus: str, out: Path, seeds: str, budget: int, **extra: str) -> list[SeedErgebnis]:
    werte = {
        "mode": modus,
        "env.id": "catch-sparse",
        "run.seeds": seeds,
        "run.out": str(out / modus),
        "budget.steps": str(budget),
    }
    werte.update(extra)
    return run_experiment(baue_experiment(werte), fortschritt=lambda text: print(f"  - {text}")).seeds


def pruefe_richtung(out: Path, seeds: str, budget: int) -> list[tuple[bool, str]]:
    """Vergleicht EPO, PPO und reine Evolution bei gleichem Budget."""
    epo = _nach_seed(_experiment("epo", out, seeds, budget))
    ppo = _nach_seed(_experiment("ppo", out, seeds, budget))
    evo = _nach_seed(_experiment("pure-evo", out, seeds, budget))

    anzahl = len(epo)
    besser_als_evo = sum(epo[s] >= evo[s] for s in epo)
    besser_als_ppo = sum(epo[s] >= ppo[s] for s in epo)
    mittel = {name: sum(werte.values()) / anzahl for name, werte in (("epo", epo), ("ppo", ppo), ("pure-evo", evo))}

    return [
        (besser_als_evo * 10 >= 8 * anzahl, f"EPO ≥ reine Evolution in {besser_als_evo}/{anzahl} Seeds"),
        (besser_als_ppo * 10 >= 6 * anzahl, f"EPO ≥ PPO in {besser_als_ppo}/{anzahl} Seeds"),
        (
            min(mittel, key=mittel.get) == "pure-evo",
            "Mittelwerte: " + ", ".join(f"{name} {wert:.3f}" for name, wert in mittel.items()),
        ),
    ]


def pruefe_pretrain_sweep(out: Path, seeds: str, budget: int) -> tuple[bool, str]:
    """Abnehmender Grenznutzen des Pre-Trainings jenseits von 30.000 Schritten."""
    ergebnisse = _experiment(
        "sweep-pretrain", out, seeds, budget, **{"sweep.pretrain": "0,10000,20000,30000,40000"}
    )
    mittel: dict[str, float] = {}
    for ergebnis in ergebnisse:
        mittel.setdefault(ergebnis.variante, 0.0)
        mittel[ergebnis.variante] += ergebnis.mittlere_belohnung
    anzahl = len(ergebnisse) / 5
    mittel = {name: wert / anzahl for name, wert in mittel.items()}

    zugewinn_20_30 = mittel["pretrain-30000"] - mittel["pretrain-20000"]
    zugewinn_30_40 = mittel["pretrain-40000"] - mittel["pretrain-30000"]
    return zugewinn_30_40 <= zugewinn_20_30, f"Zugewinn 20k→30k {zugewinn_20_30:.3f}, 30k→40k {zugewinn_30_40:.3f}"


def pruefe_ppo_lernt(seeds: list[int]) -> tuple[bool, str]:
    """PPO mit Standardwerten auf cartpole verbessert die untrainierte Policy."""
    env = EnvConfig(env_id="cartpole")
    spec = spec_fuer_umgebung(env.env_id, (64, 64))
    verbessert = 0
    for seed in seeds:
        start = initialisiere_parameter(spec, generator(seed, ZWECK_INIT))
        vorher = evaluate_policy(start, spec, env, BEWERTUNGS_EPISODEN, seed).mittelwert
        trainiert = train(start, spec, env, PPO_SANITY_SCHRITTE, PPOConfig(), seed, SampleLedger(), KATEGORIE_BASELINE)
        nachher = evaluate_policy(trainiert, spec, env, BEWERTUNGS_EPISODEN, seed).mittelwert
        logger.info("PPO-Sanity Seed %s: %.2f -> %.2f", seed, vorher, nachher)
        verbessert += nachher > vorher
    return verbessert * 10 >= 9 * len(seeds), f"PPO verbessert sich in {verbessert}/{len(seeds)} Seeds"


def main(argv: list[str] | None = None) -> int:
    """Führt alle Richtungsprüfungen aus; Exit-Code 1, sobald eine Prüfung scheitert."""
    parser = argparse.ArgumentParser(description="Desk-Reproduktion der Richtungsergebnisse")
    parser.add_argument("--out", default="ergebnisse/desk", help="Ausgabeverzeichnis")
    parser.add_argument("--seeds", default="1-10", help="Seeds als Bereich, z. B. 1-10")
    parser.add_argument("--budget-steps", type=int, default=200_000, help="Schrittbudget je Lauf")
    parser.add_argument("--ohne-sweep", action="store_true", help="Pre-Training-Sweep überspringen")
    args = parser.parse_args(argv)

    setze_lauf_id(erstelle_lauf_id())
    out = Path(args.out)
    seed_liste = list(baue_experiment({"run.seeds": args.seeds}).seeds)

    pruefungen = pruefe_richtung(out, args.seeds, args.budget_steps)
    if not args.ohne_sweep:
        pruefungen.append(pruefe_pretrain_sweep(out, args.seeds, args.budget_steps))
    pruefungen.append(pruefe_ppo_lernt(seed_liste))

    for erfolgreich, text in pruefungen:
        print(f"- {STATUS_ERFOLG if erfolgreich else STATUS_FEHLER}: {text}")
    return 0 if all(erfolgreich for erfolgreich, _ in pruefungen) else 1


if __name__ == "__main__":
    sys.exit(main())
