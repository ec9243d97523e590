"""Minimales Actor-Critic-MLP mit Rückwärtsrechnung, Parameter-Flattening und Adam.

Das Netz besteht aus einem gemeinsamen tanh-Trunk und zwei linearen Köpfen
(Policy-Logits und Wertschätzung). Alle Gewichte liegen flach in einem
:class:`ParameterVector`; Evolution und PPO arbeiten ausschließlich auf dieser
flachen Darstellung.

Gewichtskonvention je Schicht: ``z = x @ W + b`` mit ``W`` der Form
``(rows=eingang, cols=ausgang)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Protocol

import numpy as np

from .fehler import DimensionsFehler, NumerikFehler, VertragsVerletzung

AKTIVIERUNG_TANH = "tanh"

# Initialisierungsverstärkung je Kopf (Trunk orthogonal mit sqrt(2)).
_GAIN_TRUNK = math.sqrt(2.0)
_GAIN_POLICY = 0.01
_GAIN_VALUE = 1.0


@dataclass(frozen=True)
class SchichtLayout:
    """Deskriptor einer dichten Schicht im flachen Parameterlayout."""

    name: str
    rows: int
    cols: int
    bias: int

    @property
    def groesse(self) -> int:
        return self.rows * self.cols + self.bias


@dataclass(frozen=True)
class NetworkSpec:
    """Form des Actor-Critic-Netzes; alle Populationsmitglieder teilen eine Spec."""

    input_dim: int
    hidden: tuple[int, ...]
    action_count: int
    activation: str = AKTIVIERUNG_TANH

    def __post_init__(self) -> None:
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not self.hidden:
            raise VertragsVerletzung("NetworkSpec benötigt mindestens eine versteckte Schicht.")
        if self.input_dim < 1 or self.action_count < 1 or any(h < 1 for h in self.hidden):
            raise VertragsVerletzung(f"Alle Dimensionen müssen >= 1 sein: {self}")
        if self.activation != AKTIVIERUNG_TANH:
            raise VertragsVerletzung(f"Nur tanh wird als Aktivierung unterstützt, nicht '{self.activation}'.")

    def layout(self) -> tuple[SchichtLayout, ...]:
        """Liefert die geordneten Schichtdeskriptoren: Trunk, Policy-Kopf, Wert-Kopf."""
        schichten: list[SchichtLayout] = []
        eingang = self.input_dim
        for index, breite in enumerate(self.hidden):
            schichten.append(SchichtLayout(name=f"trunk_{index}", rows=eingang, cols=breite, bias=breite))
            eingang = breite
        schichten.append(SchichtLayout(name="policy", rows=eingang, cols=self.action_count, bias=self.action_count))
        schichten.append(SchichtLayout(name="value", rows=eingang, cols=1, bias=1))
        return tuple(schichten)

    @property
    def anzahl_parameter(self) -> int:
        return sum(schicht.groesse for schicht in self.layout())

    def als_dict(self) -> dict[str, Any]:
        return {
            "input_dim": self.input_dim,
            "hidden": list(self.hidden),
            "action_count": self.action_count,
            "activation": self.activation,
        }

    @classmethod
    def aus_dict(cls, daten: dict[str, Any]) -> "NetworkSpec":
        return cls(
            input_dim=int(daten["input_dim"]),
            hidden=tuple(int(h) for h in daten["hidden"]),
            action_count=int(daten["action_count"]),
            activation=str(daten.get("activation", AKTIVIERUNG_TANH)),
        )


@dataclass(frozen=True, eq=False)
class ParameterVector:
    """Flacher, schreibgeschützter Gewichtsvektor samt Layout."""

    values: np.ndarray
    layout: tuple[SchichtLayout, ...]

    def __post_init__(self) -> None:
        werte = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        erwartet = sum(schicht.groesse for schicht in self.layout)
        if werte.shape[0] != erwartet:
            raise DimensionsFehler(f"ParameterVector hat {werte.shape[0]} Werte, Layout erwartet {erwartet}.")
        if not np.all(np.isfinite(werte)):
            raise NumerikFehler("ParameterVector enthält nicht-endliche Werte.")
        werte.setflags(write=False)
        object.__setattr__(self, "values", werte)
        object.__setattr__(self, "layout", tuple(self.layout))

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def kompatibel(self, anderer: "ParameterVector") -> bool:
        return self.layout == anderer.layout

    def mit_werten(self, werte: np.ndarray) -> "ParameterVector":
        """Erzeugt einen neuen Vektor mit gleichem Layout und neuen Werten."""
        return ParameterVector(values=werte, layout=self.layout)

    def schichten(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Entpackt den flachen Vektor in ``(W, b)``-Paare (schreibgeschützte Sichten)."""
        paare: list[tuple[np.ndarray, np.ndarray]] = []
        offset = 0
        for schicht in self.layout:
            gewichte = self.values[offset : offset + schicht.rows * schicht.cols].reshape(schicht.rows, schicht.cols)
            offset += schicht.rows * schicht.cols
            bias = self.values[offset : offset + schicht.bias]
            offset += schicht.bias
            paare.append((gewichte, bias))
        return paare

    @classmethod
    def aus_schichten(
        cls, paare: list[tuple[np.ndarray, np.ndarray]], layout: tuple[SchichtLayout, ...]
    ) -> "ParameterVector":
        """Packt ``(W, b)``-Paare in der Layout-Reihenfolge in einen flachen Vektor."""
        if len(paare) != len(layout):
            raise DimensionsFehler(f"{len(paare)} Schichten übergeben, Layout erwartet {len(layout)}.")
        teile: list[np.ndarray] = []
        for (gewichte, bias), schicht in zip(paare, layout):
            if np.shape(gewichte) != (schicht.rows, schicht.cols) or np.shape(bias) != (schicht.bias,):
                raise DimensionsFehler(f"Schicht '{schicht.name}' hat nicht die erwartete Form.")
            teile.append(np.asarray(gewichte, dtype=np.float64).reshape(-1))
            teile.append(np.asarray(bias, dtype=np.float64).reshape(-1))
        return cls(values=np.concatenate(teile), layout=layout)


def _pruefe_passung(params: ParameterVector, spec: NetworkSpec) -> None:
    if params.layout != spec.layout():
        raise DimensionsFehler("ParameterVector passt nicht zum Layout der NetworkSpec.")


def nullparameter(spec: NetworkSpec) -> ParameterVector:
    """Liefert ein Netz mit ausschließlich Nullgewichten."""
    return ParameterVector(values=np.zeros(spec.anzahl_parameter), layout=spec.layout())


def _orthogonal(rows: int, cols: int, gain: float, rng: np.random.Generator) -> np.ndarray:
    if rows >= cols:
        q, r = np.linalg.qr(rng.standard_normal((rows, cols)))
        return gain * q * np.where(np.diag(r) < 0, -1.0, 1.0)
    q, r = np.linalg.qr(rng.standard_normal((cols, rows)))
    return gain * (q * np.where(np.diag(r) < 0, -1.0, 1.0)).T


def initialisiere_parameter(spec: NetworkSpec, rng: np.random.Generator) -> ParameterVector:
    """Orthogonale, skalierte Initialisierung; Biases starten bei null."""
    paare: list[tuple[np.ndarray, np.ndarray]] = []
    for schicht in spec.layout():
        if schicht.name == "policy":
            gain = _GAIN_POLICY
        elif schicht.name == "value":
            gain = _GAIN_VALUE
        else:
            gain = _GAIN_TRUNK
        paare.append((_orthogonal(schicht.rows, schicht.cols, gain, rng), np.zeros(schicht.bias)))
    return ParameterVector.aus_schichten(paare, spec.layout())


@dataclass
class _Vorwaertscache:
    aktivierungen: list[np.ndarray]
    logits: np.ndarray
    werte: np.ndarray


def _vorwaerts(params: ParameterVector, spec: NetworkSpec, beobachtungen: np.ndarray) -> _Vorwaertscache:
    _pruefe_passung(params, spec)
    eingabe = np.asarray(beobachtungen, dtype=np.float64)
    if eingabe.ndim != 2 or eingabe.shape[1] != spec.input_dim:
        raise DimensionsFehler(
            f"Beobachtung hat Form {eingabe.shape}, erwartet (N, {spec.input_dim})."
        )
    paare = params.schichten()
    layout = params.layout
    aktivierungen = [eingabe]
    for (gewichte, bias), schicht in zip(paare[:-2], layout[:-2]):
        aktiv = np.tanh(aktivierungen[-1] @ gewichte + bias)
        if not np.all(np.isfinite(aktiv)):
            raise NumerikFehler(f"Nicht-endliche Aktivierung in Schicht '{schicht.name}'.", schicht=schicht.name)
        aktivierungen.append(aktiv)
    (w_pol, b_pol), (w_val, b_val) = paare[-2], paare[-1]
    logits = aktivierungen[-1] @ w_pol + b_pol
    werte = (aktivierungen[-1] @ w_val + b_val)[:, 0]
    if not np.all(np.isfinite(logits)):
        raise NumerikFehler("Nicht-endliche Logits im Policy-Kopf.", schicht="policy")
    if not np.all(np.isfinite(werte)):
        raise NumerikFehler("Nicht-endliche Wertschätzung im Wert-Kopf.", schicht="value")
    return _Vorwaertscache(aktivierungen=aktivierungen, logits=logits, werte=werte)


def forward(params: ParameterVector, spec: NetworkSpec, obs: np.ndarray) -> tuple[np.ndarray, float]:
    """Berechnet Logits und Wertschätzung für eine einzelne Beobachtung."""
    beobachtung = np.asarray(obs, dtype=np.float64)
    if beobachtung.shape != (spec.input_dim,):
        raise DimensionsFehler(f"Beobachtung hat Länge {beobachtung.shape}, erwartet ({spec.input_dim},).")
    cache = _vorwaerts(params, spec, beobachtung[None, :])
    return cache.logits[0], float(cache.werte[0])


def forward_batch(params: ParameterVector, spec: NetworkSpec, beobachtungen: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batch-Variante von :func:`forward`: Logits ``(N, A)`` und Werte ``(N,)``."""
    cache = _vorwaerts(params, spec, beobachtungen)
    return cache.logits, cache.werte


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Numerisch stabile Log-Softmax über die letzte Achse."""
    z = np.asarray(logits, dtype=np.float64)
    verschoben = z - np.max(z, axis=-1, keepdims=True)
    return verschoben - np.log(np.sum(np.exp(verschoben), axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def softmax_logprob(logits: np.ndarray, action: int) -> float:
    """Liefert ``log pi(action | s)`` für einen Logit-Vektor."""
    z = np.asarray(logits, dtype=np.float64).reshape(-1)
    if not 0 <= int(action) < z.shape[0]:
        raise VertragsVerletzung(f"Aktion {action} liegt außerhalb von [0, {z.shape[0]}).")
    return float(log_softmax(z)[int(action)])


def entropy(logits: np.ndarray) -> float:
    """Entropie der Softmax-Verteilung, geklemmt auf ``[0, ln A]``."""
    z = np.asarray(logits, dtype=np.float64).reshape(-1)
    if z.shape[0] == 0:
        raise VertragsVerletzung("Entropie benötigt mindestens einen Logit.")
    logp = log_softmax(z)
    wert = float(-np.sum(np.exp(logp) * logp))
    return min(max(wert, 0.0), math.log(z.shape[0]))


def entropie_batch(logits: np.ndarray) -> np.ndarray:
    logp = log_softmax(logits)
    return -np.sum(np.exp(logp) * logp, axis=-1)


@dataclass
class VerlustAuswertung:
    """Skalarer Verlust samt Ableitungen nach Logits, Werten und optional Parametern."""

    wert: float
    d_logits: np.ndarray
    d_werte: np.ndarray
    d_params: np.ndarray | None = None
    diagnose: dict[str, float] = field(default_factory=dict)


class Verlust(Protocol):
    """Schnittstelle der Verluste, die :func:`backward` differenzieren kann."""

    def auswerten(self, logits: np.ndarray, werte: np.ndarray, params: ParameterVector) -> VerlustAuswertung:
        ...


def wert_und_gradient(
    params: ParameterVector, spec: NetworkSpec, beobachtungen: np.ndarray, verlust: Verlust
) -> tuple[VerlustAuswertung, ParameterVector]:
    """Vorwärtsrechnung, Verlustauswertung und Rückwärtsrechnung in einem Durchgang."""
    beobachtungen = np.asarray(beobachtungen, dtype=np.float64)
    if beobachtungen.ndim != 2 or beobachtungen.shape[0] == 0:
        raise VertragsVerletzung("Backward benötigt einen nichtleeren Batch der Form (N, D).")
    cache = _vorwaerts(params, spec, beobachtungen)
    auswertung = verlust.auswerten(cache.logits, cache.werte, params)

    paare = params.schichten()
    layout = params.layout
    d_logits = np.asarray(auswertung.d_logits, dtype=np.float64)
    d_werte = np.asarray(auswertung.d_werte, dtype=np.float64).reshape(-1, 1)
    letzte = cache.aktivierungen[-1]

    gradienten: list[tuple[np.ndarray, np.ndarray]] = [None] * len(paare)  # type: ignore[list-item]
    gradienten[-2] = (letzte.T @ d_logits, d_logits.sum(axis=0))
    gradienten[-1] = (letzte.T @ d_werte, d_werte.sum(axis=0))
    d_aktiv = d_logits @ paare[-2][0].T + d_werte @ paare[-1][0].T

    for index in range(len(paare) - 3, -1, -1):
        schicht = layout[index]
        aktiv = cache.aktivierungen[index + 1]
        d_z = d_aktiv * (1.0 - aktiv * aktiv)
        d_gewichte = cache.aktivierungen[index].T @ d_z
        d_bias = d_z.sum(axis=0)
        if not (np.all(np.isfinite(d_gewichte)) and np.all(np.isfinite(d_bias))):
            raise NumerikFehler(f"Nicht-endlicher Gradient in Schicht '{schicht.name}'.", schicht=schicht.name)
        gradienten[index] = (d_gewichte, d_bias)
        d_aktiv = d_z @ paare[index][0].T

    for (d_gewichte, d_bias), schicht in zip(gradienten[-2:], layout[-2:]):
        if not (np.all(np.isfinite(d_gewichte)) and np.all(np.isfinite(d_bias))):
            raise NumerikFehler(f"Nicht-endlicher Gradient in Schicht '{schicht.name}'.", schicht=schicht.name)

    flach = np.concatenate([teil.reshape(-1) for paar in gradienten for teil in paar])
    if auswertung.d_params is not None:
        flach = flach + np.asarray(auswertung.d_params, dtype=np.float64).reshape(-1)
    return auswertung, ParameterVector(values=flach, layout=layout)


def backward(params: ParameterVector, spec: NetworkSpec, beobachtungen: np.ndarray, verlust: Verlust) -> ParameterVector:
    """Analytischer Gradient des Verlusts nach allen Parametern (gleiches Layout)."""
    return wert_und_gradient(params, spec, beobachtungen, verlust)[1]


def finite_differenzen_gradient(
    params: ParameterVector,
    spec: NetworkSpec,
    beobachtungen: np.ndarray,
    verlust: Verlust,
    schrittweite: float = 1e-5,
) -> np.ndarray:
    """Zentrale finite Differenzen als Orakel für die Gradientenprüfung."""
    basis = params.values.copy()
    gradient = np.zeros_like(basis)
    for index in range(basis.shape[0]):
        plus = basis.copy()
        plus[index] += schrittweite
        minus = basis.copy()
        minus[index] -= schrittweite
        cache_plus = _vorwaerts(params.mit_werten(plus), spec, beobachtungen)
        cache_minus = _vorwaerts(params.mit_werten(minus), spec, beobachtungen)
        wert_plus = verlust.auswerten(cache_plus.logits, cache_plus.werte, params.mit_werten(plus)).wert
        wert_minus = verlust.auswerten(cache_minus.logits, cache_minus.werte, params.mit_werten(minus)).wert
        gradient[index] = (wert_plus - wert_minus) / (2.0 * schrittweite)
    return gradient


@dataclass(frozen=True, eq=False)
class AdamState:
    """Zustand des Adam-Optimierers; genau ein Schreiber je Zustand."""

    m: np.ndarray
    v: np.ndarray
    step: int
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def neu(
        cls, params: ParameterVector, *, lr: float = 3e-4, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8
    ) -> "AdamState":
        return cls(m=np.zeros(len(params)), v=np.zeros(len(params)), step=0, lr=lr, beta1=beta1, beta2=beta2, eps=eps)


def adam_step(params: ParameterVector, grads: ParameterVector, state: AdamState) -> tuple[ParameterVector, AdamState]:
    """Ein Adam-Update mit bias-korrigierten Momenten."""
    if not params.kompatibel(grads) or state.m.shape[0] != len(params):
        raise VertragsVerletzung("Adam-Update: Layout von Parametern, Gradient und Zustand stimmt nicht überein.")
    schritt = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grads.values
    v = state.beta2 * state.v + (1.0 - state.beta2) * grads.values * grads.values
    m_dach = m / (1.0 - state.beta1**schritt)
    v_dach = v / (1.0 - state.beta2**schritt)
    neue_werte = params.values - state.lr * m_dach / (np.sqrt(v_dach) + state.eps)
    neuer_zustand = AdamState(m=m, v=v, step=schritt, lr=state.lr, beta1=state.beta1, beta2=state.beta2, eps=state.eps)
    return params.mit_werten(neue_werte), neuer_zustand
