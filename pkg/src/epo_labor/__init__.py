"""EPO-Labor: Evolutionäre Policy-Optimierung aus PPO und Neuroevolution im Desk-Maßstab."""

from .cli import main

__all__ = ["main"]
