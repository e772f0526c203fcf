"""Load and store the plain-text artifact formats (.path, .game, .cert)."""
from __future__ import annotations

from pathlib import Path

from ..fixpoint import Certificate, parse_certificate
from ..games import ExplicitGame, dumps_game, loads_game
from ..paths import SimplePath, dumps_path, loads_path


def save_path(path: SimplePath, filename):
    Path(filename).write_text(dumps_path(path))


def load_path(filename) -> SimplePath:
    return loads_path(Path(filename).read_text())


def save_game(game: ExplicitGame, filename):
    Path(filename).write_text(dumps_game(game))


def load_game(filename) -> ExplicitGame:
    return loads_game(Path(filename).read_text())


def save_certificate(cert: Certificate, filename):
    Path(filename).write_text(cert.export())


def load_certificate(filename) -> Certificate:
    return parse_certificate(Path(filename).read_text())
