"""Access to the example programs and machines shipped with the package."""

from __future__ import annotations

from importlib import resources

from .minsky import Machine, parse_machine
from .parser import ProgramFile, parse

EXAMPLES = ("c_ex1", "c_ex2", "c_ex3", "c_ex4", "c_ex5")
MACHINES = ("halt_only", "inc_loop", "three_state", "five_state", "ping_pong")


def corpus_dir():
    return resources.files("feh") / "corpus"


def _read(name: str, suffix: str) -> str:
    if not name.endswith(suffix):
        name += suffix
    return (corpus_dir() / name).read_text(encoding="utf-8")


def load_program(name: str) -> ProgramFile:
    """A corpus program by name, for example ``c_ex1``."""
    return parse(_read(name, ".feh"))


def load_machine(name: str) -> Machine:
    """A corpus machine by name, for example ``three_state``."""
    return parse_machine(_read(name, ".mm"))
