"""Invariant submanifolds of affine control systems.

Thin wrappers over the C++ core: reports come back as plain dicts.
"""

import json
import os
from typing import Any, Dict, List, Tuple

from . import _core
from ._core import REPORT_SCHEMA, PfaffianError

__all__ = ["REPORT_SCHEMA", "PfaffianError", "analyze", "flag", "render_text", "canonical", "run_cli", "load"]


def load(path: "str | os.PathLike[str]") -> str:
    """Reads a system description file."""
    with open(path, encoding="utf-8") as f:
        return f.read()


def analyze(text: str, **config: Any) -> Dict[str, Any]:
    """Runs the full pipeline on a system description; returns the report."""
    return json.loads(_core.analyze_json(text, **config))


def flag(text: str, seed: int = 42) -> Dict[str, Any]:
    """Derived flag of the annihilating Pfaffian system."""
    return json.loads(_core.flag_json(text, seed))


def render_text(report: Dict[str, Any]) -> str:
    """Human-readable rendering of a report dict."""
    return _core.render_text(json.dumps(report))


def canonical(text: str) -> str:
    """The system description in canonical form."""
    return _core.print_system(text)


def run_cli(args: List[str], stdin: str = "") -> Tuple[int, str, str]:
    """Runs the command-line front end in-process."""
    return _core.run_cli(list(args), stdin)
