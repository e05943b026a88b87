"""Tangent-category connections: checks, curvature and parallel transport."""

import json

from ._core import Error, ParseError, Program, __version__, canonical, commands, run, same_program

__all__ = [
    "Error",
    "ParseError",
    "Program",
    "__version__",
    "canonical",
    "commands",
    "report",
    "run",
    "same_program",
]


def report(source, command, *args, **options):
    """Run a command on DSL text and return (exit_code, parsed JSON report)."""
    code, out, err = run(command, list(args), source=source, format="json", **options)
    if code == 2:
        raise Error(err.strip())
    return code, json.loads(out)
