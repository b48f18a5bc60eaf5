"""Flatness checks and triangular normal forms for two-input affine systems."""

import json
import os

from ._core import __version__, run

__all__ = ["__version__", "run", "CommandError", "command", "check", "flat_output", "transform", "bracket", "flags"]


class CommandError(RuntimeError):
    def __init__(self, code, message):
        super().__init__(message)
        self.exit_code = code


def _options(seed, samples, bound):
    args = []
    if seed is not None:
        args += ["--seed", str(seed)]
    if samples is not None:
        args += ["--samples", str(samples)]
    if bound is not None:
        args += ["--bound", str(bound)]
    return args


def command(name, path, *extra, seed=None, samples=None, bound=None):
    """Runs a subcommand in structured mode and returns the parsed document.

    Raises CommandError on errors (unreadable files, bad expressions); verdicts,
    including undecided ones, come back as documents.
    """
    args = ["--format", "structured"] + _options(seed, samples, bound) + [name, os.fspath(path)] + list(extra)
    code, out, err = run(args)
    if not out.strip():
        raise CommandError(code, err.strip())
    doc = json.loads(out)
    if "error" in doc.get("result", {}):
        raise CommandError(code, doc["result"]["error"])
    return doc


def check(path, **opts):
    return command("check", path, **opts)


def flat_output(path, phi1=None, phi2=None, **opts):
    extra = []
    if phi1 is not None:
        extra += ["--phi1", phi1]
    if phi2 is not None:
        extra += ["--phi2", phi2]
    return command("flat-output", path, *extra, **opts)


def transform(path, transcript=None, **opts):
    extra = [] if transcript is None else ["--transcript", os.fspath(transcript)]
    return command("transform", path, *extra, **opts)


def bracket(path, f, g, **opts):
    return command("bracket", path, f, g, **opts)


def flags(path, **opts):
    return command("flags", path, **opts)
