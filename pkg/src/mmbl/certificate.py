"""Run certificates: versioned, losslessly round-tripping plain text.

A certificate is an ordered mapping of sections; each section holds ordered
``key = value`` entries where values are strings, ints, floats (written at
17 significant digits) or lists of floats.  ``canonical_bytes`` drops the
[timings] section: wall-clock figures are inherently nondeterministic, and
the byte-determinism contract applies to everything else.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .exceptions import SchemaError

__all__ = ["RunCertificate", "parse_certificate"]

_VERSION = "mmbl-certificate v1"


def _fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(f"{float(x):.17g}" for x in v) + "]"
    return str(v)


def _parse_value(token: str):
    token = token.strip()
    if token.startswith("[") and token.endswith("]"):
        inner = token[1:-1].strip()
        if not inner:
            return []
        return [float(t) for t in inner.split(",")]
    if token == "true":
        return True
    if token == "false":
        return False
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return token


@dataclass
class RunCertificate:
    """Ordered {section: {key: value}} record of one run or one suite."""

    sections: dict = field(default_factory=dict)

    def set(self, section: str, key: str, value) -> None:
        self.sections.setdefault(section, {})[key] = value

    def get(self, section: str, key: str):
        return self.sections[section][key]

    def add_check(self, name: str, passed: bool) -> None:
        self.set("checks", name, "PASS" if passed else "FAIL")

    def all_checks_pass(self) -> bool:
        checks = self.sections.get("checks", {})
        return all(v == "PASS" for v in checks.values())

    def failures(self) -> list:
        checks = self.sections.get("checks", {})
        return [k for k, v in checks.items() if v != "PASS"]

    def serialize(self, include_timings: bool = True) -> str:
        lines = [_VERSION]
        for sec, entries in self.sections.items():
            if sec == "timings" and not include_timings:
                continue
            lines.append(f"[{sec}]")
            for key, value in entries.items():
                lines.append(f"{key} = {_fmt_value(value)}")
        return "\n".join(lines) + "\n"

    def canonical_bytes(self) -> bytes:
        return self.serialize(include_timings=False).encode("utf-8")

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.serialize())


def parse_certificate(path_or_text: str, is_text: bool = False) -> RunCertificate:
    if is_text:
        text = path_or_text
    else:
        with open(path_or_text, "r", encoding="utf-8") as fh:
            text = fh.read()
    lines = text.splitlines()
    if not lines or lines[0].strip() != _VERSION:
        raise SchemaError(
            f"unknown certificate version: '{lines[0] if lines else ''}'")
    cert = RunCertificate()
    section = None
    for line in lines[1:]:
        line = line.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1]
            cert.sections.setdefault(section, {})
            continue
        if section is None or "=" not in line:
            raise SchemaError(f"malformed certificate line: '{line}'")
        key, _, token = line.partition("=")
        cert.sections[section][key.strip()] = _parse_value(token)
    return cert
