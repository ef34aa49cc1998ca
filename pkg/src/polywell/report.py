"""Structured text reports with a JSON mirror.

A report is an ordered list of ``key: value`` entries.  Values may be
strings, integers, booleans, rationals, vectors of rationals, floats, lists
of such values, or nested reports.  The text form is indented two spaces per
level; the JSON form keeps the same keys with rationals as ``"p/q"`` strings.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction

from .exact import format_rational

FORMAT_NAME = "polywell-report"
FORMAT_VERSION = 1


def _scalar_text(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".12g")
    if isinstance(v, int):
        return str(v)
    if isinstance(v, tuple):
        return "(" + ", ".join(_scalar_text(a) for a in v) + ")"
    return str(v)


def _scalar_json(v):
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, tuple):
        return [_scalar_json(a) for a in v]
    return v


class Report:
    def __init__(self, command: str | None = None):
        self.command = command
        self.entries: list[tuple[str, object]] = []

    def add(self, key: str, value) -> "Report":
        self.entries.append((key, value))
        return self

    def section(self, key: str) -> "Report":
        sub = Report()
        self.entries.append((key, sub))
        return sub

    def get(self, key: str):
        for k, v in self.entries:
            if k == key:
                return v
        raise KeyError(key)

    def _lines(self, indent: int) -> list[str]:
        pad = "  " * indent
        out = []
        for k, v in self.entries:
            if isinstance(v, Report):
                out.append(f"{pad}{k}:")
                out.extend(v._lines(indent + 1))
            elif isinstance(v, list):
                if not v:
                    out.append(f"{pad}{k}: []")
                    continue
                out.append(f"{pad}{k}:")
                for item in v:
                    if isinstance(item, Report):
                        sub = item._lines(indent + 2)
                        sub[0] = f"{pad}  - " + sub[0].lstrip()
                        out.extend(sub)
                    else:
                        out.append(f"{pad}  - {_scalar_text(item)}")
            else:
                out.append(f"{pad}{k}: {_scalar_text(v)}")
        return out

    def text(self) -> str:
        head = [f"{FORMAT_NAME} v{FORMAT_VERSION}"]
        if self.command is not None:
            head.append(f"command: {self.command}")
        return "\n".join(head + self._lines(0)) + "\n"

    def _obj(self) -> dict:
        out = {}
        for k, v in self.entries:
            if isinstance(v, Report):
                out[k] = v._obj()
            elif isinstance(v, list):
                out[k] = [i._obj() if isinstance(i, Report) else _scalar_json(i) for i in v]
            else:
                out[k] = _scalar_json(v)
        return out

    def json_obj(self) -> dict:
        obj = {"format": FORMAT_NAME, "version": FORMAT_VERSION}
        if self.command is not None:
            obj["command"] = self.command
        obj.update(self._obj())
        return obj

    def json(self) -> str:
        return json.dumps(self.json_obj(), indent=2) + "\n"


def shell_quote_vector(v) -> str:
    return ",".join(format_rational(a) for a in v)
