"""Deterministic structured-text run reports.

Reports are nested key-value text rendered with %.12g floats so that two
runs over the same definition produce byte-identical output apart from the
trailing wall_time_s line, which carries the only nondeterministic value.
"""

from __future__ import annotations

import csv

import numpy as np

FLOAT_FMT = "%.12g"
PASS = "pass"
FAIL = "fail"
SKIP = "skip"

_INDENT = "  "


def fmt_float(x) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return FLOAT_FMT % x


def fmt_value(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    if isinstance(value, str):
        return value
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(fmt_value(v) for v in np.asarray(value).ravel()) + "]"
    raise TypeError("cannot render %r" % type(value))


class Report:
    """Accumulates lines; sections nest via begin()/end()."""

    def __init__(self, command: str, version: str):
        self._lines: list[str] = []
        self._depth = 0
        self.exit_code = 0
        self.add("mlg_report", version)
        self.add("command", command)

    def begin(self, key: str) -> "Report":
        self._lines.append(_INDENT * self._depth + key + ":")
        self._depth += 1
        return self

    def end(self) -> "Report":
        if self._depth == 0:
            raise ValueError("end() without begin()")
        self._depth -= 1
        return self

    def add(self, key: str, value, tol=None, status: str | None = None) -> "Report":
        parts = [key, "=", fmt_value(value)]
        if tol is not None:
            parts.append("(tol %s)" % fmt_float(tol))
        if status is not None:
            parts.append("[%s]" % status)
            if status == FAIL:
                self.exit_code = 2
        self._lines.append(_INDENT * self._depth + " ".join(parts))
        return self

    def check(self, key: str, value, tol) -> bool:
        """Add a numeric check line; pass iff value <= tol."""
        ok = bool(value <= tol)
        self.add(key, value, tol=tol, status=PASS if ok else FAIL)
        return ok

    def note(self, text: str) -> "Report":
        self._lines.append(_INDENT * self._depth + "# " + text)
        return self

    def definition_echo(self, defn) -> "Report":
        self.begin("definition")
        self.add("name", defn.name)
        self.add("n", defn.n)
        if hasattr(defn, "shape"):
            self.add("shape", defn.shape)
            for key in ("u1", "u2", "u3"):
                self.add(key, getattr(defn, key))
        else:
            self.add("shape", "general-map")
            self.add("u", defn.u)
        self.add("box", [b for span in defn.box for b in span])
        self.add("grid", defn.grid)
        self.end()
        return self

    def render(self, wall_time_s: float | None = None) -> str:
        lines = list(self._lines)
        lines.append("exit_code = %d" % self.exit_code)
        if wall_time_s is not None:
            lines.append("wall_time_s = " + fmt_float(wall_time_s))
        return "\n".join(lines) + "\n"


def strip_timing(text: str) -> str:
    """Drop the wall_time_s line so reports can be compared byte-for-byte."""
    return "".join(
        line for line in text.splitlines(keepends=True)
        if not line.startswith("wall_time_s")
    )


def write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row]
            )
