"""Deterministic result persistence: CSV with 17-significant-digit floats.

The primary CSV/JSON outputs are byte-identical for identical config + seed;
wall-clock timings therefore live in a separate timing sidecar that is
excluded from that contract.
"""

import csv
import json
import os


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, header, rows) -> None:
    """Rows are dicts keyed by header names; written with \\n endings."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(row.get(k)) for k in header) + "\n")


def read_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def write_json(path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


class IncrementalCsv:
    """Append-as-computed writer with a canonical sorted rewrite at the end.

    Supports resume: existing rows are loaded and their keys reported so the
    caller can skip finished cells. Keys are the formatted values of
    key_fields, so lookups survive a round trip through the file.
    """

    def __init__(self, path, header, key_fields, resume=False):
        self.path = path
        self.header = list(header)
        self.key_fields = list(key_fields)
        self.rows = []
        if resume and os.path.exists(path):
            for row in read_csv(path):
                self.rows.append({k: row.get(k, "") for k in self.header})
        existing = bool(self.rows)
        self._fh = open(path, "a" if existing else "w", encoding="utf-8", newline="")
        if not existing:
            self._fh.write(",".join(self.header) + "\n")
            self._fh.flush()

    def key_of(self, row) -> tuple:
        return tuple(fmt(row.get(k)) if not isinstance(row.get(k), str) else row.get(k)
                     for k in self.key_fields)

    def done_keys(self) -> set:
        return {self.key_of(r) for r in self.rows}

    def append(self, row) -> None:
        self.rows.append(row)
        self._fh.write(",".join(fmt(row.get(k)) for k in self.header) + "\n")
        self._fh.flush()

    def finalize(self) -> None:
        """Close and rewrite in canonical (sorted by key) order."""
        self._fh.close()
        self.rows.sort(key=self.key_of)
        write_csv(self.path, self.header, self.rows)
