"""Small file helpers with consistent error reporting.

All writers produce deterministic bytes: fixed newline handling, sorted JSON
keys, and no timestamps.
"""

import csv
import hashlib
import json
import os

from .errors import InputFileError, ValidationError


def _open_read(path):
    try:
        return open(path, "r", encoding="utf-8", errors="replace", newline="")
    except FileNotFoundError:
        raise InputFileError("MISSING_FILE", f"{path} does not exist") from None
    except OSError as exc:
        raise InputFileError("UNREADABLE_FILE", f"{path}: {exc}") from None


def read_text(path):
    with _open_read(path) as fh:
        return fh.read()


def read_json(path):
    with _open_read(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError("MALFORMED_JSON", f"{path}: {exc}") from None


def read_csv(path, required):
    """Return ``(fieldnames, rows)``; each row is ``(line_number, dict)``.

    Raises if any column in ``required`` is absent from the header.
    """
    with _open_read(path) as fh:
        reader = csv.DictReader(fh)
        fields = [f.strip() for f in (reader.fieldnames or [])]
        reader.fieldnames = fields
        missing = [c for c in required if c not in fields]
        if missing:
            raise ValidationError(
                "MISSING_COLUMN", f"{path}: header lacks column(s) {', '.join(missing)}"
            )
        rows = []
        for row in reader:
            if None in row:
                raise ValidationError(
                    "MALFORMED_ROW", f"{path}: line {reader.line_num}: too many fields"
                )
            rows.append((reader.line_num, row))
    return fields, rows


def read_jsonl(path):
    out = []
    with _open_read(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append((lineno, json.loads(line)))
            except json.JSONDecodeError as exc:
                raise ValidationError("MALFORMED_ROW", f"{path}: line {lineno}: {exc}") from None
    return out


def ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def write_json(path, obj):
    ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def write_jsonl(path, records):
    ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=False))
            fh.write("\n")


def write_csv(path, header, rows):
    ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
