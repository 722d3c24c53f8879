"""Reading and writing scenario, problem, trajectory and metrics files.

Writers go through :func:`atomic_write`: content lands in a temporary file
next to the target and is renamed into place only once fully written.
"""

import csv
import io
import json
import os
import tempfile
from importlib import resources

from .sim import METRICS_HEADER, EpochRecord

_INT_COLUMNS = {"epoch", "team_count"}


class FileFormatError(ValueError):
    """A file could not be parsed at ``path`` (``line``/``column`` when known)."""

    def __init__(self, path, detail, line=None, column=None):
        self.path, self.line, self.column = path, line, column
        where = "".join(f" {k} {v}" for k, v in (("line", line), ("column", column)) if v is not None)
        super().__init__(f"{path}:{where}: {detail}" if where else f"{path}: {detail}")


def load_json(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FileFormatError(path, exc.msg, exc.lineno, exc.colno) from None


def atomic_write(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(data):
    return json.dumps(data, indent=2, sort_keys=False) + "\n"


def trajectory_text(records):
    return "".join(json.dumps(r.to_dict(), separators=(",", ":")) + "\n" for r in records)


def load_trajectory(path):
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(EpochRecord.from_dict(json.loads(line)))
            except json.JSONDecodeError as exc:
                raise FileFormatError(path, exc.msg, lineno, exc.colno) from None
            except (KeyError, TypeError, ValueError) as exc:
                raise FileFormatError(path, f"bad epoch record ({exc})", lineno) from None
    return records


def metrics_text(summary):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=METRICS_HEADER, lineterminator="\n")
    writer.writeheader()
    for row in summary["per_epoch"]:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def load_metrics(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != METRICS_HEADER:
            raise FileFormatError(path, f"header {reader.fieldnames} != {list(METRICS_HEADER)}", 1)
        return [{k: int(v) if k in _INT_COLUMNS else float(v) for k, v in row.items()} for row in reader]


def bundled(name):
    """Path to a file shipped in the package's data directory."""
    return resources.files("teamcoop") / "data" / name
