"""
Model files and CSV input/output.

A model file is a JSON document::

    {"schema": "msgh-model", "version": 1, "kind": "msnig" | "nig", "K": ...,
     "components": [{"pi": ..., "mu": [...], "D": [...], ...}, ...],
     "fit": {...}}

Matrices are stored row-major as flat lists. Floats are written with the
shortest decimal that round-trips, so reloading reproduces every parameter
bit for bit. Files are written to a temporary sibling and renamed into place.
"""

import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from .distributions import GhParams, MsghParams
from .em import MixtureModel

__all__ = [
    "SCHEMA",
    "SCHEMA_VERSION",
    "Dataset",
    "ModelFileError",
    "DataFileError",
    "model_to_dict",
    "model_from_dict",
    "save_model",
    "load_model",
    "read_csv",
    "write_csv",
    "atomic_write",
]

SCHEMA = "msgh-model"
SCHEMA_VERSION = 1


class ModelFileError(ValueError):
    """A model file is missing, malformed or describes invalid parameters."""


class DataFileError(ValueError):
    """A data file cannot be read or holds no usable numeric data."""


def _flat(a):
    return [float(v) for v in np.asarray(a, dtype=float).reshape(-1)]


def model_to_dict(model: MixtureModel, fit=None):
    comps = []
    for pi, c in zip(model.pi, model.components):
        entry = {"pi": float(pi), "mu": _flat(c.mu)}
        if model.kind == "msnig":
            entry.update(D=_flat(c.D), A=_flat(c.A), beta=_flat(c.beta), gamma=_flat(c.gamma),
                         delta=float(c.delta))
        else:
            entry.update(Sigma=_flat(c.Sigma), beta=_flat(c.beta), gamma=float(c.gamma),
                         delta=float(c.delta))
        comps.append(entry)
    return {
        "schema": SCHEMA,
        "version": SCHEMA_VERSION,
        "kind": model.kind,
        "K": model.K,
        "dim": model.dim,
        "components": comps,
        "fit": fit or {},
    }


def model_from_dict(doc):
    """Rebuild a :class:`MixtureModel`; returns ``(model, fit_metadata)``."""
    try:
        if doc.get("schema") != SCHEMA:
            raise ModelFileError("not an msgh model file")
        if doc.get("version") != SCHEMA_VERSION:
            raise ModelFileError(f"unsupported model file version {doc.get('version')!r}")
        kind, M = doc["kind"], int(doc["dim"])
        comps, pis = [], []
        for c in doc["components"]:
            pis.append(c["pi"])
            if kind == "msnig":
                comps.append(MsghParams(
                    mu=c["mu"], D=np.reshape(c["D"], (M, M)), A=c["A"], beta=c["beta"],
                    gamma=c["gamma"], delta=c["delta"],
                ))
            elif kind == "nig":
                comps.append(GhParams(c["mu"], np.reshape(c["Sigma"], (M, M)), c["beta"],
                                      c["gamma"], c["delta"]))
            else:
                raise ModelFileError(f"unknown model kind {kind!r}")
        if len(comps) != int(doc["K"]):
            raise ModelFileError("component count does not match K")
        return MixtureModel(pis, comps), doc.get("fit", {})
    except ModelFileError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"invalid model file: {exc}") from exc


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(path, model, fit=None):
    atomic_write(path, json.dumps(model_to_dict(model, fit), indent=1) + "\n")


def load_model(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ModelFileError(f"cannot read model file {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"model file {path} is not valid JSON: {exc}") from exc
    return model_from_dict(doc)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Numeric matrix read from CSV with its column names and dropped-row count."""

    columns: tuple
    X: np.ndarray
    path: str
    n_dropped: int = 0


def _parse(cell):
    try:
        v = float(cell)
    except ValueError:
        return None
    return v if np.isfinite(v) else None


def read_csv(path, cols=None, header=True):
    """
    Read selected numeric columns from a comma-separated file.

    Rows with a missing, non-numeric or non-finite value in a selected column,
    or with too few fields, are dropped and counted in ``n_dropped``.

    Parameters
    ----------
    path : str
    cols : sequence of str or int, optional
        Column names (or 0-based indices); all columns by default.
    header : bool
        Whether the first row holds column names.

    Raises
    ------
    DataFileError
        Unreadable file, unknown column, or no numeric rows left.
    """
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DataFileError(f"cannot read {path}: {exc.strerror}") from exc
    except (UnicodeDecodeError, csv.Error) as exc:
        raise DataFileError(f"cannot parse {path}: {exc}") from exc
    if not rows:
        raise DataFileError(f"{path} is empty")
    if header:
        names = [c.strip() for c in rows[0]]
        body = rows[1:]
    else:
        names = [f"y{j + 1}" for j in range(len(rows[0]))]
        body = rows
    if cols is None:
        idx = list(range(len(names)))
    else:
        idx = []
        for c in cols:
            if isinstance(c, int) or (isinstance(c, str) and c.strip().isdigit() and c.strip() not in names):
                j = int(c)
                if not 0 <= j < len(names):
                    raise DataFileError(f"column index {j} out of range")
            elif c in names:
                j = names.index(c)
            else:
                raise DataFileError(f"column {c!r} not found; available: {', '.join(names)}")
            idx.append(j)
    data, dropped = [], 0
    for r in body:
        if len(r) <= max(idx):
            dropped += 1
            continue
        vals = [_parse(r[j]) for j in idx]
        if any(v is None for v in vals):
            dropped += 1
            continue
        data.append(vals)
    if not data:
        raise DataFileError(f"no numeric rows in the selected columns of {path}")
    return Dataset(tuple(names[j] for j in idx), np.array(data, dtype=float), os.fspath(path), dropped)


def format_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def write_csv(path, header, rows):
    """Write rows as CSV to ``path`` atomically, or to stdout when ``path`` is None or ``-``."""
    text = format_csv(header, rows)
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write(path, text)
