"""CSV point files and JSON model files."""

from __future__ import annotations

import hashlib
import json
import re
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .kpdtm import FitReport, PowerModel

__all__ = [
    "FORMAT_VERSION",
    "cloud_hash",
    "load_model",
    "read_points",
    "save_model",
    "write_rows",
]

FORMAT_VERSION = 1

_SPLIT = re.compile(r"[,\s]+")


def read_points(path: str | Path) -> NDArray[np.float64]:
    """Read one point per row; comma or whitespace separated, optional header row.

    Blank lines and lines starting with ``#`` are skipped.
    """
    rows: list[list[float]] = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            fields = [f for f in _SPLIT.split(text) if f]
            try:
                values = [float(f) for f in fields]
            except ValueError:
                if not rows and width is None:
                    width = len(fields)  # header
                    continue
                raise ValueError(f"{path}: row {lineno}: non-numeric field") from None
            if width is None:
                width = len(values)
            if len(values) != width:
                raise ValueError(f"{path}: row {lineno}: expected {width} columns, got {len(values)}")
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.array(rows, dtype=np.float64)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_rows(path: str | Path, rows: ArrayLike, header: list[str] | None = None) -> None:
    arr = np.asarray(rows)
    if arr.ndim == 1:
        arr = arr[:, None]
    with open(path, "w", newline="\n") as fh:
        if header:
            fh.write(",".join(header) + "\n")
        for row in arr:
            fh.write(",".join(_fmt(v) if not isinstance(v, (bool, np.bool_)) else str(int(v)) for v in row) + "\n")


def cloud_hash(points: ArrayLike) -> str:
    arr = np.ascontiguousarray(points, dtype="<f8")
    h = hashlib.sha256()
    h.update(np.asarray(arr.shape, dtype="<i8").tobytes())
    h.update(arr.tobytes())
    return h.hexdigest()


def save_model(
    path: str | Path,
    model: PowerModel,
    report: FitReport | None = None,
    *,
    restarts: int | None = None,
    data_hash: str | None = None,
) -> None:
    """Write a model as versioned JSON; floats are written in round-trip-exact form."""

    def floats(a):
        return np.asarray(a, dtype=np.float64).tolist()

    doc = {
        "format_version": FORMAT_VERSION,
        "q": model.q,
        "n": model.n,
        "d": model.d,
        "k": model.k,
        "anchors": floats(model.anchors),
        "centers": floats(model.centers),
        "sq_weights": floats(model.sq_weights),
        "fit": None,
        "data_sha256": data_hash,
    }
    if report is not None:
        doc["fit"] = {
            "seed": report.seed,
            "restarts": restarts,
            "restart_id": report.restart_id,
            "iterations": report.iterations,
            "reseeds": report.reseeds,
            "converged": report.converged,
            "final_loss": report.final_loss,
            "losses": list(report.losses),
        }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_model(path: str | Path) -> tuple[PowerModel, dict]:
    """Return the model and the raw document (for fit metadata and provenance)."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not a model file ({exc})") from None
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported model format version {doc.get('format_version')!r}")
    d = int(doc["d"])
    model = PowerModel(
        anchors=np.array(doc["anchors"], dtype=np.float64).reshape(-1, d),
        centers=np.array(doc["centers"], dtype=np.float64).reshape(-1, d),
        sq_weights=np.array(doc["sq_weights"], dtype=np.float64),
        q=int(doc["q"]),
        n=int(doc["n"]),
    )
    return model, doc
