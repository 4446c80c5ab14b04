"""File emitters: atomic writes, 17-digit CSV and JSON, minimal SVG."""

from __future__ import annotations

import dataclasses
import json
import math
import os
import tempfile
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np


def fmt(x: float) -> str:
    """Round-trip decimal text of a float (17 significant digits); ``inf``/``-inf``/``nan`` spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def atomic_write(path: str | Path, data: str | bytes) -> Path:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows) -> Path:
    return atomic_write(path, csv_text(header, rows))


def jsonable(obj):
    """Convert to JSON-ready data; floats become 17-digit strings, complexes ``{"re", "im"}``."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return fmt(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": fmt(obj.real), "im": fmt(obj.imag)}
    return obj


def json_text(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> Path:
    return atomic_write(path, json_text(obj))


def svg_text(layers, bounds, width: int = 640, height: int = 480, title: str = "") -> str:
    """Composite SVG of polylines in the complex plane.

    Parameters
    ----------
    layers : list of (list of complex ndarray, dict)
        Polylines with SVG attributes (``stroke``, ``fill``, ...).
    bounds : (xmin, xmax, ymin, ymax)
        Visible window in the complex plane.
    """
    xmin, xmax, ymin, ymax = bounds
    sx = width / (xmax - xmin)
    sy = height / (ymax - ymin)

    def point(z):
        return f"{(z.real - xmin) * sx:.3f},{(ymax - z.imag) * sy:.3f}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    axis = 'stroke="#888" stroke-width="0.5"'
    out.append(f'<line x1="0" y1="{ymax * sy:.3f}" x2="{width}" y2="{ymax * sy:.3f}" {axis}/>')
    out.append(f'<line x1="{-xmin * sx:.3f}" y1="0" x2="{-xmin * sx:.3f}" y2="{height}" {axis}/>')
    for lines, attrs in layers:
        attr = " ".join(f'{k.replace("_", "-")}="{escape(str(v))}"' for k, v in attrs.items())
        for line in lines:
            pts = np.asarray(line, dtype=complex)
            if len(pts) == 0:
                continue
            if not np.all(np.isfinite(pts)):
                pts = pts[np.isfinite(pts)]
            path = "M " + " L ".join(point(z) for z in pts)
            out.append(f'<path d="{path}" {attr}/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, layers, bounds, **kwargs) -> Path:
    return atomic_write(path, svg_text(layers, bounds, **kwargs))
