"""File formats: text edge lists, JSON/CSV reports and run manifests.

Every write goes to a temporary file in the target directory and is then
renamed into place, so readers never see a partial file.
"""

from __future__ import annotations

import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .exceptions import ConsistencyError
from .multigraph import MultiGraph

SCHEMA_VERSION = "1"
EDGE_LIST_HEADER = "# buckley-osthus edge list"


def atomic_write(path, data):
    """Write ``data`` (str or bytes) to ``path`` via write-temp-rename."""
    path = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _meta_line(meta):
    return " ".join(f"{k}={v}" for k, v in meta.items())


def edge_list_text(g, meta=None):
    """Edge list as text: comment header, then one ``u v`` line per edge in coordinate order."""
    buf = io.StringIO()
    buf.write(f"{EDGE_LIST_HEADER} schema={SCHEMA_VERSION}\n")
    buf.write(f"# vertices={g.vertex_count} edges={g.edge_count}\n")
    if meta:
        buf.write(f"# {_meta_line(meta)}\n")
    if g.edge_count:
        np.savetxt(buf, g.edges, fmt="%d")
    return buf.getvalue()


def export_edge_list(g, path, meta=None):
    """Write ``g`` to ``path``; ``meta`` (e.g. ``a``, ``m``, ``n``, ``seed``) goes in the header.

    No timestamps are written, so equal inputs give byte-identical files.
    """
    atomic_write(path, edge_list_text(g, meta))


def _parse_header(lines):
    meta = {}
    for line in lines:
        for tok in line.lstrip("#").split():
            if "=" in tok:
                key, val = tok.split("=", 1)
                meta[key] = val
    return meta


def import_edge_list(path):
    """Read an edge list written by :func:`export_edge_list`.

    Returns
    -------
    (MultiGraph, dict)
        The graph and the header metadata as strings.
    """
    text = Path(path).read_text()
    header = [ln for ln in text.splitlines()[:8] if ln.startswith("#")]
    meta = _parse_header(header)
    edges = np.loadtxt(io.StringIO(text), dtype=np.int64, comments="#", ndmin=2)
    edges = edges.reshape(-1, 2)
    if "vertices" in meta:
        vertex_count = int(meta["vertices"])
    elif "n" in meta:
        vertex_count = int(meta["n"])
    else:
        vertex_count = int(edges.max()) if edges.size else 0
    if "edges" in meta and int(meta["edges"]) != edges.shape[0]:
        raise ConsistencyError(f"header announces {meta['edges']} edges, file has {edges.shape[0]}")
    m = int(meta["m"]) if "m" in meta else None
    return MultiGraph(vertex_count, edges, m=m), meta


def dumps_json(obj):
    """Deterministic JSON text with a schema version field."""
    if isinstance(obj, dict) and "schema_version" not in obj:
        obj = {"schema_version": SCHEMA_VERSION, **obj}
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_json(path, obj):
    atomic_write(path, dumps_json(obj))


def config_hash(config):
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def manifest_path(path):
    path = Path(path)
    return path.with_name(path.name + ".manifest.json")


def write_manifest(path, config, wall_time):
    """Sidecar next to ``path`` with tool version, config, its hash, seed and wall time.

    Kept apart from the artifact so the artifact itself stays reproducible
    byte for byte.
    """
    from . import __version__

    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool": "buckley-osthus",
        "tool_version": __version__,
        "config": config,
        "config_hash": config_hash(config),
        "seed": config.get("seed"),
        "wall_time_s": round(wall_time, 6),
        "artifact": Path(path).name,
    }
    atomic_write(manifest_path(path), json.dumps(doc, indent=2) + "\n")
    return doc
