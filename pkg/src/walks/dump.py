"""Path dumps: columnar CSV plus a JSON sidecar with the run metadata."""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from .path import WalkPath


def dump_path(
    path: WalkPath,
    target: Union[str, Path],
    metadata: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write ``i,x1..xd,new,jump`` rows and ``<target>.json`` metadata.

    ``jump`` on row i is the length of the step that arrived at X_i (0 at i=0).
    """
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    d = path.d
    jumps = np.concatenate([[0], path.jumps])
    with target.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["i", *[f"x{k + 1}" for k in range(d)], "new", "jump"])
        for i in range(path.positions.shape[0]):
            writer.writerow([i, *path.positions[i].tolist(), int(path.new[i]), int(jumps[i])])
    sidecar = {
        "ell": path.ell,
        "start": path.start,
        "stream": list(path.stream),
        "n_steps": path.n_steps,
        **(metadata or {}),
    }
    target.with_suffix(target.suffix + ".json").write_text(json.dumps(sidecar, sort_keys=True, indent=2) + "\n")
    return target


def load_path(source: Union[str, Path]) -> WalkPath:
    """Read a dump back. Flat vertex indices are not dumped and come back as -1."""
    source = Path(source)
    with source.open(newline="") as handle:
        rows = list(csv.reader(handle))
    header, body = rows[0], np.array(rows[1:], dtype=np.int64)
    d = len(header) - 3
    meta = json.loads(source.with_suffix(source.suffix + ".json").read_text())
    return WalkPath(
        start=int(meta["start"]),
        positions=body[:, 1 : 1 + d],
        vertices=np.full(body.shape[0], -1, dtype=np.int64),
        new=body[:, 1 + d].astype(bool),
        jumps=body[1:, 2 + d],
        ell=int(meta["ell"]),
        stream=tuple(meta.get("stream", ())),
    )
