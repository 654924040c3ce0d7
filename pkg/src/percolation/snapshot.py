"""LRPENV text snapshots.

Header: ``LRPENV 1 d=<d> s=<s> beta=<b> L=<L> nn=<0|1> norm=<2|inf> seed=<u64>``
(plus ``boundary=free`` for free-boundary boxes), followed by one line per long
edge ``x1 .. xd  y1 .. yd`` in lexicographic order. When nearest-neighbour edges
are random, the open ones are listed the same way after the long edges.
"""

from pathlib import Path
from typing import Dict, List, Union

import numpy as np

from ..utils.errors import ConfigError
from .generator import Environment
from .model import Boundary, ModelParams, Norm

MAGIC = "LRPENV"
VERSION = "1"


def _coord_text(coords: np.ndarray) -> List[str]:
    return [" ".join(str(int(c)) for c in row) for row in coords]


def format_snapshot(env: Environment) -> str:
    p = env.params
    header = (
        f"{MAGIC} {VERSION} d={p.d} s={p.s!r} beta={p.beta!r} L={p.L} "
        f"nn={int(p.nn_prob_one)} norm={p.norm.value} seed={env.seed}"
    )
    if p.boundary == Boundary.FREE:
        header += " boundary=free"
    lines = [header]
    lat = env.lattice
    for src, dst in [(env.long_src, env.long_dst), _open_nn(env)]:
        if src.size == 0:
            continue
        left = _coord_text(lat.coords(src))
        right = _coord_text(lat.coords(dst))
        lines.extend(f"{a}  {b}" for a, b in zip(left, right))
    return "\n".join(lines) + "\n"


def _open_nn(env: Environment):
    if env.nn_open is None:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty
    u, v = env.nearest_neighbor_edges()
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    order = np.lexsort((hi, lo))
    return lo[order], hi[order]


def save_snapshot(env: Environment, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_snapshot(env), encoding="utf-8")
    return path


def _parse_header(line: str) -> Dict[str, str]:
    parts = line.split()
    if len(parts) < 2 or parts[0] != MAGIC or parts[1] != VERSION:
        raise ConfigError(f"not an {MAGIC} {VERSION} snapshot", line=1)
    fields = {}
    for token in parts[2:]:
        key, _, value = token.partition("=")
        fields[key] = value
    return fields


def load_snapshot(path: Union[str, Path]) -> Environment:
    """Load a snapshot written by ``save_snapshot``; the round trip is exact."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    fields = _parse_header(text[0])
    try:
        params = ModelParams(
            d=int(fields["d"]),
            s=float(fields["s"]),
            beta=float(fields["beta"]),
            L=int(fields["L"]),
            nn_prob_one=fields["nn"] == "1",
            norm=Norm(fields["norm"]),
            boundary=Boundary(fields.get("boundary", "torus")),
        )
        seed = int(fields["seed"])
    except (KeyError, ValueError) as e:
        raise ConfigError(f"bad snapshot header: {e}", line=1) from e
    d = params.d
    rows = [line.split() for line in text[1:] if line.strip()]
    if rows:
        data = np.array(rows, dtype=np.int64)
        if data.shape[1] != 2 * d:
            raise ConfigError("edge line has wrong arity", line=2)
    else:
        data = np.empty((0, 2 * d), dtype=np.int64)
    env_stub = Environment(params, seed, np.empty(0), np.empty(0))
    lat = env_stub.lattice
    u = lat.flat(data[:, :d])
    v = lat.flat(data[:, d:])
    l1 = np.abs(lat.displacement(u, v)).sum(axis=1) if u.size else np.empty(0)
    is_nn = l1 == 1
    nn_open = None
    if not params.nn_prob_one:
        nn_open = np.zeros((params.n_vertices, d), dtype=bool)
        for a, b in zip(u[is_nn], v[is_nn]):
            z = lat.displacement(np.array([a]), np.array([b]))[0]
            axis = int(np.flatnonzero(z)[0])
            start = a if z[axis] > 0 else b
            nn_open[start, axis] = True
    return Environment(params, seed, u[~is_nn], v[~is_nn], nn_open=nn_open, method="snapshot")
