"""HGF-1 field files: a one-line UTF-8 header followed by little-endian float64.

Header grammar::

    HGF1 dim=<n> shape=<a,b,...> spacing=<h1,...> topology=<torus|box> rank=<c,v> origin=<...>

Payload is node-major, then index-row-major (exactly the memory order of
``TensorField.values``).
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .grid import GridSpec, TensorField

_MAGIC = "HGF1"


def _fmt_floats(xs) -> str:
    return ",".join(repr(float(x)) for x in xs)


def write_field(path, field: TensorField) -> None:
    g = field.grid
    if g.topology not in ("box", "torus"):
        raise ConfigurationError(
            f"HGF-1 persists only box/torus grids, not {g.topology!r}"
        )
    header = (
        f"{_MAGIC} dim={g.dim}"
        f" shape={','.join(str(s) for s in g.shape)}"
        f" spacing={_fmt_floats(g.spacing)}"
        f" topology={g.topology}"
        f" rank={field.rank[0]},{field.rank[1]}"
        f" origin={_fmt_floats(g.origin)}\n"
    )
    data = np.ascontiguousarray(field.values, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        fh.write(data.tobytes())


def read_field(path) -> TensorField:
    with open(path, "rb") as fh:
        header = fh.readline().decode("utf-8").strip()
        payload = fh.read()
    tokens = header.split()
    if not tokens or tokens[0] != _MAGIC:
        raise ConfigurationError(f"not an HGF-1 file: bad magic in {header!r}")
    kv = {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ConfigurationError(f"malformed HGF-1 header token {tok!r}")
        k, v = tok.split("=", 1)
        kv[k] = v
    try:
        dim = int(kv["dim"])
        shape = tuple(int(s) for s in kv["shape"].split(","))
        spacing = tuple(float(s) for s in kv["spacing"].split(","))
        topology = kv["topology"]
        rank = tuple(int(s) for s in kv["rank"].split(","))
        origin = tuple(float(s) for s in kv["origin"].split(","))
    except (KeyError, ValueError) as exc:
        raise ConfigurationError(f"malformed HGF-1 header {header!r}: {exc}") from exc
    if topology not in ("box", "torus"):
        raise ConfigurationError(f"HGF-1 topology must be box or torus, got {topology!r}")
    grid = GridSpec(dim=dim, shape=shape, spacing=spacing, topology=topology, origin=origin)
    total = rank[0] + rank[1]
    count = grid.n_nodes * dim**total
    values = np.frombuffer(payload, dtype="<f8", count=-1)
    if values.size != count:
        raise ConfigurationError(
            f"HGF-1 payload has {values.size} floats, header implies {count}"
        )
    values = values.reshape(grid.shape + (dim,) * total).astype(float)
    return TensorField(grid, (rank[0], rank[1]), values)


def write_immersion(path, grid: GridSpec, values: np.ndarray) -> None:
    """Persist an ambient-valued map with rank tag ``0,<d>``.

    Immersion values have d components per node with d independent of the
    grid dimension, so they do not fit the tensor layout; the payload size
    (nodes times d instead of nodes times dim**d) tells the two apart.
    """
    if grid.topology not in ("box", "torus"):
        raise ConfigurationError(
            f"HGF-1 persists only box/torus grids, not {grid.topology!r}"
        )
    values = np.asarray(values, dtype=float)
    if values.shape[: grid.dim] != grid.shape or values.ndim != grid.dim + 1:
        raise ConfigurationError("immersion values must have shape (*grid.shape, d)")
    d = values.shape[-1]
    header = (
        f"{_MAGIC} dim={grid.dim}"
        f" shape={','.join(str(s) for s in grid.shape)}"
        f" spacing={_fmt_floats(grid.spacing)}"
        f" topology={grid.topology}"
        f" rank=0,{d}"
        f" origin={_fmt_floats(grid.origin)}\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        fh.write(np.ascontiguousarray(values, dtype="<f8").tobytes())


def read_immersion(path) -> tuple[GridSpec, np.ndarray]:
    """Read an ambient-valued map written by :func:`write_immersion`."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("utf-8").strip()
        payload = fh.read()
    tokens = header.split()
    if not tokens or tokens[0] != _MAGIC:
        raise ConfigurationError(f"not an HGF-1 file: bad magic in {header!r}")
    kv = dict(tok.split("=", 1) for tok in tokens[1:] if "=" in tok)
    try:
        dim = int(kv["dim"])
        shape = tuple(int(s) for s in kv["shape"].split(","))
        spacing = tuple(float(s) for s in kv["spacing"].split(","))
        topology = kv["topology"]
        rank = tuple(int(s) for s in kv["rank"].split(","))
        origin = tuple(float(s) for s in kv["origin"].split(","))
    except (KeyError, ValueError) as exc:
        raise ConfigurationError(f"malformed HGF-1 header {header!r}: {exc}") from exc
    if rank[0] != 0:
        raise ConfigurationError(f"immersion files need rank tag 0,d, got {rank}")
    grid = GridSpec(dim=dim, shape=shape, spacing=spacing, topology=topology, origin=origin)
    d = rank[1]
    values = np.frombuffer(payload, dtype="<f8")
    if values.size != grid.n_nodes * d:
        raise ConfigurationError(
            f"HGF-1 payload has {values.size} floats, header implies {grid.n_nodes * d}"
        )
    return grid, values.reshape(grid.shape + (d,)).astype(float)
