"""
Sparse-triplet text format for channel matrices.

    # rows <M> cols <N>
    <row> <col> <re> <im>
    ...

Indices are zero-based; values use 17 significant digits.
"""
from pathlib import Path

import numpy as np
from scipy import sparse

from channel.doubly_selective import ChannelMatrix


def dump_channel(channel: ChannelMatrix, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    coo = channel.matrix.tocoo()
    table = np.column_stack((coo.row, coo.col, coo.data.real, coo.data.imag))
    np.savetxt(
        path,
        table,
        fmt=["%d", "%d", "%.17g", "%.17g"],
        header=f"rows {channel.m} cols {channel.n}",
    )
    return path


def load_channel(path) -> ChannelMatrix:
    path = Path(path)
    with path.open() as handle:
        header = handle.readline().lstrip("#").split()
    shape = (int(header[1]), int(header[3]))
    table = np.loadtxt(path, ndmin=2)
    values = table[:, 2] + 1j * table[:, 3] if table.size else np.zeros(0, dtype=complex)
    rows = table[:, 0].astype(int) if table.size else np.zeros(0, dtype=int)
    cols = table[:, 1].astype(int) if table.size else np.zeros(0, dtype=int)
    return ChannelMatrix.from_sparse(sparse.coo_matrix((values, (rows, cols)), shape=shape))
