"""Plain-text density-matrix files.

First line: party dimensions. Then the row-major matrix entries as ``re,im``
pairs separated by whitespace (line breaks are free).
"""

from __future__ import annotations

import numpy as np

from .states import DensityMatrix, InvalidStateError, Partition


class StateFileError(ValueError):
    pass


def parse_state(text: str) -> DensityMatrix:
    lines = text.strip().splitlines()
    if not lines:
        raise StateFileError("empty state file")
    try:
        dims = tuple(int(t) for t in lines[0].split())
        partition = Partition(dims)
    except ValueError as exc:
        raise StateFileError(f"bad dimension line {lines[0]!r}: {exc}") from None
    tokens = " ".join(lines[1:]).split()
    d = partition.dim
    if len(tokens) != d * d:
        raise StateFileError(f"expected {d * d} entries, found {len(tokens)}")
    vals = np.empty(d * d, dtype=np.complex128)
    for i, tok in enumerate(tokens):
        try:
            re, im = tok.split(",")
            vals[i] = complex(float(re), float(im))
        except ValueError:
            raise StateFileError(f"entry {i}: expected re,im but got {tok!r}") from None
    try:
        return DensityMatrix(vals.reshape(d, d), partition)
    except InvalidStateError as exc:
        raise StateFileError(f"not a density matrix: {exc}") from None


def read_state_file(path: str) -> DensityMatrix:
    with open(path) as fh:
        return parse_state(fh.read())


def format_state(rho: DensityMatrix) -> str:
    lines = [" ".join(str(d) for d in rho.partition.dims)]
    for row in rho.matrix:
        lines.append(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row))
    return "\n".join(lines) + "\n"


def write_state_file(path: str, rho: DensityMatrix) -> None:
    with open(path, "w") as fh:
        fh.write(format_state(rho))
