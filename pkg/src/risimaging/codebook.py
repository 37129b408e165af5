"""Random RIS reflection codebooks.

A codebook holds, for every panel k, the T x N snapshot matrix W_k whose row t
is the diagonal of the reflection matrix at snapshot t. In 1-bit mode phase 0
maps to +1 and phase pi to -1.
"""
from dataclasses import dataclass

import numpy as np

from . import rng
from .exceptions import DimensionError


@dataclass(frozen=True)
class Codebook:
    patterns: tuple
    seed: int
    one_bit: bool = True

    @property
    def num_panels(self):
        return len(self.patterns)

    @property
    def snapshots(self):
        return self.patterns[0].shape[0] if self.patterns else 0

    def config(self, ris, t):
        """Reflection coefficients of panel ``ris`` at snapshot ``t``."""
        return as_snapshot_matrix(self, ris)[t]


def _panel_patterns(n, snapshots, gen, one_bit, amplitude):
    if one_bit:
        bits = gen.integers(0, 2, size=(snapshots, n), dtype=np.int64)
        return amplitude * (1.0 - 2.0 * bits)
    phases = gen.uniform(0.0, 2.0 * np.pi, size=(snapshots, n))
    return amplitude * np.exp(1j * phases)


def random_codebook(sizes, snapshots, seed, one_bit=True, amplitude=1.0) -> Codebook:
    """Independent i.i.d. codebooks for panels with ``sizes[k]`` elements each.

    Panel k draws from its own substream, so adding panels or changing their order
    elsewhere leaves panel k's patterns untouched. Rows are generated in order, so
    the first T' rows of a T-snapshot codebook equal a T'-snapshot codebook.
    """
    if snapshots < 1:
        raise ValueError(f"need at least one snapshot, got {snapshots}")
    if any(int(n) < 1 for n in sizes):
        raise ValueError(f"panel sizes must be >= 1, got {list(sizes)}")
    patterns = tuple(
        _panel_patterns(int(n), int(snapshots), rng.stream(seed, rng.CODEBOOK, k), one_bit, amplitude)
        for k, n in enumerate(sizes)
    )
    for p in patterns:
        p.setflags(write=False)
    return Codebook(patterns, int(seed), one_bit)


def random_one_bit_codebook(n, snapshots, seed) -> Codebook:
    return random_codebook([n], snapshots, seed)


def as_snapshot_matrix(codebook: Codebook, ris=0) -> np.ndarray:
    if not 0 <= ris < codebook.num_panels:
        raise IndexError(f"panel index {ris} out of range for {codebook.num_panels} panels")
    return codebook.patterns[ris]


def save_codebook(path, codebook: Codebook):
    """Text format: a ``# ris k`` header per panel, then one snapshot per line."""
    if not codebook.one_bit:
        raise ValueError("text format only holds 1-bit (+1/-1) codebooks")
    with open(path, "w") as fh:
        fh.write(f"# seed {codebook.seed}\n")
        for k, w in enumerate(codebook.patterns):
            fh.write(f"# ris {k}\n")
            for row in w:
                fh.write(" ".join("1" if v > 0 else "-1" for v in row))
                fh.write("\n")


def load_codebook(path) -> Codebook:
    seed = 0
    blocks = []
    rows = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if parts[:1] == ["seed"]:
                    seed = int(parts[1])
                elif parts[:1] == ["ris"]:
                    rows = []
                    blocks.append(rows)
                continue
            if rows is None:
                rows = []
                blocks.append(rows)
            vals = [float(v) for v in line.split()]
            if any(v not in (1.0, -1.0) for v in vals):
                raise ValueError(f"{path}:{lineno}: entries must be +1 or -1")
            rows.append(vals)
    patterns = []
    for k, b in enumerate(blocks):
        arr = np.asarray(b, dtype=float)
        if arr.ndim != 2:
            raise DimensionError(f"panel {k}: ragged snapshot rows")
        arr.setflags(write=False)
        patterns.append(arr)
    return Codebook(tuple(patterns), seed, True)
