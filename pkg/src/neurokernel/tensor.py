"""Dense rank-1/rank-2 float64 tensors and the matrix kernels over them.

Every multiply variant computes each output element with the same
k-innermost, left-to-right accumulation, so the blocked and parallel
kernels reproduce the naive triple loop bit for bit. Blocking happens
over the i and j loops only; an optional k-blocked mode exists for
benchmarking and is compared with a tolerance, never used as the oracle.
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass
from math import isfinite
from random import Random
from typing import Iterable, Sequence

from .errors import InvalidArgument, Overflow, ShapeMismatch

MAX_WORKERS = 8
DEFAULT_BLOCK_SIZE = 64


@dataclass(frozen=True)
class MatmulConfig:
    """Tuning knobs for the blocked and parallel multiply variants."""

    block_size: int = DEFAULT_BLOCK_SIZE
    worker_count: int = 4
    # Benchmark-only: also block the k loop. Changes summation order, so
    # results are compared against naive with a 1e-9 relative tolerance.
    block_k: bool = False

    def __post_init__(self):
        if self.block_size < 1:
            raise InvalidArgument(f"block_size must be >= 1, got {self.block_size}")
        if not 1 <= self.worker_count <= MAX_WORKERS:
            raise InvalidArgument(
                f"worker_count must be in 1..{MAX_WORKERS}, got {self.worker_count}"
            )


class Tensor:
    """Immutable row-major float64 tensor of rank 1 or 2.

    Construction rejects NaN and infinity, so any non-finite value produced
    by an operation is a float64 overflow and is reported as Overflow.
    """

    __slots__ = ("_shape", "_data")

    def __init__(self, shape: Sequence[int], data: Iterable[float]):
        shape = tuple(int(d) for d in shape)
        if len(shape) not in (1, 2):
            raise InvalidArgument(f"tensor rank must be 1 or 2, got shape {shape}")
        if any(d < 1 for d in shape):
            raise InvalidArgument(f"tensor dimensions must be positive, got {shape}")
        values = [float(x) for x in data]
        expected = shape[0] if len(shape) == 1 else shape[0] * shape[1]
        if len(values) != expected:
            raise InvalidArgument(
                f"shape {shape} needs {expected} entries, got {len(values)}"
            )
        for x in values:
            if not isfinite(x):
                raise InvalidArgument("tensor entries must be finite (no NaN/Inf)")
        object.__setattr__(self, "_shape", shape)
        object.__setattr__(self, "_data", values)

    def __setattr__(self, name, value):
        raise AttributeError("Tensor is immutable")

    @property
    def shape(self) -> tuple[int, ...]:
        return self._shape

    @property
    def size(self) -> int:
        return len(self._data)

    @classmethod
    def vector(cls, values: Iterable[float]) -> "Tensor":
        values = list(values)
        return cls((len(values),), values)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "Tensor":
        if not rows:
            raise InvalidArgument("from_rows needs at least one row")
        width = len(rows[0])
        flat: list[float] = []
        for row in rows:
            if len(row) != width:
                raise InvalidArgument("ragged rows are not a tensor")
            flat.extend(row)
        return cls((len(rows), width), flat)

    @classmethod
    def zeros(cls, shape: Sequence[int]) -> "Tensor":
        shape = tuple(shape)
        n = shape[0] if len(shape) == 1 else shape[0] * shape[1]
        return cls(shape, [0.0] * n)

    @classmethod
    def identity(cls, n: int) -> "Tensor":
        if n < 1:
            raise InvalidArgument(f"identity size must be positive, got {n}")
        data = [0.0] * (n * n)
        for i in range(n):
            data[i * n + i] = 1.0
        return cls((n, n), data)

    @classmethod
    def random(cls, shape: Sequence[int], rng: Random) -> "Tensor":
        shape = tuple(shape)
        n = shape[0] if len(shape) == 1 else shape[0] * shape[1]
        return cls(shape, [rng.uniform(-1.0, 1.0) for _ in range(n)])

    @classmethod
    def frombytes(cls, shape: Sequence[int], raw: bytes) -> "Tensor":
        shape = tuple(shape)
        n = shape[0] if len(shape) == 1 else shape[0] * shape[1]
        if len(raw) != 8 * n:
            raise InvalidArgument(
                f"shape {shape} needs {8 * n} bytes, got {len(raw)}"
            )
        return cls(shape, struct.unpack(f"<{n}d", raw))

    def tobytes(self) -> bytes:
        """Little-endian float64 buffer; equality of buffers is bit equality."""
        return struct.pack(f"<{len(self._data)}d", *self._data)

    def tolist(self) -> list[float]:
        return list(self._data)

    def rows(self) -> list[list[float]]:
        if len(self._shape) == 1:
            return [list(self._data)]
        _, n = self._shape
        return [self._data[i * n : (i + 1) * n] for i in range(self._shape[0])]

    def item(self, i: int, j: int | None = None) -> float:
        if j is None:
            return self._data[i]
        return self._data[i * self._shape[1] + j]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        return self._shape == other._shape and self._data == other._data

    __hash__ = None  # mutable-looking value type; not hashable

    def __repr__(self) -> str:
        shape = "x".join(str(d) for d in self._shape)
        return f"Tensor({shape}, {self._data!r})" if self.size <= 8 else f"Tensor({shape})"


def validate_matmul_shapes(a: Tensor, b: Tensor) -> None:
    """Check the inner dimensions conform; both operands must be rank 2."""
    if len(a.shape) != 2 or len(b.shape) != 2:
        raise ShapeMismatch(f"matmul needs rank-2 tensors, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(
            f"cannot multiply {a.shape[0]}x{a.shape[1]} by {b.shape[0]}x{b.shape[1]}: "
            f"column count {a.shape[1]} != row count {b.shape[0]}"
        )


def _finite_or_overflow(values: list[float], op_name: str) -> None:
    for v in values:
        if not isfinite(v):
            raise Overflow(f"{op_name} overflowed the float64 range")


def elementwise_sum(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ShapeMismatch(
            f"elementwise sum needs identical shapes, got {a.shape} and {b.shape}"
        )
    out = [x + y for x, y in zip(a._data, b._data)]
    _finite_or_overflow(out, "elementwise sum")
    return Tensor(a.shape, out)


def _mul_row(ad, bd, out, i, kk, n, j_lo, j_hi):
    # One output row segment; k accumulates left to right. Every variant
    # funnels through here, which is what makes them bit-identical.
    base = i * kk
    row = i * n
    for j in range(j_lo, j_hi):
        acc = 0.0
        idx = j
        for p in range(kk):
            acc += ad[base + p] * bd[idx]
            idx += n
        out[row + j] = acc


def matmul_naive(a: Tensor, b: Tensor) -> Tensor:
    """Textbook triple loop, k innermost. The oracle for the other variants."""
    validate_matmul_shapes(a, b)
    m, kk = a.shape
    n = b.shape[1]
    ad, bd = a._data, b._data
    out = [0.0] * (m * n)
    for i in range(m):
        _mul_row(ad, bd, out, i, kk, n, 0, n)
    _finite_or_overflow(out, "matmul")
    return Tensor((m, n), out)


def matmul_blocked(a: Tensor, b: Tensor, config: MatmulConfig | None = None) -> Tensor:
    """Cache-blocked multiply over the i and j loops only.

    The per-element k order is identical to matmul_naive, so the result is
    bit-equal. With config.block_k the k loop is blocked too (benchmark
    mode); that result is only tolerance-comparable.
    """
    config = config or MatmulConfig()
    validate_matmul_shapes(a, b)
    if config.block_k:
        return _matmul_blocked_k(a, b, config.block_size)
    bs = config.block_size
    m, kk = a.shape
    n = b.shape[1]
    ad, bd = a._data, b._data
    out = [0.0] * (m * n)
    for ii in range(0, m, bs):
        i_hi = min(ii + bs, m)
        for jj in range(0, n, bs):
            j_hi = min(jj + bs, n)
            for i in range(ii, i_hi):
                _mul_row(ad, bd, out, i, kk, n, jj, j_hi)
    _finite_or_overflow(out, "matmul")
    return Tensor((m, n), out)


def _matmul_blocked_k(a: Tensor, b: Tensor, bs: int) -> Tensor:
    m, kk = a.shape
    n = b.shape[1]
    ad, bd = a._data, b._data
    out = [0.0] * (m * n)
    for kk_lo in range(0, kk, bs):
        kk_hi = min(kk_lo + bs, kk)
        for ii in range(0, m, bs):
            for jj in range(0, n, bs):
                for i in range(ii, min(ii + bs, m)):
                    base = i * kk
                    row = i * n
                    for j in range(jj, min(jj + bs, n)):
                        acc = out[row + j]
                        for p in range(kk_lo, kk_hi):
                            acc += ad[base + p] * bd[p * n + j]
                        out[row + j] = acc
    _finite_or_overflow(out, "matmul")
    return Tensor((m, n), out)


def _partition_rows(m: int, workers: int) -> list[tuple[int, int]]:
    """Contiguous row ranges, one per worker; some may be empty."""
    base, rem = divmod(m, workers)
    bounds = []
    lo = 0
    for w in range(workers):
        hi = lo + base + (1 if w < rem else 0)
        bounds.append((lo, hi))
        lo = hi
    return bounds


def matmul_parallel(a: Tensor, b: Tensor, config: MatmulConfig | None = None) -> Tensor:
    """Row-partitioned multiply across up to eight workers.

    Each worker writes a disjoint contiguous band of output rows using the
    naive k order; the call returns only after every worker has finished,
    so callers never observe a partial result.
    """
    config = config or MatmulConfig()
    validate_matmul_shapes(a, b)
    m, kk = a.shape
    n = b.shape[1]
    ad, bd = a._data, b._data
    out = [0.0] * (m * n)
    failures: list[BaseException] = []

    def run(lo: int, hi: int) -> None:
        try:
            for i in range(lo, hi):
                _mul_row(ad, bd, out, i, kk, n, 0, n)
        except BaseException as exc:  # surfaced after the barrier
            failures.append(exc)

    threads = [
        threading.Thread(target=run, args=(lo, hi), name=f"matmul-worker-{w}")
        for w, (lo, hi) in enumerate(_partition_rows(m, config.worker_count))
        if lo < hi
    ]
    for t in threads:
        t.start()
    for t in threads:  # completion barrier
        t.join()
    if failures:
        raise failures[0]
    _finite_or_overflow(out, "matmul")
    return Tensor((m, n), out)
