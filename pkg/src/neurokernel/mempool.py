"""Bitmap-tracked fixed-block memory pool with large-page classes.

The pool carves a zeroed byte arena into fixed blocks, tracks them with one
bit per block, and places allocations first-fit. Large pages come out of
the same arena but must start on an offset aligned to their own size, which
keeps conservation checkable across both allocators. Also home to the
zero-copy SharedBuffer used for device interchange.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass

from .errors import InvalidArgument, OutOfMemory

DEFAULT_POOL_BYTES = 8 * 1024 * 1024
DEFAULT_BLOCK_BYTES = 4096
# Desk-scale stand-ins for the 2 MiB / 1 GiB huge-page classes.
DEFAULT_LARGE_PAGE_CLASSES = (64 * 1024, 1024 * 1024)

_POOL_IDS = itertools.count(1)


@dataclass(frozen=True)
class PoolConfig:
    pool_bytes: int = DEFAULT_POOL_BYTES
    block_bytes: int = DEFAULT_BLOCK_BYTES
    large_page_classes: tuple[int, ...] = DEFAULT_LARGE_PAGE_CLASSES

    def __post_init__(self):
        if self.block_bytes < 1:
            raise InvalidArgument(f"block_bytes must be positive, got {self.block_bytes}")
        if self.pool_bytes < 1 or self.pool_bytes % self.block_bytes != 0:
            raise InvalidArgument(
                f"pool_bytes {self.pool_bytes} must be a positive multiple of "
                f"block_bytes {self.block_bytes}"
            )
        classes = tuple(sorted(set(int(c) for c in self.large_page_classes)))
        for cls_bytes in classes:
            if cls_bytes < 1 or cls_bytes % self.block_bytes != 0:
                raise InvalidArgument(
                    f"large page class {cls_bytes} must be a positive multiple of "
                    f"block_bytes {self.block_bytes}"
                )
        object.__setattr__(self, "large_page_classes", classes)


@dataclass(frozen=True)
class BlockHandle:
    """Ticket for a live allocation; valid between its alloc and free."""

    id: int
    first_block: int
    n_blocks: int
    pool_id: int


class BlockPool:
    """Fixed-block arena with a one-bit-per-block allocation map."""

    def __init__(self, config: PoolConfig | None = None):
        self.config = config or PoolConfig()
        self._pool_id = next(_POOL_IDS)
        self._n_blocks = self.config.pool_bytes // self.config.block_bytes
        self._bitmap = [False] * self._n_blocks
        try:
            self._storage = bytearray(self.config.pool_bytes)
        except MemoryError:
            raise OutOfMemory(
                f"host cannot back a {self.config.pool_bytes}-byte pool"
            ) from None
        self._ledger: dict[int, tuple[int, int]] = {}
        self._next_handle = itertools.count(1)
        self._lock = threading.Lock()

    # -- stats ------------------------------------------------------------

    @property
    def total_blocks(self) -> int:
        return self._n_blocks

    @property
    def allocated_blocks(self) -> int:
        with self._lock:
            return sum(n for _, n in self._ledger.values())

    @property
    def free_blocks(self) -> int:
        return self.total_blocks - self.allocated_blocks

    @property
    def live_handles(self) -> int:
        return len(self._ledger)

    def bitmap(self) -> tuple[bool, ...]:
        """Snapshot of the allocation map; True means allocated."""
        with self._lock:
            return tuple(self._bitmap)

    def bitmap_hex(self) -> str:
        """Bitmap packed MSB-first, so the hex string reads in block order."""
        bits = self.bitmap()
        out = bytearray((len(bits) + 7) // 8)
        for i, bit in enumerate(bits):
            if bit:
                out[i // 8] |= 0x80 >> (i % 8)
        return out.hex()

    # -- allocation -------------------------------------------------------

    def _find_run(self, n_blocks: int, align_blocks: int = 1) -> int | None:
        """Lowest-indexed run of n free blocks starting on the alignment."""
        i = 0
        limit = self._n_blocks - n_blocks
        while i <= limit:
            conflict = -1
            for j in range(i, i + n_blocks):
                if self._bitmap[j]:
                    conflict = j
                    break
            if conflict < 0:
                return i
            i = conflict + 1
            if align_blocks > 1:
                i = ((i + align_blocks - 1) // align_blocks) * align_blocks
        return None

    def _take_run(self, first: int, n_blocks: int) -> BlockHandle:
        for j in range(first, first + n_blocks):
            self._bitmap[j] = True
        handle = BlockHandle(next(self._next_handle), first, n_blocks, self._pool_id)
        self._ledger[handle.id] = (first, n_blocks)
        return handle

    def alloc(self, n_blocks: int) -> BlockHandle:
        """First-fit allocation of a contiguous run; contents read as zero."""
        if n_blocks < 1:
            raise InvalidArgument(f"must allocate at least one block, got {n_blocks}")
        with self._lock:
            first = self._find_run(n_blocks)
            if first is None:
                raise OutOfMemory(
                    f"no contiguous run of {n_blocks} free blocks "
                    f"({self.total_blocks - sum(n for _, n in self._ledger.values())} free in total)"
                )
            return self._take_run(first, n_blocks)

    def alloc_large_page(self, class_bytes: int) -> BlockHandle:
        """Allocate one large page: a class-aligned run of class/block blocks."""
        if class_bytes not in self.config.large_page_classes:
            raise InvalidArgument(
                f"{class_bytes} is not a registered large-page class "
                f"{self.config.large_page_classes}"
            )
        n_blocks = class_bytes // self.config.block_bytes
        with self._lock:
            first = self._find_run(n_blocks, align_blocks=n_blocks)
            if first is None:
                raise OutOfMemory(
                    f"no {class_bytes}-aligned run of {n_blocks} free blocks"
                )
            return self._take_run(first, n_blocks)

    def free(self, handle: BlockHandle) -> None:
        """Release a live handle; its blocks are zeroed before reuse."""
        with self._lock:
            if handle.pool_id != self._pool_id:
                raise InvalidArgument("handle belongs to a different pool")
            entry = self._ledger.get(handle.id)
            if entry is None:
                raise InvalidArgument(f"handle {handle.id} is not live (double free?)")
            first, n_blocks = entry
            for j in range(first, first + n_blocks):
                self._bitmap[j] = False
            bb = self.config.block_bytes
            start = first * bb
            self._storage[start : start + n_blocks * bb] = bytes(n_blocks * bb)
            del self._ledger[handle.id]

    # -- data access ------------------------------------------------------

    def _span(self, handle: BlockHandle, offset: int, length: int) -> tuple[int, int]:
        if handle.pool_id != self._pool_id or handle.id not in self._ledger:
            raise InvalidArgument(f"handle {handle.id} is not live in this pool")
        first, n_blocks = self._ledger[handle.id]
        span = n_blocks * self.config.block_bytes
        if offset < 0 or length < 0 or offset + length > span:
            raise InvalidArgument(
                f"access [{offset}, {offset + length}) outside {span}-byte allocation"
            )
        return first * self.config.block_bytes + offset, length

    def read(self, handle: BlockHandle, offset: int = 0, length: int | None = None) -> bytes:
        with self._lock:
            if length is None:
                entry = self._ledger.get(handle.id)
                length = entry[1] * self.config.block_bytes - offset if entry else 0
            start, length = self._span(handle, offset, length)
            return bytes(self._storage[start : start + length])

    def write(self, handle: BlockHandle, offset: int, data: bytes) -> None:
        with self._lock:
            start, length = self._span(handle, offset, len(data))
            self._storage[start : start + length] = data


class SharedBufferView:
    """Window onto a SharedBuffer; all views alias the same storage."""

    def __init__(self, buffer: "SharedBuffer"):
        self._buffer = buffer

    def write(self, offset: int, data: bytes) -> None:
        self._buffer._check_range(offset, len(data))
        self._buffer._storage[offset : offset + len(data)] = data

    def read(self, offset: int, length: int) -> bytes:
        self._buffer._check_range(offset, length)
        return bytes(self._buffer._storage[offset : offset + length])

    @property
    def size(self) -> int:
        return self._buffer.size


class SharedBuffer:
    """Fixed-size byte buffer shared by aliasing views.

    copy_counter counts staging copies made by the buffer itself (only
    snapshot() stages); aliased view reads and writes leave it at zero,
    which is what makes "zero-copy" an assertable property.
    """

    def __init__(self, size: int = 4096):
        if size < 1:
            raise InvalidArgument(f"buffer size must be positive, got {size}")
        self._storage = bytearray(size)
        self.size = size
        self.copy_counter = 0

    def _check_range(self, offset: int, length: int) -> None:
        if offset < 0 or length < 0 or offset + length > self.size:
            raise InvalidArgument(
                f"access [{offset}, {offset + length}) outside {self.size}-byte buffer"
            )

    def view(self) -> SharedBufferView:
        return SharedBufferView(self)

    def snapshot(self) -> bytes:
        """Copy the whole buffer out; the one operation that stages bytes."""
        self.copy_counter += 1
        return bytes(self._storage)
