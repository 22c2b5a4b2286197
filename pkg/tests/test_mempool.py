from random import Random

import pytest

from neurokernel.errors import InvalidArgument, OutOfMemory
from neurokernel.mempool import BlockPool, PoolConfig, SharedBuffer

KIB = 1024
MIB = 1024 * 1024


def small_pool(blocks=4, classes=()):
    return BlockPool(
        PoolConfig(pool_bytes=blocks * 4096, block_bytes=4096, large_page_classes=classes)
    )


class TestPoolInit:
    def test_desk_default_block_count(self):
        pool = BlockPool(PoolConfig(pool_bytes=8 * MIB, block_bytes=4096))
        assert pool.free_blocks == 2048
        assert pool.total_blocks == 2048

    def test_full_scale_block_count(self):
        pool = BlockPool(PoolConfig(pool_bytes=512 * MIB, block_bytes=4096))
        assert pool.free_blocks == 131072

    def test_misaligned_pool_rejected(self):
        with pytest.raises(InvalidArgument):
            PoolConfig(pool_bytes=4097 * 3, block_bytes=4096)

    def test_misaligned_class_rejected(self):
        with pytest.raises(InvalidArgument):
            PoolConfig(pool_bytes=8 * MIB, block_bytes=4096, large_page_classes=(5000,))

    def test_fresh_pool_reads_zero(self):
        pool = small_pool()
        handle = pool.alloc(4)
        assert pool.read(handle) == bytes(4 * 4096)


class TestFirstFit:
    def test_empty_pool_allocates_at_zero(self):
        pool = BlockPool(PoolConfig(pool_bytes=2048 * 4096, block_bytes=4096))
        assert pool.alloc(1).first_block == 0

    def test_freed_slot_is_reused_first(self):
        pool = small_pool(blocks=8)
        first = pool.alloc(1)
        pool.alloc(1)
        pool.free(first)
        assert pool.alloc(1).first_block == 0

    def test_fragmentation_oom_despite_enough_total(self):
        # Blocks 0 and 2 allocated: blocks 1 and 3 are free but non-adjacent.
        pool = small_pool(blocks=4)
        keep0 = pool.alloc(1)
        hole = pool.alloc(1)
        keep2 = pool.alloc(1)
        pool.free(hole)
        assert {keep0.first_block, keep2.first_block} == {0, 2}
        assert pool.free_blocks == 2
        with pytest.raises(OutOfMemory):
            pool.alloc(2)

    def test_alloc_zero_blocks_rejected(self):
        with pytest.raises(InvalidArgument):
            small_pool().alloc(0)


class TestFree:
    def test_round_trip_restores_fresh_stats(self):
        pool = small_pool(blocks=8)
        handle = pool.alloc(3)
        pool.free(handle)
        assert pool.free_blocks == 8
        assert pool.live_handles == 0
        assert pool.bitmap() == (False,) * 8

    def test_double_free_rejected(self):
        pool = small_pool()
        handle = pool.alloc(1)
        pool.free(handle)
        with pytest.raises(InvalidArgument):
            pool.free(handle)

    def test_foreign_handle_rejected(self):
        other = small_pool()
        handle = other.alloc(1)
        with pytest.raises(InvalidArgument):
            small_pool().free(handle)

    def test_freed_blocks_are_zeroed_before_reuse(self):
        pool = small_pool()
        handle = pool.alloc(1)
        pool.write(handle, 0, b"\xff" * 4096)
        pool.free(handle)
        again = pool.alloc(1)
        assert again.first_block == handle.first_block
        assert pool.read(again) == bytes(4096)


class TestLargePages:
    def test_empty_pool_first_fit(self):
        pool = BlockPool(PoolConfig(pool_bytes=8 * MIB, block_bytes=4096,
                                    large_page_classes=(64 * KIB,)))
        handle = pool.alloc_large_page(64 * KIB)
        assert handle.first_block == 0
        assert handle.n_blocks == 16

    def test_skips_to_next_aligned_run(self):
        pool = BlockPool(PoolConfig(pool_bytes=8 * MIB, block_bytes=4096,
                                    large_page_classes=(64 * KIB,)))
        pool.alloc(1)  # occupies block 0, breaking the first aligned run
        assert pool.alloc_large_page(64 * KIB).first_block == 16

    def test_unregistered_class_rejected(self):
        pool = small_pool(blocks=16, classes=(8 * 4096,))
        with pytest.raises(InvalidArgument):
            pool.alloc_large_page(3 * 4096)

    def test_aligned_oom(self):
        # 8-block pool, class of 4 blocks: block 4 allocated kills the
        # second aligned run, block 0..3 hosts the first.
        pool = small_pool(blocks=8, classes=(4 * 4096,))
        pool.alloc_large_page(4 * 4096)
        pool.alloc(1)  # lands at block 4
        with pytest.raises(OutOfMemory):
            pool.alloc_large_page(4 * 4096)


def brute_force_first_fit(bits, n_blocks, align=1):
    start = 0
    while start + n_blocks <= len(bits):
        if align > 1 and start % align:
            start += align - (start % align)
            continue
        if not any(bits[start : start + n_blocks]):
            return start
        start += 1
    return None


def test_randomized_invariants_against_brute_force():
    pool = small_pool(blocks=32, classes=(4 * 4096,))
    rng = Random(13)
    live = []
    for _ in range(2000):
        bits = pool.bitmap()
        roll = rng.random()
        if roll < 0.55 or not live:
            n = rng.randint(1, 5)
            expected = brute_force_first_fit(bits, n)
            try:
                handle = pool.alloc(n)
            except OutOfMemory:
                assert expected is None
                continue
            assert handle.first_block == expected
            live.append(handle)
        elif roll < 0.85:
            pool.free(live.pop(rng.randrange(len(live))))
        else:
            expected = brute_force_first_fit(bits, 4, align=4)
            try:
                handle = pool.alloc_large_page(4 * 4096)
            except OutOfMemory:
                assert expected is None
                continue
            assert handle.first_block == expected
            live.append(handle)
        ranges = sorted((h.first_block, h.n_blocks) for h in live)
        for (f1, n1), (f2, _) in zip(ranges, ranges[1:]):
            assert f1 + n1 <= f2, "overlapping handles"
        assert sum(pool.bitmap()) == sum(n for _, n in ranges)
        assert pool.free_blocks + pool.allocated_blocks == pool.total_blocks


class TestBitmapHex:
    def test_msb_first_packing(self):
        pool = small_pool(blocks=8)
        pool.alloc(4)
        assert pool.bitmap_hex() == "f0"


class TestSharedBuffer:
    def test_views_alias_storage(self):
        buffer = SharedBuffer(4096)
        a, b = buffer.view(), buffer.view()
        a.write(0, b"abc")
        assert b.read(0, 3) == b"abc"

    def test_out_of_range_read_rejected(self):
        view = SharedBuffer(4096).view()
        with pytest.raises(InvalidArgument):
            view.read(4096, 1)

    def test_out_of_range_write_rejected(self):
        view = SharedBuffer(16).view()
        with pytest.raises(InvalidArgument):
            view.write(10, b"0123456789")

    def test_hundred_round_trips_no_copies(self):
        buffer = SharedBuffer(4096)
        writer, reader = buffer.view(), buffer.view()
        for i in range(100):
            payload = bytes([i % 256]) * 32
            writer.write(i * 8 % 1024, payload)
            assert reader.read(i * 8 % 1024, 32) == payload
        assert buffer.copy_counter == 0

    def test_snapshot_is_the_counted_copy(self):
        buffer = SharedBuffer(64)
        buffer.view().write(0, b"xyz")
        assert buffer.snapshot()[:3] == b"xyz"
        assert buffer.copy_counter == 1

    def test_zero_size_rejected(self):
        with pytest.raises(InvalidArgument):
            SharedBuffer(0)
