from random import Random

import pytest

from neurokernel.accel import AccelDevice, AccelOp, AccelTask
from neurokernel.errors import DeviceBusy, InvalidArgument, OutOfMemory
from neurokernel.tensor import Tensor, elementwise_sum, matmul_naive


def loaded_device(*tensors):
    dev = AccelDevice()
    regions = []
    for t in tensors:
        region = dev.allocate(8 * t.size)
        dev.write_tensor(region, t)
        regions.append(region)
    return dev, regions


class TestInit:
    def test_fresh_device_has_full_buffer(self):
        assert AccelDevice().free_bytes == 1048576

    def test_fresh_device_has_empty_queue(self):
        assert AccelDevice().queued_tasks == 0

    def test_devices_are_independent(self):
        dev1, dev2 = AccelDevice(), AccelDevice()
        dev1.allocate(1024)
        assert dev2.free_bytes == 1048576


class TestAllocate:
    def test_whole_buffer(self):
        region = AccelDevice().allocate(1048576)
        assert (region.offset, region.size) == (0, 1048576)

    def test_exhausted_device_reports_oom(self):
        dev = AccelDevice()
        dev.allocate(1048576)
        with pytest.raises(OutOfMemory):
            dev.allocate(1)

    def test_zero_size_rejected(self):
        with pytest.raises(InvalidArgument):
            AccelDevice().allocate(0)

    def test_regions_are_disjoint_under_random_sizes(self):
        dev = AccelDevice()
        rng = Random(2)
        regions = [dev.allocate(rng.randint(1, 4096)) for _ in range(64)]
        spans = sorted((r.offset, r.size) for r in regions)
        for (o1, s1), (o2, _) in zip(spans, spans[1:]):
            assert o1 + s1 <= o2


class TestSubmitExecute:
    def test_sum_with_zero_region_is_identity(self):
        x = Tensor.vector([1.5, -2.0, 3.25])
        zero = Tensor.zeros((3,))
        dev, (rx, rz) = loaded_device(x, zero)
        rout = dev.allocate(8 * 3)
        dev.submit(AccelTask(AccelOp.ELEMWISE_SUM, rx, (3,), rz, (3,), rout))
        dev.execute_next()
        assert dev.read_tensor(rout, (3,)) == x

    def test_identity_matmul(self):
        a = Tensor.from_rows([[2.0, 3.0], [5.0, 7.0]])
        dev, (ri, ra) = loaded_device(Tensor.identity(2), a)
        rout = dev.allocate(8 * 4)
        dev.submit(AccelTask(AccelOp.MATMUL, ri, (2, 2), ra, (2, 2), rout))
        dev.execute_next()
        assert dev.read_tensor(rout, (2, 2)) == a

    def test_fifo_completion_order(self):
        x = Tensor.vector([1.0])
        dev, (rx,) = loaded_device(x)
        rout = dev.allocate(8)
        ids = [
            dev.submit(AccelTask(AccelOp.ELEMWISE_SUM, rx, (1,), rx, (1,), rout))
            for _ in range(3)
        ]
        executed = [dev.execute_next() for _ in range(3)]
        assert executed == ids

    def test_execute_on_empty_queue_returns_none(self):
        assert AccelDevice().execute_next() is None

    def test_device_equals_host_bit_exactly(self):
        rng = Random(21)
        for _ in range(10):
            m, k, n = rng.randint(1, 8), rng.randint(1, 8), rng.randint(1, 8)
            a, b = Tensor.random((m, k), rng), Tensor.random((k, n), rng)
            dev, (ra, rb) = loaded_device(a, b)
            rout = dev.allocate(8 * m * n)
            dev.submit(AccelTask(AccelOp.MATMUL, ra, (m, k), rb, (k, n), rout))
            dev.execute_next()
            assert dev.read_tensor(rout, (m, n)).tobytes() == matmul_naive(a, b).tobytes()

    def test_device_sum_equals_host(self):
        rng = Random(22)
        a, b = Tensor.random((4, 4), rng), Tensor.random((4, 4), rng)
        dev, (ra, rb) = loaded_device(a, b)
        rout = dev.allocate(8 * 16)
        dev.submit(AccelTask(AccelOp.ELEMWISE_SUM, ra, (4, 4), rb, (4, 4), rout))
        dev.execute_next()
        assert dev.read_tensor(rout, (4, 4)).tobytes() == elementwise_sum(a, b).tobytes()


class TestValidation:
    def test_foreign_region_rejected(self):
        x = Tensor.vector([1.0])
        dev, (rx,) = loaded_device(x)
        other_dev, (foreign,) = loaded_device(x)
        rout = dev.allocate(8)
        with pytest.raises(InvalidArgument):
            dev.submit(AccelTask(AccelOp.ELEMWISE_SUM, foreign, (1,), rx, (1,), rout))

    def test_shape_mismatch_rejected_at_submit(self):
        a = Tensor.zeros((2, 3))
        b = Tensor.zeros((2, 3))
        dev, (ra, rb) = loaded_device(a, b)
        rout = dev.allocate(8 * 6)
        with pytest.raises(InvalidArgument):
            dev.submit(AccelTask(AccelOp.MATMUL, ra, (2, 3), rb, (2, 3), rout))

    def test_undersized_region_rejected(self):
        dev = AccelDevice()
        small = dev.allocate(8)
        with pytest.raises(InvalidArgument):
            dev.submit(AccelTask(AccelOp.ELEMWISE_SUM, small, (4,), small, (4,), small))

    def test_undersized_output_rejected(self):
        a = Tensor.zeros((2, 2))
        dev, (ra, rb) = loaded_device(a, a)
        tiny = dev.allocate(8)
        with pytest.raises(InvalidArgument):
            dev.submit(AccelTask(AccelOp.MATMUL, ra, (2, 2), rb, (2, 2), tiny))


def test_device_busy_guard():
    x = Tensor.vector([1.0])
    dev, (rx,) = loaded_device(x)
    rout = dev.allocate(8)
    dev.submit(AccelTask(AccelOp.ELEMWISE_SUM, rx, (1,), rx, (1,), rout))
    dev._busy = True  # simulate a mid-flight task holding the context
    with pytest.raises(DeviceBusy):
        dev.execute_next()
    dev._busy = False
    assert dev.execute_next() is not None
