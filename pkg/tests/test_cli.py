import pytest

from neurokernel.cli import main
from neurokernel.config import ENV_VAR, parse_config, pool_config_from


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestCompute:
    def test_exact_division(self, capsys):
        code, out, _ = run(capsys, "compute", "--a", "6", "--b", "3", "--op", "div")
        assert (code, out) == (0, "2\n")

    def test_division_by_zero_exits_one_with_kind(self, capsys):
        code, out, err = run(capsys, "compute", "--a", "1", "--b", "0", "--op", "div")
        assert code == 1
        assert out == ""
        assert "InvalidArgument" in err

    def test_negative_multiply(self, capsys):
        code, out, _ = run(capsys, "compute", "--a", "7", "--b", "-2", "--op", "mul")
        assert (code, out) == (0, "-14\n")


class TestUsageErrors:
    def test_unknown_subcommand_exits_two(self, capsys):
        code, _, err = run(capsys, "frobnicate")
        assert code == 2
        assert "usage" in err.lower() or "invalid choice" in err

    def test_no_subcommand_exits_two(self, capsys):
        code, _, _ = run(capsys)
        assert code == 2

    def test_missing_required_flag_exits_two(self, capsys):
        code, _, _ = run(capsys, "compute", "--a", "1", "--op", "div")
        assert code == 2


class TestMatmulBench:
    def test_csv_shape_and_checksum_reproducibility(self, capsys):
        code, out1, _ = run(capsys, "matmul-bench", "--n", "6", "--trials", "2", "--seed", "3")
        assert code == 0
        lines = out1.strip().splitlines()
        assert lines[0] == "variant,n,block,workers,nanos,checksum"
        assert len(lines) == 1 + 3 * 2
        _, out2, _ = run(capsys, "matmul-bench", "--n", "6", "--trials", "2", "--seed", "3")
        checksums1 = [line.split(",")[-1] for line in lines[1:]]
        checksums2 = [line.split(",")[-1] for line in out2.strip().splitlines()[1:]]
        assert checksums1 == checksums2
        assert len(set(checksums1)) == 1  # all variants agree on the result


class TestPoolDemo:
    def test_replay_and_hex_bitmap(self, capsys, tmp_path):
        ops = tmp_path / "ops.txt"
        ops.write_text("alloc 4\nalloc 2\nfree 1\nalloc 1\n")
        config = tmp_path / "pool.conf"
        config.write_text("pool_bytes = 32768\nblock_bytes = 4096\n")
        code, out, _ = run(capsys, "pool-demo", "--ops", str(ops), "--config", str(config))
        assert code == 0
        # 8 blocks: alloc4 @0, alloc2 @4, free #1, alloc1 @0 -> bits 10001100
        assert out == "8c\n"

    def test_oom_in_script_exits_one(self, capsys, tmp_path):
        ops = tmp_path / "ops.txt"
        ops.write_text("alloc 9\n")
        config = tmp_path / "pool.conf"
        config.write_text("pool_bytes = 32768\nblock_bytes = 4096\n")
        code, _, err = run(capsys, "pool-demo", "--ops", str(ops), "--config", str(config))
        assert code == 1
        assert "OutOfMemory" in err

    def test_missing_ops_file_exits_one(self, capsys, tmp_path):
        code, _, err = run(capsys, "pool-demo", "--ops", str(tmp_path / "absent.txt"))
        assert code == 1
        assert "InvalidArgument" in err

    def test_env_var_config_fallback(self, capsys, tmp_path, monkeypatch):
        ops = tmp_path / "ops.txt"
        ops.write_text("alloc 8\n")
        config = tmp_path / "pool.conf"
        config.write_text("pool_bytes = 32768\nblock_bytes = 4096\n")
        monkeypatch.setenv(ENV_VAR, str(config))
        code, out, _ = run(capsys, "pool-demo", "--ops", str(ops))
        assert code == 0
        assert out == "ff\n"

    def test_large_page_op_respects_alignment(self, capsys, tmp_path):
        ops = tmp_path / "ops.txt"
        ops.write_text("alloc 1\nlpage 16384\n")  # block 0 taken, page lands at block 4
        config = tmp_path / "pool.conf"
        config.write_text(
            "pool_bytes = 32768\nblock_bytes = 4096\nlarge_page_classes = 16384\n"
        )
        code, out, _ = run(capsys, "pool-demo", "--ops", str(ops), "--config", str(config))
        assert code == 0
        assert out == "8f\n"  # bits 10001111


class TestAccelDemo:
    def test_device_matches_host(self, capsys):
        code, out, _ = run(capsys, "accel-demo", "--n", "5")
        assert (code, out) == (0, "device==host: true\n")


class TestSchedSim:
    def test_completion_order_and_priorities(self, capsys, tmp_path):
        tasks = tmp_path / "tasks.txt"
        tasks.write_text(
            "task a prio 10 cycles 5\n"
            "task b prio 5 cycles 5\n"
            "task c prio 10 cycles 5\n"
        )
        code, out, _ = run(capsys, "sched-sim", "--tasks", str(tasks))
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "task_id,completion_index,final_priority,consumed_cycles"
        order = [line.split(",")[0] for line in lines[1:]]
        assert order == ["b", "a", "c"]

    def test_deprioritization_visible_in_report(self, capsys, tmp_path):
        tasks = tmp_path / "tasks.txt"
        tasks.write_text("task hog prio 10 cycles 50\n")
        code, out, _ = run(
            capsys, "sched-sim", "--tasks", str(tasks), "--threshold", "10", "--quantum", "20"
        )
        assert code == 0
        row = out.strip().splitlines()[1].split(",")
        assert row[0] == "hog"
        assert row[2] == "20"  # 10 + penalty
        assert row[3] == "50"

    def test_malformed_task_line_exits_one(self, capsys, tmp_path):
        tasks = tmp_path / "tasks.txt"
        tasks.write_text("task a prio\n")
        code, _, err = run(capsys, "sched-sim", "--tasks", str(tasks))
        assert code == 1
        assert "InvalidArgument" in err

    def test_config_file_supplies_quantum_and_threshold(self, capsys, tmp_path):
        tasks = tmp_path / "tasks.txt"
        tasks.write_text("task hog prio 10 cycles 50\n")
        config = tmp_path / "sched.conf"
        config.write_text("deprioritize_threshold = 10\nquantum = 20\n")
        code, out, _ = run(capsys, "sched-sim", "--tasks", str(tasks), "--config", str(config))
        assert code == 0
        assert out.strip().splitlines()[1] == "hog,1,20,50"


class TestOrchestrate:
    def test_demo_scenario_emits_exact_strings(self, capsys):
        code, out, _ = run(capsys, "orchestrate", "--scenario", "demo", "--ticks", "8")
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "tick,event,detail"
        assert '8,fused,"A person is standing 3 meters away, asking for help"' in lines
        assert "8,decision,Approach the person and respond verbally" in lines

    def test_byte_reproducible_for_fixed_seed(self, capsys):
        _, out1, _ = run(capsys, "orchestrate", "--scenario", "demo", "--ticks", "10", "--seed", "7")
        _, out2, _ = run(capsys, "orchestrate", "--scenario", "demo", "--ticks", "10", "--seed", "7")
        assert out1 == out2

    def test_scenario_file(self, capsys, tmp_path):
        scenario = tmp_path / "s.txt"
        scenario.write_text("node 1 vision\ninput 1 vision person\n")
        code, out, _ = run(capsys, "orchestrate", "--scenario", str(scenario), "--ticks", "3")
        assert code == 0
        assert "3,fused,A person is present" in out.splitlines()


class TestRababDemo:
    def test_learning_curve_and_determinism(self, capsys):
        code, out1, _ = run(capsys, "rabab-demo", "--iterations", "50", "--seed", "0")
        assert code == 0
        lines = out1.strip().splitlines()
        assert lines[0] == "iteration,confidence"
        assert len(lines) == 51
        final = float(lines[-1].split(",")[1])
        assert final == 51.0 / 52.0
        _, out2, _ = run(capsys, "rabab-demo", "--iterations", "50", "--seed", "0")
        assert out1 == out2


class TestRababDraw:
    def test_ppm_output(self, capsys):
        code, out, _ = run(capsys, "rabab-draw", "--intent", "pixel:1,0,#FF0000",
                           "--width", "2", "--height", "1")
        assert code == 0
        assert out == "P3\n2 1\n255\n0 0 0 255 0 0\n"

    def test_default_framebuffer_is_128(self, capsys):
        code, out, _ = run(capsys, "rabab-draw", "--intent", "pixel:100,50,#FF0000")
        assert code == 0
        assert out.startswith("P3\n128 128\n255\n")

    def test_out_of_bounds_intent_exits_one(self, capsys):
        code, _, err = run(capsys, "rabab-draw", "--intent", "pixel:200,0,#FF0000",
                           "--width", "8", "--height", "8")
        assert code == 1
        assert "InvalidArgument" in err


class TestConfigParsing:
    def test_parse_values_and_lists(self):
        values = parse_config(
            "# pool sizing\npool_bytes = 8388608\nblock_bytes=4096\n"
            "large_page_classes = 65536, 1048576\n"
        )
        assert values["pool_bytes"] == 8388608
        assert values["large_page_classes"] == (65536, 1048576)
        cfg = pool_config_from(values)
        assert cfg.pool_bytes == 8388608

    def test_malformed_line_rejected(self):
        with pytest.raises(Exception):
            parse_config("pool_bytes eight\n")
