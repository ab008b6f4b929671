import json

from stakenav import Chain, KIND_OBSERVATION
from stakenav.cli import (
    LEDGER_FILE,
    SUMMARY_FILE,
    TIMESERIES_FILE,
    TRAJECTORIES_FILE,
    build_parser,
    main,
    parse_config,
)


def parse(argv):
    return parse_config(build_parser().parse_args(argv))


def test_defaults_without_flags(tmp_path):
    req = parse(["--out", str(tmp_path)])
    assert req.config.n_robots == 10
    assert req.scenario is None
    assert req.out_dir == str(tmp_path)


def test_flags_override_defaults():
    req = parse(["--robots", "6", "--radius", "45.5", "--seed", "9"])
    assert req.config.n_robots == 6
    assert req.config.sensing_radius == 45.5
    assert req.config.seed == 9


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"robots": 5, "loops": 3, "reward": 0.2}))
    req = parse(["--config", str(cfg), "--loops", "7"])
    assert req.config.n_robots == 5       # file beats default
    assert req.config.loops == 7          # flag beats file
    assert req.config.generator_reward == 0.2


def test_config_file_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"robots": 5, "robtos": 6}))
    assert main(["--config", str(cfg)]) == 1
    assert "robtos" in capsys.readouterr().err


def test_config_file_scenario(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "degrade_pair": [0, 3], "degrade_loops": "4,6", "degrade_factor": 0.1,
    }))
    req = parse(["--config", str(cfg)])
    assert req.scenario.pair == (0, 3)
    assert (req.scenario.start_loop, req.scenario.end_loop) == (4, 6)
    assert req.scenario.multiplier == 0.1


def test_scenario_flags():
    req = parse(["--degrade-pair", "7,2", "--degrade-loops", "4,6", "--degrade-factor", "0.1"])
    assert req.scenario.pair == (2, 7)


def test_partial_scenario_is_usage_error(capsys):
    assert main(["--degrade-pair", "0,1"]) == 1
    err = capsys.readouterr().err
    assert "degrade_loops" in err and "degrade_factor" in err


def test_non_numeric_flag_exits_one(capsys):
    assert main(["--robots", "many"]) == 1
    assert "--robots" in capsys.readouterr().err


def test_invalid_config_value_names_field(capsys):
    assert main(["--robots", "0"]) == 1
    assert "n_robots" in capsys.readouterr().err


def test_bad_pair_value_exits_one(capsys):
    assert main(["--degrade-pair", "3,3", "--degrade-loops", "4,6",
                 "--degrade-factor", "0.1"]) == 1
    capsys.readouterr()


def test_run_writes_all_exports(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["--seed", "3", "--loops", "4", "--out", str(out)]) == 0
    stdout = capsys.readouterr().out
    assert "blocks sealed:" in stdout and "elapsed:" in stdout
    for name in (LEDGER_FILE, TRAJECTORIES_FILE, TIMESERIES_FILE, SUMMARY_FILE):
        assert (out / name).is_file()

    chain = Chain.load(out / LEDGER_FILE)
    assert chain.verify() is None
    summary = json.loads((out / SUMMARY_FILE).read_text())
    assert summary["blocks"] == len(chain.blocks)
    assert summary["transactions"] == chain.transaction_count()
    obs = sum(1 for tx in chain.transactions() if tx.kind == KIND_OBSERVATION)
    assert summary["observation_transactions"] == obs
    assert summary["reward_transactions"] == len(chain.blocks)
    assert summary["generator_histogram"] == chain.generator_histogram(10)
    assert "duration" not in json.dumps(summary)

    traj_lines = (out / TRAJECTORIES_FILE).read_text().splitlines()
    assert traj_lines[0] == "loop,robot_id,x,y"
    assert len(traj_lines) == 1 + (4 + 1) * 10  # header + (loops+1) * robots
    ts_lines = (out / TIMESERIES_FILE).read_text().splitlines()
    assert len(ts_lines) == 1 + len(chain.blocks)
    for block, line in zip(chain.blocks, ts_lines[1:]):
        idx, first, last, avg, gen = line.split(",")
        assert int(idx) == block.index
        assert int(first) == block.transactions[0].tx_id
        assert int(last) == block.transactions[-1].tx_id
        assert float(avg) == block.avg_navigability
        assert int(gen) == block.generator


def test_repeat_runs_are_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--seed", "8", "--out", str(a)]) == 0
    assert main(["--seed", "8", "--out", str(b)]) == 0
    capsys.readouterr()
    for name in (LEDGER_FILE, TRAJECTORIES_FILE, TIMESERIES_FILE, SUMMARY_FILE):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_verify_mode(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["--seed", "2", "--loops", "3", "--out", str(out)]) == 0
    ledger = out / LEDGER_FILE
    assert main(["--verify", str(ledger)]) == 0
    capsys.readouterr()

    data = bytearray(ledger.read_bytes())
    data[len(data) // 2] ^= 0x10
    ledger.write_bytes(bytes(data))
    assert main(["--verify", str(ledger)]) == 3
    assert "invalid at block" in capsys.readouterr().out

    assert main(["--verify", str(tmp_path / "missing.jsonl")]) == 2
    capsys.readouterr()


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    capsys.readouterr()


def test_unwritable_output_is_runtime_error(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["--loops", "1", "--out", str(blocker / "sub")]) == 2
    capsys.readouterr()
