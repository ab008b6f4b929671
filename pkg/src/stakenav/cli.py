"""Command line front end: run an experiment and export it, or verify a dump.

Config precedence is built-in defaults, then a JSON config file (--config),
then explicit flags. Exit codes: 0 success, 1 bad usage or invalid config,
2 runtime or I/O failure, 3 ledger verification failure.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .domain import WorldConfig
from .ledger import KIND_OBSERVATION
from .sim import DegradationScenario, ExperimentState, run_experiment

# Flag/config-file key -> WorldConfig field.
CONFIG_KEYS = {
    "robots": "n_robots",
    "landmarks": "n_landmarks",
    "width": "width",
    "height": "height",
    "loops": "loops",
    "radius": "sensing_radius",
    "step": "step_size",
    "block_size": "block_size",
    "seed": "seed",
    "reward": "generator_reward",
    "initial_stake": "initial_stake",
}
_INT_KEYS = {"robots", "landmarks", "loops", "block_size", "seed"}
SCENARIO_KEYS = ("degrade_pair", "degrade_loops", "degrade_factor")

LEDGER_FILE = "ledger.jsonl"
TRAJECTORIES_FILE = "trajectories.csv"
TIMESERIES_FILE = "timeseries.csv"
SUMMARY_FILE = "summary.json"


class UsageError(ValueError):
    """Bad flag or config-file value; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this tool reserves 2 for
    # runtime failures, so remap to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="stakenav",
        description="Simulate a stake-weighted robot team and export its cooperation ledger.",
    )
    parser.add_argument("--config", metavar="PATH", help="JSON config file (flags override it)")
    parser.add_argument("--robots", type=int, help="number of robots")
    parser.add_argument("--landmarks", type=int, help="number of landmarks")
    parser.add_argument("--width", type=float, help="world width")
    parser.add_argument("--height", type=float, help="world height")
    parser.add_argument("--loops", type=int, help="number of movement loops")
    parser.add_argument("--radius", type=float, help="landmark sensing radius")
    parser.add_argument("--step", type=float, help="max per-axis movement per loop")
    parser.add_argument("--block-size", type=int, help="observations per sealed block")
    parser.add_argument("--seed", type=int, help="root RNG seed")
    parser.add_argument("--reward", type=float, help="stake credited per sealed block")
    parser.add_argument("--initial-stake", type=float, help="starting stake per robot")
    parser.add_argument(
        "--degrade-pair", metavar="I,J", help="robot pair whose match quality degrades"
    )
    parser.add_argument(
        "--degrade-loops", metavar="A,B", help="inclusive 0-based loop window for degradation"
    )
    parser.add_argument(
        "--degrade-factor", type=float, help="multiplier in [0, 1) applied in the window"
    )
    parser.add_argument("--out", metavar="DIR", default="out", help="output directory (default: out)")
    parser.add_argument(
        "--verify", metavar="PATH", help="verify a ledger dump instead of running"
    )
    return parser


def _coerce(key: str, value) -> int | float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise UsageError(f"config key '{key}' must be a number, got {value!r}")
    if key in _INT_KEYS:
        if isinstance(value, float):
            raise UsageError(f"config key '{key}' must be an integer, got {value!r}")
        return value
    return float(value)


def _parse_pair(text, key: str) -> tuple[int, int]:
    if isinstance(text, (list, tuple)) and len(text) == 2:
        parts = list(text)
    elif isinstance(text, str):
        parts = text.split(",")
    else:
        raise UsageError(f"{key} must be two comma-separated integers, got {text!r}")
    try:
        a, b = (int(p) for p in parts)
    except (TypeError, ValueError):
        raise UsageError(f"{key} must be two comma-separated integers, got {text!r}") from None
    return a, b


def load_config_file(path: str) -> dict:
    """Read a JSON config file and reject keys this tool does not know."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"config file {path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise UsageError(f"config file {path}: expected a JSON object")
    known = set(CONFIG_KEYS) | set(SCENARIO_KEYS)
    for key in data:
        if key not in known:
            raise UsageError(f"config file {path}: unknown key '{key}'")
    return data


@dataclass
class RunRequest:
    config: WorldConfig
    scenario: DegradationScenario | None
    out_dir: str


def parse_config(args: argparse.Namespace) -> RunRequest:
    """Merge defaults, config file, and flags into a validated request."""
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {}
    for key, field in CONFIG_KEYS.items():
        flag = getattr(args, key)
        if flag is not None:
            overrides[field] = flag
        elif key in file_values:
            overrides[field] = _coerce(key, file_values[key])
    config = WorldConfig(**overrides)

    scenario_values = {}
    for key in SCENARIO_KEYS:
        flag = getattr(args, key)
        value = flag if flag is not None else file_values.get(key)
        if value is not None:
            scenario_values[key] = value
    scenario = None
    if scenario_values:
        missing = [k for k in SCENARIO_KEYS if k not in scenario_values]
        if missing:
            raise UsageError(
                "degradation scenario needs all of --degrade-pair, --degrade-loops, "
                f"--degrade-factor; missing {', '.join(missing)}"
            )
        pair = _parse_pair(scenario_values["degrade_pair"], "degrade_pair")
        start, end = _parse_pair(scenario_values["degrade_loops"], "degrade_loops")
        factor = scenario_values["degrade_factor"]
        if not isinstance(factor, (int, float)) or isinstance(factor, bool):
            raise UsageError(f"degrade_factor must be a number, got {factor!r}")
        scenario = DegradationScenario(pair, start, end, float(factor))
        scenario.check_against(config)
    return RunRequest(config=config, scenario=scenario, out_dir=args.out)


@dataclass
class RunSummary:
    """Recounted totals for one exported run; duration stays out of files."""

    blocks: int
    transactions: int
    observation_transactions: int
    reward_transactions: int
    max_common: int
    min_common: int
    generator_histogram: list[int]
    final_stakes: list[float]
    total_stake: float
    duration_seconds: float

    def to_dict(self) -> dict:
        # Everything except the wall-clock duration, which would break
        # byte-identical reruns.
        return {
            "blocks": self.blocks,
            "transactions": self.transactions,
            "observation_transactions": self.observation_transactions,
            "reward_transactions": self.reward_transactions,
            "max_common_landmarks": self.max_common,
            "min_common_landmarks": self.min_common,
            "generator_histogram": self.generator_histogram,
            "final_stakes": self.final_stakes,
            "total_stake": self.total_stake,
        }


def summarize(state: ExperimentState, duration_seconds: float) -> RunSummary:
    chain = state.chain
    observations = sum(1 for tx in chain.transactions() if tx.kind == KIND_OBSERVATION)
    total = chain.transaction_count()
    return RunSummary(
        blocks=len(chain.blocks),
        transactions=total,
        observation_transactions=observations,
        reward_transactions=total - observations,
        max_common=state.max_common,
        min_common=state.min_common if state.min_common is not None else 0,
        generator_histogram=chain.generator_histogram(),
        final_stakes=[r.stake for r in state.robots],
        total_stake=state.total_stake(),
        duration_seconds=duration_seconds,
    )


def _trajectories_csv(state: ExperimentState) -> str:
    lines = ["loop,robot_id,x,y"]
    for loop, positions in enumerate(state.trajectory):
        for robot_id, (x, y) in enumerate(positions):
            lines.append(f"{loop},{robot_id},{x!r},{y!r}")
    return "\n".join(lines) + "\n"


def _timeseries_csv(state: ExperimentState) -> str:
    lines = ["block_index,first_tx_id,last_tx_id,avg_navigability,generator"]
    for block in state.chain.blocks:
        first = block.transactions[0].tx_id
        last = block.transactions[-1].tx_id
        lines.append(
            f"{block.index},{first},{last},{block.avg_navigability!r},{block.generator}"
        )
    return "\n".join(lines) + "\n"


def run_and_export(request: RunRequest, stream=None) -> RunSummary:
    """Run the experiment and write the four export files.

    Exports are byte-identical across reruns of the same request.
    """
    stream = stream if stream is not None else sys.stdout
    started = time.perf_counter()
    state = run_experiment(request.config, request.scenario)
    duration = time.perf_counter() - started
    summary = summarize(state, duration)

    out = Path(request.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / LEDGER_FILE).write_bytes(state.chain.dumps())
    (out / TRAJECTORIES_FILE).write_text(_trajectories_csv(state), encoding="ascii")
    (out / TIMESERIES_FILE).write_text(_timeseries_csv(state), encoding="ascii")
    summary_text = json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n"
    (out / SUMMARY_FILE).write_text(summary_text, encoding="ascii")

    print(f"blocks sealed: {summary.blocks}", file=stream)
    print(
        f"transactions: {summary.transactions} "
        f"({summary.observation_transactions} observations, "
        f"{summary.reward_transactions} rewards)",
        file=stream,
    )
    print(f"common landmarks per pair: max {summary.max_common}, min {summary.min_common}", file=stream)
    print(f"generator histogram: {summary.generator_histogram}", file=stream)
    stakes = ", ".join(format(s, ".3f") for s in summary.final_stakes)
    print(f"final stakes: [{stakes}] (total {summary.total_stake:.3f})", file=stream)
    print(f"elapsed: {duration:.3f}s", file=stream)
    print(f"wrote {out / LEDGER_FILE}, {out / TRAJECTORIES_FILE}, "
          f"{out / TIMESERIES_FILE}, {out / SUMMARY_FILE}", file=stream)
    return summary


def verify_dump(path: str, stream=None) -> int:
    """Check a ledger dump file; report the first bad block if any."""
    from .ledger import verify_dump_bytes

    stream = stream if stream is not None else sys.stdout
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        print(f"stakenav: cannot read {path}: {exc}", file=sys.stderr)
        return 2
    bad_index = verify_dump_bytes(data)
    if bad_index is None:
        print(f"{path}: valid", file=stream)
        return 0
    print(f"{path}: invalid at block {bad_index}", file=stream)
    return 3


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1

    if args.verify is not None:
        return verify_dump(args.verify)

    try:
        request = parse_config(args)
    except ValueError as exc:
        # UsageError, ConfigError, and bad pair values all land here.
        print(f"stakenav: error: {exc}", file=sys.stderr)
        return 1
    try:
        run_and_export(request)
    except OSError as exc:
        print(f"stakenav: i/o error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
