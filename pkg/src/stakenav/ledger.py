"""Append-only hash-chained ledger of observation and reward transactions.

Canonical encoding, used both for hashing and for the dump format: each
record is JSON with lexicographically sorted keys, no insignificant
whitespace, ASCII output, integers in decimal, and floats in Python's
shortest round-trip decimal form. A block's hash is the lowercase hex SHA-256
of the canonical encoding of the block without its "hash" field. The genesis
block's prev_hash is 64 zero hex digits.

Dump format: one block per line, each line the canonical encoding of the
block including its "hash" field. Dump verification re-parses every line,
requires it to re-encode byte-identically (so the file carries exactly the
canonical form), and then re-checks every hash and link; any single-bit
change to the stored bytes is therefore detected.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any

from .domain import InvalidPairError, normalize_pair

GENESIS_PREV_HASH = "0" * 64

KIND_OBSERVATION = "pair_observation"
KIND_REWARD = "generator_reward"

_HEX_DIGITS = set("0123456789abcdef")


class LedgerError(ValueError):
    """A ledger construction rule was violated."""


class LedgerFormatError(LedgerError):
    """A dumped record could not be decoded."""


def canonical_encode(obj: Any) -> bytes:
    """Canonical JSON bytes: sorted keys, no whitespace, shortest floats."""
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), allow_nan=False, ensure_ascii=True
    ).encode("ascii")


def _require_int(record: dict, key: str, line: str) -> int:
    value = record.get(key)
    if type(value) is not int:
        raise LedgerFormatError(f"{line}: field '{key}' must be an integer, got {value!r}")
    return value


def _require_float(record: dict, key: str, line: str) -> float:
    value = record.get(key)
    if type(value) not in (int, float):
        raise LedgerFormatError(f"{line}: field '{key}' must be a number, got {value!r}")
    return float(value)


@dataclass
class Transaction:
    """One ledger record: a pairwise observation or a generator reward.

    Observation transactions carry the unordered robot pair and the
    (landmark_id, quality) matches seen this loop. Reward transactions credit
    the elected block generator. `tx_id` is assigned when the transaction is
    sealed into a block and is None while pending.
    """

    kind: str
    loop_index: int
    tx_id: int | None = None
    pair: tuple[int, int] | None = None
    matches: list[tuple[int, float]] = field(default_factory=list)
    generator: int | None = None
    reward: float | None = None

    def __post_init__(self):
        if self.loop_index < 0:
            raise LedgerError(f"loop_index must be >= 0, got {self.loop_index}")
        if self.kind == KIND_OBSERVATION:
            if self.pair is None:
                raise LedgerError("observation transaction requires a robot pair")
            self.pair = normalize_pair(*self.pair)
            if not self.matches:
                raise LedgerError("observation transaction requires at least one match")
            for k, q in self.matches:
                if k < 0:
                    raise LedgerError(f"landmark id must be >= 0, got {k}")
                if not 0.0 <= q <= 1.0:
                    raise LedgerError(f"match quality must be in [0, 1], got {q}")
            self.matches = [(int(k), float(q)) for k, q in self.matches]
            if self.generator is not None or self.reward is not None:
                raise LedgerError("observation transaction cannot carry reward fields")
        elif self.kind == KIND_REWARD:
            if self.generator is None or self.generator < 0:
                raise LedgerError(f"reward transaction requires a robot index, got {self.generator}")
            if self.reward is None or self.reward < 0:
                raise LedgerError(f"reward must be >= 0, got {self.reward}")
            self.reward = float(self.reward)
            if self.pair is not None or self.matches:
                raise LedgerError("reward transaction cannot carry observation fields")
        else:
            raise LedgerError(f"unknown transaction kind {self.kind!r}")

    @classmethod
    def observation(
        cls, pair: tuple[int, int], matches: list[tuple[int, float]], loop_index: int
    ) -> "Transaction":
        return cls(kind=KIND_OBSERVATION, loop_index=loop_index, pair=pair, matches=matches)

    @classmethod
    def generator_reward(cls, generator: int, reward: float, loop_index: int) -> "Transaction":
        return cls(kind=KIND_REWARD, loop_index=loop_index, generator=generator, reward=reward)

    def to_dict(self) -> dict:
        if self.tx_id is None:
            raise LedgerError("transaction has no tx_id yet; it must be sealed first")
        if self.kind == KIND_OBSERVATION:
            return {
                "kind": self.kind,
                "loop_index": self.loop_index,
                "matches": [[k, q] for k, q in self.matches],
                "pair": list(self.pair),
                "tx_id": self.tx_id,
            }
        return {
            "generator": self.generator,
            "kind": self.kind,
            "loop_index": self.loop_index,
            "reward": self.reward,
            "tx_id": self.tx_id,
        }

    @classmethod
    def from_dict(cls, record: Any) -> "Transaction":
        if not isinstance(record, dict):
            raise LedgerFormatError(f"transaction record must be an object, got {record!r}")
        kind = record.get("kind")
        if kind == KIND_OBSERVATION:
            allowed = {"kind", "loop_index", "matches", "pair", "tx_id"}
        elif kind == KIND_REWARD:
            allowed = {"generator", "kind", "loop_index", "reward", "tx_id"}
        else:
            raise LedgerFormatError(f"unknown transaction kind {kind!r}")
        unknown = set(record) - allowed
        if unknown:
            raise LedgerFormatError(f"unknown transaction fields {sorted(unknown)}")
        missing = allowed - set(record)
        if missing:
            raise LedgerFormatError(f"missing transaction fields {sorted(missing)}")
        tx_id = _require_int(record, "tx_id", "transaction")
        loop_index = _require_int(record, "loop_index", "transaction")
        try:
            if kind == KIND_OBSERVATION:
                pair = record["pair"]
                if (
                    not isinstance(pair, list)
                    or len(pair) != 2
                    or any(type(x) is not int for x in pair)
                ):
                    raise LedgerFormatError(f"pair must be a list of two ints, got {pair!r}")
                raw_matches = record["matches"]
                if not isinstance(raw_matches, list):
                    raise LedgerFormatError(f"matches must be a list, got {raw_matches!r}")
                matches = []
                for entry in raw_matches:
                    if not isinstance(entry, list) or len(entry) != 2:
                        raise LedgerFormatError(f"match entry must be [id, quality], got {entry!r}")
                    k, q = entry
                    if type(k) is not int or type(q) not in (int, float):
                        raise LedgerFormatError(f"match entry must be [int, number], got {entry!r}")
                    matches.append((k, float(q)))
                tx = cls.observation(pair=(pair[0], pair[1]), matches=matches, loop_index=loop_index)
            else:
                tx = cls.generator_reward(
                    generator=_require_int(record, "generator", "transaction"),
                    reward=_require_float(record, "reward", "transaction"),
                    loop_index=loop_index,
                )
        except (LedgerError, InvalidPairError) as exc:
            raise LedgerFormatError(str(exc)) from exc
        tx.tx_id = tx_id
        return tx


@dataclass
class Block:
    """Hash-chained batch of transactions with its elected generator.

    `avg_navigability` snapshots the average navigability at generation time.
    """

    index: int
    prev_hash: str
    transactions: list[Transaction]
    generator: int
    avg_navigability: float
    hash: str

    def body_dict(self) -> dict:
        return {
            "avg_navigability": self.avg_navigability,
            "generator": self.generator,
            "index": self.index,
            "prev_hash": self.prev_hash,
            "transactions": [tx.to_dict() for tx in self.transactions],
        }

    def compute_hash(self) -> str:
        return hashlib.sha256(canonical_encode(self.body_dict())).hexdigest()

    def to_dict(self) -> dict:
        record = self.body_dict()
        record["hash"] = self.hash
        return record

    def to_line(self) -> bytes:
        return canonical_encode(self.to_dict())

    @classmethod
    def from_dict(cls, record: Any) -> "Block":
        if not isinstance(record, dict):
            raise LedgerFormatError(f"block record must be an object, got {record!r}")
        expected = {"avg_navigability", "generator", "index", "prev_hash", "transactions", "hash"}
        unknown = set(record) - expected
        if unknown:
            raise LedgerFormatError(f"unknown block fields {sorted(unknown)}")
        missing = expected - set(record)
        if missing:
            raise LedgerFormatError(f"missing block fields {sorted(missing)}")
        for key in ("prev_hash", "hash"):
            value = record[key]
            if not isinstance(value, str) or len(value) != 64 or not set(value) <= _HEX_DIGITS:
                raise LedgerFormatError(f"field '{key}' must be 64 lowercase hex digits")
        raw_txs = record["transactions"]
        if not isinstance(raw_txs, list) or not raw_txs:
            raise LedgerFormatError("block must carry a non-empty transaction list")
        return cls(
            index=_require_int(record, "index", "block"),
            prev_hash=record["prev_hash"],
            transactions=[Transaction.from_dict(tx) for tx in raw_txs],
            generator=_require_int(record, "generator", "block"),
            avg_navigability=_require_float(record, "avg_navigability", "block"),
            hash=record["hash"],
        )


class Chain:
    """In-memory block chain with single-writer appends.

    When `n_robots` is given, appended generator and pair indices are checked
    against it.
    """

    def __init__(self, n_robots: int | None = None):
        self.n_robots = n_robots
        self.blocks: list[Block] = []

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, item):
        return self.blocks[item]

    @property
    def next_tx_id(self) -> int:
        if not self.blocks:
            return 0
        return self.blocks[-1].transactions[-1].tx_id + 1

    def transactions(self):
        for block in self.blocks:
            yield from block.transactions

    def transaction_count(self) -> int:
        return sum(len(block.transactions) for block in self.blocks)

    def append_block(
        self, transactions: list[Transaction], generator: int, avg_navigability: float
    ) -> Block:
        """Seal `transactions` into a new block and link it to the chain tip.

        Transactions must already carry tx_ids continuing the chain's
        sequence without gaps.
        """
        if not transactions:
            raise LedgerError("cannot seal a block with no transactions")
        expected = self.next_tx_id
        for tx in transactions:
            if tx.tx_id is None:
                raise LedgerError("transaction has no tx_id assigned")
            if tx.tx_id != expected:
                raise LedgerError(
                    f"tx_id discontinuity: expected {expected}, got {tx.tx_id}"
                )
            expected += 1
        self._check_robot_index(generator, "generator")
        for tx in transactions:
            if tx.kind == KIND_OBSERVATION:
                self._check_robot_index(tx.pair[0], "pair")
                self._check_robot_index(tx.pair[1], "pair")
            else:
                self._check_robot_index(tx.generator, "reward generator")
        prev_hash = self.blocks[-1].hash if self.blocks else GENESIS_PREV_HASH
        block = Block(
            index=len(self.blocks),
            prev_hash=prev_hash,
            transactions=transactions,
            generator=generator,
            avg_navigability=float(avg_navigability),
            hash="",
        )
        block.hash = block.compute_hash()
        self.blocks.append(block)
        return block

    def _check_robot_index(self, index: int, label: str) -> None:
        if index < 0 or (self.n_robots is not None and index >= self.n_robots):
            raise LedgerError(f"{label} index {index} out of range")

    def verify(self) -> int | None:
        """Re-check every hash, link, and the tx_id sequence.

        Returns None when the chain is intact, otherwise the index of the
        first invalid block.
        """
        prev_hash = GENESIS_PREV_HASH
        expected_tx_id = 0
        for position, block in enumerate(self.blocks):
            if not _block_intact(block, position, prev_hash, expected_tx_id):
                return position
            expected_tx_id += len(block.transactions)
            prev_hash = block.hash
        return None

    def pair_tx_count(self, i: int, j: int) -> int:
        """Observation transactions recorded for the unordered pair {i, j}."""
        pair = normalize_pair(i, j)
        count = 0
        for tx in self.transactions():
            if tx.kind == KIND_OBSERVATION and tx.pair == pair:
                count += 1
        return count

    def all_pair_tx_counts(self) -> dict[tuple[int, int], int]:
        """Observation transaction counts for every pair seen in the chain."""
        counts: dict[tuple[int, int], int] = {}
        for tx in self.transactions():
            if tx.kind == KIND_OBSERVATION:
                counts[tx.pair] = counts.get(tx.pair, 0) + 1
        return counts

    def generator_histogram(self, n_robots: int | None = None) -> list[int]:
        """Blocks sealed per robot; entries sum to the chain length."""
        n = n_robots if n_robots is not None else self.n_robots
        if n is None:
            raise ValueError("generator_histogram needs the team size")
        counts = [0] * n
        for block in self.blocks:
            counts[block.generator] += 1
        return counts

    def dumps(self) -> bytes:
        return b"".join(block.to_line() + b"\n" for block in self.blocks)

    def dump(self, path) -> None:
        with open(path, "wb") as handle:
            handle.write(self.dumps())

    @classmethod
    def loads(cls, data: bytes, n_robots: int | None = None) -> "Chain":
        chain = cls(n_robots=n_robots)
        chain.blocks = [block for _, block in _parse_dump(data)]
        return chain

    @classmethod
    def load(cls, path, n_robots: int | None = None) -> "Chain":
        with open(path, "rb") as handle:
            return cls.loads(handle.read(), n_robots=n_robots)


def _block_intact(
    block: Block, position: int, prev_hash: str, expected_tx_id: int
) -> bool:
    """One block's place in the chain: index, link, id sequence, hash."""
    if block.index != position or block.prev_hash != prev_hash:
        return False
    if not block.transactions:
        return False
    for tx in block.transactions:
        if tx.tx_id != expected_tx_id:
            return False
        expected_tx_id += 1
    return block.compute_hash() == block.hash


def _parse_dump(data: bytes):
    """Yield (line bytes, Block) per dump line; raise LedgerFormatError with
    the offending block index in the message via `.block_index`."""
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    for index, line in enumerate(lines):
        try:
            record = json.loads(line.decode("ascii"))
            block = Block.from_dict(record)
        except (UnicodeDecodeError, json.JSONDecodeError, LedgerFormatError) as exc:
            error = LedgerFormatError(f"block {index}: {exc}")
            error.block_index = index
            raise error from exc
        yield line, block


def verify_dump_bytes(data: bytes) -> int | None:
    """Verify a dumped chain directly from its bytes.

    Each line must decode, re-encode to exactly the stored bytes (the dump is
    canonical by construction), and every block must pass hash, link, and
    tx-sequence verification. Stops at the first bad line, so any byte-level
    change is reported no later than the block it lands in. Returns None when
    valid, otherwise the index of the first invalid block.
    """
    prev_hash = GENESIS_PREV_HASH
    expected_tx_id = 0
    position = 0
    try:
        for line, block in _parse_dump(data):
            if block.to_line() != line:
                return position
            if not _block_intact(block, position, prev_hash, expected_tx_id):
                return position
            expected_tx_id += len(block.transactions)
            prev_hash = block.hash
            position += 1
    except LedgerFormatError as exc:
        return exc.block_index
    return None
