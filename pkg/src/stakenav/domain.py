"""Core value types: world configuration, robots, landmarks, observations.

All randomness in the package flows through :class:`RandomStreams`, a set of
independent generators derived from a single root seed. Each concern
(placement, movement, quality, election) gets its own stream, so adding draws
to one concern never perturbs the others.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    """A configuration field violates its constraints."""


class InvalidPairError(ValueError):
    """A robot pair (i, j) with i == j was supplied where i != j is required."""


def normalize_pair(i: int, j: int) -> tuple[int, int]:
    """Return the unordered pair (min, max), rejecting i == j."""
    if i == j:
        raise InvalidPairError(f"robot pair requires two distinct robots, got ({i}, {j})")
    if i < 0 or j < 0:
        raise InvalidPairError(f"robot indices must be non-negative, got ({i}, {j})")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class WorldConfig:
    """Experiment parameters. Defaults mirror the desk-scale setup."""

    width: float = 200.0
    height: float = 200.0
    n_robots: int = 10
    n_landmarks: int = 20
    loops: int = 10
    sensing_radius: float = 90.0
    step_size: float = 15.0
    block_size: int = 10
    seed: int = 0
    generator_reward: float = 0.1
    initial_stake: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise ConfigError(f"width must be > 0, got {self.width}")
        if not self.height > 0:
            raise ConfigError(f"height must be > 0, got {self.height}")
        if self.n_robots < 1:
            raise ConfigError(f"n_robots must be >= 1, got {self.n_robots}")
        if self.n_landmarks < 0:
            raise ConfigError(f"n_landmarks must be >= 0, got {self.n_landmarks}")
        if self.loops < 0:
            raise ConfigError(f"loops must be >= 0, got {self.loops}")
        if not self.sensing_radius > 0:
            raise ConfigError(f"sensing_radius must be > 0, got {self.sensing_radius}")
        if self.step_size < 0:
            raise ConfigError(f"step_size must be >= 0, got {self.step_size}")
        if self.block_size < 1:
            raise ConfigError(f"block_size must be >= 1, got {self.block_size}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not self.initial_stake > 0:
            raise ConfigError(f"initial_stake must be > 0, got {self.initial_stake}")
        if self.generator_reward < 0:
            raise ConfigError(f"generator_reward must be >= 0, got {self.generator_reward}")


@dataclass
class RobotState:
    """One robot: index, planar position, and stake (navigation reliability)."""

    id: int
    x: float
    y: float
    stake: float

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Landmark:
    """One landmark: index and planar position."""

    id: int
    x: float
    y: float

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class ObservationMatch:
    """One pairwise sighting: both robots of `pair` recognized `landmark_id`.

    `quality` is the match quality in [0, 1]. The pair is stored unordered
    (smaller index first).
    """

    pair: tuple[int, int]
    landmark_id: int
    quality: float
    loop_index: int

    def __post_init__(self):
        object.__setattr__(self, "pair", normalize_pair(*self.pair))
        if not 0.0 <= self.quality <= 1.0:
            raise ValueError(f"quality must be in [0, 1], got {self.quality}")


def derive_stream(seed: int, label: str) -> random.Random:
    """Derive an independent generator from (root seed, stream label).

    The child seed is the SHA-256 of "<seed>:<label>", so streams are stable
    across platforms and across additions of new labels.
    """
    digest = hashlib.sha256(f"{seed}:{label}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest, "big"))


@dataclass
class RandomStreams:
    """Per-concern random generators derived from one root seed."""

    placement: random.Random
    movement: random.Random
    quality: random.Random
    election: random.Random

    @classmethod
    def from_seed(cls, seed: int) -> "RandomStreams":
        return cls(
            placement=derive_stream(seed, "placement"),
            movement=derive_stream(seed, "movement"),
            quality=derive_stream(seed, "quality"),
            election=derive_stream(seed, "election"),
        )


def init_world(config: WorldConfig) -> tuple[list[RobotState], list[Landmark], RandomStreams]:
    """Place robots and landmarks uniformly at random inside the world.

    Draw order is fixed (robots first, then landmarks; x before y), so equal
    (config, seed) gives bit-identical worlds. Every robot starts with
    `initial_stake`.
    """
    streams = RandomStreams.from_seed(config.seed)
    rng = streams.placement
    robots = [
        RobotState(
            id=i,
            x=rng.uniform(0.0, config.width),
            y=rng.uniform(0.0, config.height),
            stake=config.initial_stake,
        )
        for i in range(config.n_robots)
    ]
    landmarks = [
        Landmark(id=k, x=rng.uniform(0.0, config.width), y=rng.uniform(0.0, config.height))
        for k in range(config.n_landmarks)
    ]
    return robots, landmarks, streams
