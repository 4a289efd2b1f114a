"""Benchmark files: binary save/load, the named registry, and task access.

The on-disk layout is normative for this artifact and documented in
docs/format.md: a little-endian header (magic, version, counts, padded
widths, generator metadata) followed by a row-major byte matrix, one row
per task, optionally deflate-compressed as a whole.
"""

from __future__ import annotations

import math
import os
import struct
import threading
import zlib
from dataclasses import dataclass, replace
from pathlib import Path

from .benchgen import CONFIGS
from .errors import FormatError, InvalidProportion, UnknownBenchmark
from .rng import Key, randint, random_words
from .rules import Encoding
from .ruleset import Ruleset

MAGIC = b"XMGB"
VERSION = 1
_FLAG_DEFLATE = 1

# magic, version, flags, num_rulesets, max_rules, max_objects, seed, name length
_HEADER = struct.Struct("<4sHHIHHQH")

_CACHE: dict[str, tuple[int, "Benchmark"]] = {}
_CACHE_LOCK = threading.Lock()


@dataclass(frozen=True)
class Benchmark:
    """An ordered, immutable collection of equally padded rulesets."""

    rulesets: tuple[Ruleset, ...]
    config_name: str = ""
    seed: int = 0

    def __post_init__(self) -> None:
        widths = {(len(r.rules), len(r.init_objects)) for r in self.rulesets}
        if len(widths) > 1:
            raise ValueError(f"rulesets have mixed padded widths: {sorted(widths)}")

    def num_rulesets(self) -> int:
        return len(self.rulesets)

    def get_ruleset(self, i: int) -> Ruleset:
        if not 0 <= i < len(self.rulesets):
            raise IndexError(f"ruleset id {i} outside [0, {len(self.rulesets)})")
        return self.rulesets[i]

    def sample_ruleset(self, key: Key) -> Ruleset:
        return self.rulesets[randint(key, len(self.rulesets))]

    def shuffle(self, key: Key) -> "Benchmark":
        words = random_words(key, len(self.rulesets))
        order = sorted(range(len(self.rulesets)), key=words.__getitem__)
        return replace(self, rulesets=tuple(self.rulesets[i] for i in order))

    def split(self, prop: float) -> tuple["Benchmark", "Benchmark"]:
        if not 0.0 < prop < 1.0:
            raise InvalidProportion(f"proportion {prop} outside (0, 1)")
        cut = math.floor(prop * len(self.rulesets))
        return (
            replace(self, rulesets=self.rulesets[:cut]),
            replace(self, rulesets=self.rulesets[cut:]),
        )


def _row_size(max_rules: int, max_objects: int) -> int:
    return 4 + 4 * max_rules + max_objects


def save_benchmark(path, benchmark: Benchmark, compress: bool = True) -> None:
    """Write ``benchmark`` to ``path``; load_benchmark inverts it byte-exactly."""
    if not benchmark.rulesets:
        raise ValueError("refusing to save an empty benchmark")
    first = benchmark.rulesets[0]
    max_rules, max_objects = len(first.rules), len(first.init_objects)

    body = bytearray()
    for rs in benchmark.rulesets:
        body += bytes(rs.goal)
        for rule in rs.rules:
            body += bytes(rule)
        body += bytes(rs.init_objects)

    flags = 0
    payload = bytes(body)
    if compress:
        flags |= _FLAG_DEFLATE
        payload = zlib.compress(payload)

    name = benchmark.config_name.encode("utf-8")
    header = _HEADER.pack(
        MAGIC, VERSION, flags, len(benchmark.rulesets),
        max_rules, max_objects, benchmark.seed, len(name),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(name)
        fh.write(payload)


def load_benchmark(path) -> Benchmark:
    """Read a benchmark file, verifying magic, version, and body size."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, flags, count, max_rules, max_objects, seed, name_len = \
        _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version} (expected {VERSION})")

    name_end = _HEADER.size + name_len
    if len(raw) < name_end:
        raise FormatError(f"{path}: truncated metadata")
    name = raw[_HEADER.size:name_end].decode("utf-8")

    body = raw[name_end:]
    if flags & _FLAG_DEFLATE:
        try:
            body = zlib.decompress(body)
        except zlib.error as exc:
            raise FormatError(f"{path}: corrupt compressed body ({exc})") from exc
    row = _row_size(max_rules, max_objects)
    if len(body) != count * row:
        raise FormatError(
            f"{path}: body is {len(body)} bytes, expected {count}x{row}"
        )

    rulesets = []
    for start in range(0, len(body), row):
        chunk = body[start:start + row]
        goal: Encoding = tuple(chunk[0:4])
        rules = tuple(
            tuple(chunk[off:off + 4]) for off in range(4, 4 + 4 * max_rules, 4)
        )
        objects = tuple(chunk[4 + 4 * max_rules:])
        rulesets.append(Ruleset(goal=goal, rules=rules, init_objects=objects))
    return Benchmark(rulesets=tuple(rulesets), config_name=name, seed=seed)


def file_info(path) -> dict:
    """Header metadata without materializing the body; used by CLI inspect."""
    size = os.path.getsize(path)
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise FormatError(f"{path}: truncated header ({len(head)} bytes)")
        magic, version, flags, count, max_rules, max_objects, seed, name_len = \
            _HEADER.unpack(head)
        if magic != MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        name = fh.read(name_len).decode("utf-8")
    return {
        "path": str(path),
        "file_size": size,
        "version": version,
        "compressed": bool(flags & _FLAG_DEFLATE),
        "num_rulesets": count,
        "max_rules": max_rules,
        "max_init_objects": max_objects,
        "config_name": name,
        "seed": seed,
    }


def data_dir() -> Path:
    """Directory of named benchmark files, overridable via XMINIGRID_DATA."""
    override = os.environ.get("XMINIGRID_DATA")
    return Path(override) if override else Path.home() / ".xland_minigrid"


def benchmark_path(name: str) -> Path:
    return data_dir() / f"{name}.xmgb"


def registered_benchmarks() -> tuple[str, ...]:
    return tuple(sorted(CONFIGS))


def load_named(name: str) -> Benchmark:
    """Load a registered benchmark from the data directory, caching by name.

    The cache is keyed on (name, format version); a second load returns the
    same object, and entries written by an older format version are evicted.
    """
    if name not in CONFIGS:
        raise UnknownBenchmark(
            f"unknown benchmark {name!r}; registered: {', '.join(registered_benchmarks())}"
        )
    with _CACHE_LOCK:
        hit = _CACHE.get(name)
        if hit is not None and hit[0] == VERSION:
            return hit[1]
        benchmark = load_benchmark(benchmark_path(name))
        _CACHE[name] = (VERSION, benchmark)
        return benchmark


def clear_cache() -> None:
    with _CACHE_LOCK:
        _CACHE.clear()
