"""Approximate nearest-neighbor index with zero false negatives.

Points are labeled by an L-tuple of floored-projection hashes.  Because a
pair within l_p distance 1 differs by at most 1 in every coordinate of the
label, probing the 3^L surrounding label combinations can never miss a
close point; every reported neighbor is then verified by a true distance
computation, so results contain exactly the candidates within distance c.

Two storage layouts trade preprocessing against query cost:

* ``fast_query``: every point is stored under all 3^L labels it could be
  probed by, and a query reads a single bucket.
* ``fast_preprocessing``: every point is stored once, and a query probes
  the 3^L label combinations around its own label.

Both return identical distance <= 1 results for the same configuration and
master seed; the variants can differ only on the optional band (1, c].

Label tuples are folded to 128-bit fingerprints (two independently mixed
64-bit lanes); a fingerprint collision could at worst add a candidate that
distance verification then rejects, so correctness does not depend on the
fingerprint, only bucket sizes do.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import struct
import time
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .exact import lp_distances
from .families import (
    PROVEN_ADJACENCY_KINDS,
    FamilyKind,
    HashFunction,
    c_threshold,
    false_positive_bound,
    hash_eval_matrix,
    hash_function_from_bytes,
    hash_scale,
    sample_vector,
)
from .lpspace import check_exponent
from .streams import derive_seed

LN3 = math.log(3.0)

#: Default cap on stored (fingerprint, id) entries; fast_query replication
#: multiplies n by 3^L, so the cap is what a build may cost in memory.
DEFAULT_MAX_ENTRIES = 10_000_000

_CHUNK_ENTRIES = 1 << 20

_MIX_MULT_1 = np.uint64(0xFF51AFD7ED558CCD)
_MIX_MULT_2 = np.uint64(0xC4CEB9FE1A85EC53)

_FILE_MAGIC = b"FLSHIDX1"
_FILE_VERSION = 1
_HEADER = struct.Struct("<8sHQ32s")
_CONFIG_BLOCK = struct.Struct("<BdBBIdIQBQB")
_STATS_BLOCK = struct.Struct("<dQQQ")


class Variant(str, Enum):
    FAST_QUERY = "fast_query"
    FAST_PREPROCESSING = "fast_preprocessing"


_VARIANT_TAGS = {Variant.FAST_QUERY: 0, Variant.FAST_PREPROCESSING: 1}
_TAG_VARIANTS = {tag: variant for variant, tag in _VARIANT_TAGS.items()}
_KIND_TAGS = {
    FamilyKind.RADEMACHER: 0,
    FamilyKind.UNIFORM_CUBE: 1,
    FamilyKind.UNIT_SPHERE: 2,
}
_TAG_KINDS = {tag: kind for kind, tag in _KIND_TAGS.items()}


@dataclass(frozen=True)
class IndexConfig:
    """Build configuration.

    Attributes:
        p: norm exponent of the metric, in [1, inf].
        d: dimension.
        c: approximation factor; any returned point is within c, any point
            within 1 is always returned.  Must exceed the family threshold
            unless ``unsafe_override`` is set.
        kind: hash family; restricted to the families with a proven
            adjacency guarantee.
        variant: storage layout.
        levels: label length L, or None to pick it from the theoretical
            false-positive bound.
        master_seed: seed from which all per-level hash seeds derive.
        unsafe_override: allow c at or below the family threshold.  The
            no-false-negative guarantee still holds; only the false-positive
            bound is forfeited.
        max_entries: memory guard on stored (fingerprint, id) entries.
        copy_points: store an owned copy of the dataset (default) rather
            than a reference.
    """

    p: float
    d: int
    c: float
    kind: FamilyKind
    variant: Variant
    levels: int | None = None
    master_seed: int = 0
    unsafe_override: bool = False
    max_entries: int = DEFAULT_MAX_ENTRIES
    copy_points: bool = True

    def __post_init__(self) -> None:
        check_exponent(self.p)
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.kind not in PROVEN_ADJACENCY_KINDS:
            raise ValueError(
                f"family {self.kind.value!r} has no adjacency guarantee and "
                "cannot back an index"
            )
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.c < 1.0:
            raise ValueError(f"approximation factor must be >= 1, got {self.c}")
        if self.levels is not None and self.levels < 1:
            raise ValueError(f"levels must be >= 1, got {self.levels}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.max_entries < 1:
            raise ValueError("max_entries must be positive")
        threshold = self.c_threshold
        if self.c <= threshold and not self.unsafe_override:
            raise ValueError(
                f"approximation factor c={self.c} is at or below the "
                f"{self.kind.value} threshold {threshold}; the false-positive "
                "bound would be vacuous (set unsafe_override to force)"
            )

    @property
    def c_threshold(self) -> float:
        """Family threshold on c for this (kind, p, d)."""
        return c_threshold(self.kind, self.p, self.d)

    @property
    def false_positive_bound(self) -> float | None:
        """Theoretical far-pair collision bound per level, if meaningful."""
        bound, _ = false_positive_bound(self.kind, self.p, self.d, self.c)
        return bound


def choose_levels(variant: Variant, n: int, d: int, fp_bound: float) -> int:
    """Pick the label length L for ``n`` points from the per-level bound.

    fast_query targets about d expected surviving far points per query:
    L = ceil(ln(n / d) / a) with a = -ln(fp_bound).  fast_preprocessing
    tracks the balance point of probe cost 3^L against expected candidate
    cost n * fp_bound^L: L = ceil(ln(n * a / b) / (a + b)) with b = ln 3.
    Rounding up keeps replication from lagging the data size, so candidate
    scanning stays sublinear across growing n; the cost of the ceiling over
    the exact integer minimizer is at most one extra level.

    Raises when fp_bound >= 1: no level count can thin out far points.
    """
    variant = Variant(variant)
    if n < 1:
        raise ValueError(f"point count must be >= 1, got {n}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if not 0.0 < fp_bound < 1.0:
        raise ValueError(
            f"per-level false-positive bound must be in (0, 1) to derive a "
            f"level count, got {fp_bound}"
        )
    a = -math.log(fp_bound)
    if variant is Variant.FAST_QUERY:
        if n <= d:
            return 1
        return max(1, math.ceil(math.log(n / d) / a))
    target = n * a / LN3
    if target <= 1.0:
        return 1
    return max(1, math.ceil(math.log(target) / (a + LN3)))


@dataclass(frozen=True)
class BuildStats:
    seconds: float
    entries: int
    unique_buckets: int
    approx_bytes: int


@dataclass(frozen=True)
class QueryStats:
    buckets_probed: int
    candidates_scanned: int
    distance_evals: int
    duplicates_suppressed: int


@dataclass(frozen=True)
class QueryResult:
    """Verified neighbors (id, distance), sorted by distance then id."""

    neighbors: list[tuple[int, float]]
    stats: QueryStats


def _mix64(values: np.ndarray) -> np.ndarray:
    values ^= values >> 33
    values *= _MIX_MULT_1
    values ^= values >> 29
    values *= _MIX_MULT_2
    values ^= values >> 32
    return values


class _Fingerprinter:
    """Folds int64 label tuples into two independent 64-bit lanes."""

    def __init__(self, master_seed: int, levels: int) -> None:
        base = 1 << 48
        self.init_1 = np.uint64(derive_seed(master_seed, base))
        self.init_2 = np.uint64(derive_seed(master_seed, base + 1))
        self.mults_1 = [
            np.uint64(derive_seed(master_seed, base + 2 + 2 * i) | 1)
            for i in range(levels)
        ]
        self.mults_2 = [
            np.uint64(derive_seed(master_seed, base + 3 + 2 * i) | 1)
            for i in range(levels)
        ]

    def fold(self, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """labels: (..., L) int64 -> (hi, lo) uint64 arrays of shape (...)."""
        shape = labels.shape[:-1]
        hi = np.full(shape, self.init_1, dtype=np.uint64)
        lo = np.full(shape, self.init_2, dtype=np.uint64)
        for i in range(labels.shape[-1]):
            v = labels[..., i].astype(np.uint64)
            hi = _mix64(hi ^ (v * self.mults_1[i]))
            lo = _mix64(lo ^ (v * self.mults_2[i]))
        return hi, lo


def _offset_grid(levels: int) -> np.ndarray:
    """All 3^L offset tuples in {-1, 0, 1}^L, lexicographic order."""
    return np.array(
        list(itertools.product((-1, 0, 1), repeat=levels)), dtype=np.int64
    )


def _pack_keys(hi: np.ndarray, lo: np.ndarray) -> list[int]:
    return [(int(h) << 64) | int(l) for h, l in zip(hi.tolist(), lo.tolist())]


class LshIndex:
    """The no-false-negative index; construct through :meth:`build`."""

    def __init__(
        self,
        config: IndexConfig,
        levels: int,
        hash_functions: list[HashFunction],
        points: np.ndarray,
        entry_hi: np.ndarray,
        entry_lo: np.ndarray,
        entry_ids: np.ndarray,
        stats: BuildStats,
    ) -> None:
        self.config = config
        self.levels = levels
        self.hash_functions = hash_functions
        self.points = points
        self.stats = stats
        self._entry_hi = entry_hi
        self._entry_lo = entry_lo
        self._entry_ids = entry_ids
        self._w_matrix = np.vstack([h.w for h in hash_functions])
        self._scale = hash_scale(config.kind, config.p, config.d)
        self._fingerprinter = _Fingerprinter(config.master_seed, levels)
        self._offsets = (
            _offset_grid(levels)
            if config.variant is Variant.FAST_PREPROCESSING
            else None
        )
        self._table = self._build_table(entry_hi, entry_lo, entry_ids)

    @staticmethod
    def _build_table(
        hi: np.ndarray, lo: np.ndarray, ids: np.ndarray
    ) -> dict[int, np.ndarray]:
        """Bucket map from canonically sorted entry arrays."""
        if hi.size == 0:
            return {}
        boundary = np.flatnonzero((hi[1:] != hi[:-1]) | (lo[1:] != lo[:-1])) + 1
        starts = np.concatenate(([0], boundary))
        ends = np.concatenate((boundary, [hi.size]))
        keys = _pack_keys(hi[starts], lo[starts])
        return {
            key: ids[start:end] for key, start, end in zip(keys, starts, ends)
        }

    @property
    def entry_count(self) -> int:
        """Stored (fingerprint, id) entries: n * 3^L for fast_query, n for
        fast_preprocessing."""
        return int(self._entry_ids.size)

    @property
    def unique_bucket_count(self) -> int:
        return len(self._table)

    @classmethod
    def build(cls, points: np.ndarray, config: IndexConfig) -> "LshIndex":
        """Hash the dataset and lay out the bucket table.

        Deterministic in (points, config): per-level hash seeds derive from
        the master seed by counter, entries are sorted canonically by
        (fingerprint, id), so identical inputs give identical indexes
        regardless of how the work would be split.
        """
        started = time.perf_counter()
        points = np.array(
            points, dtype=np.float64, copy=True if config.copy_points else None, order="C"
        )
        if points.ndim != 2:
            raise ValueError("points must be a 2-d array")
        n, d = points.shape
        if n < 1:
            raise ValueError("cannot index an empty dataset")
        if d != config.d:
            raise ValueError(f"points have dimension {d}, config says {config.d}")
        levels = config.levels
        if levels is None:
            fp_bound = config.false_positive_bound
            if fp_bound is None or fp_bound >= 1.0:
                raise ValueError(
                    "the false-positive bound is vacuous at this c; pass an "
                    "explicit level count"
                )
            levels = choose_levels(config.variant, n, d, fp_bound)
        replication = 3**levels if config.variant is Variant.FAST_QUERY else 1
        total_entries = n * replication
        if total_entries > config.max_entries:
            raise ValueError(
                f"build would store {total_entries} entries "
                f"({n} points * {replication} replication), above the "
                f"max_entries guard of {config.max_entries}; lower the level "
                "count, switch to fast_preprocessing, or raise the guard"
            )
        hash_functions = [
            sample_vector(config.kind, config.p, d, derive_seed(config.master_seed, i))
            for i in range(levels)
        ]
        w_matrix = np.vstack([h.w for h in hash_functions])
        scale = hash_scale(config.kind, config.p, d)
        labels = hash_eval_matrix(w_matrix, scale, points)
        fingerprinter = _Fingerprinter(config.master_seed, levels)
        hi = np.empty(total_entries, dtype=np.uint64)
        lo = np.empty(total_entries, dtype=np.uint64)
        ids = np.empty(total_entries, dtype=np.int64)
        if config.variant is Variant.FAST_QUERY:
            offsets = _offset_grid(levels)
            chunk = max(1, _CHUNK_ENTRIES // replication)
            for start in range(0, n, chunk):
                stop = min(start + chunk, n)
                block = labels[start:stop, None, :] + offsets[None, :, :]
                block_hi, block_lo = fingerprinter.fold(block)
                lo_entry = start * replication
                hi_entry = stop * replication
                hi[lo_entry:hi_entry] = block_hi.ravel()
                lo[lo_entry:hi_entry] = block_lo.ravel()
                ids[lo_entry:hi_entry] = np.repeat(
                    np.arange(start, stop, dtype=np.int64), replication
                )
        else:
            hi[:], lo[:] = fingerprinter.fold(labels)
            ids[:] = np.arange(n, dtype=np.int64)
        order = np.lexsort((ids, lo, hi))
        hi, lo, ids = hi[order], lo[order], ids[order]
        resolved = replace(config, levels=levels)
        approx_bytes = (
            points.nbytes + w_matrix.nbytes + hi.nbytes + lo.nbytes + ids.nbytes
        )
        stats = BuildStats(
            seconds=time.perf_counter() - started,
            entries=total_entries,
            unique_buckets=0,  # patched below, after the table exists
            approx_bytes=approx_bytes,
        )
        instance = cls(
            config=resolved,
            levels=levels,
            hash_functions=hash_functions,
            points=points,
            entry_hi=hi,
            entry_lo=lo,
            entry_ids=ids,
            stats=stats,
        )
        instance.stats = replace(
            stats,
            seconds=time.perf_counter() - started,
            unique_buckets=instance.unique_bucket_count,
        )
        return instance

    def query(self, query: np.ndarray) -> QueryResult:
        """All indexed points within distance c that hashing can reach.

        Every point within distance 1 of the query is returned, always;
        points in (1, c] are returned when they share a probed bucket.
        Queries are read-only and safe to issue concurrently.
        """
        query = np.asarray(query, dtype=np.float64)
        if query.shape != (self.config.d,):
            raise ValueError(
                f"query has shape {query.shape}, expected ({self.config.d},)"
            )
        label = np.floor(self._scale * (self._w_matrix @ query)).astype(np.int64)
        if self.config.variant is Variant.FAST_QUERY:
            probe_labels = label[None, :]
        else:
            probe_labels = label[None, :] + self._offsets
        hi, lo = self._fingerprinter.fold(probe_labels)
        buckets = [
            self._table.get(key) for key in _pack_keys(hi, lo)
        ]
        found = [bucket for bucket in buckets if bucket is not None]
        if found:
            pulled = np.concatenate(found)
            candidates = np.unique(pulled)
        else:
            pulled = np.empty(0, dtype=np.int64)
            candidates = pulled
        stats = QueryStats(
            buckets_probed=len(buckets),
            candidates_scanned=int(pulled.size),
            distance_evals=int(candidates.size),
            duplicates_suppressed=int(pulled.size - candidates.size),
        )
        if candidates.size == 0:
            return QueryResult(neighbors=[], stats=stats)
        distances = lp_distances(self.points[candidates], query, self.config.p)
        keep = distances <= self.config.c
        neighbors = sorted(
            zip(
                (int(i) for i in candidates[keep]),
                (float(t) for t in distances[keep]),
            ),
            key=lambda pair: (pair[1], pair[0]),
        )
        return QueryResult(neighbors=neighbors, stats=stats)

    # -- serialization ------------------------------------------------------

    def to_bytes(self) -> bytes:
        """Versioned binary image with a whole-payload checksum."""
        config = self.config
        p_tag = 1 if math.isinf(config.p) else 0
        config_block = _CONFIG_BLOCK.pack(
            p_tag,
            0.0 if p_tag else float(config.p),
            _KIND_TAGS[config.kind],
            _VARIANT_TAGS[config.variant],
            config.d,
            config.c,
            self.levels,
            config.master_seed,
            1 if config.unsafe_override else 0,
            config.max_entries,
            1 if config.copy_points else 0,
        )
        stats_block = _STATS_BLOCK.pack(
            self.stats.seconds,
            self.stats.entries,
            self.stats.unique_buckets,
            self.stats.approx_bytes,
        )
        n = self.points.shape[0]
        sections = [
            config_block,
            stats_block,
            struct.pack("<QI", n, self.config.d),
            np.ascontiguousarray(self.points, dtype="<f8").tobytes(),
            struct.pack("<I", len(self.hash_functions)),
        ]
        for function in self.hash_functions:
            record = function.to_bytes()
            sections.append(struct.pack("<I", len(record)))
            sections.append(record)
        sections.append(struct.pack("<Q", self._entry_ids.size))
        sections.append(self._entry_hi.astype("<u8").tobytes())
        sections.append(self._entry_lo.astype("<u8").tobytes())
        sections.append(self._entry_ids.astype("<i8").tobytes())
        payload = b"".join(sections)
        header = _HEADER.pack(
            _FILE_MAGIC, _FILE_VERSION, len(payload), hashlib.sha256(payload).digest()
        )
        return header + payload

    @classmethod
    def from_bytes(cls, blob: bytes) -> "LshIndex":
        """Rebuild an index from :meth:`to_bytes` output, verifying the
        checksum; the rebuilt index answers queries identically."""
        if len(blob) < _HEADER.size:
            raise ValueError("index image is truncated")
        magic, version, payload_length, digest = _HEADER.unpack_from(blob, 0)
        if magic != _FILE_MAGIC:
            raise ValueError("not an index image")
        if version != _FILE_VERSION:
            raise ValueError(f"unsupported index image version {version}")
        payload = blob[_HEADER.size :]
        if len(payload) != payload_length:
            raise ValueError(
                f"index image is truncated: expected {payload_length} payload "
                f"bytes, got {len(payload)}"
            )
        if hashlib.sha256(payload).digest() != digest:
            raise ValueError("index image checksum mismatch: file is corrupted")
        cursor = 0
        (
            p_tag,
            p_value,
            kind_tag,
            variant_tag,
            d,
            c,
            levels,
            master_seed,
            unsafe,
            max_entries,
            copy_points,
        ) = _CONFIG_BLOCK.unpack_from(payload, cursor)
        cursor += _CONFIG_BLOCK.size
        seconds, entries, unique_buckets, approx_bytes = _STATS_BLOCK.unpack_from(
            payload, cursor
        )
        cursor += _STATS_BLOCK.size
        n, d_points = struct.unpack_from("<QI", payload, cursor)
        cursor += struct.calcsize("<QI")
        points = (
            np.frombuffer(payload, dtype="<f8", count=n * d_points, offset=cursor)
            .astype(np.float64)
            .reshape(n, d_points)
        )
        cursor += n * d_points * 8
        (function_count,) = struct.unpack_from("<I", payload, cursor)
        cursor += 4
        hash_functions = []
        for _ in range(function_count):
            (record_length,) = struct.unpack_from("<I", payload, cursor)
            cursor += 4
            hash_functions.append(
                hash_function_from_bytes(payload[cursor : cursor + record_length])
            )
            cursor += record_length
        (entry_count,) = struct.unpack_from("<Q", payload, cursor)
        cursor += 8
        hi = np.frombuffer(payload, dtype="<u8", count=entry_count, offset=cursor).astype(
            np.uint64
        )
        cursor += entry_count * 8
        lo = np.frombuffer(payload, dtype="<u8", count=entry_count, offset=cursor).astype(
            np.uint64
        )
        cursor += entry_count * 8
        ids = np.frombuffer(payload, dtype="<i8", count=entry_count, offset=cursor).astype(
            np.int64
        )
        cursor += entry_count * 8
        if cursor != len(payload):
            raise ValueError("index image has trailing or missing bytes")
        config = IndexConfig(
            p=math.inf if p_tag else p_value,
            d=d,
            c=c,
            kind=_TAG_KINDS[kind_tag],
            variant=_TAG_VARIANTS[variant_tag],
            levels=levels,
            master_seed=master_seed,
            unsafe_override=bool(unsafe),
            max_entries=max_entries,
            copy_points=bool(copy_points),
        )
        instance = cls(
            config=config,
            levels=levels,
            hash_functions=hash_functions,
            points=points,
            entry_hi=hi,
            entry_lo=lo,
            entry_ids=ids,
            stats=BuildStats(
                seconds=seconds,
                entries=entries,
                unique_buckets=unique_buckets,
                approx_bytes=approx_bytes,
            ),
        )
        return instance

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path: str | Path) -> "LshIndex":
        return cls.from_bytes(Path(path).read_bytes())
