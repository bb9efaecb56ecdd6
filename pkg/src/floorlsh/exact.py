"""Exhaustive ground truth for evaluating the index.

Everything here is deliberately brute force: full l_p distance scans with no
data structure in the way, so index results can be audited against an
independent answer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .lpspace import check_exponent


def lp_distances(points: np.ndarray, query: np.ndarray, p: float) -> np.ndarray:
    """l_p distances from every row of ``points`` to ``query``."""
    p = check_exponent(p)
    points = np.asarray(points, dtype=np.float64)
    query = np.asarray(query, dtype=np.float64)
    diff = np.abs(points - query)
    if math.isinf(p):
        return diff.max(axis=1)
    if p == 1.0:
        return diff.sum(axis=1)
    if p == 2.0:
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return (diff**p).sum(axis=1) ** (1.0 / p)


def range_search_exact(
    points: np.ndarray, query: np.ndarray, radius: float, p: float
) -> np.ndarray:
    """Ids of all points within l_p distance ``radius`` of the query.

    Returned sorted ascending; the query point itself is included when it
    is part of the dataset (distance 0).
    """
    if radius < 0.0:
        raise ValueError(f"radius must be nonnegative, got {radius}")
    distances = lp_distances(points, query, p)
    return np.flatnonzero(distances <= radius)


@dataclass(frozen=True)
class GroundTruth:
    """Exact neighborhoods of one query.

    ``within_r`` are the must-return ids (distance <= r), ``within_c`` the
    acceptable ids (distance <= c); nearest is the closest point overall.
    """

    query_id: int
    within_r: tuple[int, ...]
    within_c: tuple[int, ...]
    nearest_id: int
    nearest_distance: float


def ground_truth(
    points: np.ndarray,
    queries: np.ndarray,
    c: float,
    p: float,
    r: float = 1.0,
) -> list[GroundTruth]:
    """Exact neighborhoods for every query row."""
    if c < r:
        raise ValueError(f"approximation factor c={c} must be >= r={r}")
    points = np.asarray(points, dtype=np.float64)
    queries = np.asarray(queries, dtype=np.float64)
    truths = []
    for query_id, query in enumerate(queries):
        distances = lp_distances(points, query, p)
        nearest = int(np.argmin(distances))
        truths.append(
            GroundTruth(
                query_id=query_id,
                within_r=tuple(int(i) for i in np.flatnonzero(distances <= r)),
                within_c=tuple(int(i) for i in np.flatnonzero(distances <= c)),
                nearest_id=nearest,
                nearest_distance=float(distances[nearest]),
            )
        )
    return truths


@dataclass(frozen=True)
class RecallRecord:
    """Index answers for one query audited against the exact answer.

    ``recall`` is against the must-return set (1.0 when that set is empty);
    ``precision`` is against the acceptable set.  ``missing`` lists any
    must-return ids the index failed to produce: each one is a concrete
    counterexample to the no-false-negative guarantee.
    """

    query_id: int
    returned: tuple[int, ...]
    within_r: tuple[int, ...]
    within_c: tuple[int, ...]
    recall: float
    precision: float
    missing: tuple[int, ...]
    extraneous: tuple[int, ...]
    candidates_scanned: int


def recall_report(index, points: np.ndarray, queries: np.ndarray) -> list[RecallRecord]:
    """Audit index answers for every query against brute-force truth.

    ``index`` is any object with the query interface of
    :class:`floorlsh.index.LshIndex` and matching ``config``.
    """
    config = index.config
    truths = ground_truth(points, queries, c=config.c, p=config.p)
    records = []
    for truth, query in zip(truths, np.asarray(queries, dtype=np.float64)):
        result = index.query(query)
        returned = tuple(sorted(point_id for point_id, _ in result.neighbors))
        must = set(truth.within_r)
        acceptable = set(truth.within_c)
        got = set(returned)
        missing = tuple(sorted(must - got))
        extraneous = tuple(sorted(got - acceptable))
        recall = 1.0 if not must else len(must & got) / len(must)
        precision = 1.0 if not got else len(got & acceptable) / len(got)
        records.append(
            RecallRecord(
                query_id=truth.query_id,
                returned=returned,
                within_r=truth.within_r,
                within_c=truth.within_c,
                recall=recall,
                precision=precision,
                missing=missing,
                extraneous=extraneous,
                candidates_scanned=result.stats.candidates_scanned,
            )
        )
    return records


def write_ground_truth_jsonl(path: str | Path, truths: Sequence[GroundTruth]) -> None:
    """Emit ground truth as JSON lines, one query per line."""
    with open(path, "w") as handle:
        for truth in truths:
            json.dump(
                {
                    "query_id": truth.query_id,
                    "within_r": list(truth.within_r),
                    "within_c": list(truth.within_c),
                    "nearest_id": truth.nearest_id,
                    "nearest_distance": truth.nearest_distance,
                },
                handle,
            )
            handle.write("\n")


def write_recall_jsonl(path: str | Path, records: Sequence[RecallRecord]) -> None:
    """Emit per-query recall audits as JSON lines."""
    with open(path, "w") as handle:
        for record in records:
            json.dump(
                {
                    "query_id": record.query_id,
                    "returned": list(record.returned),
                    "recall": record.recall,
                    "precision": record.precision,
                    "missing": list(record.missing),
                    "extraneous": list(record.extraneous),
                    "candidates_scanned": record.candidates_scanned,
                },
                handle,
            )
            handle.write("\n")
