"""Hash families of the form floor(scale * <w, x>).

Four sampling distributions for w are provided:

* ``rademacher``: independent signs in {-1, +1}; the legacy family with the
  weaker false-positive bound and a known degeneracy on two-coordinate
  inputs.
* ``uniform_cube``: independent coordinates uniform on (-1, 1).
* ``unit_sphere``: uniform direction on the Euclidean unit sphere.
* ``lq_sphere_experimental``: normalized generalized-Gaussian draw, i.e. the
  cone measure on the unit l_q sphere; provided for empirical probing only
  and carries no proven guarantees.

For the first three families, points x, y with ||x - y||_p <= 1 always land
in the same or adjacent buckets; :func:`adjacency_certificate` checks that
on concrete inputs.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .lpspace import (
    check_exponent,
    cube_c_threshold,
    cube_scale,
    lp_norm,
    sign_c_threshold,
    sphere_c_threshold,
    sphere_scale,
)
from .streams import stream

_POOL_BLOCK_ROWS = 8192

_RECORD_MAGIC = b"FLHF"
_RECORD_VERSION = 1


class FamilyKind(str, Enum):
    RADEMACHER = "rademacher"
    UNIFORM_CUBE = "uniform_cube"
    UNIT_SPHERE = "unit_sphere"
    LQ_SPHERE_EXPERIMENTAL = "lq_sphere_experimental"


#: Families with a deterministic close-pair adjacency guarantee.
PROVEN_ADJACENCY_KINDS = frozenset(
    {FamilyKind.RADEMACHER, FamilyKind.UNIFORM_CUBE, FamilyKind.UNIT_SPHERE}
)

_KIND_TAGS = {
    FamilyKind.RADEMACHER: 0,
    FamilyKind.UNIFORM_CUBE: 1,
    FamilyKind.UNIT_SPHERE: 2,
    FamilyKind.LQ_SPHERE_EXPERIMENTAL: 3,
}
_TAG_KINDS = {tag: kind for kind, tag in _KIND_TAGS.items()}


def hash_scale(kind: FamilyKind, p: float, d: int) -> float:
    """Pre-floor scale factor of family ``kind`` for exponent p in R^d."""
    kind = FamilyKind(kind)
    if kind in (FamilyKind.RADEMACHER, FamilyKind.UNIFORM_CUBE):
        return cube_scale(p, d)
    if kind is FamilyKind.UNIT_SPHERE:
        return sphere_scale(p, d)
    return 1.0


def c_threshold(kind: FamilyKind, p: float, d: int) -> float | None:
    """Minimum approximation factor of ``kind``; None for the experimental
    family, which has no proven false-positive bound."""
    kind = FamilyKind(kind)
    if kind is FamilyKind.UNIFORM_CUBE:
        return cube_c_threshold(p, d)
    if kind is FamilyKind.UNIT_SPHERE:
        return sphere_c_threshold(p, d)
    if kind is FamilyKind.RADEMACHER:
        return sign_c_threshold(p, d)
    return None


def false_positive_bound(
    kind: FamilyKind, p: float, d: int, c: float
) -> tuple[float | None, float | None]:
    """Theoretical far-pair collision bound of ``kind`` at factor c.

    Returns (bound, threshold).  For the cube and sphere families the bound
    is threshold / c, proven for c > threshold and reported as-is otherwise
    (values >= 1 are vacuous).  For the sign family the bound is
    1 - (1 - threshold/c)^2 / 2, which is meaningless for c <= threshold,
    so None is returned there.  The experimental family has no bound.
    """
    kind = FamilyKind(kind)
    if c <= 0.0:
        raise ValueError(f"approximation factor must be positive, got {c}")
    threshold = c_threshold(kind, p, d)
    if threshold is None:
        return None, None
    if kind is FamilyKind.RADEMACHER:
        if c <= threshold:
            return None, threshold
        ratio = threshold / c
        return 1.0 - (1.0 - ratio) ** 2 / 2.0, threshold
    return threshold / c, threshold


@dataclass(frozen=True)
class HashFunction:
    """One sampled hash function h(x) = floor(scale * <w, x>).

    Attributes:
        kind: sampling family of w.
        p: norm exponent the scale was derived for.
        d: dimension.
        seed: 64-bit seed that produced w.
        w: the sampled vector, read-only float64 of shape (d,).
        scale: pre-floor scale factor.
        q: sphere exponent, set only for the experimental l_q family.
    """

    kind: FamilyKind
    p: float
    d: int
    seed: int
    w: np.ndarray
    scale: float
    q: float | None = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HashFunction):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.p == other.p
            and self.d == other.d
            and self.seed == other.seed
            and self.scale == other.scale
            and self.q == other.q
            and np.array_equal(self.w, other.w)
        )

    def to_bytes(self) -> bytes:
        """Self-describing binary record; see :func:`hash_function_from_bytes`."""
        p_tag = 1 if math.isinf(self.p) else 0
        if self.q is None:
            q_tag, q_value = 0, 0.0
        elif math.isinf(self.q):
            q_tag, q_value = 2, 0.0
        else:
            q_tag, q_value = 1, float(self.q)
        header = struct.pack(
            "<4sBBBdBdIQd",
            _RECORD_MAGIC,
            _RECORD_VERSION,
            _KIND_TAGS[FamilyKind(self.kind)],
            p_tag,
            0.0 if p_tag == 1 else float(self.p),
            q_tag,
            q_value,
            self.d,
            self.seed,
            self.scale,
        )
        body = np.ascontiguousarray(self.w, dtype="<f8").tobytes()
        return header + body


_RECORD_HEADER = struct.Struct("<4sBBBdBdIQd")


def hash_function_from_bytes(blob: bytes) -> HashFunction:
    """Inverse of :meth:`HashFunction.to_bytes`; bit-exact round trip."""
    if len(blob) < _RECORD_HEADER.size:
        raise ValueError("hash function record is truncated")
    magic, version, kind_tag, p_tag, p_value, q_tag, q_value, d, seed, scale = (
        _RECORD_HEADER.unpack_from(blob, 0)
    )
    if magic != _RECORD_MAGIC:
        raise ValueError("not a hash function record")
    if version != _RECORD_VERSION:
        raise ValueError(f"unsupported hash function record version {version}")
    if kind_tag not in _TAG_KINDS:
        raise ValueError(f"unknown family tag {kind_tag}")
    body = blob[_RECORD_HEADER.size :]
    if len(body) != 8 * d:
        raise ValueError(
            f"hash function record expects {8 * d} payload bytes, got {len(body)}"
        )
    w = np.frombuffer(body, dtype="<f8").astype(np.float64, copy=True)
    w.flags.writeable = False
    p = math.inf if p_tag == 1 else p_value
    q = None if q_tag == 0 else (math.inf if q_tag == 2 else q_value)
    return HashFunction(
        kind=_TAG_KINDS[kind_tag], p=p, d=d, seed=seed, w=w, scale=scale, q=q
    )


def lp_sphere_block(rng: np.random.Generator, d: int, q: float, rows: int) -> np.ndarray:
    """Draw ``rows`` cone-measure points on the unit l_q sphere in R^d.

    Coordinates start as generalized-Gaussian draws with density
    proportional to exp(-|t|^q) (uniform on (-1, 1) at q = inf), then each
    row is normalized to unit l_q norm; the resulting direction law is the
    cone measure of the sphere.  At q = 2 this is the uniform direction.
    """
    q = check_exponent(q)
    if math.isinf(q):
        u = rng.uniform(-1.0, 1.0, size=(rows, d))
        return u / np.max(np.abs(u), axis=1, keepdims=True)
    signs = 2.0 * rng.integers(0, 2, size=(rows, d)) - 1.0
    magnitudes = rng.standard_gamma(1.0 / q, size=(rows, d)) ** (1.0 / q)
    g = signs * magnitudes
    if q == 1.0:
        norms = np.sum(np.abs(g), axis=1, keepdims=True)
    elif q == 2.0:
        norms = np.linalg.norm(g, axis=1, keepdims=True)
    else:
        norms = np.sum(np.abs(g) ** q, axis=1, keepdims=True) ** (1.0 / q)
    return g / norms


def _draw_block(
    kind: FamilyKind, d: int, rows: int, rng: np.random.Generator, q: float | None
) -> np.ndarray:
    """Draw a (rows, d) block of hash vectors from one substream."""
    if kind is FamilyKind.RADEMACHER:
        return (2.0 * rng.integers(0, 2, size=(rows, d)) - 1.0).astype(np.float64)
    if kind is FamilyKind.UNIFORM_CUBE:
        return rng.uniform(-1.0, 1.0, size=(rows, d))
    if kind is FamilyKind.UNIT_SPHERE:
        g = rng.standard_normal(size=(rows, d))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        return g / norms
    return lp_sphere_block(rng, d, q, rows)


def sample_pool(
    kind: FamilyKind, d: int, count: int, seed: int, q: float | None = None
) -> np.ndarray:
    """Draw ``count`` hash vectors as a (count, d) matrix.

    Rows are produced in fixed blocks of 8192, block j coming from substream
    (seed, j), so the pool is deterministic in (kind, d, count, seed) and
    independent of how work is split across workers.  Row i of a longer pool
    equals row i of a shorter one.
    """
    kind = FamilyKind(kind)
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if count < 0:
        raise ValueError(f"count must be nonnegative, got {count}")
    if kind is FamilyKind.LQ_SPHERE_EXPERIMENTAL:
        if q is None:
            raise ValueError("the experimental l_q family requires its q exponent")
        q = check_exponent(q)
    elif q is not None:
        raise ValueError("q is only meaningful for the experimental l_q family")
    out = np.empty((count, d), dtype=np.float64)
    for block_index in range(0, (count + _POOL_BLOCK_ROWS - 1) // _POOL_BLOCK_ROWS):
        lo = block_index * _POOL_BLOCK_ROWS
        hi = min(lo + _POOL_BLOCK_ROWS, count)
        rng = stream(seed, block_index)
        # always draw the full block: multi-phase draws (signs, then
        # magnitudes) are only prefix-stable at fixed block shape
        block = _draw_block(kind, d, _POOL_BLOCK_ROWS, rng, q)
        out[lo:hi] = block[: hi - lo]
    return out


def sample_vector(
    kind: FamilyKind, p: float, d: int, seed: int, q: float | None = None
) -> HashFunction:
    """Sample one hash function; bit-identical for identical arguments.

    The vector is row 0 of :func:`sample_pool` for the same (kind, d, seed),
    so pooled estimation and single-function use agree.
    """
    kind = FamilyKind(kind)
    p = check_exponent(p)
    if kind is not FamilyKind.LQ_SPHERE_EXPERIMENTAL and q is not None:
        raise ValueError("q is only meaningful for the experimental l_q family")
    w = sample_pool(kind, d, 1, seed, q=q)[0]
    w.flags.writeable = False
    return HashFunction(
        kind=kind,
        p=p,
        d=d,
        seed=seed,
        w=w,
        scale=hash_scale(kind, p, d),
        q=q,
    )


def hash_eval(h: HashFunction, x: np.ndarray) -> int:
    """Evaluate h(x) = floor(scale * <w, x>) as a Python int."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (h.d,):
        raise ValueError(f"point has shape {x.shape}, expected ({h.d},)")
    return int(math.floor(h.scale * float(np.dot(h.w, x))))


def hash_eval_matrix(w_matrix: np.ndarray, scale: float, points: np.ndarray) -> np.ndarray:
    """Hash many points under many vectors at once.

    Args:
        w_matrix: (L, d) stack of hash vectors.
        scale: shared pre-floor scale.
        points: (n, d) points.

    Returns:
        (n, L) int64 matrix of bucket labels.
    """
    products = points @ w_matrix.T
    return np.floor(scale * products).astype(np.int64)


def adjacency_certificate(h: HashFunction, x: np.ndarray, y: np.ndarray) -> bool:
    """Check that a close pair hashes to the same or adjacent buckets.

    Requires ||x - y||_p <= 1 (the close-pair contract) and a family with a
    proven adjacency guarantee; violating either raises ValueError.  For
    valid inputs the result is True by construction of the scale factors.
    """
    if FamilyKind(h.kind) not in PROVEN_ADJACENCY_KINDS:
        raise ValueError(
            f"family {h.kind!r} has no adjacency guarantee; "
            "use rademacher, uniform_cube or unit_sphere"
        )
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    distance = lp_norm(x - y, h.p)
    if distance > 1.0:
        raise ValueError(
            f"adjacency contract requires ||x - y||_p <= 1, got {distance}"
        )
    return abs(hash_eval(h, x) - hash_eval(h, y)) <= 1
