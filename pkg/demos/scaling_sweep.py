"""Candidate work under dataset doubling.

Every dataset point sits strictly farther than c from every query, so any
candidate an index pulls is wasted work; the experiment doubles n twice
and watches the mean candidates scanned per query.  Automatic level
selection adds a hash level as n grows, which is what keeps the growth
ratio well under 2 (the linear-scan rate).
"""

from floorlsh.data import far_ring_dataset, near_origin_queries
from floorlsh.families import FamilyKind, c_threshold
from floorlsh.index import IndexConfig, LshIndex, Variant

KIND, P, D = FamilyKind.UNIT_SPHERE, 2.0, 8
C = 4.0 * c_threshold(KIND, P, D)
N_QUERIES = 1000

queries = near_origin_queries(N_QUERIES, D, P, C, 55)
print(f"far-only datasets, c = {C:.2f}, {N_QUERIES} queries per size\n")
print(f"{'n':>8}{'levels':>8}{'mean candidates':>17}{'ratio':>8}")
means = []
for i, n in enumerate((10_000, 20_000, 40_000)):
    ring = far_ring_dataset(n, D, P, C, 100 + i)
    config = IndexConfig(
        p=P, d=D, c=C, kind=KIND,
        variant=Variant.FAST_PREPROCESSING, levels=None, master_seed=7,
    )
    index = LshIndex.build(ring, config)
    total = 0
    for query in queries:
        result = index.query(query)
        assert result.neighbors == []  # nothing is within c, ever
        total += result.stats.candidates_scanned
    means.append(total / N_QUERIES)
    ratio = "" if i == 0 else f"{means[-1] / means[-2]:8.3f}"
    print(f"{n:>8}{index.levels:>8}{means[-1]:>17.3f}{ratio:>8}")

mean_ratio = (means[1] / means[0] + means[2] / means[1]) / 2.0
print(f"\nmean ratio per doubling: {mean_ratio:.3f} (2.0 would be linear)")
