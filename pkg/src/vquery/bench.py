"""Built-in synthetic benchmark suites.

Three generators stand in for external benchmark datasets:

- ``two_hop``: a random social graph (``:knows`` edges plus per-node
  ``:interest`` edges) with a two-hop counting query whose intermediate
  join results dwarf its output; the vectorized-vs-row wall-time suite.
- ``selective_join``: a product catalog where one type is rare; a
  skip-heavy query measuring rows read from storage (overfetch) under
  adaptive, fixed, and row-at-a-time execution.
- ``group_distinct``: few distinct keys duplicated many times; exercises
  skip-based DISTINCT and streaming aggregation.

Everything is seeded: the same seed and scale always produce the same
dataset and query.
"""
from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass, field

from .planner import SessionConfig, plan_query
from .storage import TripleStore
from .terms import iri

EX = "http://example.org/"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

SUITES = ("two_hop", "selective_join", "group_distinct")


def _store_from(triples) -> TripleStore:
    store = TripleStore()
    enc = store.dictionary.encode
    for s, p, o in triples:
        store.insert(enc(iri(EX + s)) if isinstance(s, str) else s,
                     enc(iri(p if p.startswith("http") else EX + p)),
                     enc(iri(EX + o)) if isinstance(o, str) else o)
    store.freeze()
    return store


def gen_two_hop(seed: int, nodes: int = 5000, degree: int = 20,
                interests: int = 5, interest_pool: int = 200):
    rng = random.Random(seed)
    triples = []
    for n in range(nodes):
        src = f"p{n}"
        for _ in range(degree):
            triples.append((src, "knows", f"p{rng.randrange(nodes)}"))
        for _ in range(interests):
            triples.append((src, "interest", f"i{rng.randrange(interest_pool)}"))
    query = """
        SELECT COUNT(*) WHERE {
            ?p1 :knows ?p2 .
            ?p2 :knows ?p3 .
            ?p3 :interest ?i .
            FILTER(?p1 != ?p3)
        }
    """
    return _store_from(triples), query


def gen_selective_join(seed: int, products: int = 2000, features: int = 20,
                       rare_ppm: float = 0.01, feature_pool: int = 400,
                       makers: int = 30):
    rng = random.Random(seed)
    triples = []
    rare = max(2, int(products * rare_ppm))
    rare_ids = set(rng.sample(range(products), rare))
    for n in range(products):
        prod = f"prod{n}"
        tname = "Rare" if n in rare_ids else f"Common{rng.randrange(8)}"
        triples.append((prod, RDF_TYPE, tname))
        for _ in range(features):
            triples.append((prod, "hasFeature", f"f{rng.randrange(feature_pool)}"))
    for f in range(feature_pool):
        triples.append((f"f{f}", "madeBy", f"m{rng.randrange(makers)}"))
    query = """
        SELECT COUNT(*) WHERE {
            ?p a :Rare .
            ?p :hasFeature ?f .
            ?f :madeBy ?m .
        }
    """
    return _store_from(triples), query


def gen_group_distinct(seed: int, keys: int = 50, dups: int = 2000):
    rng = random.Random(seed)
    triples = set()
    for k in range(keys):
        for _ in range(dups):
            triples.add((f"item{rng.randrange(keys * dups)}",
                         "category", f"cat{k}"))
    query = "SELECT DISTINCT ?c WHERE { ?x :category ?c }"
    return _store_from(sorted(triples)), query


GENERATORS = {
    "two_hop": gen_two_hop,
    "selective_join": gen_selective_join,
    "group_distinct": gen_group_distinct,
}


@dataclass
class RunResult:
    name: str
    times: list = field(default_factory=list)
    rows_read: int = 0
    result_rows: int = 0

    @property
    def median(self) -> float:
        return statistics.median(self.times)


def _time_runs(store, query, config: SessionConfig, warmups: int,
               runs: int) -> RunResult:
    rr = RunResult(name=config.engine)
    for i in range(warmups + runs):
        store.reset_io_stats()
        plan = plan_query(store, query, config)
        t0 = time.perf_counter()
        rows = plan.collect()
        elapsed = time.perf_counter() - t0
        if i >= warmups:
            rr.times.append(elapsed)
    rr.rows_read = store.rows_read
    rr.result_rows = len(rows)
    return rr


def run_suite(suite: str, seed: int = 1, scale: int = 0,
              warmups: int = 2, runs: int = 5) -> dict:
    """Execute one suite and return a machine-readable report."""
    if suite not in GENERATORS:
        raise ValueError(f"unknown suite {suite!r}; pick one of {SUITES}")
    gen = GENERATORS[suite]
    if suite == "two_hop":
        store, query = gen(seed, nodes=scale or 5000)
    elif suite == "selective_join":
        store, query = gen(seed, products=scale or 2000)
    else:
        store, query = gen(seed, keys=scale or 50)

    report = {"suite": suite, "seed": seed, "triples": len(store),
              "engines": {}}

    batch_cfg = SessionConfig(engine="batch")
    row_cfg = SessionConfig(engine="row")
    batch = _time_runs(store, query, batch_cfg, warmups, runs)
    legacy = _time_runs(store, query, row_cfg, warmups, runs)
    report["engines"]["batch"] = {"median_s": batch.median,
                                  "times_s": batch.times,
                                  "rows_read": batch.rows_read,
                                  "result_rows": batch.result_rows}
    report["engines"]["row"] = {"median_s": legacy.median,
                                "times_s": legacy.times,
                                "rows_read": legacy.rows_read,
                                "result_rows": legacy.result_rows}
    report["speedup"] = legacy.median / max(batch.median, 1e-9)

    # fixed-size batches: the overfetch comparison point
    fixed_cfg = SessionConfig(engine="batch", adaptive=False)
    fixed = _time_runs(store, query, fixed_cfg, warmups=0, runs=1)
    report["engines"]["batch_fixed"] = {"median_s": fixed.median,
                                        "rows_read": fixed.rows_read,
                                        "result_rows": fixed.result_rows}
    report["overfetch"] = {
        "row_rows_read": legacy.rows_read,
        "adaptive_rows_read": batch.rows_read,
        "fixed_rows_read": fixed.rows_read,
        "adaptive_vs_row": batch.rows_read / max(legacy.rows_read, 1),
        "fixed_vs_adaptive": fixed.rows_read / max(batch.rows_read, 1),
    }
    return report


def format_report(report: dict) -> str:
    lines = [f"suite: {report['suite']} (seed {report['seed']}, "
             f"{report['triples']} triples)"]
    for name in ("batch", "row", "batch_fixed"):
        e = report["engines"][name]
        lines.append(f"  {name:<12} median {e['median_s'] * 1000:9.1f}ms  "
                     f"rows read {e['rows_read']:>10}  "
                     f"results {e['result_rows']}")
    lines.append(f"  speedup (row/batch): {report['speedup']:.2f}x")
    ov = report["overfetch"]
    lines.append(f"  rows read -- row: {ov['row_rows_read']}, adaptive: "
                 f"{ov['adaptive_rows_read']} "
                 f"({ov['adaptive_vs_row']:.2f}x row), fixed: "
                 f"{ov['fixed_rows_read']} "
                 f"({ov['fixed_vs_adaptive']:.2f}x adaptive)")
    return "\n".join(lines)
