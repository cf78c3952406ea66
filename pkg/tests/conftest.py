"""Shared test helpers: tiny store builders, synthetic operators, and an
independent query-result oracle built on the nested-loop BGP evaluator."""
from __future__ import annotations

import random
from collections import Counter

import numpy as np
import pytest

from vquery import SessionConfig, TripleStore, iri, plan_query
from vquery.batch import ColumnBatch
from vquery.opapi import BatchOperator, RowOperator
from vquery.row_ops import bgp_nested_loop
from vquery.terms import NULL_ID

EX = "http://example.org/"


def ex(name: str):
    return iri(EX + name)


def build_store(triples) -> TripleStore:
    """Store from (s, p, o) short-name string triples."""
    store = TripleStore()
    enc = store.dictionary.encode
    for s, p, o in triples:
        store.insert(enc(ex(s)), enc(ex(p)), enc(ex(o)))
    store.freeze()
    return store


def run_query(store, text, engine="auto", **kw) -> Counter:
    """Result multiset with Terms canonicalized to strings."""
    cfg = SessionConfig(engine=engine, **kw)
    plan = plan_query(store, text, cfg)
    return Counter(tuple(normalize(v) for v in row) for row in plan.rows())


def normalize(v):
    from vquery import Term
    if isinstance(v, Term):
        return f"{v.kind}:{v.lexical}:{v.datatype}:{v.langtag}"
    if isinstance(v, float):
        return round(v, 9)
    return v


class ListBatches(BatchOperator):
    """Feeds premade batches; supports skip when sort_var is set and
    counts calls so tests can assert pull behavior."""

    label = "ListBatches"

    def __init__(self, batches, sort_var=None):
        self._batches = list(batches)
        self._i = 0
        self.sort_var = sort_var
        self.output_vars = batches[0].vars if batches else ()
        self.next_calls = 0
        self.skip_calls = 0
        self.rows_pulled = 0

    def next(self):
        self.next_calls += 1
        while self._i < len(self._batches):
            b = self._batches[self._i]
            self._i += 1
            if len(b.sel):
                self.rows_pulled += len(b.sel)
                return b
        return None

    def skip(self, key):
        if self.sort_var is None:
            super().skip(key)
        self.skip_calls += 1
        while self._i < len(self._batches):
            b = self._batches[self._i]
            keys = b.keys()
            cut = int(np.searchsorted(keys, key, side="left"))
            if cut < len(keys):
                b.sel = b.sel[cut:]
                return
            self._i += 1

    def reset(self):
        self._i = 0


class ListRows(RowOperator):
    """Feeds premade full-width rows; skip supported when sorted."""

    label = "ListRows"

    def __init__(self, rows, output_vars, sort_var=None):
        self._rows = [list(r) for r in rows]
        self._i = 0
        self.output_vars = tuple(output_vars)
        self.sort_var = sort_var
        self.next_calls = 0

    def next(self):
        self.next_calls += 1
        if self._i >= len(self._rows):
            return None
        row = self._rows[self._i]
        self._i += 1
        return row

    def skip(self, key):
        if self.sort_var is None:
            super().skip(key)
        while (self._i < len(self._rows)
               and self._rows[self._i][self.sort_var] < key):
            self._i += 1

    def reset(self):
        self._i = 0


def make_batch(vars, columns, sort_var=None, sel=None):
    cols = {v: np.asarray(c, dtype=np.int64) for v, c in zip(vars, columns)}
    s = None if sel is None else np.asarray(sel, dtype=np.int64)
    return ColumnBatch(tuple(vars), cols, sel=s, sort_var=sort_var)


# ---------------------------------------------------------------------------
# random graphs + an independent evaluation oracle for whole queries


def random_graph(rng: random.Random, max_triples=300, max_terms=28):
    subjects = [f"n{i}" for i in range(rng.randint(4, max_terms // 2))]
    preds = [f"p{i}" for i in range(rng.randint(1, 4))]
    objects = subjects + [f"v{i}" for i in range(rng.randint(2, max_terms // 2))]
    n = rng.randint(5, max_triples)
    triples = {(rng.choice(subjects), rng.choice(preds), rng.choice(objects))
               for _ in range(n)}
    return sorted(triples)


def random_query(rng: random.Random, preds):
    """2-4 connected patterns over shared variables, with optional
    inequality filter and an optional aggregate/DISTINCT head."""
    n = rng.randint(2, 4)
    vars = [f"v{i}" for i in range(n + 1)]
    pats = []
    for i in range(n):
        p = rng.choice(preds)
        s, o = vars[i], vars[i + 1]
        if rng.random() < 0.3:
            s, o = o, s  # reverse some edges for variety
        pats.append(f"?{s} :{p} ?{o} .")
    body = "\n".join(pats)
    filt = ""
    if rng.random() < 0.4:
        a, b = rng.sample(vars[: n + 1], 2)
        filt = f"FILTER(?{a} != ?{b})"
    mode = rng.random()
    if mode < 0.25:
        head, tail = "SELECT COUNT(*)", ""
    elif mode < 0.45:
        head, tail = f"SELECT ?{vars[0]} COUNT(*)", f"GROUP BY ?{vars[0]}"
    elif mode < 0.6:
        head, tail = f"SELECT DISTINCT ?{vars[0]}", ""
    else:
        head, tail = "SELECT " + " ".join("?" + v for v in vars), ""
    return f"{head} WHERE {{ {body} {filt} }} {tail}"


def oracle_results(store, text) -> Counter:
    """Evaluate a parsed query via the nested-loop oracle plus plain
    Python post-processing; independent of both executors."""
    from vquery.parser import parse_query
    q = parse_query(text)
    names = q.variables()
    var_ids = {n: i for i, n in enumerate(names)}
    d = store.dictionary

    patterns = []
    for s, p, o in q.patterns:
        pat = []
        for slot in (s, p, o):
            if isinstance(slot, str):
                pat.append(("var", var_ids[slot]))
            else:
                tid = d.lookup(slot)
                pat.append(("const", -1 if tid is None else tid))
        patterns.append(tuple(pat))

    cur = store.open_scan((None, None, None))
    triples = []
    while True:
        row = cur.next_row()
        if row is None:
            break
        triples.append(row)
    sols = bgp_nested_loop(triples, patterns, len(names))

    def passes(sol, f):
        from vquery.parser import FilterBound, FilterComparison
        from vquery.terms import integer_value
        if isinstance(f, FilterBound):
            bound = (f.var in var_ids and sol[var_ids[f.var]] != NULL_ID)
            return bound != f.negated

        def value(side):
            if isinstance(side, str):
                if side not in var_ids:
                    return None
                tid = sol[var_ids[side]]
                return tid if tid != NULL_ID else None
            tid = d.lookup(side)
            return -1 if tid is None else tid

        lv, rv = value(f.left), value(f.right)
        if f.op in ("=", "!="):
            if lv is None or rv is None:
                return False
            return (lv == rv) == (f.op == "=")
        def num(side, tid):
            if isinstance(side, str):
                return d.numeric(tid) if tid and tid > 0 else None
            return integer_value(side)
        a, b = num(f.left, lv), num(f.right, rv)
        if a is None or b is None:
            return False
        import operator
        return {"<": operator.lt, "<=": operator.le,
                ">": operator.gt, ">=": operator.ge}[f.op](a, b)

    sols = [s for s in sols if all(passes(s, f) for f in q.filters)]

    if q.aggregates:
        gname = q.group_by
        gid = var_ids[gname] if gname else None
        groups = {}
        if gid is None and not sols:
            groups[None] = []
        for s in sols:
            groups.setdefault(s[gid] if gid is not None else None, []).append(s)
        out = Counter()
        for key, members in sorted(groups.items(), key=lambda kv: kv[0] or 0):
            row = []
            if gid is not None:
                row.append(decode_norm(d, key))
            for agg in q.aggregates:
                row.append(agg_value(d, agg, members, var_ids))
            out[tuple(row)] += 1
        return out

    proj = names if q.select_all else q.select_vars
    rows = Counter()
    seen = set()
    for s in sols:
        tup = tuple(decode_norm(d, s[var_ids[v]]) if v in var_ids else None
                    for v in proj)
        if q.distinct:
            if tup in seen:
                continue
            seen.add(tup)
        rows[tup] += 1
    return rows


def decode_norm(d, tid):
    if tid == NULL_ID:
        return None
    return normalize(d.decode(tid))


def agg_value(d, agg, members, var_ids):
    if agg.kind == "count":
        if agg.var is None:
            return len(members)
        vid = var_ids[agg.var]
        vals = [m[vid] for m in members if m[vid] != NULL_ID]
        return len(set(vals)) if agg.distinct else len(vals)
    vid = var_ids[agg.var]
    nums = [d.numeric(m[vid]) for m in members if m[vid] != NULL_ID]
    nums = [n for n in nums if n is not None]
    if not nums:
        return None
    if agg.kind == "min":
        return float(min(nums))
    if agg.kind == "max":
        return float(max(nums))
    if agg.kind == "sum":
        return float(sum(nums))
    return normalize(float(sum(nums)) / len(nums))


@pytest.fixture
def social_store():
    """The three-triple example graph used across small tests."""
    return build_store([("Alice", "knows", "Bob"),
                        ("Alice", "knows", "Charlie"),
                        ("Bob", "worksAt", "ACME")])
