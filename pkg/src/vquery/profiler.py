"""Per-operator instrumentation and the profile tree renderer.

Wrappers forward every call while counting next/skip/reset and produced
rows, and timing each call. A node's exclusive (self) time is its
measured inclusive time minus its children's inclusive time; shares are
exclusive time over root inclusive time.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

from .opapi import BatchOperator, CallStats, Operator, RowOperator


class _ProfiledBase:
    def __init__(self, op: Operator, children=()):
        self.op = op
        self.output_vars = op.output_vars
        self.sort_var = op.sort_var
        self.label = op.label
        self.stats = CallStats()
        self.seconds = 0.0  # inclusive wall time across all calls
        self._children = tuple(children)

    def children(self):
        return self._children

    def describe(self) -> str:
        """Operator label with arguments, e.g. ``MergeJoin(?x)``."""
        detail = getattr(self.op, "describe_args", None)
        if detail is not None:
            return f"{self.label}({detail()})"
        return self.label

    def skip(self, key: int) -> None:
        self.stats.skip_calls += 1
        t0 = time.perf_counter()
        self.op.skip(key)
        self.seconds += time.perf_counter() - t0

    def reset(self) -> None:
        self.stats.reset_calls += 1
        t0 = time.perf_counter()
        self.op.reset()
        self.seconds += time.perf_counter() - t0


class ProfiledRow(_ProfiledBase, RowOperator):
    def next(self):
        self.stats.next_calls += 1
        t0 = time.perf_counter()
        row = self.op.next()
        self.seconds += time.perf_counter() - t0
        if row is not None:
            self.stats.rows_out += 1
        return row


class ProfiledBatch(_ProfiledBase, BatchOperator):
    def next(self):
        self.stats.next_calls += 1
        t0 = time.perf_counter()
        b = self.op.next()
        self.seconds += time.perf_counter() - t0
        if b is not None:
            self.stats.rows_out += len(b.sel)
        return b


def wrap(op: Operator, children=()):
    """Instrument ``op``; ``children`` are the already-wrapped child
    operators the node was constructed over (kept for tree traversal)."""
    cls = ProfiledBatch if op.is_batch else ProfiledRow
    return cls(op, children)


@dataclass
class ProfileNode:
    """Immutable snapshot of one instrumented operator after execution."""

    label: str
    engine: str  # "batched" or "row"
    stats: CallStats
    wall_time: float  # inclusive seconds
    self_time: float  # exclusive seconds
    share: float  # exclusive / root inclusive, in percent
    children: list = field(default_factory=list)

    def as_dict(self):
        d = {"label": self.label, "engine": self.engine,
             "wall_time": round(self.wall_time, 6),
             "self_time": round(self.self_time, 6),
             "share": round(self.share, 2)}
        d.update(self.stats.as_dict())
        d["children"] = [c.as_dict() for c in self.children]
        return d


def snapshot(root) -> ProfileNode:
    """Build the ProfileNode tree from a wrapped operator tree."""
    total = max(root.seconds, 1e-12)

    def build(w) -> ProfileNode:
        kids = [build(c) for c in w.children()]
        self_time = max(w.seconds - sum(c.seconds for c in w.children()), 0.0)
        return ProfileNode(
            label=w.describe(),
            engine="batched" if w.op.is_batch else "row",
            stats=w.stats,
            wall_time=w.seconds,
            self_time=self_time,
            share=100.0 * self_time / total,
            children=kids,
        )

    return build(root)


def abbreviate(n: int) -> str:
    """Counts the way profile listings print them: 119K, 2.0M, 5.7K."""
    if n < 1_000:
        return str(n)
    for divisor, suffix in ((1_000_000_000, "G"), (1_000_000, "M"),
                            (1_000, "K")):
        if n >= divisor:
            value = n / divisor
            text = f"{value:.1f}"
            if value >= 100 and text.endswith(".0"):
                text = text[:-2]
            return text + suffix
    return str(n)


def render(root: ProfileNode) -> str:
    """Deterministic indentation-tree text for a finished profile."""
    lines = []

    def annotate(node: ProfileNode) -> str:
        s = node.stats
        parts = [f"results: {abbreviate(s.rows_out)}",
                 f"(next: {abbreviate(s.next_calls)}"]
        if s.skip_calls:
            parts[-1] += f", skip: {abbreviate(s.skip_calls)}"
        parts[-1] += ")"
        parts.append(f"wall time: {node.wall_time * 1000:.1f}ms"
                     f" ({node.share:.0f}%)")
        if node.engine == "batched":
            parts.append("batched")
        return f"{node.label} [{', '.join(parts)}]"

    def walk(node: ProfileNode, prefix: str, child_prefix: str):
        lines.append(prefix + annotate(node))
        kids = node.children
        for i, kid in enumerate(kids):
            last = i == len(kids) - 1
            connector = "`- " if last else "+- "
            continuation = "   " if last else "|  "
            walk(kid, child_prefix + connector, child_prefix + continuation)

    walk(root, "", "")
    return "\n".join(lines)


def topology(root: ProfileNode):
    """Nested (label, [children]) shape, labels stripped of arguments."""
    name = root.label.split("(", 1)[0]
    return (name, [topology(c) for c in root.children])
