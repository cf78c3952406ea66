"""Compiled filter conditions, evaluable over batches or single rows.

Equality tests run in id space. Order comparisons run over the numeric
side-map built at load time for integer literals; rows whose operands
have no numeric value (or are unbound) never satisfy a comparison, which
matches SPARQL's error-propagation behavior for FILTER.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

EQ, NE, LT, LE, GT, GE = "=", "!=", "<", "<=", ">", ">="
ORDER_OPS = (LT, LE, GT, GE)

_NP_CMP = {EQ: np.equal, NE: np.not_equal, LT: np.less,
           LE: np.less_equal, GT: np.greater, GE: np.greater_equal}


@dataclass(frozen=True)
class VarOperand:
    var: int


@dataclass(frozen=True)
class ConstOperand:
    # id is -1 when the constant term does not occur in the data
    id: int
    value: Optional[int] = None  # numeric value, for order comparisons


@dataclass(frozen=True)
class Comparison:
    op: str
    left: object
    right: object

    def variables(self):
        return tuple(o.var for o in (self.left, self.right)
                     if isinstance(o, VarOperand))

    def _id_side(self, operand, batch):
        if isinstance(operand, VarOperand):
            ids = batch.active(operand.var)
            return ids, ids != 0
        return operand.id, True

    def _num_side(self, operand, batch, numeric_map):
        if isinstance(operand, VarOperand):
            return numeric_map[batch.active(operand.var)]
        return float(operand.value)

    def mask(self, batch, numeric_map) -> np.ndarray:
        """Boolean keep-mask over the batch's active rows."""
        cmp = _NP_CMP[self.op]
        if self.op in (EQ, NE):
            lv, lok = self._id_side(self.left, batch)
            rv, rok = self._id_side(self.right, batch)
            out = cmp(lv, rv) & lok & rok
        else:
            lv = self._num_side(self.left, batch, numeric_map)
            rv = self._num_side(self.right, batch, numeric_map)
            out = cmp(lv, rv)  # NaN operands compare False
        if np.ndim(out) == 0:
            return np.full(batch.active_count(), bool(out))
        return out

    def row_pred(self, numeric):
        """Predicate over a full-width row; ``numeric`` maps id -> int."""
        op = self.op
        left, right = self.left, self.right
        if op in (EQ, NE):
            # specialized closures; this predicate sits on the per-row hot path
            if isinstance(left, VarOperand) and isinstance(right, VarOperand):
                lv, rv = left.var, right.var
                if op == EQ:
                    return lambda row: row[lv] != 0 and row[lv] == row[rv]
                return lambda row: row[lv] != 0 and row[rv] != 0 and row[lv] != row[rv]
            if isinstance(left, VarOperand):
                var, cid = left.var, right.id
            else:
                var, cid = right.var, left.id
            if op == EQ:
                return lambda row: row[var] == cid and cid != 0
            return lambda row: row[var] != 0 and row[var] != cid

        def num_of(operand, row):
            if isinstance(operand, VarOperand):
                tid = row[operand.var]
                return numeric.get(tid) if tid else None
            return operand.value

        import operator
        py_cmp = {LT: operator.lt, LE: operator.le,
                  GT: operator.gt, GE: operator.ge}[op]

        def pred(row):
            a = num_of(left, row)
            b = num_of(right, row)
            return a is not None and b is not None and py_cmp(a, b)

        return pred

    def describe(self, var_names, term_repr) -> str:
        def side(operand):
            if isinstance(operand, VarOperand):
                return "?" + var_names[operand.var]
            return term_repr(operand)
        return f"{side(self.left)} {self.op} {side(self.right)}"


@dataclass(frozen=True)
class BoundTest:
    var: int
    negated: bool = False

    def variables(self):
        return (self.var,)

    def mask(self, batch, numeric_map) -> np.ndarray:
        m = batch.active(self.var) != 0
        return ~m if self.negated else m

    def row_pred(self, numeric):
        var, neg = self.var, self.negated
        if neg:
            return lambda row: row[var] == 0
        return lambda row: row[var] != 0

    def describe(self, var_names, term_repr) -> str:
        prefix = "!" if self.negated else ""
        return f"{prefix}BOUND(?{var_names[self.var]})"
