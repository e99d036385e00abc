"""Decision rules harvested from trees and the standardized design matrix.

A rule is a conjunction of half-open interval conditions on covariates.
Each internal tree node contributes one rule: the path conditions down to
one of its children, the child picked uniformly at random. Conditions on
the same covariate merge into a single interval, so a rule's length is the
number of distinct constrained covariates.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DataError, NumericError

__all__ = [
    "Condition",
    "Rule",
    "ColumnMeta",
    "DesignMatrix",
    "extract_rules",
    "evaluate_rule",
    "rule_text",
    "dedup_rules",
    "build_design_matrix",
]


@dataclass(frozen=True)
class Condition:
    col: int
    op: str  # "<=" or ">"
    threshold: float


def _merge(raw):
    """Collapse raw path conditions to at most one bound per direction per
    column: intersect upper bounds by min, lower bounds by max."""
    upper: dict[int, float] = {}
    lower: dict[int, float] = {}
    for c in raw:
        if c.op == "<=":
            if c.col not in upper or c.threshold < upper[c.col]:
                upper[c.col] = c.threshold
        elif c.op == ">":
            if c.col not in lower or c.threshold > lower[c.col]:
                lower[c.col] = c.threshold
        else:
            raise DataError(f"unknown condition op {c.op!r}")
    out = []
    for col in sorted(set(upper) | set(lower)):
        if col in lower:
            out.append(Condition(col, ">", lower[col]))
        if col in upper:
            out.append(Condition(col, "<=", upper[col]))
    return tuple(out)


@dataclass(frozen=True)
class Rule:
    conditions: tuple[Condition, ...]
    source: str = ""  # "rf" or "gbm"
    support: float | None = None  # training fraction satisfying the rule

    @classmethod
    def from_path(cls, raw_conditions, source=""):
        if not raw_conditions:
            raise DataError("a rule needs at least one condition")
        return cls(conditions=_merge(raw_conditions), source=source)

    @property
    def length(self) -> int:
        """Number of distinct covariates constrained after merging."""
        return len({c.col for c in self.conditions})


def extract_rules(tree, rng, source=""):
    """One rule per internal node: the path to a uniformly chosen child.

    A tree with u leaves has u - 1 internal nodes and therefore yields
    u - 1 rules out of the 2(u - 1) candidate child-paths. Nodes are
    visited in preorder so the rng consumption is reproducible.
    """
    rules = []

    def walk(node, path):
        if node.is_leaf:
            return
        go_left = int(rng.integers(2)) == 0
        cond = Condition(node.col, "<=" if go_left else ">", node.threshold)
        rules.append(Rule.from_path(path + [cond], source=source))
        walk(node.left, path + [Condition(node.col, "<=", node.threshold)])
        walk(node.right, path + [Condition(node.col, ">", node.threshold)])

    walk(tree, [])
    return rules


def evaluate_rule(rule: Rule, X) -> np.ndarray:
    """0/1 indicator of the rule over rows of X (float64)."""
    X = np.asarray(X, dtype=np.float64)
    out = np.ones(X.shape[0], dtype=bool)
    for c in rule.conditions:
        col = X[:, c.col]
        out &= (col <= c.threshold) if c.op == "<=" else (col > c.threshold)
    return out.astype(np.float64)


def _fmt(v: float) -> str:
    return format(v, ".6g")


def rule_text(rule: Rule, names=None) -> str:
    """Human-readable conjunction, e.g. "rm > 6.97 & lstat <= 14.4".

    Conditions on the same covariate render as one interval:
    "6.94 < rm <= 7.45".
    """
    def name(col):
        return names[col] if names is not None else f"x{col}"

    upper = {c.col: c.threshold for c in rule.conditions if c.op == "<="}
    lower = {c.col: c.threshold for c in rule.conditions if c.op == ">"}
    parts = []
    for col in sorted({c.col for c in rule.conditions}):
        if col in lower and col in upper:
            parts.append(f"{_fmt(lower[col])} < {name(col)} <= {_fmt(upper[col])}")
        elif col in upper:
            parts.append(f"{name(col)} <= {_fmt(upper[col])}")
        else:
            parts.append(f"{name(col)} > {_fmt(lower[col])}")
    return " & ".join(parts)


def dedup_rules(rules, X):
    """Drop degenerate and duplicate rules by training indicator vector.

    Rules active on no or all rows go first. Two rules whose indicator
    vectors are equal or complementary carry the same information; the one
    with smaller length wins, ties going to the earlier rule. Survivors
    keep their original relative order and get their support cached.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    groups: dict[bytes, list] = {}
    supports = []
    for i, r in enumerate(rules):
        v = evaluate_rule(r, X).astype(bool)
        s = float(v.sum()) / n
        supports.append(s)
        if s == 0.0 or s == 1.0:
            continue
        pos = np.packbits(v).tobytes()
        neg = np.packbits(~v).tobytes()
        key = pos if pos <= neg else neg
        groups.setdefault(key, []).append(i)

    winners = []
    for idxs in groups.values():
        winners.append(min(idxs, key=lambda i: (rules[i].length, i)))
    winners.sort()
    return [replace(rules[i], support=supports[i]) for i in winners]


@dataclass
class ColumnMeta:
    kind: str  # "linear" or "rule"
    name: str
    mean: float
    sd: float  # sample standard deviation (ddof=1) of the raw column
    source_col: int | None = None  # encoded covariate index (linear columns)
    rule_index: int | None = None  # index into DesignMatrix.rules
    support: float | None = None
    length: int | None = None


@dataclass
class DesignMatrix:
    Z: np.ndarray  # (n, P) standardized columns: linear terms then rules
    columns: list[ColumnMeta]
    rules: list[Rule]
    n_linear: int


def build_design_matrix(rules, X, linear_cols=None, names=None) -> DesignMatrix:
    """Assemble the standardized design: linear terms first, then one
    column per deduplicated rule. Every column is centered and scaled by
    its sample standard deviation."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise DataError("need at least 2 rows")
    linear_cols = [] if linear_cols is None else list(linear_cols)

    cols = []
    metas = []
    for j in linear_cols:
        raw = X[:, j]
        mean = float(raw.mean())
        sd = float(raw.std(ddof=1))
        if sd <= 0:
            raise NumericError(f"linear column {j} has zero variance")
        cols.append((raw - mean) / sd)
        metas.append(
            ColumnMeta(
                kind="linear",
                name=names[j] if names is not None else f"x{j}",
                mean=mean,
                sd=sd,
                source_col=int(j),
            )
        )
    for ri, r in enumerate(rules):
        raw = evaluate_rule(r, X)
        mean = float(raw.mean())
        sd = float(raw.std(ddof=1))
        if sd <= 0:
            raise NumericError("rule column has zero variance; deduplicate rules first")
        cols.append((raw - mean) / sd)
        metas.append(
            ColumnMeta(
                kind="rule",
                name=rule_text(r, names),
                mean=mean,
                sd=sd,
                rule_index=ri,
                support=r.support if r.support is not None else mean,
                length=r.length,
            )
        )
    if not cols:
        raise DataError("empty design: no linear terms and no rules")
    Z = np.column_stack(cols)
    return DesignMatrix(Z=Z, columns=metas, rules=list(rules), n_linear=len(linear_cols))
