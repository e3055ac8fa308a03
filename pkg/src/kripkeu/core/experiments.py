"""Reproducible runs behind ``kripkeu experiment``: separation, definability, spectrum, cbscan."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Sequence

from loguru import logger

from .completion import cb_classify
from .config import Limits, get_limits
from .errors import PreconditionError
from .formulas import Var, eval_formula
from .heyting import (
    Element,
    SpectrumReport,
    atoms_and_pregenerators,
    b_i_atom_set,
    coprincipal,
    definable_atom_classes,
    definable_generator_support,
    heyting_binary,
    one,
    principal,
    private_successor_count,
    spectrum_check,
    subalgebra_closure,
    supp_meet_min,
)
from .poset import NodeSet, enumerate_downsets, members
from .universal import UniversalModel, universal

EXPERIMENTS = ("separation", "definability", "spectrum", "cbscan")


def _separates(closure: Sequence[Element], u: int, v: int) -> bool:
    return any((u in x) != (v in x) for x in closure)


def _window_closure(gens: list[Element], window: NodeSet, cap: int) -> tuple[Element, ...]:
    return subalgebra_closure(gens, cap=cap, within=window)


@dataclass
class SeparationReport:
    n: int
    d: int
    coprincipals_in_b: bool
    principals_in_c: bool
    valuation_pair: tuple[str, str]
    b_separates_valuation_pair: bool
    c_next_separates_valuation_pair: bool
    private_pair: tuple[str, str]
    c_separates_private_pair: bool
    b_separates_private_pair: bool
    closure_sizes: dict[str, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (
            self.coprincipals_in_b
            and self.principals_in_c
            and not self.b_separates_valuation_pair
            and self.c_next_separates_valuation_pair
            and not self.c_separates_private_pair
            and self.b_separates_private_pair
        )

    def to_dict(self) -> dict[str, Any]:
        return {**asdict(self), "passed": self.passed}


def _valuation_pair(m: UniversalModel, d: int) -> tuple[int, int]:
    """First two rank-(d+1) nodes over the same strict downset."""
    by_downset: dict[NodeSet, int] = {}
    for w in m.rank_range(d + 1):
        y = m.poset.strict_down[w]
        if y in by_downset:
            return by_downset[y], w
        by_downset[y] = w
    raise PreconditionError(f"第 {d + 1} 层没有只差赋值的节点对")


def _private_pair(m: UniversalModel, d: int) -> tuple[int, int]:
    """A rank-d node with non-empty valuation and its private successor valued ∅."""
    for w in m.rank_range(d):
        if m.valuation[w]:
            successor = m.lookup(0, m.poset.down(w))
            if successor is not None:
                return w, successor
    raise PreconditionError(f"第 {d} 层没有带私有后继的节点")


def separation(n: int = 2, d: int = 0, limits: Optional[Limits] = None) -> SeparationReport:
    """C_{n,d} ⊆ B_{n,d} ⊆ C_{n,d+1}, both strict, computed on small downward closed windows.

    B_{n,d} is generated by the principal sets of rank ≤ d, C_{n,d} by the
    co-principal sets of rank ≤ d.
    """
    limits = limits or get_limits()
    m = universal(n, d + 1, limits)
    poset = m.poset
    low = m.level_index(d)
    low_nodes = members(low)
    principals = [principal(m, w) for w in low_nodes]

    coprincipals_in_b = all(
        coprincipal(m, w) == heyting_binary("impl", principal(m, w), Element._make(m, poset.strict_down[w]))
        for w in low_nodes
    )
    principals_in_c = True
    for w in low_nodes:
        a = principal(m, w)
        meet = one(m)
        for z in members(supp_meet_min(a)):
            meet = meet & coprincipal(m, z)
        if meet != a:
            principals_in_c = False
            logger.warning(f"主集 {w} 不等于其 supp-min 余主集之交")

    u, v = _valuation_pair(m, d)
    window = low | (1 << u) | (1 << v)
    b_closure = _window_closure(principals, window, limits.closure_cap)
    c_next = [coprincipal(m, z) for z in range(m.size)]
    c_next_closure = _window_closure(c_next, window, limits.closure_cap)

    w, w_succ = _private_pair(m, d)
    private_window = low | (1 << w_succ)
    c_closure = _window_closure([coprincipal(m, z) for z in low_nodes], private_window, limits.closure_cap)
    b_private = _window_closure(principals, private_window, limits.closure_cap)

    report = SeparationReport(
        n=n,
        d=d,
        coprincipals_in_b=coprincipals_in_b,
        principals_in_c=principals_in_c,
        valuation_pair=(m.describe(u), m.describe(v)),
        b_separates_valuation_pair=_separates(b_closure, u, v),
        c_next_separates_valuation_pair=_separates(c_next_closure, u, v),
        private_pair=(m.describe(w), m.describe(w_succ)),
        c_separates_private_pair=_separates(c_closure, w, w_succ),
        b_separates_private_pair=_separates(b_private, w, w_succ),
        closure_sizes={
            "B_valuation_window": len(b_closure),
            "C_next_valuation_window": len(c_next_closure),
            "C_private_window": len(c_closure),
            "B_private_window": len(b_private),
        },
    )
    logger.info(f"分离实验 n={n}, d={d}: {'通过' if report.passed else '失败'}")
    return report


@dataclass
class DefinabilityReport:
    n: int
    depth: int
    successor_count_mismatches: list[int]
    support_matches: dict[int, bool]
    b_i_matches: dict[int, bool]
    atom_classes: dict[int, list[int]]
    atom_classes_match: bool

    @property
    def passed(self) -> bool:
        return (
            not self.successor_count_mismatches
            and all(self.support_matches.values())
            and all(self.b_i_matches.values())
            and self.atom_classes_match
        )

    def to_dict(self) -> dict[str, Any]:
        return {**asdict(self), "passed": self.passed}


def definability(n: int = 2, depth: int = 2, limits: Optional[Limits] = None) -> DefinabilityReport:
    """Recover each generator from order data alone and compare with its truth set."""
    m = universal(n, depth, limits)
    inner = m.level_index(depth - 1)

    mismatches = [
        v for v in members(inner)
        if private_successor_count(v, m) != (1 << m.valuation[v].bit_count()) - 1
    ]
    support_matches = {
        i: definable_generator_support(i, m) == eval_formula(Var(i), m).bits & inner
        for i in range(1, n + 1)
    }
    atoms, _ = atoms_and_pregenerators(m)
    b_i_matches = {}
    for i in range(1, n + 1):
        expected = [a for a in atoms if m.valuation[a.bits.bit_length() - 1] >> (i - 1) & 1]
        b_i_matches[i] = b_i_atom_set(i, m) == expected

    classes = definable_atom_classes(m)
    atom_classes = {k: [a.bits.bit_length() - 1 for a in group] for k, group in classes.items()}
    classes_match = all(
        m.valuation[w].bit_count() == k for k, nodes in atom_classes.items() for w in nodes
    )
    return DefinabilityReport(
        n=n,
        depth=depth,
        successor_count_mismatches=mismatches,
        support_matches=support_matches,
        b_i_matches=b_i_matches,
        atom_classes=atom_classes,
        atom_classes_match=classes_match,
    )


@dataclass
class SpectrumRun:
    n: int
    depth: int
    report: SpectrumReport

    @property
    def passed(self) -> bool:
        return self.report.passed


@dataclass
class SpectrumExperiment:
    runs: list[SpectrumRun]

    @property
    def passed(self) -> bool:
        return all(run.passed for run in self.runs)

    def to_dict(self) -> dict[str, Any]:
        return {
            "runs": [{"n": r.n, "depth": r.depth, **asdict(r.report), "passed": r.passed} for r in self.runs],
            "passed": self.passed,
        }


def spectrum(pairs: Sequence[tuple[int, int]] = ((1, 2), (2, 1)), limits: Optional[Limits] = None) -> SpectrumExperiment:
    runs = []
    for n, d in pairs:
        report = spectrum_check(universal(n, d, limits))
        logger.info(f"谱重建 n={n}, d={d}: {report.meet_irreducibles} 个交不可约元")
        runs.append(SpectrumRun(n, d, report))
    return SpectrumExperiment(runs)


@dataclass
class ScanRow:
    nodes: list[int]
    verdict: str
    counts: list[int]


@dataclass
class CBScanReport:
    n: int
    d: int
    kmax: int
    rows: list[ScanRow]

    @property
    def tally(self) -> dict[str, int]:
        result: dict[str, int] = {}
        for row in self.rows:
            key = row.verdict[0] if row.verdict != "Unknown" else "Unknown"
            result[key] = result.get(key, 0) + 1
        return result

    @property
    def passed(self) -> bool:
        return all(row.verdict != "Unknown" for row in self.rows)

    def to_dict(self) -> dict[str, Any]:
        return {**asdict(self), "tally": self.tally, "passed": self.passed}


def cbscan(n: int = 2, d: int = 0, kmax: Optional[int] = None, limits: Optional[Limits] = None) -> CBScanReport:
    """Classify every downset of K^d by its extension counts."""
    limits = limits or get_limits()
    kmax = kmax or limits.kmax
    m = universal(n, d, limits)
    rows = []
    for bits in enumerate_downsets(m.poset, limit=limits.downset_cap):
        result = cb_classify(Element._make(m, bits), kmax, limits)
        rows.append(ScanRow(members(bits), str(result), list(result.counts)))
    rows.sort(key=lambda row: (len(row.nodes), row.nodes))
    return CBScanReport(n, d, kmax, rows)


def run_experiment(name: str, **params: Any):
    """Dispatch by name; ``None``-valued parameters fall back to defaults."""
    given = {key: value for key, value in params.items() if value is not None}
    if name == "separation":
        return separation(**given)
    if name == "definability":
        return definability(**given)
    if name == "spectrum":
        return spectrum(**given)
    if name == "cbscan":
        return cbscan(**given)
    raise PreconditionError(f"未知的实验: {name}，可选 {', '.join(EXPERIMENTS)}")


__all__ = [
    "EXPERIMENTS",
    "SeparationReport",
    "DefinabilityReport",
    "SpectrumExperiment",
    "SpectrumRun",
    "CBScanReport",
    "ScanRow",
    "separation",
    "definability",
    "spectrum",
    "cbscan",
    "run_experiment",
]
