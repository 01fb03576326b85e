"""Equity graphs and majority-rule control identification.

A firm controls another when it holds, directly or through firms it already
controls, strictly more than 50% of the target's capital. Control therefore
propagates both along vertical chains (a majority-owned firm's majority
holdings) and by consolidation (several in-group stakes that only jointly
cross the majority line). The control set of a candidate firm is the least
fixed point of the accretion operator

    S  ->  S ∪ { f ∉ S : Σ_{s ∈ S ∪ {candidate}} share(s→f) > 50 },

which is monotone, so the result is independent of processing order.

An ultimate parent is a firm whose control set is nonempty and which appears
in no firm's control set. Firms locked in parentless mutual-majority cycles
(each controlled, none an ultimate parent) belong to no network and are left
standalone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError, StructuralError
from .io import format_number, parse_float_field, read_csv_rows

MAJORITY_THRESHOLD = 50.0
SHARE_EPS = 1e-9
DEFAULT_SHARE_SUM_TOLERANCE = 0.5


@dataclass(frozen=True)
class Firm:
    """A legally autonomous firm: opaque id, ISO alpha-2 country, optional 2-digit sector."""

    id: str
    country: str
    sector: str | None = None


@dataclass(frozen=True)
class EquityEdge:
    """A shareholding link: `shareholder` owns `share` percent of `target`."""

    shareholder: str
    target: str
    share: float


class EquityGraph:
    """Firms plus weighted directed shareholding edges, with adjacency indexes."""

    def __init__(self, firms: dict[str, Firm] | list[Firm], edges: list[EquityEdge]):
        if isinstance(firms, dict):
            self.firms: dict[str, Firm] = dict(firms)
        else:
            self.firms = {f.id: f for f in firms}
        self.edges: list[EquityEdge] = list(edges)
        self.out_edges: dict[str, list[tuple[str, float]]] = {}
        self.in_edges: dict[str, list[tuple[str, float]]] = {}
        for e in self.edges:
            self.out_edges.setdefault(e.shareholder, []).append((e.target, e.share))
            self.in_edges.setdefault(e.target, []).append((e.shareholder, e.share))

    def share(self, shareholder: str, target: str) -> float | None:
        """The direct stake of `shareholder` in `target`, or None if absent."""
        for t, sh in self.out_edges.get(shareholder, ()):
            if t == target:
                return sh
        return None

    def country(self, firm_id: str) -> str:
        return self.firms[firm_id].country


@dataclass(frozen=True)
class Violation:
    kind: str
    subject: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def by_kind(self, kind: str) -> list[Violation]:
        return [v for v in self.violations if v.kind == kind]


@dataclass(frozen=True)
class ControlAssignment:
    """One subsidiary's place in a parent's hierarchy.

    `controller` is the immediate hierarchy parent; `level` its distance from
    the ultimate parent (level 1 = directly majority-held by the parent);
    `control_type` is one of direct / transitive / consolidated.
    """

    subsidiary: str
    parent: str
    controller: str
    level: int
    control_type: str


@dataclass
class ControlNetwork:
    """An ultimate parent with its tree of controlled subsidiaries."""

    parent: str
    assignments: list[ControlAssignment]
    is_multinational: bool
    is_complex: bool

    @property
    def subsidiaries(self) -> list[str]:
        return [a.subsidiary for a in self.assignments]


def validate_graph(graph: EquityGraph, tolerance: float = DEFAULT_SHARE_SUM_TOLERANCE) -> ValidationReport:
    """Check structural invariants without mutating the graph.

    Reports duplicate edges, dangling endpoints, self-loops, out-of-range
    shares, and per-target share sums exceeding 100 + tolerance.
    """
    report = ValidationReport()
    seen_pairs: set[tuple[str, str]] = set()
    for e in graph.edges:
        pair = (e.shareholder, e.target)
        if pair in seen_pairs:
            report.violations.append(
                Violation("duplicate_edge", f"{e.shareholder}->{e.target}",
                          f"more than one edge from {e.shareholder} to {e.target}"))
        seen_pairs.add(pair)
        if e.shareholder == e.target:
            report.violations.append(
                Violation("self_loop", e.shareholder, f"firm {e.shareholder} holds shares in itself"))
        for endpoint in pair:
            if endpoint not in graph.firms:
                report.violations.append(
                    Violation("dangling_endpoint", endpoint,
                              f"edge {e.shareholder}->{e.target} references unknown firm {endpoint}"))
        if not (0.0 < e.share <= 100.0):
            report.violations.append(
                Violation("share_out_of_range", f"{e.shareholder}->{e.target}",
                          f"share {format_number(e.share)} outside (0, 100]"))
    sums: dict[str, float] = {}
    for e in graph.edges:
        sums[e.target] = sums.get(e.target, 0.0) + e.share
    for target in sorted(sums):
        if sums[target] > 100.0 + tolerance:
            report.violations.append(
                Violation("share_overflow", target,
                          f"incoming shares of {target} sum to {format_number(sums[target])} "
                          f"> {format_number(100.0 + tolerance)}"))
    return report


def control_set(graph: EquityGraph, candidate: str, eps: float = SHARE_EPS) -> set[str]:
    """All firms the candidate controls: least fixed point of the accretion operator.

    Strict majority: a firm joins when the stakes held by the candidate plus
    already-controlled firms sum to more than 50 (+eps guard against decimal
    parsing noise). Implemented as a worklist, O(edges) amortized; the result
    is order-independent because the operator is monotone.
    """
    if candidate not in graph.firms:
        raise DataError(f"unknown firm id: {candidate!r}")
    threshold = MAJORITY_THRESHOLD + eps
    out = graph.out_edges
    acc: dict[str, float] = {}
    controlled: set[str] = set()
    processed: set[str] = {candidate}
    stack = [candidate]
    while stack:
        holder = stack.pop()
        for target, sh in out.get(holder, ()):
            if target in controlled:
                continue
            total = acc.get(target, 0.0) + sh
            acc[target] = total
            if total > threshold:
                controlled.add(target)
                if target not in processed:
                    processed.add(target)
                    stack.append(target)
    return controlled


def _attach_hierarchy(graph: EquityGraph, parent: str, members: set[str],
                      eps: float) -> list[ControlAssignment]:
    """Linearize a parent's control set into a deterministic tree.

    Firms attach in rounds: a firm becomes attachable once the parent plus
    already-attached members jointly hold a strict majority in it. Its
    controller is then the attached in-group holder with the single >50
    stake if one exists (transitive), else the largest-stake attached
    in-group subsidiary (consolidated; ties broken by lower level, then
    lexicographic id). Direct majorities of the parent attach first at
    level 1. Controllers always attach strictly earlier, so the result is a
    tree; totality follows from the accretion order of the fixed point.
    """
    threshold = MAJORITY_THRESHOLD + eps
    level: dict[str, int] = {parent: 0}
    assignments: list[ControlAssignment] = []

    in_group_holders: dict[str, list[tuple[str, float]]] = {}
    for s in members:
        in_group_holders[s] = [
            (h, sh) for h, sh in graph.in_edges.get(s, ())
            if h != s and (h == parent or h in members)
        ]

    parent_stakes = dict(graph.out_edges.get(parent, ()))
    for s in sorted(members):
        p_share = parent_stakes.get(s)
        if p_share is not None and p_share > threshold:
            level[s] = 1
            assignments.append(ControlAssignment(s, parent, parent, 1, "direct"))

    remaining = {s for s in members if s not in level}
    while remaining:
        newly: list[tuple[str, str, str]] = []
        for s in sorted(remaining):
            holders = in_group_holders[s]
            attached_sum = sum(sh for h, sh in holders if h in level)
            if attached_sum <= threshold:
                continue
            attached_subs = [(h, sh) for h, sh in holders if h != parent and h in level]
            majority_holders = [(h, sh) for h, sh in attached_subs if sh > threshold]
            pool = majority_holders if majority_holders else attached_subs
            if not pool:
                # attached_sum > 50 with the parent's own stake ≤ 50 forces at
                # least one attached subsidiary holder; defensive guard only
                continue
            ctype = "transitive" if majority_holders else "consolidated"
            controller = min(pool, key=lambda t: (-t[1], level[t[0]], t[0]))[0]
            newly.append((s, controller, ctype))
        if not newly:
            raise StructuralError(
                f"cannot linearize control hierarchy under parent {parent}: "
                f"unattachable members {sorted(remaining)}")
        for s, controller, ctype in newly:
            level[s] = level[controller] + 1
            assignments.append(ControlAssignment(s, parent, controller, level[s], ctype))
            remaining.discard(s)

    assignments.sort(key=lambda a: (a.level, a.subsidiary))
    return assignments


def ultimate_parents(graph: EquityGraph, tolerance: float = DEFAULT_SHARE_SUM_TOLERANCE,
                     eps: float = SHARE_EPS) -> list[ControlNetwork]:
    """Identify every ultimate parent and its control network.

    A firm is an ultimate parent iff its control set is nonempty and it lies
    in no firm's control set. Raises :class:`DataError` when the graph fails
    validation (naming the offending firm for share-sum overflows) or when a
    firm would be claimed by two parents (possible only inside the share-sum
    tolerance window).
    """
    report = validate_graph(graph, tolerance=tolerance)
    if not report.ok:
        overflow = report.by_kind("share_overflow")
        if overflow:
            raise DataError(f"share sums exceed tolerance for firm(s): "
                            f"{', '.join(v.subject for v in overflow)}")
        first = report.violations[0]
        raise DataError(f"graph fails validation ({first.kind}): {first.message}")

    sets: dict[str, set[str]] = {}
    for firm_id in graph.firms:
        if graph.out_edges.get(firm_id):
            cs = control_set(graph, firm_id, eps=eps)
            if cs:
                sets[firm_id] = cs

    controlled_somewhere: set[str] = set()
    for cs in sets.values():
        controlled_somewhere |= cs

    parents = sorted(p for p in sets if p not in controlled_somewhere)

    owner_of: dict[str, str] = {}
    for p in parents:
        for s in sets[p]:
            if s in owner_of:
                raise DataError(
                    f"firm {s} is majority-controlled by two ultimate parents "
                    f"({owner_of[s]} and {p}); share sums inside the tolerance "
                    f"window make control ambiguous")
            owner_of[s] = p

    networks: list[ControlNetwork] = []
    for p in parents:
        members = sets[p]
        assignments = _attach_hierarchy(graph, p, members, eps)
        parent_country = graph.country(p) if p in graph.firms else ""
        is_multinational = any(graph.country(a.subsidiary) != parent_country for a in assignments)
        is_complex = any(a.level >= 2 for a in assignments)
        networks.append(ControlNetwork(p, assignments, is_multinational, is_complex))
    return networks


def export_network_dot(network: ControlNetwork, graph: EquityGraph) -> str:
    """Render a control network as DOT text: nodes labelled with country codes,
    hierarchy edges annotated with the controller's equity share. Node and
    edge ordering is deterministic (parent first, then sorted ids)."""
    lines = ["digraph control_network {"]
    node_ids = [network.parent] + sorted(a.subsidiary for a in network.assignments)
    for fid in node_ids:
        country = graph.country(fid)
        lines.append(f'  "{fid}" [label="{fid}\\n{country}"];')
    for a in sorted(network.assignments, key=lambda a: (a.controller, a.subsidiary)):
        sh = graph.share(a.controller, a.subsidiary)
        label = format_number(sh) if sh is not None else "0"
        lines.append(f'  "{a.controller}" -> "{a.subsidiary}" [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_network_dot(text: str) -> tuple[list[tuple[str, str]], list[tuple[str, str, float]]]:
    """Parse the DOT dialect emitted by :func:`export_network_dot`.

    Returns (sorted node (id, country) pairs, sorted (src, dst, share) edges);
    used for round-trip checks.
    """
    nodes: list[tuple[str, str]] = []
    edges: list[tuple[str, str, float]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line.startswith('"'):
            continue
        if "->" in line:
            src, rest = line.split("->", 1)
            src = src.strip().strip('"')
            dst = rest.split("[", 1)[0].strip().strip('"')
            label = rest.split('label="', 1)[1].split('"', 1)[0]
            edges.append((src, dst, float(label)))
        else:
            fid = line.split("[", 1)[0].strip().strip('"')
            label = line.split('label="', 1)[1].split('"', 1)[0]
            country = label.split("\\n")[1]
            nodes.append((fid, country))
    return sorted(nodes), sorted(edges)


def load_firms(path: str | Path) -> dict[str, Firm]:
    """Read `firms.csv` (firm_id,country,sector); sector may be blank."""
    rows = read_csv_rows(path, ["firm_id", "country", "sector"])
    firms: dict[str, Firm] = {}
    for i, row in enumerate(rows, start=2):
        fid = row["firm_id"].strip()
        if not fid:
            raise DataError(f"{path}: row {i}: empty firm_id")
        if fid in firms:
            raise DataError(f"{path}: row {i}: duplicate firm_id {fid!r}")
        sector = row["sector"].strip() or None
        firms[fid] = Firm(fid, row["country"].strip(), sector)
    return firms


def load_edges(path: str | Path) -> list[EquityEdge]:
    """Read `edges.csv` (shareholder_id,target_id,share_pct)."""
    rows = read_csv_rows(path, ["shareholder_id", "target_id", "share_pct"])
    edges = []
    for i, row in enumerate(rows, start=2):
        share = parse_float_field(row["share_pct"], path, i, "share_pct")
        edges.append(EquityEdge(row["shareholder_id"].strip(), row["target_id"].strip(), share))
    return edges


def load_equity_graph(firms_path: str | Path, edges_path: str | Path) -> EquityGraph:
    return EquityGraph(load_firms(firms_path), load_edges(edges_path))


def write_networks_csv(networks: list[ControlNetwork], path: str | Path) -> None:
    """Write `networks.csv` (parent_id,subsidiary_id,controller_id,level,control_type)."""
    from .io import write_csv

    rows = []
    for net in sorted(networks, key=lambda n: n.parent):
        for a in net.assignments:
            rows.append([net.parent, a.subsidiary, a.controller, a.level, a.control_type])
    write_csv(path, ["parent_id", "subsidiary_id", "controller_id", "level", "control_type"], rows)


def write_firms_csv(graph: EquityGraph, path: str | Path) -> None:
    """Write `firms.csv` (firm_id,country,sector); blank sector for None."""
    from .io import write_csv

    rows = [[f.id, f.country, f.sector if f.sector is not None else ""]
            for f in sorted(graph.firms.values(), key=lambda f: f.id)]
    write_csv(path, ["firm_id", "country", "sector"], rows)


def write_edges_csv(graph: EquityGraph, path: str | Path) -> None:
    """Write `edges.csv` (shareholder_id,target_id,share_pct)."""
    from .io import write_csv

    rows = [[e.shareholder, e.target, e.share]
            for e in sorted(graph.edges, key=lambda e: (e.shareholder, e.target))]
    write_csv(path, ["shareholder_id", "target_id", "share_pct"], rows)
