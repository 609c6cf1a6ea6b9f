"""Directed labeled multigraph with typed property maps.

Nodes and relationships carry a single label and a map from string keys to
typed values (64-bit int, float, bool, str, or a homogeneous list of those).
Parallel edges and self-loops are allowed.  Ids are dense non-negative
integers assigned in creation order, and every iteration surface is ordered
by ascending id so downstream consumers are deterministic without sorting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .errors import (
    InvalidLabelError,
    InvalidPropertyError,
    NodeNotFoundError,
    RelationshipNotFoundError,
    ReservedLabelError,
    SizeLimitExceededError,
)

# Node property key holding an object's unique heap identifier.  The key is
# identity metadata: structural comparison and the query-level equals()
# builtin both ignore it.
UID_KEY = "$uid"

# Labels that may not name user classes.
LOCAL_LABEL = "Local"
CLASS_LABEL = "Class"
RESERVED_LABELS = frozenset({LOCAL_LABEL, CLASS_LABEL})

_PRIMITIVE_TYPES = (bool, int, float, str)

ISO_NODE_LIMIT = 64


def check_label(label: str) -> str:
    if not isinstance(label, str) or not label:
        raise InvalidLabelError(f"label must be a non-empty string, got {label!r}")
    return label


def ensure_user_label(label: str) -> str:
    """Validate a label that names a user class (rejects ``Local``/``Class``)."""
    check_label(label)
    if label in RESERVED_LABELS:
        raise ReservedLabelError(label)
    return label


def check_property_value(value, *, key: str = ""):
    """Validate one property value; returns the value unchanged."""
    where = f" for key {key!r}" if key else ""
    if isinstance(value, _PRIMITIVE_TYPES):
        return value
    if isinstance(value, list):
        kinds = {type(v) for v in value}
        if len(kinds) > 1:
            raise InvalidPropertyError(f"list value{where} must be homogeneous, got {sorted(k.__name__ for k in kinds)}")
        if kinds and not issubclass(next(iter(kinds)), _PRIMITIVE_TYPES):
            raise InvalidPropertyError(f"list value{where} may only hold primitives")
        return value
    raise InvalidPropertyError(f"unsupported property value{where}: {value!r} ({type(value).__name__})")


def check_properties(properties: dict | None) -> dict:
    props = {}
    for key, value in (properties or {}).items():
        if not isinstance(key, str) or not key:
            raise InvalidPropertyError(f"property keys must be non-empty strings, got {key!r}")
        props[key] = check_property_value(value, key=key)
    if UID_KEY in props and (isinstance(props[UID_KEY], bool) or not isinstance(props[UID_KEY], int)):
        raise InvalidPropertyError(f"{UID_KEY} must be an integer, got {props[UID_KEY]!r}")
    return props


def value_tag(value) -> tuple:
    """Hashable, type-sensitive canonical form of a property value.

    bool/int/float are distinct variants, so 1, 1.0 and True all differ.
    """
    if isinstance(value, bool):
        return ("b", value)
    if isinstance(value, int):
        return ("i", value)
    if isinstance(value, float):
        return ("f", value)
    if isinstance(value, str):
        return ("s", value)
    if isinstance(value, list):
        return ("l", tuple(value_tag(v) for v in value))
    raise InvalidPropertyError(f"unsupported property value: {value!r}")


def values_equal(a, b) -> bool:
    """Type-sensitive equality: integers and floats never compare equal."""
    return value_tag(a) == value_tag(b)


def canon_properties(properties: dict, *, ignore_uid: bool = False) -> tuple:
    items = []
    for key in sorted(properties):
        if ignore_uid and key == UID_KEY:
            continue
        items.append((key, value_tag(properties[key])))
    return tuple(items)


@dataclass
class Node:
    id: int
    label: str
    properties: dict = field(default_factory=dict)

    @property
    def uid(self) -> int | None:
        return self.properties.get(UID_KEY)


@dataclass
class Relationship:
    id: int
    label: str
    start: int
    end: int
    properties: dict = field(default_factory=dict)


class PropertyGraph:
    """Mutable in-memory multigraph; single writer, no internal locking."""

    def __init__(self):
        self._nodes: dict[int, Node] = {}
        self._rels: dict[int, Relationship] = {}
        self._out: dict[int, list[int]] = {}
        self._in: dict[int, list[int]] = {}
        self._next_node_id = 0
        self._next_rel_id = 0

    # -- accessors ----------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def relationship_count(self) -> int:
        return len(self._rels)

    def has_node(self, node_id: int) -> bool:
        return node_id in self._nodes

    def node(self, node_id: int) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise NodeNotFoundError(node_id) from None

    def relationship(self, rel_id: int) -> Relationship:
        try:
            return self._rels[rel_id]
        except KeyError:
            raise RelationshipNotFoundError(rel_id) from None

    def nodes(self) -> Iterator[Node]:
        for node_id in sorted(self._nodes):
            yield self._nodes[node_id]

    def relationships(self) -> Iterator[Relationship]:
        for rel_id in sorted(self._rels):
            yield self._rels[rel_id]

    def nodes_with_label(self, label: str) -> Iterator[Node]:
        for node in self.nodes():
            if node.label == label:
                yield node

    # -- mutation -------------------------------------------------------------

    def add_node(self, label: str, properties: dict | None = None, *, node_id: int | None = None) -> int:
        """Append a fresh node and return its id.

        ``node_id`` forces an explicit id (used by the CSV importer); it must
        not collide with an existing node.
        """
        check_label(label)
        props = check_properties(properties)
        if node_id is None:
            node_id = self._next_node_id
        elif node_id in self._nodes:
            raise InvalidLabelError(f"node id {node_id} already present")
        self._nodes[node_id] = Node(node_id, label, props)
        self._out[node_id] = []
        self._in[node_id] = []
        self._next_node_id = max(self._next_node_id, node_id + 1)
        return node_id

    def add_relationship(self, label: str, start: int, end: int, properties: dict | None = None) -> int:
        check_label(label)
        props = check_properties(properties)
        if start not in self._nodes:
            raise NodeNotFoundError(start)
        if end not in self._nodes:
            raise NodeNotFoundError(end)
        rel_id = self._next_rel_id
        self._next_rel_id += 1
        self._rels[rel_id] = Relationship(rel_id, label, start, end, props)
        self._out[start].append(rel_id)
        self._in[end].append(rel_id)
        return rel_id

    def remove_relationship(self, rel_id: int) -> None:
        rel = self.relationship(rel_id)
        del self._rels[rel_id]
        self._out[rel.start].remove(rel_id)
        self._in[rel.end].remove(rel_id)

    def set_field_edge(self, fieldname: str, start: int, end: int) -> int:
        """Install the single outgoing ``fieldname`` edge of ``start``.

        Any previous relationship with that label leaving ``start`` is
        removed first, so the outgoing degree under the label is always 1
        afterwards.
        """
        check_label(fieldname)
        if start not in self._nodes:
            raise NodeNotFoundError(start)
        if end not in self._nodes:
            raise NodeNotFoundError(end)
        for rel_id in list(self._out[start]):
            if self._rels[rel_id].label == fieldname:
                self.remove_relationship(rel_id)
        return self.add_relationship(fieldname, start, end)

    # -- traversal ------------------------------------------------------------

    def neighbors(
        self,
        node_id: int,
        direction: str = "out",
        types: set[str] | frozenset[str] | None = None,
    ) -> list[tuple[Relationship, Node]]:
        """Incident relationships of a node with the node on the other side.

        ``direction`` is ``out``, ``in`` or ``both``; ``types`` optionally
        restricts relationship labels.  Results are ordered by ascending
        relationship id, and a self-loop is reported once under ``both``.
        """
        if node_id not in self._nodes:
            raise NodeNotFoundError(node_id)
        if direction not in ("out", "in", "both"):
            raise ValueError(f"direction must be out/in/both, got {direction!r}")
        rel_ids: set[int] = set()
        if direction in ("out", "both"):
            rel_ids.update(self._out[node_id])
        if direction in ("in", "both"):
            rel_ids.update(self._in[node_id])
        result = []
        for rel_id in sorted(rel_ids):
            rel = self._rels[rel_id]
            if types is not None and rel.label not in types:
                continue
            other = rel.end if rel.start == node_id else rel.start
            result.append((rel, self._nodes[other]))
        return result

    # -- maintenance ------------------------------------------------------------

    def copy(self) -> "PropertyGraph":
        dup = PropertyGraph()
        for node in self.nodes():
            dup._nodes[node.id] = Node(node.id, node.label, _copy_props(node.properties))
            dup._out[node.id] = list(self._out[node.id])
            dup._in[node.id] = list(self._in[node.id])
        for rel in self.relationships():
            dup._rels[rel.id] = Relationship(rel.id, rel.label, rel.start, rel.end, _copy_props(rel.properties))
        dup._next_node_id = self._next_node_id
        dup._next_rel_id = self._next_rel_id
        return dup

    def audit(self) -> list[str]:
        """Consistency check of the adjacency indexes; empty list means ok."""
        problems = []
        indexed_out = {(n, r) for n, rels in self._out.items() for r in rels}
        indexed_in = {(n, r) for n, rels in self._in.items() for r in rels}
        for rel in self._rels.values():
            if (rel.start, rel.id) not in indexed_out:
                problems.append(f"relationship {rel.id} missing from outgoing index of {rel.start}")
            if (rel.end, rel.id) not in indexed_in:
                problems.append(f"relationship {rel.id} missing from incoming index of {rel.end}")
        for node_id, rels in self._out.items():
            if len(rels) != len(set(rels)):
                problems.append(f"duplicate entries in outgoing index of {node_id}")
            for rel_id in rels:
                rel = self._rels.get(rel_id)
                if rel is None or rel.start != node_id:
                    problems.append(f"stale outgoing entry {rel_id} on node {node_id}")
        for node_id, rels in self._in.items():
            if len(rels) != len(set(rels)):
                problems.append(f"duplicate entries in incoming index of {node_id}")
            for rel_id in rels:
                rel = self._rels.get(rel_id)
                if rel is None or rel.end != node_id:
                    problems.append(f"stale incoming entry {rel_id} on node {node_id}")
        return problems


def _copy_props(props: dict) -> dict:
    return {k: (list(v) if isinstance(v, list) else v) for k, v in props.items()}


# -- structural comparison ----------------------------------------------------


def structurally_equal(g1: PropertyGraph, g2: PropertyGraph, *, max_nodes: int = ISO_NODE_LIMIT) -> bool:
    """Id-insensitive isomorphism of labeled, propertied multigraphs.

    True iff some bijection of nodes preserves labels, property maps and
    labeled relationships (with their property maps).  The reserved ``$uid``
    node property is identity metadata and is ignored.  Intended for small
    graphs; raises SizeLimitExceededError beyond ``max_nodes``.
    """
    for g in (g1, g2):
        if g.node_count > max_nodes:
            raise SizeLimitExceededError(g.node_count, max_nodes)
    if g1.node_count != g2.node_count or g1.relationship_count != g2.relationship_count:
        return False

    sig1 = _node_signatures(g1)
    sig2 = _node_signatures(g2)
    if sorted(sig1.values()) != sorted(sig2.values()):
        return False

    candidates: dict[int, list[int]] = {}
    by_sig: dict[tuple, list[int]] = {}
    for node_id, sig in sig2.items():
        by_sig.setdefault(sig, []).append(node_id)
    for node_id, sig in sig1.items():
        candidates[node_id] = by_sig.get(sig, [])
        if not candidates[node_id]:
            return False

    # Most-constrained-first ordering keeps the backtracking shallow.
    order = sorted(candidates, key=lambda n: (len(candidates[n]), n))
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def edges_between(g: PropertyGraph, a: int, b: int):
        out = []
        for rel, other in g.neighbors(a, "out"):
            if other.id == b:
                out.append((rel.label, canon_properties(rel.properties)))
        return sorted(out)

    def consistent(n1: int, n2: int) -> bool:
        for m1, m2 in mapping.items():
            if edges_between(g1, n1, m1) != edges_between(g2, n2, m2):
                return False
            if edges_between(g1, m1, n1) != edges_between(g2, m2, n2):
                return False
        return edges_between(g1, n1, n1) == edges_between(g2, n2, n2)

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        n1 = order[i]
        for n2 in candidates[n1]:
            if n2 in used or not consistent(n1, n2):
                continue
            mapping[n1] = n2
            used.add(n2)
            if extend(i + 1):
                return True
            del mapping[n1]
            used.remove(n2)
        return False

    return extend(0)


def _node_signatures(g: PropertyGraph) -> dict[int, tuple]:
    sigs = {}
    for node in g.nodes():
        out = sorted((rel.label, canon_properties(rel.properties)) for rel, _ in g.neighbors(node.id, "out"))
        inc = sorted((rel.label, canon_properties(rel.properties)) for rel, _ in g.neighbors(node.id, "in"))
        sigs[node.id] = (
            node.label,
            canon_properties(node.properties, ignore_uid=True),
            tuple(out),
            tuple(inc),
        )
    return sigs
