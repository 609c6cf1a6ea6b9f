"""External formats: JSON heap snapshots and CSV graph bundles.

Snapshot JSON layout::

    {"classes": [{"name", "superclass"?, "fields": [{"name","kind","type"}],
                  "statics"?: {...}}],
     "objects": [{"id", "class", "fields": {...}}],
     "roots": {name: id}}

Field values encode as JSON literals for primitives, ``{"ref": id}`` for
references, ``{"refs": [...]}`` for reference arrays (null = empty slot),
plain JSON arrays for primitive arrays, and null for a null reference.

CSV bundles use one nodes file (``nodeId:ID,label:LABEL,props:JSON``) and
one relationships file (``:START_ID,:END_ID,:TYPE,props:JSON``).  Property
maps ride in a canonical-JSON column (sorted keys, no whitespace), quoting
per RFC 4180, LF newlines.  Export is byte-deterministic.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

from .errors import NotSnapshotShapedError, SnapshotSchemaError
from .property_graph import CLASS_LABEL, LOCAL_LABEL, UID_KEY, PropertyGraph
from .subgraph import (
    ClassInfo,
    FieldDecl,
    HeapObject,
    HeapSnapshot,
    Ref,
    RefArray,
)

NODES_HEADER = ["nodeId:ID", "label:LABEL", "props:JSON"]
RELS_HEADER = [":START_ID", ":END_ID", ":TYPE", "props:JSON"]

ELEMENT_LABEL = "element"
INSTANCEOF_LABEL = "instanceof"


# --- snapshot JSON ---------------------------------------------------------------


def _decode_value(value, path: str):
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, list):
        for i, element in enumerate(value):
            if not (element is None or isinstance(element, (bool, int, float, str))):
                raise SnapshotSchemaError("primitive arrays may only hold JSON literals", f"{path}[{i}]")
        return value
    if isinstance(value, dict):
        if set(value) == {"ref"}:
            if not isinstance(value["ref"], int) or isinstance(value["ref"], bool):
                raise SnapshotSchemaError("ref must be an integer object id", path)
            return Ref(value["ref"])
        if set(value) == {"refs"}:
            ids = value["refs"]
            if not isinstance(ids, list):
                raise SnapshotSchemaError("refs must be a list", path)
            for i, element in enumerate(ids):
                if element is not None and (not isinstance(element, int) or isinstance(element, bool)):
                    raise SnapshotSchemaError("refs elements must be object ids or null", f"{path}[{i}]")
            return RefArray(ids)
        raise SnapshotSchemaError(f"unrecognized value object with keys {sorted(value)}", path)
    raise SnapshotSchemaError(f"unsupported value {value!r}", path)


def _encode_value(value):
    if isinstance(value, Ref):
        return {"ref": value.id}
    if isinstance(value, RefArray):
        return {"refs": list(value.ids)}
    return value


def load_snapshot(data: bytes | str) -> HeapSnapshot:
    """Parse and eagerly validate a snapshot document."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SnapshotSchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SnapshotSchemaError("top level must be an object")
    for key in ("classes", "objects", "roots"):
        if key not in doc:
            raise SnapshotSchemaError(f"missing top-level key {key!r}")

    classes = []
    for i, raw in enumerate(doc["classes"]):
        path = f"classes[{i}]"
        if not isinstance(raw, dict) or "name" not in raw:
            raise SnapshotSchemaError("class entries need a name", path)
        fields = []
        for j, f in enumerate(raw.get("fields", [])):
            fpath = f"{path}.fields[{j}]"
            if not isinstance(f, dict) or not {"name", "kind", "type"} <= set(f):
                raise SnapshotSchemaError("field declarations need name/kind/type", fpath)
            fields.append(FieldDecl(f["name"], f["kind"], f["type"]))
        statics = {
            name: _decode_value(value, f"{path}.statics.{name}")
            for name, value in raw.get("statics", {}).items()
        }
        classes.append(ClassInfo(raw["name"], raw.get("superclass"), tuple(fields), statics))

    objects = []
    for i, raw in enumerate(doc["objects"]):
        path = f"objects[{i}]"
        if not isinstance(raw, dict) or not {"id", "class"} <= set(raw):
            raise SnapshotSchemaError("object entries need id and class", path)
        if not isinstance(raw["id"], int) or isinstance(raw["id"], bool):
            raise SnapshotSchemaError("object id must be an integer", path)
        fields = {
            name: _decode_value(value, f"{path}.fields.{name}")
            for name, value in raw.get("fields", {}).items()
        }
        objects.append(HeapObject(raw["id"], raw["class"], fields))

    roots = doc["roots"]
    if not isinstance(roots, dict):
        raise SnapshotSchemaError("roots must be an object", "roots")
    parsed_roots = {}
    for name, target in roots.items():
        if not isinstance(target, int) or isinstance(target, bool):
            raise SnapshotSchemaError("root targets must be object ids", f"roots.{name}")
        parsed_roots[name] = target

    snapshot = HeapSnapshot(classes, objects, parsed_roots)
    snapshot.validate()
    return snapshot


def save_snapshot(snapshot: HeapSnapshot, *, indent: int | None = None) -> bytes:
    """Serialize a snapshot; canonical (sorted keys, compact) when unindented."""
    doc = {
        "classes": [
            {
                "name": info.name,
                **({"superclass": info.superclass} if info.superclass else {}),
                "fields": [{"name": f.name, "kind": f.kind, "type": f.type} for f in info.fields],
                **(
                    {"statics": {k: _encode_value(v) for k, v in sorted(info.statics.items())}}
                    if info.statics
                    else {}
                ),
            }
            for info in snapshot.classes
        ],
        "objects": [
            {
                "id": obj.id,
                "class": obj.cls,
                "fields": {k: _encode_value(v) for k, v in sorted(obj.fields.items())},
            }
            for obj in snapshot.objects
        ],
        "roots": dict(sorted(snapshot.roots.items())),
    }
    if indent is None:
        return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return json.dumps(doc, indent=indent, sort_keys=True).encode("utf-8")


# --- graph -> snapshot ----------------------------------------------------------


def _primitive_type(value) -> str:
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "double"
    return "String"


def graph_to_snapshot(graph: PropertyGraph) -> HeapSnapshot:
    """Invert extraction for heap-shaped graphs.

    Instance nodes become objects (object id = ``$uid`` when present,
    otherwise the node id), ``Class`` nodes become class declarations with
    statics, ``Local`` binders become named roots, and array nodes are
    folded back into reference-array fields.  Graphs that cannot be
    expressed this way (duplicate field edges, shared arrays, dangling
    binders) raise NotSnapshotShapedError.
    """
    instance_nodes = []
    class_nodes = []
    local_nodes = []
    array_nodes = {}
    for node in graph.nodes():
        if node.label == CLASS_LABEL:
            class_nodes.append(node)
        elif node.label == LOCAL_LABEL:
            local_nodes.append(node)
        elif node.label.endswith("[]"):
            array_nodes[node.id] = node
        else:
            instance_nodes.append(node)

    object_ids: dict[int, int] = {}
    assigned: set[int] = set()
    for node in instance_nodes:
        uid = node.properties.get(UID_KEY)
        object_id = uid if uid is not None else node.id
        if object_id in assigned:
            raise NotSnapshotShapedError(f"object id {object_id} assigned twice")
        assigned.add(object_id)
        object_ids[node.id] = object_id

    class_decls: dict[str, dict[str, FieldDecl]] = {}
    class_statics: dict[str, dict] = {}
    declared_class_names = set()

    def declare_field(cls: str, decl: FieldDecl):
        fields = class_decls.setdefault(cls, {})
        existing = fields.get(decl.name)
        if existing is None:
            fields[decl.name] = decl
        elif existing.kind != decl.kind:
            raise NotSnapshotShapedError(
                f"field {decl.name!r} of {cls!r} is both {existing.kind} and {decl.kind}"
            )

    for node in class_nodes:
        name = node.properties.get("name")
        if not isinstance(name, str) or not name:
            raise NotSnapshotShapedError(f"Class node {node.id} has no name property")
        if name in declared_class_names:
            raise NotSnapshotShapedError(f"two Class nodes for {name!r}")
        declared_class_names.add(name)
        class_decls.setdefault(name, {})
        statics = {key: value for key, value in node.properties.items() if key != "name"}
        class_statics[name] = statics

    objects = []
    array_owned: dict[int, int] = {}
    for node in instance_nodes:
        fields: dict = {}
        cls = node.label
        class_decls.setdefault(cls, {})
        for key, value in node.properties.items():
            if key == UID_KEY:
                continue
            kind = "primitive-array" if isinstance(value, list) else "primitive"
            element_type = _primitive_type(value[0]) if isinstance(value, list) and value else "java.lang.Object"
            declare_field(cls, FieldDecl(key, kind, element_type if kind == "primitive-array" else _primitive_type(value)))
            fields[key] = list(value) if isinstance(value, list) else value
        seen_labels = set()
        for rel, other in graph.neighbors(node.id, "out"):
            if rel.label == INSTANCEOF_LABEL:
                continue
            if rel.label in seen_labels:
                raise NotSnapshotShapedError(
                    f"node {node.id} has multiple {rel.label!r} field edges"
                )
            seen_labels.add(rel.label)
            if other.id in array_nodes:
                if other.id in array_owned:
                    raise NotSnapshotShapedError(f"array node {other.id} is shared")
                array_owned[other.id] = node.id
                fields[rel.label] = _collect_array(graph, other.id, object_ids)
                declare_field(cls, FieldDecl(rel.label, "reference-array", other.label[:-2]))
            else:
                if other.id not in object_ids:
                    raise NotSnapshotShapedError(
                        f"field edge {rel.label!r} points at non-instance node {other.id}"
                    )
                fields[rel.label] = Ref(object_ids[other.id])
                declare_field(cls, FieldDecl(rel.label, "reference", other.label))
        instanceof = [
            (rel, other) for rel, other in graph.neighbors(node.id, "out") if rel.label == INSTANCEOF_LABEL
        ]
        if len(instanceof) > 1:
            raise NotSnapshotShapedError(f"node {node.id} has {len(instanceof)} instanceof edges")
        if instanceof:
            target = instanceof[0][1]
            if target.label != CLASS_LABEL or target.properties.get("name") != cls:
                raise NotSnapshotShapedError(f"node {node.id} instanceof edge does not match its label")
        objects.append(HeapObject(object_ids[node.id], cls, fields))

    # Static reference edges leave Class nodes.
    for node in class_nodes:
        name = node.properties["name"]
        for rel, other in graph.neighbors(node.id, "out"):
            if other.id in array_nodes:
                if other.id in array_owned:
                    raise NotSnapshotShapedError(f"array node {other.id} is shared")
                array_owned[other.id] = node.id
                class_statics[name][rel.label] = _collect_array(graph, other.id, object_ids)
            else:
                if other.id not in object_ids:
                    raise NotSnapshotShapedError(f"static edge {rel.label!r} points at node {other.id}")
                class_statics[name][rel.label] = Ref(object_ids[other.id])

    for array_id in array_nodes:
        if array_id not in array_owned:
            raise NotSnapshotShapedError(f"array node {array_id} has no owner")

    roots = {}
    for node in local_nodes:
        bindings = graph.neighbors(node.id, "out")
        if len(bindings) != 1:
            raise NotSnapshotShapedError(f"Local node {node.id} must have exactly one binding edge")
        rel, target = bindings[0]
        if target.id not in object_ids:
            raise NotSnapshotShapedError(f"binding {rel.label!r} points at non-instance node {target.id}")
        if rel.label in roots:
            raise NotSnapshotShapedError(f"duplicate root name {rel.label!r}")
        roots[rel.label] = object_ids[target.id]

    classes = []
    for cls in sorted(class_decls):
        classes.append(
            ClassInfo(
                cls,
                None,
                tuple(class_decls[cls][name] for name in sorted(class_decls[cls])),
                class_statics.get(cls, {}),
            )
        )
    objects.sort(key=lambda o: o.id)
    snapshot = HeapSnapshot(classes, objects, roots)
    snapshot.validate()
    return snapshot


def _collect_array(graph: PropertyGraph, array_id: int, object_ids: dict[int, int]) -> RefArray:
    elements: dict[int, int] = {}
    for rel, target in graph.neighbors(array_id, "out"):
        if rel.label != ELEMENT_LABEL:
            raise NotSnapshotShapedError(f"array node {array_id} has a non-element edge {rel.label!r}")
        index = rel.properties.get("index")
        if not isinstance(index, int) or isinstance(index, bool) or index < 0:
            raise NotSnapshotShapedError(f"element edge {rel.id} has a bad index")
        if index in elements:
            raise NotSnapshotShapedError(f"array node {array_id} repeats index {index}")
        if target.id not in object_ids:
            raise NotSnapshotShapedError(f"array element points at non-instance node {target.id}")
        elements[index] = object_ids[target.id]
    length = max(elements) + 1 if elements else 0
    return RefArray(tuple(elements.get(i) for i in range(length)))


# --- CSV bundles -----------------------------------------------------------------


@dataclass(frozen=True)
class CsvBundle:
    nodes: bytes
    relationships: bytes


def _props_json(props: dict) -> str:
    return json.dumps(props, sort_keys=True, separators=(",", ":"))


def export_csv(graph: PropertyGraph) -> CsvBundle:
    nodes_buf = io.StringIO()
    writer = csv.writer(nodes_buf, lineterminator="\n")
    writer.writerow(NODES_HEADER)
    for node in graph.nodes():
        writer.writerow([node.id, node.label, _props_json(node.properties)])
    rels_buf = io.StringIO()
    writer = csv.writer(rels_buf, lineterminator="\n")
    writer.writerow(RELS_HEADER)
    for rel in graph.relationships():
        writer.writerow([rel.start, rel.end, rel.label, _props_json(rel.properties)])
    return CsvBundle(nodes_buf.getvalue().encode("utf-8"), rels_buf.getvalue().encode("utf-8"))


def _read_csv(data: bytes, expected_header: list) -> list[list]:
    text = data.decode("utf-8")
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise SnapshotSchemaError("empty CSV file")
    if rows[0] != expected_header:
        raise SnapshotSchemaError(f"unknown CSV header {rows[0]!r}, expected {expected_header!r}")
    return rows[1:]


def _parse_props(text: str, where: str) -> dict:
    try:
        props = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SnapshotSchemaError(f"bad props JSON in {where}: {exc}") from exc
    if not isinstance(props, dict):
        raise SnapshotSchemaError(f"props in {where} must be a JSON object")
    return props


def _csv_int(text: str, where: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise SnapshotSchemaError(f"expected an integer id in {where}, got {text!r}") from None


def import_csv(bundle: CsvBundle) -> PropertyGraph:
    graph = PropertyGraph()
    for row in _read_csv(bundle.nodes, NODES_HEADER):
        if len(row) != 3:
            raise SnapshotSchemaError(f"malformed nodes row {row!r}")
        node_id = _csv_int(row[0], f"nodes row {row!r}")
        graph.add_node(row[1], _parse_props(row[2], f"node {node_id}"), node_id=node_id)
    for row in _read_csv(bundle.relationships, RELS_HEADER):
        if len(row) != 4:
            raise SnapshotSchemaError(f"malformed relationships row {row!r}")
        start = _csv_int(row[0], f"relationships row {row!r}")
        end = _csv_int(row[1], f"relationships row {row!r}")
        graph.add_relationship(row[2], start, end, _parse_props(row[3], f"relationship {row!r}"))
    return graph
