"""Runtime values, the mutable world, and the minidb record-store library.

Schemas generate typed and effect-annotated method signatures: per-column
readers carry a column read region, writers the matching write region, and
the class-side query methods (create / exists? / where / first) carry self
effects that resolve to the receiving class at call sites.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .core import (
    BOOL_T, INT_T, NIL_T, PURE, STR_T, SYM_T,
    ClassOf, ClassT, ClassTable, DefinitionError, Effect, EffectPair,
    MethodSig, Region, SELF_STAR, TypeExpr, record_of, type_key, union_of,
)


class RuntimeError_(Exception):
    """A runtime failure while evaluating an expression."""

    def __init__(self, kind: str, detail: str = "") -> None:
        super().__init__(f"{kind}: {detail}" if detail else kind)
        self.kind = kind
        self.detail = detail


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NilV:
    pass


@dataclass(frozen=True)
class BoolV:
    flag: bool


@dataclass(frozen=True)
class IntV:
    value: int


@dataclass(frozen=True)
class StrV:
    text: str


@dataclass(frozen=True)
class SymV:
    name: str


@dataclass(frozen=True)
class ClassV:
    name: str


@dataclass(frozen=True)
class ObjV:
    cls: str
    obj_id: int


@dataclass(frozen=True)
class RecordV:
    pairs: tuple[tuple[str, "RuntimeValue"], ...]  # key-sorted

    def get(self, key: str):
        for k, v in self.pairs:
            if k == key:
                return v
        return None


RuntimeValue = Union[NilV, BoolV, IntV, StrV, SymV, ClassV, ObjV, RecordV]

NIL_V = NilV()
TRUE_V = BoolV(True)
FALSE_V = BoolV(False)


def record_v(items: dict[str, RuntimeValue]) -> RecordV:
    return RecordV(tuple(sorted(items.items())))


def truthy(v: RuntimeValue) -> bool:
    return not (isinstance(v, NilV) or v == FALSE_V)


def runtime_class_of(v: RuntimeValue) -> str:
    if isinstance(v, BoolV):
        return "Bool"
    if isinstance(v, IntV):
        return "Int"
    if isinstance(v, StrV):
        return "Str"
    if isinstance(v, SymV):
        return "Sym"
    if isinstance(v, ObjV):
        return v.cls
    if isinstance(v, ClassV):
        return v.name
    if isinstance(v, NilV):
        return "Nil"
    raise RuntimeError_("no-class", f"value {v!r} has no runtime class")


def values_equal(a: RuntimeValue, b: RuntimeValue) -> bool:
    """Structural equality for primitives and records, identity for objects."""
    if isinstance(a, ObjV) and isinstance(b, ObjV):
        return a.cls == b.cls and a.obj_id == b.obj_id
    return a == b


# ---------------------------------------------------------------------------
# Schemas and the world
# ---------------------------------------------------------------------------

DB_BASE_CLASS = "DbRecord"

_PRIMITIVE_COLUMNS: dict[str, TypeExpr] = {
    "Str": STR_T, "Int": INT_T, "Bool": BOOL_T, "Sym": SYM_T,
}

_COLUMN_DEFAULTS: dict[str, RuntimeValue] = {
    "Str": StrV(""), "Int": IntV(0), "Bool": FALSE_V, "Sym": SymV(""),
}


@dataclass(frozen=True)
class SchemaDecl:
    cls: str
    columns: tuple[tuple[str, TypeExpr], ...]

    def __post_init__(self) -> None:
        names = [c for c, _ in self.columns]
        if len(set(names)) != len(names):
            raise DefinitionError(f"duplicate column in schema {self.cls}")
        if "id" in names:
            raise DefinitionError("column name 'id' is reserved")
        for c, ty in self.columns:
            if not (isinstance(ty, ClassT) and ty.name in _PRIMITIVE_COLUMNS):
                raise DefinitionError(f"column {self.cls}.{c} must be a primitive class")


def relation_class(cls: str) -> str:
    return f"Relation[{cls}]"


class World:
    """Single-owner mutable state: per-schema row tables plus globals.

    Relation handles get ids from a separate (negative) counter so creating a
    relation never perturbs the row-id sequence.
    """

    def __init__(self, schemas: dict[str, SchemaDecl]) -> None:
        self.schemas = dict(schemas)
        self.tables: dict[str, dict[int, dict[str, RuntimeValue]]] = {}
        self.globals: dict[str, RuntimeValue] = {}
        self.relations: dict[int, tuple[str, tuple[int, ...]]] = {}
        self.next_id = 1
        self._next_rel_id = -1
        self.reset()

    def reset(self) -> None:
        self.tables = {cls: {} for cls in self.schemas}
        self.globals = {}
        self.relations = {}
        self.next_id = 1
        self._next_rel_id = -1

    def fresh_id(self) -> int:
        out = self.next_id
        self.next_id += 1
        return out

    def fresh_relation_id(self) -> int:
        out = self._next_rel_id
        self._next_rel_id -= 1
        return out

    def row_count(self, cls: str) -> int:
        return len(self.tables.get(cls, {}))

    def snapshot(self) -> dict[str, dict[int, dict[str, RuntimeValue]]]:
        return {cls: {i: dict(row) for i, row in tbl.items()} for cls, tbl in self.tables.items()}


def reset(world: World) -> World:
    world.reset()
    return world


# ---------------------------------------------------------------------------
# Schema-driven signatures
# ---------------------------------------------------------------------------

def generate_schema_methods(schema: SchemaDecl) -> list[MethodSig]:
    """Signatures a schema contributes: column readers/writers, the id reader,
    and class-side create / exists? / where plus the relation's first."""
    cls = schema.cls
    rel = relation_class(cls)
    all_opt = record_of((c, True, ty) for c, ty in schema.columns)
    sigs: list[MethodSig] = []
    for col, ty in schema.columns:
        sigs.append(MethodSig(
            ClassT(cls), col, (), ty,
            EffectPair(read=Effect((Region(cls, col),))),
            native=f"minidb.get:{col}",
        ))
        sigs.append(MethodSig(
            ClassT(cls), f"{col}=", (ty,), ty,
            EffectPair(write=Effect((Region(cls, col),))),
            native=f"minidb.set:{col}",
        ))
    sigs.append(MethodSig(
        ClassT(cls), "id", (), INT_T,
        EffectPair(read=Effect((Region(cls, "id"),))),
        native="minidb.get:id",
    ))
    self_read = EffectPair(read=Effect((SELF_STAR,)))
    self_write = EffectPair(write=Effect((SELF_STAR,)))
    sigs.append(MethodSig(ClassOf(cls), "create", (all_opt,), ClassT(cls),
                          self_write, native="minidb.create"))
    sigs.append(MethodSig(ClassOf(cls), "exists?", (all_opt,), BOOL_T,
                          self_read, native="minidb.exists"))
    sigs.append(MethodSig(ClassOf(cls), "where", (all_opt,), ClassT(rel),
                          self_read, native="minidb.where"))
    sigs.append(MethodSig(ClassT(rel), "first", (), union_of(ClassT(cls), NIL_T),
                          self_read, native="minidb.first"))
    return sigs


def install_core_methods(ct: ClassTable) -> None:
    """Equality on every class and boolean negation, both pure."""
    ct.add_method(MethodSig(ClassT("Obj"), "==", (ClassT("Obj"),), BOOL_T,
                            native="core.eq"))
    ct.add_method(MethodSig(BOOL_T, "!", (), BOOL_T, native="core.not"))


def install_schema(ct: ClassTable, schema: SchemaDecl) -> None:
    if not ct.has_class(DB_BASE_CLASS):
        ct.add_class(DB_BASE_CLASS)
    ct.add_class(schema.cls, DB_BASE_CLASS)
    ct.add_class(relation_class(schema.cls))
    for sig in generate_schema_methods(schema):
        ct.add_method(sig)


# ---------------------------------------------------------------------------
# Native bindings
# ---------------------------------------------------------------------------

def _require_row(world: World, recv: RuntimeValue) -> tuple[str, dict[str, RuntimeValue]]:
    if not isinstance(recv, ObjV) or recv.cls not in world.tables:
        raise RuntimeError_("bad-receiver", f"not a stored record: {recv!r}")
    row = world.tables[recv.cls].get(recv.obj_id)
    if row is None:
        raise RuntimeError_("missing-row", f"{recv.cls} id {recv.obj_id}")
    return recv.cls, row


def _record_arg(args: tuple[RuntimeValue, ...]) -> RecordV:
    if len(args) != 1 or not isinstance(args[0], RecordV):
        raise RuntimeError_("arity", "expected a single record argument")
    return args[0]


def _schema_for(world: World, recv: RuntimeValue) -> SchemaDecl:
    if not isinstance(recv, ClassV) or recv.name not in world.schemas:
        raise RuntimeError_("bad-receiver", f"not a schema class: {recv!r}")
    return world.schemas[recv.name]


def _matches(row: dict[str, RuntimeValue], rec: RecordV) -> bool:
    return all(k in row and values_equal(row[k], v) for k, v in rec.pairs)


def _native_create(world, sig, recv, args):
    schema = _schema_for(world, recv)
    rec = _record_arg(args)
    row: dict[str, RuntimeValue] = {}
    for col, ty in schema.columns:
        given = rec.get(col)
        row[col] = given if given is not None else _COLUMN_DEFAULTS[ty.name]
    oid = world.fresh_id()
    world.tables[schema.cls][oid] = row
    return ObjV(schema.cls, oid)


def _native_exists(world, sig, recv, args):
    schema = _schema_for(world, recv)
    rec = _record_arg(args)
    return BoolV(any(_matches(row, rec) for row in world.tables[schema.cls].values()))


def _native_where(world, sig, recv, args):
    schema = _schema_for(world, recv)
    rec = _record_arg(args)
    ids = tuple(sorted(
        oid for oid, row in world.tables[schema.cls].items() if _matches(row, rec)
    ))
    rid = world.fresh_relation_id()
    world.relations[rid] = (schema.cls, ids)
    return ObjV(relation_class(schema.cls), rid)


def _native_first(world, sig, recv, args):
    if not isinstance(recv, ObjV) or recv.obj_id not in world.relations:
        raise RuntimeError_("bad-receiver", f"not a relation: {recv!r}")
    cls, ids = world.relations[recv.obj_id]
    if not ids:
        return NIL_V
    return ObjV(cls, ids[0])


def _native_eq(world, sig, recv, args):
    if len(args) != 1:
        raise RuntimeError_("arity", "== takes one argument")
    return BoolV(values_equal(recv, args[0]))


def _native_not(world, sig, recv, args):
    return BoolV(not truthy(recv))


_NATIVES = {
    "minidb.create": _native_create,
    "minidb.exists": _native_exists,
    "minidb.where": _native_where,
    "minidb.first": _native_first,
    "core.eq": _native_eq,
    "core.not": _native_not,
}


def invoke_native(world: World, sig: MethodSig, recv: RuntimeValue,
                  args: tuple[RuntimeValue, ...]) -> RuntimeValue:
    if sig.native is None:
        raise DefinitionError(f"method {sig.owner_class()}#{sig.name} has no native binding")
    if sig.native.startswith("minidb.get:"):
        col = sig.native.split(":", 1)[1]
        cls, row = _require_row(world, recv)
        if col == "id":
            return IntV(recv.obj_id)
        if col not in row:
            raise RuntimeError_("missing-column", f"{cls}.{col}")
        return row[col]
    if sig.native.startswith("minidb.set:"):
        col = sig.native.split(":", 1)[1]
        cls, row = _require_row(world, recv)
        if len(args) != 1:
            raise RuntimeError_("arity", f"{col}= takes one argument")
        if col not in row:
            raise RuntimeError_("missing-column", f"{cls}.{col}")
        row[col] = args[0]
        return args[0]
    fn = _NATIVES.get(sig.native)
    if fn is None:
        raise DefinitionError(f"unbound native {sig.native}")
    return fn(world, sig, recv, args)
