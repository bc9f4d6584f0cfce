"""Operational semantics: call-by-value evaluation and spec execution.

Spec execution counts passed assertions and, on an assertion failure, reports
the read/write effect pair accumulated from method calls made while
evaluating that assertion. The accumulator resets after every passed
assertion; effects of setup and candidate-body evaluation are never
observable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .core import (
    Atom, Call, ClassLit, ClassOf, ClassT, ClassTable, Cond, DefinitionError,
    EffectPair, Expr, FalseLit, If, IntLit, Let, NilLit, Not, Or, PURE_PAIR,
    RecordLit, Seq, StrLit, SymLit, TrueLit, Var, is_complete, pair_union,
    resolve_self_pair,
)
from .runtime import (
    ClassV, FALSE_V, NIL_V, NilV, IntV, ObjV, RecordV, RuntimeError_,
    RuntimeValue, StrV, SymV, TRUE_V, World, invoke_native, runtime_class_of,
    truthy,
)


# ---------------------------------------------------------------------------
# Specs and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SetupStmt:
    """One setup statement, optionally binding its value for later use."""

    expr: Expr
    var: Optional[str] = None


@dataclass(frozen=True)
class Spec:
    """A test: setup statements, the goal-call arguments, and assertions."""

    title: str
    setup: tuple[SetupStmt, ...]
    call_args: tuple[Expr, ...]
    post: tuple[Expr, ...]

    def __post_init__(self) -> None:
        if not self.post:
            raise DefinitionError(f"spec {self.title!r} has no assertions")


@dataclass(frozen=True)
class Ok:
    value: RuntimeValue


@dataclass(frozen=True)
class AssertErr:
    eff: EffectPair


@dataclass(frozen=True)
class RuntimeErr:
    kind: str
    detail: str = ""


Outcome = Union[Ok, AssertErr, RuntimeErr]


@dataclass(frozen=True)
class SpecResult:
    passed_count: int
    outcome: Outcome

    @property
    def ok(self) -> bool:
        return isinstance(self.outcome, Ok)


RESULT_VAR = "x_r"


# ---------------------------------------------------------------------------
# Evaluator
# ---------------------------------------------------------------------------

class Evaluator:
    """Evaluates expressions against a world; charges declared method effects
    (self-resolved at the call site) into an accumulator when one is active."""

    def __init__(self, world: World, ct: ClassTable) -> None:
        self.world = world
        self.ct = ct
        self.acc: Optional[EffectPair] = None

    def eval(self, env: dict[str, RuntimeValue], e: Expr) -> RuntimeValue:
        if isinstance(e, NilLit):
            return NIL_V
        if isinstance(e, TrueLit):
            return TRUE_V
        if isinstance(e, FalseLit):
            return FALSE_V
        if isinstance(e, IntLit):
            return IntV(e.value)
        if isinstance(e, StrLit):
            return StrV(e.value)
        if isinstance(e, SymLit):
            return SymV(e.name)
        if isinstance(e, ClassLit):
            return ClassV(e.name)
        if isinstance(e, Var):
            if e.name not in env:
                raise RuntimeError_("unbound-var", e.name)
            return env[e.name]
        if isinstance(e, Seq):
            self.eval(env, e.first)
            return self.eval(env, e.second)
        if isinstance(e, Let):
            bound = self.eval(env, e.bound)
            inner = dict(env)
            inner[e.var] = bound
            return self.eval(inner, e.body)
        if isinstance(e, If):
            if self.eval_cond(env, e.cond):
                return self.eval(env, e.then)
            return self.eval(env, e.orelse)
        if isinstance(e, RecordLit):
            items = {}
            for k, v in e.pairs:
                items[k] = self.eval(env, v)
            return RecordV(tuple(sorted(items.items())))
        if isinstance(e, Call):
            recv = self.eval(env, e.recv)
            args = tuple(self.eval(env, a) for a in e.args)
            return self.call(recv, e.method, args)
        raise RuntimeError_("not-evaluable", f"cannot evaluate {type(e).__name__}")

    def eval_cond(self, env: dict[str, RuntimeValue], c: Cond) -> bool:
        if isinstance(c, Atom):
            return truthy(self.eval(env, c.expr))
        if isinstance(c, Not):
            return not self.eval_cond(env, c.inner)
        if isinstance(c, Or):
            return self.eval_cond(env, c.left) or self.eval_cond(env, c.right)
        raise RuntimeError_("not-evaluable", f"bad condition {c!r}")

    def call(self, recv: RuntimeValue, method: str,
             args: tuple[RuntimeValue, ...]) -> RuntimeValue:
        if isinstance(recv, NilV):
            raise RuntimeError_("nil-method-missing", method)
        if isinstance(recv, RecordV):
            if args:
                raise RuntimeError_("arity", f"record field {method} takes no arguments")
            for k, v in recv.pairs:
                if k == method:
                    return v
            return NIL_V  # absent optional field
        cls = runtime_class_of(recv)
        owner = ClassOf(cls) if isinstance(recv, ClassV) else ClassT(cls)
        try:
            sig = self.ct.lookup_method(owner, method)
        except DefinitionError as exc:
            raise RuntimeError_("method-missing", str(exc)) from None
        if len(args) != len(sig.params):
            raise RuntimeError_("arity", f"{method} expects {len(sig.params)} args")
        if self.acc is not None:
            resolved = resolve_self_pair(sig.eff, cls, self.ct)
            self.acc = pair_union(self.acc, resolved, self.ct)
        return invoke_native(self.world, sig, recv, args)


def eval_expr(env: dict[str, RuntimeValue], world: World, ct: ClassTable,
              e: Expr) -> RuntimeValue:
    """Evaluate a complete expression; raises RuntimeError_ on failure."""
    assert is_complete(e), "cannot evaluate a candidate with holes"
    return Evaluator(world, ct).eval(env, e)


# ---------------------------------------------------------------------------
# Spec execution
# ---------------------------------------------------------------------------

def run_spec(body: Expr, goal_arity: int, spec: Spec, world: World,
             ct: ClassTable) -> SpecResult:
    """Reset the world, run setup, call the candidate, then check assertions.

    Per assertion: method calls made while it evaluates accumulate their
    resolved effect pairs; a truthy value bumps the pass counter and clears
    the accumulator, a falsy value stops with the accumulated pair.
    """
    assert is_complete(body)
    world.reset()
    ev = Evaluator(world, ct)
    env: dict[str, RuntimeValue] = {}
    try:
        for stmt in spec.setup:
            v = ev.eval(env, stmt.expr)
            if stmt.var is not None:
                env[stmt.var] = v
        if len(spec.call_args) != goal_arity:
            raise RuntimeError_("arity", f"goal expects {goal_arity} arguments")
        arg_vals = tuple(ev.eval(env, a) for a in spec.call_args)
        body_env = {f"arg{i}": v for i, v in enumerate(arg_vals)}
        result = ev.eval(body_env, body)
        env[RESULT_VAR] = result
    except RuntimeError_ as exc:
        return SpecResult(0, RuntimeErr(exc.kind, exc.detail))

    passed = 0
    for a in spec.post:
        ev.acc = PURE_PAIR
        try:
            v = ev.eval(env, a)
        except RuntimeError_ as exc:
            return SpecResult(passed, RuntimeErr(exc.kind, exc.detail))
        if truthy(v):
            passed += 1
        else:
            return SpecResult(passed, AssertErr(ev.acc))
    return SpecResult(passed, Ok(result))
