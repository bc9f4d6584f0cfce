"""End-to-end synthesis: per-spec solving with solution reuse, then merging.

Each spec is first checked against every expression already found; a hit
adds the spec to that tuple. Only unexplained specs trigger a fresh search.
The collected tuples then go through the merge search, and the final program
is re-run against every spec as a last gate.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from .core import (
    ClassTable, ConstantPool, DefinitionError, Expr, If, TRUE_COND, TypeExpr,
    expr_size,
)
from .effgen import erase_table
from .interp import Spec
from .merge import MergeSession, MergeTuple, make_merge_tuple, merge_program
from .runtime import World
from .search import SearchConfig, SearchStats, generate


@dataclass(frozen=True)
class Goal:
    name: str
    param_types: tuple[TypeExpr, ...]
    ret: TypeExpr
    constants: ConstantPool
    specs: tuple[Spec, ...]

    @property
    def arity(self) -> int:
        return len(self.param_types)

    def param_names(self) -> tuple[str, ...]:
        return tuple(f"arg{i}" for i in range(self.arity))


@dataclass(frozen=True)
class Program:
    name: str
    params: tuple[str, ...]
    body: Expr


def count_paths(e: Expr) -> int:
    """Paths through a method body: each if doubles along its branches."""
    if isinstance(e, If):
        return count_paths(e.then) + count_paths(e.orelse)
    return 1


@dataclass
class PerSpecReport:
    spec: str
    reused: bool
    candidates_expanded: int
    candidates_evaluated: int
    wall_ms: float


@dataclass
class RunReport:
    goal: str
    mode: str
    precision: str
    success: bool
    candidates_expanded: int
    candidates_evaluated: int
    per_spec: list[PerSpecReport]
    wall_ms: float
    program_size: Optional[int]
    paths: Optional[int]
    tuple_count: int
    merge_orderings_tried: int
    failed_stage: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "goal": self.goal,
            "mode": self.mode,
            "precision": self.precision,
            "success": self.success,
            "candidates_expanded": self.candidates_expanded,
            "candidates_evaluated": self.candidates_evaluated,
            "per_spec": [
                {
                    "spec": p.spec,
                    "reused": p.reused,
                    "candidates_expanded": p.candidates_expanded,
                    "candidates_evaluated": p.candidates_evaluated,
                    "wall_ms": p.wall_ms,
                }
                for p in self.per_spec
            ],
            "wall_ms": self.wall_ms,
            "program_size": self.program_size,
            "paths": self.paths,
            "tuple_count": self.tuple_count,
            "merge_orderings_tried": self.merge_orderings_tried,
        }


def synthesize(goal: Goal, ct: ClassTable, world: World,
               cfg: SearchConfig) -> tuple[Optional[Program], RunReport]:
    if not goal.specs:
        raise DefinitionError(f"goal {goal.name} has no specs")
    t0 = time.monotonic()
    deadline = None if cfg.timeout_s is None else t0 + cfg.timeout_s
    ct = erase_table(ct, cfg.precision)
    session = MergeSession(
        goal_params=goal.param_types, ret_ty=goal.ret, ct=ct,
        sigma=goal.constants, world=world, cfg=cfg, specs=goal.specs,
        deadline=deadline,
    )
    tuples: list[MergeTuple] = []
    per_spec: list[PerSpecReport] = []

    def report(success: bool, program_size=None, paths=None, stage=None) -> RunReport:
        return RunReport(
            goal=goal.name, mode=cfg.mode, precision=cfg.precision,
            success=success,
            candidates_expanded=session.stats.expanded,
            candidates_evaluated=session.stats.evaluated,
            per_spec=per_spec,
            wall_ms=(time.monotonic() - t0) * 1000.0,
            program_size=program_size, paths=paths,
            tuple_count=len(tuples),
            merge_orderings_tried=session.orderings_tried,
            failed_stage=stage,
        )

    for idx, spec in enumerate(goal.specs):
        t_spec = time.monotonic()
        evals_before = session.stats.evaluated
        expanded_before = session.stats.expanded
        reused = False
        for k, t in enumerate(tuples):
            if session.run_body(t.expr, spec).ok:
                tuples[k] = MergeTuple(t.expr, t.cond, t.specs | {idx})
                reused = True
                break
        if not reused:
            stats = SearchStats()
            result = generate(goal.param_types, goal.ret, ct, goal.constants,
                              spec, world, cfg, stats, deadline=deadline)
            session.absorb(stats)
            if not result.found:
                per_spec.append(PerSpecReport(
                    spec.title, False,
                    session.stats.expanded - expanded_before,
                    session.stats.evaluated - evals_before,
                    (time.monotonic() - t_spec) * 1000.0,
                ))
                return None, report(False, stage=f"spec:{spec.title}")
            tuples.append(make_merge_tuple(session, result.expr, TRUE_COND,
                                           frozenset({idx})))
        per_spec.append(PerSpecReport(
            spec.title, reused,
            session.stats.expanded - expanded_before,
            session.stats.evaluated - evals_before,
            (time.monotonic() - t_spec) * 1000.0,
        ))

    body = merge_program(tuples, session)
    if body is None:
        return None, report(False, stage="merge")
    for spec in goal.specs:
        if not session.run_body(body, spec).ok:
            return None, report(False, stage="final-gate")
    program = Program(goal.name, goal.param_names(), body)
    return program, report(True, program_size=expr_size(body),
                           paths=count_paths(body))
