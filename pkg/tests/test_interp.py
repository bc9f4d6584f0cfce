import pytest

from effsynth.core import (
    Atom, Call, ClassLit, ClassStar, Effect, EffectPair, FalseLit, If,
    IntLit, Let, NilLit, PURE_PAIR, RecordLit, Region, Seq, StrLit, TrueLit,
    Var,
)
from effsynth.interp import (
    AssertErr, Ok, RuntimeErr, Spec, SetupStmt, SpecResult, eval_expr,
    run_spec,
)
from effsynth.runtime import IntV, RuntimeError_, StrV


def call(recv, m, *args):
    return Call(recv, m, tuple(args))


def eq(a, b):
    return call(a, "==", b)


def mkspec(setup, args, post, title="t"):
    return Spec(title, tuple(setup), tuple(args), tuple(post))


class TestEvalExpr:
    def test_if_false_branch(self, blog):
        ct, world = blog
        e = If(Atom(FalseLit()), IntLit(1), IntLit(2))
        assert eval_expr({}, world, ct, e) == IntV(2)

    def test_call_on_nil_is_runtime_error(self, blog):
        ct, world = blog
        with pytest.raises(RuntimeError_) as exc:
            eval_expr({}, world, ct, call(NilLit(), "m"))
        assert exc.value.kind == "nil-method-missing"

    def test_let_and_seq(self, blog):
        ct, world = blog
        e = Let("t", IntLit(1), Seq(Var("t"), Var("t")))
        assert eval_expr({}, world, ct, e) == IntV(1)

    def test_unbound_var(self, blog):
        ct, world = blog
        with pytest.raises(RuntimeError_):
            eval_expr({}, world, ct, Var("ghost"))

    def test_create_and_read(self, blog):
        ct, world = blog
        e = Let("p", call(ClassLit("Post"), "create",
                          RecordLit((("title", StrLit("hi")),))),
                call(Var("p"), "title"))
        assert eval_expr({}, world, ct, e) == StrV("hi")

    def test_truthiness_partition(self, blog):
        ct, world = blog
        for lit, expect in [(IntLit(0), IntV(1)), (StrLit(""), IntV(1)),
                            (TrueLit(), IntV(1)), (FalseLit(), IntV(2)),
                            (NilLit(), IntV(2))]:
            e = If(Atom(lit), IntLit(1), IntLit(2))
            assert eval_expr({}, world, ct, e) == expect, lit


class TestRunSpec:
    def test_identity_goal(self, blog):
        ct, world = blog
        spec = mkspec([], [StrLit("v")], [eq(Var("x_r"), StrLit("v"))])
        res = run_spec(Var("arg0"), 1, spec, world, ct)
        assert res == SpecResult(1, Ok(StrV("v")))

    def test_counting_stops_at_first_failure(self, blog):
        ct, world = blog
        spec = mkspec([], [], [TrueLit(), FalseLit(), TrueLit()])
        res = run_spec(NilLit(), 0, spec, world, ct)
        assert res.passed_count == 1
        assert isinstance(res.outcome, AssertErr)

    def test_failing_read_is_reported(self, blog):
        ct, world = blog
        setup = [SetupStmt(call(ClassLit("Post"), "create",
                                RecordLit((("title", StrLit("old")),))), "p")]
        spec = mkspec(setup, [], [eq(call(Var("p"), "title"), StrLit("new"))])
        res = run_spec(NilLit(), 0, spec, world, ct)
        assert res.passed_count == 0
        assert res.outcome.eff.read == Effect((Region("Post", "title"),))
        assert res.outcome.eff.write.is_pure()

    def test_error_excludes_effects_of_passed_asserts(self, blog):
        # hand-evaluated oracle: assert 1 reads Post.title and passes, the
        # accumulator resets, assert 2 reads Post.slug and fails; the error
        # pair must be exactly the second assert's reads
        ct, world = blog
        setup = [SetupStmt(call(ClassLit("Post"), "create",
                                RecordLit((("title", StrLit("a")),
                                           ("slug", StrLit("b"))))), "p")]
        post = [eq(call(Var("p"), "title"), StrLit("a")),
                eq(call(Var("p"), "slug"), StrLit("wrong"))]
        res = run_spec(NilLit(), 0, mkspec(setup, [], post), world, ct)
        assert res.passed_count == 1
        assert res.outcome.eff.read == Effect((Region("Post", "slug"),))

    def test_setup_and_body_effects_invisible(self, blog):
        ct, world = blog
        body = call(ClassLit("Post"), "create", RecordLit(()))
        spec = mkspec([], [], [FalseLit()])
        res = run_spec(body, 0, spec, world, ct)
        assert res.outcome == AssertErr(PURE_PAIR)

    def test_runtime_error_in_setup(self, blog):
        ct, world = blog
        spec = mkspec([SetupStmt(call(NilLit(), "boom"))], [], [TrueLit()])
        res = run_spec(NilLit(), 0, spec, world, ct)
        assert res == SpecResult(0, RuntimeErr("nil-method-missing", "boom"))

    def test_runtime_error_mid_post_keeps_count(self, blog):
        ct, world = blog
        spec = mkspec([], [], [TrueLit(), call(NilLit(), "boom")])
        res = run_spec(NilLit(), 0, spec, world, ct)
        assert res.passed_count == 1
        assert isinstance(res.outcome, RuntimeErr)

    def test_world_reset_between_runs(self, blog):
        ct, world = blog
        body = call(ClassLit("Post"), "create", RecordLit(()))
        spec = mkspec([], [], [eq(call(Var("x_r"), "id"), IntLit(1))])
        assert run_spec(body, 0, spec, world, ct).ok
        assert run_spec(body, 0, spec, world, ct).ok  # ids restart at 1

    def test_prefix_property(self, blog):
        # if a body passes asserts 1..k, any prefix of the post passes whole
        ct, world = blog
        setup = [SetupStmt(call(ClassLit("Post"), "create",
                                RecordLit((("title", StrLit("t")),))), "p")]
        post = [TrueLit(),
                eq(call(Var("p"), "title"), StrLit("t")),
                IntLit(0),
                eq(Var("x_r"), StrLit("out"))]
        full = run_spec(StrLit("out"), 0, mkspec(setup, [], post), world, ct)
        assert full.ok and full.passed_count == 4
        for j in range(1, 5):
            res = run_spec(StrLit("out"), 0, mkspec(setup, [], post[:j]), world, ct)
            assert res.ok and res.passed_count == j

    def test_arity_mismatch(self, blog):
        ct, world = blog
        spec = mkspec([], [StrLit("a")], [TrueLit()])
        res = run_spec(NilLit(), 2, spec, world, ct)
        assert isinstance(res.outcome, RuntimeErr)

    def test_spec_requires_asserts(self):
        with pytest.raises(Exception):
            Spec("t", (), (), ())

    def test_ok_carries_result_value(self, blog):
        ct, world = blog
        spec = mkspec([], [], [TrueLit()])
        res = run_spec(IntLit(7), 0, spec, world, ct)
        assert res.outcome == Ok(IntV(7))


class TestOverviewAnalogue:
    def test_query_chain_fails_third_assert_with_title_read(self):
        # the where/first candidate passes the id and author asserts of the
        # retitle spec, then fails on the unchanged title; the error carries
        # the title read that later guides the effect-hole insertion
        from effsynth.core import ClassLit, RecordLit, Region, Effect
        from effsynth.goalfile import load_goal_file

        gf, ct, world = load_goal_file("goals/update_post.goal")
        spec = gf.goal.specs[0]
        c9 = call(call(ClassLit("Post"), "where",
                       RecordLit((("slug", Var("arg1")),))), "first")
        res = run_spec(c9, gf.goal.arity, spec, world, ct)
        assert res.passed_count == 2
        assert isinstance(res.outcome, AssertErr)
        assert Region("Post", "title") in res.outcome.eff.read.atoms

    def test_same_candidate_satisfies_the_second_spec(self):
        from effsynth.core import ClassLit, RecordLit
        from effsynth.goalfile import load_goal_file

        gf, ct, world = load_goal_file("goals/update_post.goal")
        c9 = call(call(ClassLit("Post"), "where",
                       RecordLit((("slug", Var("arg1")),))), "first")
        res = run_spec(c9, gf.goal.arity, gf.goal.specs[1], world, ct)
        assert res.ok and res.passed_count == 4


class TestReportedEffectsAreSelfFree:
    def test_assert_err_pair_is_resolved(self, blog):
        # signatures carry self atoms; the reported pair must not
        ct, world = blog
        spec = mkspec([], [], [call(ClassLit("Post"), "exists?",
                                    RecordLit((("slug", StrLit("zz")),)))])
        res = run_spec(NilLit(), 0, spec, world, ct)
        assert isinstance(res.outcome, AssertErr)
        assert not res.outcome.eff.read.has_self()
        assert not res.outcome.eff.write.has_self()
