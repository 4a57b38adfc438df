"""Disjunctive domains and Q/R gap constraints via Sequence propagation."""

import random

from lotsizing import (
    DisjunctiveSpec,
    DomainStore,
    QRSpec,
    SideSpecs,
    Status,
    apply_disjunctions,
    make_instance,
    post_qr,
    qr_satisfied,
    sequence_propagate,
)
from lotsizing.domains import iv_values
from lotsizing.side_constraints import read_side_specs, write_side_specs


def wide_store(T=5, cap=300):
    inst = make_instance(d=[1] * T, p=[1] * T, h=[1] * T, s=[1] * T,
                         alpha_hi=[cap] * T, beta_hi=[cap] * T)
    return DomainStore.for_instance(inst)


class TestDisjunctions:
    def test_leveled_production_domains(self):
        store = wide_store(T=1, cap=240)
        spec = DisjunctiveSpec.uniform(1, ((100, 150), (200, 240), (0, 30)))
        assert apply_disjunctions(store, spec) is Status.CHANGED
        assert store.intervals(("X", 0)) == ((0, 30), (100, 150), (200, 240))

    def test_covering_interval_unchanged(self):
        store = wide_store(T=1, cap=240)
        spec = DisjunctiveSpec.uniform(1, ((0, 300),))
        assert apply_disjunctions(store, spec) is Status.UNCHANGED

    def test_empty_intersection_fails(self):
        store = wide_store(T=1, cap=240)
        store.set_min(("X", 0), 40)
        store.set_max(("X", 0), 90)
        spec = DisjunctiveSpec.uniform(1, ((100, 150), (200, 240), (0, 30)))
        assert apply_disjunctions(store, spec) is Status.FAILED


class TestSequence:
    def test_min_gap_blocks_in_between(self):
        store = wide_store(T=5)
        store.assign(("Y", 0), 1)
        store.assign(("Y", 3), 1)
        assert sequence_propagate(store, 5, 0, 1, 3) is Status.CHANGED
        assert store.value(("Y", 1)) == 0
        assert store.value(("Y", 2)) == 0

    def test_empty_window_fails(self):
        store = wide_store(T=7)
        for t in range(7):
            store.assign(("Y", t), 0)
        assert sequence_propagate(store, 7, 1, 7, 7) is Status.FAILED

    def test_horizon_shorter_than_window_unconstrained(self):
        store = wide_store(T=4)
        assert sequence_propagate(store, 4, 1, 7, 7) is Status.UNCHANGED

    def test_fixed_vectors_match_direct_check(self):
        T, Q, R = 7, 2, 3
        for bits in range(1 << T):
            y = [(bits >> t) & 1 for t in range(T)]
            store = wide_store(T=T)
            system = post_qr(T, Q, R)
            system.install(store)
            for t in range(T):
                store.assign(("Y", t), y[t])
            got = system.propagate(store)
            assert (got is not Status.FAILED) == qr_satisfied(y, Q, R)

    def test_gap_semantics(self):
        T, Q, R = 9, 2, 4
        for bits in range(1 << T):
            y = [(bits >> t) & 1 for t in range(T)]
            prod = [t for t in range(T) if y[t]]
            gaps_ok = all(Q + 1 <= b - a <= R + 1 for a, b in zip(prod, prod[1:]))
            edges_ok = bool(prod) and prod[0] <= R and prod[-1] >= T - 1 - R
            if not prod:
                edges_ok = T <= R
            assert qr_satisfied(y, Q, R) == (gaps_ok and edges_ok)

    def test_propagation_sound_on_partial_assignments(self):
        rng = random.Random(7)
        T, trials = 8, 200
        for _ in range(trials):
            Q = rng.randint(1, 3)
            R = rng.randint(Q, 5)
            store = wide_store(T=T)
            system = post_qr(T, Q, R)
            system.install(store)
            fixed = {}
            for t in range(T):
                if rng.random() < 0.4:
                    fixed[t] = rng.randint(0, 1)
                    store.assign(("Y", t), fixed[t])
            st = system.propagate(store)
            completions = []
            free = [t for t in range(T) if t not in fixed]
            for bits in range(1 << len(free)):
                y = [0] * T
                for t, v in fixed.items():
                    y[t] = v
                for k, t in enumerate(free):
                    y[t] = (bits >> k) & 1
                if qr_satisfied(y, Q, R):
                    completions.append(y)
            if st is Status.FAILED:
                assert not completions
                continue
            for t in range(T):
                dom = set(iv_values(store.intervals(("Y", t))))
                used = {y[t] for y in completions}
                assert used <= dom

    def test_qr_validation(self):
        try:
            QRSpec(3, 2).validate()
            raise AssertionError("expected rejection")
        except ValueError:
            pass


class TestAlternation:
    def test_q1_r1_forces_alternating(self):
        T = 6
        store = wide_store(T=T)
        system = post_qr(T, 1, 1)
        system.install(store)
        store.assign(("Y", 0), 1)
        st = system.propagate(store)
        assert st is not Status.FAILED
        assert [store.value(("Y", t)) for t in range(T)] == [1, 0, 1, 0, 1, 0]


class TestSideSpecFiles:
    def test_round_trip(self, tmp_path):
        spec = SideSpecs(
            disjunction=DisjunctiveSpec.uniform(3, ((0, 30), (100, 150))),
            qr=QRSpec(2, 6),
        )
        path = tmp_path / "x.side"
        write_side_specs(spec, path)
        back = read_side_specs(path)
        assert back.qr == spec.qr
        assert back.disjunction.intervals == spec.disjunction.intervals

    def test_bad_line_reports_position(self, tmp_path):
        path = tmp_path / "bad.side"
        path.write_text("disj 1 nope 5\n")
        try:
            read_side_specs(path)
            raise AssertionError("expected parse error")
        except ValueError as exc:
            assert "bad.side:1" in str(exc)
