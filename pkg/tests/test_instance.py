"""Instance model: validation, normalization, stripping, generation, file I/O."""

import random

import pytest

from lotsizing import (
    INSTANCE_CLASSES,
    GeneratorParams,
    Instance,
    brute_force_oracle,
    generate,
    make_instance,
    read_instance,
    strip_lower_bounds,
    validate_and_normalize,
    write_instance,
)
from conftest import rand_instance


def stripped_as_instance(stripped) -> Instance:
    """View the stripped problem as a plain instance (all lower bounds 0)."""
    return Instance(
        T=stripped.T,
        d=stripped.d,
        p=stripped.p,
        h=stripped.h,
        s=stripped.s,
        alpha_lo=(0,) * stripped.T,
        alpha_hi=stripped.x_cap,
        beta_lo=(0,) * stripped.T,
        beta_hi=stripped.i_cap,
    )


class TestNormalize:
    def test_no_forced_final_stock_unchanged(self):
        inst = make_instance(d=[2, 3], p=[1, 2], h=[1, 1], s=[5, 4], alpha_hi=[5, 5], beta_hi=[10, 10])
        assert validate_and_normalize(inst) == inst

    def test_forced_final_stock_appends_dummy_period(self):
        inst = make_instance(d=[2], p=[3], h=[2], s=[7], alpha_hi=[5], beta_lo=[1], beta_hi=[4])
        norm = validate_and_normalize(inst)
        assert norm.T == 2
        assert norm.d == (2, 1)
        assert norm.alpha_hi[1] == 0 and norm.beta_hi[1] == 0
        assert norm.p[1] == 0 and norm.h[1] == 0 and norm.s[1] == 0
        # q = 1 confirmed by feasibility enumeration on the original instance:
        # every feasible plan ends with I_1 >= 1, and I_1 = 1 is reachable.
        finals = set()
        for x in range(0, 6):
            i1 = x - 2
            if 1 <= i1 <= 4:
                finals.add(i1)
        assert min(finals) == 1

    def test_invalid_fields_rejected(self):
        with pytest.raises(ValueError, match=r"d\[0\]"):
            validate_and_normalize(
                Instance(1, (-1,), (0,), (0,), (0,), (0,), (5,), (0,), (5,))
            )
        with pytest.raises(ValueError, match="alpha_lo"):
            make_instance([1], [0], [0], [0], alpha_lo=[3], alpha_hi=[2])

    def test_idempotent(self):
        rng = random.Random(7)
        for _ in range(50):
            inst = rand_instance(rng)
            once = validate_and_normalize(inst)
            assert validate_and_normalize(once) == once

    def test_preserves_optimum_and_feasibility(self):
        rng = random.Random(11)
        checked = 0
        for _ in range(120):
            inst = rand_instance(rng, max_T=4, max_d=4, max_cap=6)
            norm = validate_and_normalize(inst)
            if norm == inst:
                continue
            best_norm = brute_force_oracle(norm)
            # Original optimum, allowing any feasible final inventory.
            best_orig = None
            T = inst.T
            for xs in _all_plans(inst):
                c = _cost(inst, xs)
                if best_orig is None or c < best_orig:
                    best_orig = c
            assert (best_norm is None) == (best_orig is None)
            if best_norm is not None:
                assert best_norm.c == best_orig
                checked += 1
        assert checked >= 3


def _all_plans(inst):
    """Plans of the raw instance with free final inventory (test-local)."""
    T = inst.T

    def rec(t, inv, xs):
        if t == T:
            yield list(xs)
            return
        for x in range(inst.alpha_lo[t], inst.alpha_hi[t] + 1):
            nxt = inv + x - inst.d[t]
            if inst.beta_lo[t] <= nxt <= inst.beta_hi[t]:
                xs.append(x)
                yield from rec(t + 1, nxt, xs)
                xs.pop()

    yield from rec(0, 0, [])


def _cost(inst, xs):
    inv, total = 0, 0
    for t in range(inst.T):
        inv += xs[t] - inst.d[t]
        total += inst.p[t] * xs[t] + inst.h[t] * inv + (inst.s[t] if xs[t] > 0 else 0)
    return total


class TestStrip:
    def test_formula_single_period(self):
        inst = make_instance(
            d=[1, 5], p=[1, 1], h=[1, 1], s=[2, 2],
            alpha_lo=[0, 2], alpha_hi=[8, 8], beta_lo=[0, 1], beta_hi=[8, 8],
        )
        stripped = strip_lower_bounds(inst)
        assert stripped.d[1] == 5 + 1 - 2 - 0
        assert stripped.s[1] == 0

    def test_identity_when_no_lower_bounds(self):
        inst = make_instance(d=[2, 3], p=[1, 2], h=[1, 1], s=[5, 4], alpha_hi=[5, 5], beta_hi=[9, 9])
        stripped = strip_lower_bounds(inst)
        assert stripped.d == inst.d and stripped.s == inst.s
        assert (stripped.cp_min, stripped.ch_min, stripped.cs_min, stripped.c_min) == (0, 0, 0, 0)

    def test_baseline_and_optimum_shift(self):
        inst = make_instance(
            d=[2, 3], p=[1, 2], h=[1, 1], s=[5, 4],
            alpha_lo=[2, 0], alpha_hi=[5, 5], beta_hi=[10, 10],
        )
        stripped = strip_lower_bounds(inst)
        assert stripped.s == (0, 4)
        assert stripped.cp_min == 2 and stripped.cs_min == 5
        assert stripped.d == (0, 3)
        opt = brute_force_oracle(validate_and_normalize(inst))
        opt_stripped = brute_force_oracle(validate_and_normalize(stripped_as_instance(stripped)))
        assert opt.c == opt_stripped.c + stripped.c_min

    def test_negative_adjusted_demand_is_callers_bug(self):
        inst = make_instance(
            d=[0, 0], p=[1, 1], h=[1, 1], s=[1, 1],
            alpha_lo=[0, 3], alpha_hi=[5, 5], beta_hi=[9, 9],
        )
        with pytest.raises(ValueError, match="bound consistency"):
            strip_lower_bounds(inst)

    def test_componentwise_cost_map(self):
        rng = random.Random(3)
        checked = 0
        for _ in range(120):
            inst = rand_instance(rng, max_T=4, max_d=4, max_cap=6)
            try:
                stripped = strip_lower_bounds(inst)
            except ValueError:
                continue
            for xs in _all_plans(inst):
                invs, inv = [], 0
                for t in range(inst.T):
                    inv += xs[t] - inst.d[t]
                    invs.append(inv)
                cp = sum(inst.p[t] * xs[t] for t in range(inst.T))
                ch = sum(inst.h[t] * invs[t] for t in range(inst.T))
                cs = sum(inst.s[t] for t in range(inst.T) if xs[t] > 0)
                xs2 = [xs[t] - stripped.x_off[t] for t in range(inst.T)]
                invs2, inv2 = [], 0
                for t in range(inst.T):
                    inv2 += xs2[t] - stripped.d[t]
                    invs2.append(inv2)
                    assert 0 <= inv2 <= stripped.i_cap[t]
                    assert 0 <= xs2[t] <= stripped.x_cap[t]
                    assert invs2[t] == invs[t] - stripped.i_off[t]
                cp2 = sum(stripped.p[t] * xs2[t] for t in range(inst.T))
                ch2 = sum(stripped.h[t] * invs2[t] for t in range(inst.T))
                cs2 = sum(stripped.s[t] for t in range(inst.T) if xs2[t] > 0)
                assert cp == cp2 + stripped.cp_min
                assert ch == ch2 + stripped.ch_min
                assert cs == cs2 + stripped.cs_min
                checked += 1
        assert checked >= 100


class TestGenerate:
    def test_class_c1ls_shape(self):
        params = INSTANCE_CLASSES["C1LS"].params
        inst = generate(GeneratorParams(**{**params.__dict__, "seed": 42}))
        assert inst.T == 40
        assert all(h == 1 for h in inst.h)
        assert all(a == 3000 for a in inst.alpha_hi)
        assert all(b == 3000 for b in inst.beta_hi)
        assert all(900 <= d <= 1100 for d in inst.d)
        assert all(lo == 0 for lo in inst.alpha_lo + inst.beta_lo)

    def test_theta_one_boundary(self):
        inst = generate(GeneratorParams(d_avg=100, delta=0, theta_lo=1.0, theta_hi=1.0, T=5, seed=1))
        cap = inst.alpha_hi[0]
        assert all(p == 0 for p in inst.p)
        assert all(s == 10 * cap for s in inst.s)

    def test_deterministic(self):
        params = GeneratorParams(d_avg=50, delta=20, theta_lo=0.4, theta_hi=0.6, T=12, seed=99)
        assert generate(params) == generate(params)

    def test_peaks_raise_capacity_to_keep_feasible(self):
        params = GeneratorParams(
            d_avg=100, delta=50, theta_lo=0.8, theta_hi=1.0, lam=4, T=40,
            seed=5, peak_value=5000, peak_periods=tuple(range(5, 9)),
        )
        inst = generate(params)
        assert all(inst.d[t] == 5000 for t in range(5, 9))
        assert inst.alpha_hi[0] > 4 * 100
        assert validate_and_normalize(inst) == inst

    def test_param_validation(self):
        with pytest.raises(ValueError, match="delta"):
            GeneratorParams(d_avg=5, delta=9, theta_lo=0, theta_hi=1).validate()
        with pytest.raises(ValueError, match="theta"):
            GeneratorParams(d_avg=5, delta=0, theta_lo=0.7, theta_hi=0.2).validate()


class TestFileIO:
    def test_round_trip(self, tmp_path):
        inst = generate(GeneratorParams(d_avg=30, delta=10, theta_lo=0.2, theta_hi=0.9, T=7, seed=3))
        path = tmp_path / "inst.txt"
        write_instance(inst, path)
        assert read_instance(path) == inst

    def test_malformed_field_names_field(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("T abc\n")
        with pytest.raises(ValueError, match="field T"):
            read_instance(path)
        path.write_text("T 1\n1 2 x 1 1 0 5 0 5\n")
        with pytest.raises(ValueError, match="field p"):
            read_instance(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            read_instance(tmp_path / "nope.txt")

    def test_comments_ignored(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("# header comment\nT 1\n# row comment\n1 2 1 1 1 0 5 0 5\n")
        inst = read_instance(path)
        assert inst.T == 1 and inst.d == (2,)
