import json
import math

import pytest
from hypothesis import given
import hypothesis.strategies as st

from clinch.core import (
    AuctionInstance,
    BudgetExceeded,
    EmptyInstance,
    LengthMismatch,
    NegativeEntry,
    NonFinite,
    Outcome,
    check_price_state,
    close,
    dumps,
    instance_from_json,
    instance_to_json,
    utility,
    validate_instance,
)
from clinch.engine import initial_state

from conftest import instances


class TestValidation:
    def test_showcase_instance_valid_no_ties(self):
        inst = validate_instance(values=[9, 10, 11, 5.7], budgets=[3, 2, 1, 0.5],
                                 supply=1)
        assert inst.n == 4
        assert inst.tie_groups == ()
        assert inst.value_order == (3, 0, 1, 2)

    def test_repeated_values_grouped_by_bit_equality(self):
        inst = validate_instance(values=[1, 1], budgets=[1, 1], supply=1)
        assert inst.tie_groups == ((0, 1),)
        near = validate_instance(values=[1, 1 + 1e-15], budgets=[1, 1], supply=1)
        assert near.tie_groups == ()

    def test_negative_entry_rejected(self):
        with pytest.raises(NegativeEntry):
            validate_instance(values=[1, -2], budgets=[1, 1], supply=1)
        with pytest.raises(NegativeEntry):
            validate_instance(values=[1, 2], budgets=[1, 1], supply=-0.5)

    def test_non_finite_rejected(self):
        with pytest.raises(NonFinite):
            validate_instance(values=[1, math.inf], budgets=[1, 1], supply=1)
        with pytest.raises(NonFinite):
            validate_instance(values=[1, 2], budgets=[math.nan, 1], supply=1)

    def test_length_mismatch_and_empty(self):
        with pytest.raises(LengthMismatch):
            validate_instance(values=[1, 2], budgets=[1], supply=1)
        with pytest.raises(EmptyInstance):
            validate_instance(values=[], budgets=[], supply=1)

    def test_accepts_auction_instance_object(self):
        inst = validate_instance(AuctionInstance((1.0, 2.0), (1.0, 1.0), 1.0))
        assert inst.values == (1.0, 2.0)

    @given(instances())
    def test_idempotent(self, inst):
        assert validate_instance(inst) == inst


class TestUtility:
    def test_direct_formula(self):
        inst = validate_instance(values=[2], budgets=[5], supply=1)
        assert utility(inst, Outcome((1.0,), (1.0,)), 0) == 1.0
        assert utility(inst, Outcome((0.0,), (0.0,)), 0) == 0.0

    def test_negative_utility_allowed_within_budget(self):
        inst = validate_instance(values=[1], budgets=[2], supply=1)
        assert utility(inst, Outcome((0.5,), (1.0,)), 0) == -0.5

    def test_budget_exceeded_signalled(self):
        inst = validate_instance(values=[2], budgets=[1], supply=1)
        with pytest.raises(BudgetExceeded):
            utility(inst, Outcome((1.0,), (1.5,)), 0)


class TestTolerance:
    def test_close_scales_with_magnitude(self):
        assert close(1e12, 1e12 * (1 + 1e-10))
        assert not close(1.0, 1.0 + 1e-6)
        assert close(0.0, 1e-13)


class TestJson:
    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_float_round_trip_exact(self, x):
        assert json.loads(dumps({"v": x}))["v"] == x

    def test_instance_round_trip(self):
        inst = validate_instance(values=[0.1, 2 / 3], budgets=[1e-9, 5], supply=1.7)
        again = instance_from_json(instance_to_json(inst))
        assert again == inst

    def test_schema_errors(self):
        with pytest.raises(LengthMismatch):
            instance_from_json("{}")
        with pytest.raises(LengthMismatch):
            instance_from_json('{"values": [1], "budgets": [1]}')
        assert instance_from_json('{"values": [1], "budgets": [1]}',
                                  require_supply=False).supply == 0.0

    def test_non_finite_rendering(self):
        assert dumps(math.inf) == "Infinity"
        assert json.loads(dumps([math.inf]))[0] == math.inf


class TestPriceState:
    def test_valid_initial_state_passes(self):
        inst = validate_instance(values=[9, 10, 11, 5.7], budgets=[3, 2, 1, 0.5],
                                 supply=1)
        assert check_price_state(initial_state(inst), inst.budgets, inst.supply) == []

    def test_corrupted_state_flagged(self):
        inst = validate_instance(values=[9, 10, 11, 5.7], budgets=[3, 2, 1, 0.5],
                                 supply=1)
        st0 = initial_state(inst)
        broken = type(st0)(st0.price, (0.5, 0.0, 0.0, 0.0), st0.budgets, st0.supply,
                           st0.active, st0.clinching, st0.values)
        assert any("supply identity" in msg for msg in
                   check_price_state(broken, inst.budgets, inst.supply))
