"""Balance deltas, signatures, and the independent formula oracle."""

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import char_reaction_delta, random_reaction
from rxnbalance.balance import balance_signature, element_delta, is_balanced
from rxnbalance.chem import merge_agents, parse_reaction, reverse_reaction


class TestElementDelta:
    def test_ester_missing_water(self):
        d = element_delta(parse_reaction("CCO.CC(=O)O>>CC(=O)OCC"))
        assert d.per_element == {"H": 2, "O": 1}
        assert d.charge_delta == 0
        assert d.missing_atoms() == 3
        assert d.missing_carbons == 0

    def test_identity_zero(self):
        d = element_delta(parse_reaction("O>>O"))
        assert d.is_zero()

    def test_ionic(self):
        d = element_delta(parse_reaction("[Na+]>>[Na+].[Cl-]"))
        assert d.per_element == {"Cl": -1}
        assert d.charge_delta == 1

    def test_agents_merged_before_delta(self):
        d = element_delta(parse_reaction("C>O>C"))
        assert d.per_element == {"O": 1, "H": 2}

    def test_hydrogen_toggle(self):
        d = element_delta(parse_reaction("CCO.CC(=O)O>>CC(=O)OCC"))
        assert d.missing_atoms(include_hydrogen=True) == 3
        assert d.missing_atoms(include_hydrogen=False) == 1


class TestIsBalanced:
    def test_balanced_ester(self):
        assert is_balanced(parse_reaction("CCO.CC(=O)O>>CC(=O)OCC.O"))

    def test_unbalanced(self):
        assert not is_balanced(parse_reaction("CCO>>CC(=O)O"))

    def test_empty_products(self):
        assert not is_balanced(parse_reaction("O>>"))


class TestSignature:
    def test_balanced_sentinel(self):
        assert balance_signature(parse_reaction("O>>O")) == "0|q:+0"

    def test_encodes_delta(self):
        sig = balance_signature(parse_reaction("CCO>>CC(=O)O"))
        assert sig == "H:+2,O:-1|q:+0"

    def test_equal_deltas_equal_signatures(self):
        a = balance_signature(parse_reaction("CCO.CC(=O)O>>CC(=O)OCC"))
        b = balance_signature(parse_reaction("CO.CC(=O)O>>CC(=O)OC"))
        assert a == b


class TestProperties:
    def test_antisymmetry_fixed(self):
        r = parse_reaction("CCO.CC(=O)O>>CC(=O)OCC")
        d = element_delta(r)
        rd = element_delta(reverse_reaction(r))
        assert rd.per_element == (-d).per_element
        assert rd.charge_delta == -d.charge_delta

    @settings(max_examples=80, deadline=None)
    @given(st.integers(min_value=0, max_value=10**9))
    def test_antisymmetry_random(self, seed):
        # the delta contract presumes agents already merged
        r = merge_agents(parse_reaction(random_reaction(random.Random(seed))))
        d = element_delta(r)
        rd = element_delta(reverse_reaction(r))
        assert rd.per_element == (-d).per_element
        assert rd.charge_delta == -d.charge_delta

    def test_oracle_agreement_sample(self):
        rng = random.Random(99)
        for _ in range(250):
            text = random_reaction(rng)
            d = element_delta(parse_reaction(text))
            counts, charge = char_reaction_delta(text)
            assert counts == d.per_element, text
            assert charge == d.charge_delta, text
