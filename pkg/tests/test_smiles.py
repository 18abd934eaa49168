"""Parser unit tests: formulas, charges, valence, aromatic hydrogen counts,
classified errors."""

import pytest

from rxnbalance.chem import SmilesSyntaxError, ValenceError, formula, parse_molecule


def f(smiles):
    return formula(parse_molecule(smiles))


class TestFormulas:
    def test_ethanol(self):
        assert f("CCO").counts == {"C": 2, "H": 6, "O": 1}
        assert f("CCO").net_charge == 0

    def test_sodium_cation(self):
        frm = f("[Na+]")
        assert frm.counts == {"Na": 1}
        assert frm.net_charge == 1
        assert parse_molecule("[Na+]").atoms[0].h_count == 0

    def test_sulfuric_acid(self):
        assert f("O=S(=O)(O)O").as_text() == "H2O4S"

    def test_acetic_acid(self):
        assert f("CC(=O)O").counts == {"C": 2, "H": 4, "O": 2}

    def test_hydroxide(self):
        frm = f("[OH-]")
        assert frm.counts == {"O": 1, "H": 1}
        assert frm.net_charge == -1

    def test_molecular_nacl(self):
        frm = f("[Na][Cl]")
        assert frm.counts == {"Na": 1, "Cl": 1}
        assert frm.net_charge == 0

    def test_explicit_dihydrogen(self):
        assert f("[H][H]").counts == {"H": 2}

    def test_isotope_kept(self):
        m = parse_molecule("[13CH4]")
        assert m.atoms[0].isotope == 13
        assert f("[13CH4]").counts == {"C": 1, "H": 4}

    def test_charge_digits(self):
        assert f("[Mg+2]").net_charge == 2
        assert f("[Fe+3]").net_charge == 3
        assert f("[O-2]").net_charge == -2

    def test_dot_additivity(self):
        whole = f("CCO.[Na+].O")
        parts = f("CCO") + f("[Na+]") + f("O")
        assert whole.counts == parts.counts
        assert whole.net_charge == parts.net_charge


class TestAromatics:
    @pytest.mark.parametrize("smiles,hydrogens", [
        ("c1ccccc1", 6),        # benzene
        ("c1ccncc1", 5),        # pyridine
        ("c1cc[nH]c1", 5),      # pyrrole
        ("c1ccoc1", 4),         # furan
        ("c1ccsc1", 4),         # thiophene
        ("c1ccc2ccccc2c1", 8),  # naphthalene
    ])
    def test_aromatic_hydrogen_counts(self, smiles, hydrogens):
        assert f(smiles)["H"] == hydrogens

    def test_kekule_and_aromatic_formulas_agree(self):
        assert f("c1ccccc1").counts == f("C1=CC=CC=C1").counts

    def test_pyridinium(self):
        frm = f("c1cc[nH+]cc1")
        assert frm["H"] == 6
        assert frm.net_charge == 1

    def test_aromatic_flag_set(self):
        m = parse_molecule("c1ccccc1")
        assert all(a.aromatic for a in m.atoms)
        m2 = parse_molecule("C1=CC=CC=C1")
        assert all(a.aromatic for a in m2.atoms)

    def test_cyclohexane_not_aromatic(self):
        assert not any(a.aromatic for a in parse_molecule("C1CCCCC1").atoms)

    def test_quinone_not_aromatic(self):
        m = parse_molecule("O=C1C=CC(=O)C=C1")
        assert not any(a.aromatic for a in m.atoms)


class TestErrors:
    @pytest.mark.parametrize("bad", [
        "", "C(", "C)", "C1CC", "[C", "C[", "[Xx]", "[]", "C%1", "C==C",
        "1CC", "=C",
    ])
    def test_syntax_errors(self, bad):
        with pytest.raises(SmilesSyntaxError):
            parse_molecule(bad)

    def test_unknown_element(self):
        with pytest.raises(SmilesSyntaxError):
            parse_molecule("[Zz]")

    def test_valence_error_pentavalent_nitrogen(self):
        with pytest.raises(ValenceError):
            parse_molecule("CN(=O)=O")

    def test_valence_error_texas_carbon(self):
        with pytest.raises(ValenceError):
            parse_molecule("C(C)(C)(C)(C)C")

    def test_bracket_overrides_valence(self):
        # charge-separated nitro group parses fine
        frm = f("C[N+](=O)[O-]")
        assert frm.net_charge == 0
        assert frm.counts == {"C": 1, "H": 3, "N": 1, "O": 2}

    def test_arrow_rejected_in_molecule(self):
        with pytest.raises(SmilesSyntaxError):
            parse_molecule("C>>C")

    def test_ring_order_conflict(self):
        with pytest.raises(SmilesSyntaxError):
            parse_molecule("C=1CCCCC#1")

    def test_unknown_bracket_element_accepted(self):
        # exotic species: zero default valence, explicit hydrogens only
        frm = f("[Pd]")
        assert frm.counts == {"Pd": 1}

    def test_wildcard_in_bracket(self):
        assert f("[*]").counts == {"*": 1}


class TestStereoCarriedOpaquely:
    def test_atom_stereo_parsed(self):
        m = parse_molecule("C[C@H](O)CC")
        assert any(a.stereo for a in m.atoms)
        assert f("C[C@H](O)CC").counts == f("CC(O)CC").counts

    def test_bond_stereo_parsed(self):
        m = parse_molecule("C/C=C/C")
        assert any(b.stereo for b in m.bonds)
        assert f("C/C=C/C").counts == f("CC=CC").counts
