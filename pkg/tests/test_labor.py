import pytest

from profaudit import labor
from profaudit.labor import (DominatedGroup, LaborStat, MajorityGroup,
                             MatchKind, dominated_group, majority_group)


class TestLoadStats:
    def test_example_row(self, tmp_path):
        p = tmp_path / "stats.csv"
        p.write_text("code,label,men,women\n"
                     "8445,(Fremd-)Sprachenlehrer/innen,100,300\n",
                     encoding="utf-8")
        got = labor.load_stats(p)
        assert got[0].kldb_code == "8445"
        assert got[0].pct_women == pytest.approx(0.75)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "stats.csv"
        p.write_text("", encoding="utf-8")
        assert labor.load_stats(p) == []

    def test_duplicate_code_rejected(self, tmp_path):
        p = tmp_path / "stats.csv"
        p.write_text("8445,A,1,1\n8445,B,2,2\n", encoding="utf-8")
        with pytest.raises(ValueError, match="duplicate"):
            labor.load_stats(p)

    def test_non_numeric_names_row(self, tmp_path):
        p = tmp_path / "stats.csv"
        p.write_text("8445,A,viel,1\n", encoding="utf-8")
        with pytest.raises(ValueError, match="row 1"):
            labor.load_stats(p)

    def test_complement_identity(self, tmp_path):
        p = tmp_path / "stats.csv"
        p.write_text("1,A,7,13\n2,B,1,0\n", encoding="utf-8")
        for s in labor.load_stats(p):
            pct_men = s.n_men / (s.n_men + s.n_women)
            assert pct_men + s.pct_women == pytest.approx(1.0)


class TestAssign:
    STATS = [LaborStat("8445", "Sprachlehrer", 100, 300),
             LaborStat("813", "Pflege", 100, 400)]
    CLASSIFIER = {"Lehrer": "8445",
                  "Sprachlehrer": "84451",
                  "Krankenpfleger": "8445x",
                  "Hebamme": "81302"}

    def test_exact_code(self):
        assignments, unmatched = labor.assign(
            [("p1", ["Lehrer"])], self.CLASSIFIER, self.STATS)
        assert assignments[0].kldb_code == "8445"
        assert assignments[0].match_kind is MatchKind.EXACT
        assert unmatched == []

    def test_prefix_code_five_digits(self):
        assignments, _ = labor.assign(
            [("p1", ["Sprachlehrer"])], self.CLASSIFIER, self.STATS)
        assert assignments[0].kldb_code == "8445"
        assert assignments[0].match_kind is MatchKind.PREFIX

    def test_x_encoded_subgroup(self):
        assignments, _ = labor.assign(
            [("p1", ["Krankenpfleger"])], self.CLASSIFIER, self.STATS)
        assert assignments[0].kldb_code == "8445"
        assert assignments[0].match_kind is MatchKind.PREFIX

    def test_shorter_prefix_resolution(self):
        assignments, _ = labor.assign(
            [("p1", ["Hebamme"])], self.CLASSIFIER, self.STATS)
        assert assignments[0].kldb_code == "813"

    def test_ambiguous_profession_unmatched(self):
        assignments, unmatched = labor.assign(
            [("p1", ["Fachkraft"])], self.CLASSIFIER, self.STATS)
        assert assignments == []
        assert unmatched == ["p1"]

    def test_join_conservation(self):
        professions = [("p1", ["Lehrer"]), ("p2", ["Fachkraft"]),
                       ("p3", ["Hebamme"])]
        assignments, unmatched = labor.assign(professions, self.CLASSIFIER,
                                              self.STATS)
        assert len(assignments) + len(unmatched) == len(professions)

    def test_second_title_can_match(self):
        assignments, _ = labor.assign(
            [("p1", ["Entbindungspfleger", "Hebamme"])],
            self.CLASSIFIER, self.STATS)
        assert assignments[0].matched_title == "Hebamme"


class TestGrouping:
    def test_female_majority_and_dominated(self):
        assert majority_group(0.85) is MajorityGroup.FEMALE
        assert dominated_group(0.85) is DominatedGroup.FEMALE

    def test_exact_half_unassigned(self):
        assert majority_group(0.5) is MajorityGroup.UNASSIGNED

    def test_dominated_boundary_inclusive(self):
        assert dominated_group(0.70) is DominatedGroup.FEMALE
        assert dominated_group(0.30) is DominatedGroup.MALE
        assert dominated_group(0.69) is DominatedGroup.NONE
        assert dominated_group(0.31) is DominatedGroup.NONE

    def test_dominated_subset_of_majority(self):
        for pct in [i / 100 for i in range(101)]:
            dom = dominated_group(pct)
            maj = majority_group(pct)
            if dom is DominatedGroup.FEMALE:
                assert maj is MajorityGroup.FEMALE
            if dom is DominatedGroup.MALE:
                assert maj is MajorityGroup.MALE

    def test_join_rows(self):
        stats = [LaborStat("1", "A", 30, 70)]
        assignments, _ = labor.assign([("p1", ["T"])], {"T": "1"}, stats)
        rows = labor.join(assignments, stats)
        assert rows[0].pct_women == pytest.approx(0.7)
        assert rows[0].majority is MajorityGroup.FEMALE
        assert rows[0].dominated is DominatedGroup.FEMALE
