import pytest

from profaudit import mentions
from profaudit.corpus import ArticleRecord, build_snapshot
from profaudit.mentions import (BiasClass, Gender, PersonMention, Source,
                                extract_link_mentions, extract_text_mentions,
                                filter_by_birth, male_ratio_and_class, merge,
                                parse_birth_year)


def snapshot_with_persons():
    records = [
        ArticleRecord("Heinrich Heine", categories={"Mann", "Dichter"},
                      plain_text="Christian Johann Heinrich Heine (* 13. "
                                 "Dezember 1797 in Düsseldorf; † 17. Februar "
                                 "1856 in Paris) war ein Dichter."),
        ArticleRecord("Oriana Fallaci", categories={"Frau"},
                      plain_text="Oriana Fallaci (* 29. Juni 1929 in Florenz; "
                                 "† 15. September 2006 ebenda) war eine "
                                 "Journalistin."),
        ArticleRecord("Max Mustermann", categories={"Mann"}, plain_text="X."),
        ArticleRecord("Schule", categories={"Bildung"}, plain_text="S."),
        ArticleRecord("Zwitterwesen", categories={"Mann", "Frau"},
                      plain_text="?"),
    ]
    return build_snapshot({r.title: r for r in records})


LEXICON = {"Heinrich": Gender.M, "Oriana": Gender.F, "Anna": Gender.F,
           "Max": Gender.M, "Kim": Gender.UNKNOWN, "Hans Peter": Gender.M,
           "Hans": Gender.M}


class TestLinkMentions:
    def test_no_outlinks(self):
        snap = snapshot_with_persons()
        rec = ArticleRecord("Beruf X", outlinks=[])
        got, skipped = extract_link_mentions(rec, snap)
        assert got == [] and skipped == 0

    def test_frau_category_yields_female(self):
        snap = snapshot_with_persons()
        rec = ArticleRecord("Beruf X", outlinks=["Oriana Fallaci"])
        got, _ = extract_link_mentions(rec, snap)
        assert len(got) == 1
        assert got[0].gender is Gender.F
        assert got[0].source is Source.LINK
        assert got[0].linked_page == "Oriana Fallaci"
        assert got[0].first_name == "Oriana"

    def test_mixed_fixture(self):
        # 2 men, 1 woman, 1 uncategorized page, 1 missing page
        snap = snapshot_with_persons()
        rec = ArticleRecord("Beruf X", outlinks=[
            "Heinrich Heine", "Max Mustermann", "Oriana Fallaci",
            "Schule", "Unbekannt"])
        got, skipped = extract_link_mentions(rec, snap)
        genders = sorted(m.gender.value for m in got)
        assert genders == ["f", "m", "m"]
        assert skipped == 1  # only the missing page counts as skipped

    def test_contradictory_categories_skipped(self):
        snap = snapshot_with_persons()
        rec = ArticleRecord("Beruf X", outlinks=["Zwitterwesen"])
        got, skipped = extract_link_mentions(rec, snap)
        assert got == [] and skipped == 1


class TestTextMentions:
    def test_simple_match(self):
        got = extract_text_mentions("A", "Heinrich Heine schrieb Gedichte.",
                                    LEXICON)
        assert len(got) == 1
        assert got[0].surface_name == "Heinrich Heine"
        assert got[0].gender is Gender.M
        assert got[0].source is Source.NAME_MATCH

    def test_lowercase_text_empty(self):
        assert extract_text_mentions("A", "alles klein geschrieben hier",
                                     LEXICON) == []

    def test_female_name(self):
        got = extract_text_mentions("A", "Die Reporterin Oriana Fallaci kam.",
                                    LEXICON)
        assert [m.gender for m in got] == [Gender.F]

    def test_run_must_have_two_tokens(self):
        assert extract_text_mentions("A", "Heinrich schrieb.", LEXICON) == []

    def test_unknown_first_name_ignored(self):
        assert extract_text_mentions("A", "Wilhelmine Unbekannt kam.",
                                     LEXICON) == []

    def test_ambiguous_maps_to_unknown(self):
        got = extract_text_mentions("A", "Kim Schmidt kam.", LEXICON)
        assert [m.gender for m in got] == [Gender.UNKNOWN]

    def test_compound_first_name_longest_match(self):
        got = extract_text_mentions("A", "Hans Peter Müller sprach.", LEXICON)
        assert len(got) == 1
        assert got[0].first_name == "Hans Peter"

    def test_punctuation_breaks_runs(self):
        got = extract_text_mentions(
            "A", "Heine, Anna Schmidt und Oriana Fallaci.", LEXICON)
        names = {m.surface_name for m in got}
        assert names == {"Anna Schmidt", "Oriana Fallaci"}

    def test_deduplicated_per_article(self):
        got = extract_text_mentions(
            "A", "Heinrich Heine kam. Heinrich Heine ging.", LEXICON)
        assert len(got) == 1


def pm(article, surface, gender, source=Source.LINK, linked=None, year=None):
    return PersonMention(article, surface, surface.split()[0], gender, source,
                         linked_page=linked, birth_year=year)


class TestMerge:
    def test_disjoint_union(self):
        links = [pm("A", "Heinrich Heine", Gender.M)]
        texts = [pm("A", "Anna Schmidt", Gender.F, Source.NAME_MATCH)]
        got, report = merge(links, texts)
        assert len(got) == 2
        assert report.n_overlap == 0
        assert report.disagreement_rate == 0.0

    def test_link_gender_authoritative(self):
        links = [pm("A", "Kim Novak", Gender.F)]
        texts = [pm("A", "Kim Novak", Gender.M, Source.NAME_MATCH)]
        got, report = merge(links, texts)
        assert len(got) == 1
        assert got[0].source is Source.BOTH
        assert got[0].gender is Gender.F
        assert report.gender_disagreements == 1

    def test_merge_never_double_counts(self):
        links = [pm("A", "Heinrich Heine", Gender.M)]
        texts = [pm("A", "Heinrich Heine", Gender.M, Source.NAME_MATCH)]
        got, _ = merge(links, texts)
        assert len(got) == 1

    def test_same_surface_different_articles_kept_apart(self):
        links = [pm("A", "Heinrich Heine", Gender.M)]
        texts = [pm("B", "Heinrich Heine", Gender.M, Source.NAME_MATCH)]
        got, report = merge(links, texts)
        assert len(got) == 2
        assert report.n_overlap == 0

    def test_ten_person_overlap_disagreement_rate(self):
        # ten overlapping persons, the lexicon wrong on exactly one and
        # undecided on one more: 1 disagreement out of 9 comparisons
        links, texts = [], []
        for i in range(10):
            name = f"Person Nr{i}"
            link_gender = Gender.M if i < 7 else Gender.F
            if i == 3:
                text_gender = Gender.F  # lexicon contradicts the link
            elif i == 5:
                text_gender = Gender.UNKNOWN
            else:
                text_gender = link_gender
            links.append(pm("A", name, link_gender))
            texts.append(pm("A", name, text_gender, Source.NAME_MATCH))
        got, report = merge(links, texts)
        assert len(got) == 10
        assert report.n_overlap == 10
        assert report.overlap_of_link == 1.0
        assert report.gender_comparisons == 9
        assert report.gender_disagreements == 1
        assert report.disagreement_rate == pytest.approx(1 / 9)


class TestRatioClass:
    def test_all_men(self):
        got = male_ratio_and_class("Konstrukteur", 30, 0)
        assert got.male_ratio == 1.0
        assert got.bias_class is BiasClass.MALE_BIASED

    def test_six_men_five_women_equal(self):
        got = male_ratio_and_class("A", 6, 5)
        assert got.bias_class is BiasClass.EQUAL

    def test_five_men_four_women_small_sample(self):
        got = male_ratio_and_class("A", 5, 4)
        assert got.bias_class is BiasClass.MALE_BIASED

    def test_band_boundaries_inclusive(self):
        assert male_ratio_and_class("A", 9, 11).bias_class is BiasClass.EQUAL
        assert male_ratio_and_class("A", 11, 9).bias_class is BiasClass.EQUAL
        assert male_ratio_and_class("A", 12, 8).bias_class is BiasClass.MALE_BIASED
        assert male_ratio_and_class("A", 8, 12).bias_class is BiasClass.FEMALE_BIASED

    def test_small_sample_strict_equality(self):
        assert male_ratio_and_class("A", 2, 2).bias_class is BiasClass.EQUAL
        assert male_ratio_and_class("A", 3, 2).bias_class is BiasClass.MALE_BIASED

    def test_ratio_complement(self):
        got = male_ratio_and_class("A", 7, 13)
        assert got.male_ratio + 13 / 20 == pytest.approx(1.0)

    def test_zero_total_rejected(self):
        with pytest.raises(ValueError):
            male_ratio_and_class("A", 0, 0)

    def test_partition_over_grid(self):
        for men in range(0, 25):
            for women in range(0, 25):
                if men + women == 0:
                    continue
                got = male_ratio_and_class("A", men, women)
                assert got.bias_class in (BiasClass.MALE_BIASED,
                                          BiasClass.FEMALE_BIASED,
                                          BiasClass.EQUAL)


class TestBirthFilter:
    def test_boundary_years(self):
        kept, unknown, old = filter_by_birth([
            pm("A", "Jung Mensch", Gender.M, year=1961),
            pm("A", "Grenze Mensch", Gender.M, year=1960),
            pm("A", "Ohne Jahr", Gender.F),
        ], cutoff=1960)
        assert [m.surface_name for m in kept] == ["Jung Mensch"]
        assert unknown == 1
        assert old == 1

    def test_parse_birth_year(self):
        assert parse_birth_year("Wer Auchimmer (* 12. Mai 1970 in Bonn) "
                                "war da.") == 1970
        assert parse_birth_year("Heine (* 13. Dezember 1797 in Düsseldorf; "
                                "† 1856) schrieb.") == 1797
        assert parse_birth_year("Jahr fehlt hier völlig.") is None
        # death year alone must not match
        assert parse_birth_year("Alt Meister († 1856 in Paris) wirkte.") is None

    def test_annotate_from_index_and_fallback(self):
        snap = snapshot_with_persons()
        ms = [pm("A", "Heinrich Heine", Gender.M, linked="Heinrich Heine"),
              pm("A", "Max Mustermann", Gender.M, linked="Max Mustermann"),
              pm("A", "Anna Schmidt", Gender.F)]
        mentions.annotate_birth_years(ms, {"Max Mustermann": 1975}, snap)
        years = {m.surface_name: m.birth_year for m in ms}
        assert years == {"Heinrich Heine": 1797, "Max Mustermann": 1975,
                         "Anna Schmidt": None}

    def test_bad_birth_file_row(self, tmp_path):
        p = tmp_path / "birth.csv"
        p.write_text("Heinrich Heine,ungefähr 1800\n", encoding="utf-8")
        with pytest.raises(ValueError, match="row 1"):
            mentions.load_birth_years(p)


class TestArticleStats:
    def test_counts_and_exclusion(self):
        ms = [pm("A", "M Eins", Gender.M), pm("A", "F Eins", Gender.F),
              pm("B", "Wer Weiss", Gender.UNKNOWN)]
        got = mentions.article_stats(ms)
        assert len(got) == 1  # article B has no gendered mention
        assert got[0].article_title == "A"
        assert got[0].bias_class is BiasClass.EQUAL
