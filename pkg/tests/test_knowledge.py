from __future__ import annotations

from collections import Counter
from itertools import permutations
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crypticproof.knowledge import (
    Action,
    KnowledgeBase,
    PatternError,
    compact,
    matches_pattern,
    parse_pattern,
    pattern_letter_count,
)
from crypticproof.phonetic import metaphone

WORDS = (Path(__file__).parent / "fixtures" / "anagram_words.txt").read_text().split()


class TestPatterns:
    @pytest.mark.parametrize("word,pattern,ok", [
        ("HERON", "5", True),
        ("HERON", "(5)", True),
        ("ICE CREAM", "3,5", True),
        ("ICE-CREAM", "3-5", True),
        ("ICE CREAM", "8", False),
        ("ICECREAM", "8", True),
        ("HERON", "4", False),
        ("HER0N", "5", False),
        ("", "5", False),
    ])
    def test_matches(self, word, pattern, ok):
        assert matches_pattern(word, pattern) is ok

    @pytest.mark.parametrize("bad", ["", "five", "(5", "5,,3", "0", "3,-2"])
    def test_malformed(self, bad):
        with pytest.raises(PatternError):
            parse_pattern(bad)

    def test_letter_count(self):
        assert pattern_letter_count("(4, 2)") == 6
        assert pattern_letter_count("3-5") == 8

    @given(st.lists(st.text(alphabet="ABCDEFGHIJ", min_size=1, max_size=6), min_size=1, max_size=3))
    def test_pattern_from_word_always_matches(self, parts):
        assert matches_pattern(" ".join(parts), ",".join(str(len(p)) for p in parts))


class TestAnagram:
    def test_decimal(self, kb):
        assert kb.is_anagram("MEDICAL", "DECIMAL")
        assert kb.is_anagram("medical", "Deci Mal")

    def test_near_miss_reports_letters(self, kb):
        out = kb.is_anagram("MEDICALS", "DECIMAL")
        assert not out.ok
        assert out.near_misses[0].kind == "anagram_letters"
        assert out.near_misses[0].suggestions == ("S", "")

    def test_far_miss_has_no_hint(self, kb):
        assert kb.is_anagram("ZEBRA", "DECIMAL").near_misses == ()

    def test_permutation_oracle_on_fixture_list(self, kb):
        # exhaustive oracle: b is an anagram of a iff b is some ordering of a's letters
        orderings = {w: {"".join(p) for p in permutations(w.upper())} for w in WORDS}
        disagreements = [
            (a, b) for a in WORDS for b in WORDS
            if kb.is_anagram(a, b).ok != (b.upper() in orderings[a])
        ]
        assert len(WORDS) == 200 and all(len(w) <= 7 for w in WORDS)
        assert disagreements == []

    @given(st.text(alphabet="ABCDEFGHIJKLMNOPQRSTUVWXYZ", min_size=1, max_size=10), st.randoms())
    def test_shuffle_is_anagram(self, word, rnd):
        letters = list(word)
        rnd.shuffle(letters)
        assert KnowledgeBase().is_anagram(word, "".join(letters))

    @given(st.text(alphabet="ABCDE ", max_size=8), st.text(alphabet="ABCDE-", max_size=8))
    def test_symmetric_and_count_based(self, a, b):
        kb = KnowledgeBase()
        assert kb.is_anagram(a, b).ok == kb.is_anagram(b, a).ok
        assert kb.is_anagram(a, b).ok == (Counter(compact(a)) == Counter(compact(b)))


class TestAbbreviation:
    def test_forward(self, kb):
        assert kb.is_abbreviation("for every", "PER")
        assert kb.is_abbreviation("Artist", "ra")

    def test_article_stripping(self, kb):
        assert kb.is_abbreviation("an artist", "RA")
        strict = KnowledgeBase.load(strip_articles=False)
        assert not strict.is_abbreviation("an artist", "RA")

    def test_expansions_listed_in_file_order(self, kb):
        out = kb.is_abbreviation("a painter chap", "RA")
        nm = out.near_misses[0]
        assert nm.kind == "abbreviation_expansions"
        assert nm.suggestions == ("artist", "artillery", "Royal Artillery", "gunners", "painter")

    def test_unknown_abbreviation(self, kb):
        nm = kb.is_abbreviation("woman", "QQ").near_misses[0]
        assert nm.suggestions == ()


class TestActionType:
    def test_known(self, kb):
        assert kb.action_type("crazy", Action.ANAGRAM)
        assert kb.action_type("Decapitated", Action.REMOVE_FIRST)

    def test_subphrase_hint(self, kb):
        out = kb.action_type("goes crazy", Action.ANAGRAM)
        assert not out.ok
        assert out.near_misses[0].kind == "indicator_subphrase"
        assert out.near_misses[0].matched_subphrase == "crazy"

    def test_other_action_hint(self, kb):
        out = kb.action_type("returned", Action.ANAGRAM)
        kinds = {nm.kind: nm for nm in out.near_misses}
        assert "Action.REVERSE" in kinds["indicator_other_action"].suggestions

    def test_fuzzy_indicators_opt_in(self, kb):
        assert not kb.action_type("crazzy", Action.ANAGRAM)
        assert KnowledgeBase.load(fuzzy_indicators=True).action_type("crazzy", Action.ANAGRAM)

    def test_enum_values(self):
        assert [a.value for a in Action] == list(range(1, 10))
        assert str(Action.GOES_OUTSIDE) == "Action.GOES_OUTSIDE"


class TestSynonym:
    def test_thesaurus_both_directions(self, kb):
        assert kb.is_synonym("head", "BONCE")
        assert kb.is_synonym("bonce", "HEAD")

    def test_answer_pairs(self, kb):
        assert kb.is_synonym("wader", "HERON", pattern="5")
        assert kb.is_synonym("a big seller", "SUPERMARKET", pattern="11")

    def test_pattern_checked_first(self, kb):
        out = kb.is_synonym("wader", "HERON", pattern="4")
        assert out.near_misses[0].kind == "pattern_mismatch"

    def test_malformed_pattern(self, kb):
        assert kb.is_synonym("wader", "HERON", pattern="x").near_misses[0].kind == "malformed_pattern"

    def test_rejection_suggests_same_length(self, kb):
        out = kb.is_synonym("woman", "SHE")
        assert out.ok
        out = kb.is_synonym("woman", "HEN")
        nm = out.near_misses[0]
        assert nm.kind == "synonym_rejected"
        assert set(nm.suggestions) == {"HER", "SHE"}

    def test_oracle_consulted_after_resources(self):
        questions = []

        def oracle(q):
            questions.append(q)
            return "YES, it is"

        kb = KnowledgeBase.build(thesaurus=[("head", "bonce")], synonym_oracle=oracle)
        assert kb.is_synonym("head", "BONCE") and questions == []
        assert kb.is_synonym("noggin", "BONCE")
        assert questions == ["Is 'noggin' a reasonable crossword definition for 'BONCE'? Answer YES or NO."]

    def test_oracle_no(self):
        kb = KnowledgeBase.build(synonym_oracle=lambda q: "NO")
        nm = kb.is_synonym("noggin", "BONCE").near_misses[0]
        assert nm.kind == "synonym_rejected" and "oracle" in nm.detail

    def test_oracle_failure_is_a_hinted_failure(self):
        def oracle(q):
            raise TimeoutError("slow")

        out = KnowledgeBase.build(synonym_oracle=oracle).is_synonym("noggin", "BONCE")
        assert not out.ok and out.near_misses[0].kind == "oracle_unavailable"


class TestHomophone:
    @pytest.mark.parametrize("a,b", [
        ("pair", "pare"), ("pear", "pair"), ("night", "knight"), ("write", "right"),
        ("site", "cite"), ("ice cream", "I scream"),
    ])
    def test_pairs(self, kb, a, b):
        assert kb.is_homophone(a, b)

    def test_mismatch_reports_codes(self, kb):
        out = kb.is_homophone("dog", "cat")
        assert out.near_misses[0].suggestions == (metaphone("dog"), metaphone("cat"))

    @pytest.mark.parametrize("word,code", [
        ("pair", "PR"), ("knight", "NT"), ("phone", "FN"), ("school", "SKL"),
        ("xylophone", "SLFN"), ("thumb", "0M"), ("gnome", "NM"), ("vision", "FXN"),
        ("dodge", "TJ"), ("which", "WX"),
    ])
    def test_metaphone_rules(self, word, code):
        assert metaphone(word) == code

    @given(st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=10))
    def test_case_and_punctuation_insensitive(self, word):
        assert metaphone(word) == metaphone(word.upper() + "!")


class TestLoading:
    def test_bundled_resources(self, kb):
        assert kb.known_word("heron") and kb.known_word("ICE CREAM")
        assert not kb.known_word("")
        assert kb.indicators[Action.ANAGRAM]

    def test_custom_directory(self, tmp_path):
        (tmp_path / "abbreviations.tsv").write_text("# comment\nsailor\tAB\n")
        (tmp_path / "indicators.tsv").write_text("anagram\tmad\n")
        kb = KnowledgeBase.load(tmp_path)
        assert kb.is_abbreviation("sailor", "AB")
        assert kb.action_type("mad", Action.ANAGRAM)
        assert kb.wordlist == frozenset()

    def test_bad_row(self, tmp_path):
        (tmp_path / "thesaurus.tsv").write_text("only one field\n")
        with pytest.raises(ValueError, match="tab-separated"):
            KnowledgeBase.load(tmp_path)

    def test_unknown_action(self, tmp_path):
        (tmp_path / "indicators.tsv").write_text("IS_OUTSIDE\tbags\n")
        with pytest.raises(ValueError, match="unknown action"):
            KnowledgeBase.load(tmp_path)
