import random

import pytest

from sociolex.corpus import UserTimeline, preprocess
from sociolex.lingmark import (NONSTANDARD, STANDARD, LinguisticProfile,
                               MarkerCounts, PluralLexicon, accumulate_markers,
                               count_markers, detect_negation, detect_plural,
                               group_average, profile_from_counts, profile_user)
from tests.test_corpus import make_raw

LEX = PluralLexicon({"cheval": "chevaux", "maison": "maisons", "chou": "choux"})


class TestNegation:
    def test_standard(self):
        assert detect_negation("je ne fume pas") == STANDARD

    def test_nonstandard(self):
        assert detect_negation("je fume pas") == NONSTANDARD

    def test_no_particle(self):
        assert detect_negation("je fume") is None

    def test_elided_ne(self):
        assert detect_negation("je n'aime pas") == STANDARD

    @pytest.mark.parametrize("particle", [
        "pas", "pa", "aps", "jamais", "ni", "personne", "rien", "ri1", "r1",
        "aucun", "aucune"])
    def test_all_particles(self, particle):
        assert detect_negation(f"y a {particle} moyen") == NONSTANDARD
        assert detect_negation(f"il ne voit {particle} moyen") == STANDARD

    def test_word_boundaries(self):
        assert detect_negation("le passage est là") is None  # pas inside a word
        assert detect_negation("la personnel") is None

    def test_ne_prefix_never_nonstandard(self):
        rng = random.Random(7)
        words = ["fume", "voit", "pas", "jamais", "rien", "chat", "ici", "trop"]
        for _ in range(500):
            s = "ne " + " ".join(rng.choices(words, k=rng.randint(1, 6)))
            assert detect_negation(s) in (STANDARD, None)

    def test_require_ne_before_flag(self):
        # "pas" precedes "ne": lenient mode sees the ne, strict mode does not
        text = "pas de souci on ne verra"
        assert detect_negation(text) == STANDARD
        assert detect_negation(text, require_ne_before=True) == NONSTANDARD

    def test_first_particle_decides(self):
        # single observation per post even with several particles
        counts = count_markers(
            UserTimeline("u", [preprocess(make_raw("ne dis pas jamais rien"))]), LEX)
        assert counts.n_cn == 1
        assert counts.n_incn == 0


class TestPlural:
    def test_standard(self):
        assert detect_plural(["les", "chevaux"], LEX) == [STANDARD]

    def test_nonstandard(self):
        assert detect_plural(["les", "cheval"], LEX) == [NONSTANDARD]

    def test_singular_determiner(self):
        assert detect_plural(["le", "cheval"], LEX) == []

    def test_unknown_word(self):
        assert detect_plural(["les", "zorglub"], LEX) == []

    def test_multiple_observations(self):
        tokens = ["les", "chevaux", "et", "des", "maison"]
        assert detect_plural(tokens, LEX) == [STANDARD, NONSTANDARD]

    def test_lexicon_rejects_self_map(self):
        with pytest.raises(ValueError):
            PluralLexicon({"souris": "souris"})

    def test_lexicon_rejects_empty_determiners(self):
        with pytest.raises(ValueError):
            PluralLexicon({"a": "b"}, plural_determiners=frozenset())

    def test_bundled_lexicon(self):
        lex = PluralLexicon.bundled()
        assert len(lex) > 1500
        assert lex.singular_to_plural["cheval"] == "chevaux"
        # negation particles must never be lexicon entries
        for word in ("pas", "personne", "rien", "aucun", "aucune", "ni"):
            assert word not in lex.singular_to_plural
            assert word not in lex.plural_to_singular


def timeline(*texts, author="u1"):
    posts = [preprocess(make_raw(t, post_id=f"p{i}", ts=i)) for i, t in enumerate(texts)]
    return UserTimeline(author, posts)


class TestProfile:
    def test_rate_arithmetic(self):
        counts = MarkerCounts(n_cn=3, n_incn=1, n_tweets=4)
        assert profile_from_counts(counts).L_cn == 0.75

    def test_vocabulary(self):
        tl = timeline("a b", "b c")
        counts, prof = profile_user(tl, LEX)
        assert counts.n_unique_words == 3
        assert prof.L_vs == 1.5

    def test_absent_on_zero_denominator(self):
        counts, prof = profile_user(timeline("bonjour tout le monde"), LEX)
        assert prof.L_cn is None
        assert prof.L_cp is None
        assert prof.L_vs is not None

    def test_empty_timeline_errors(self):
        with pytest.raises(ValueError):
            profile_user(UserTimeline("u", []), LEX)

    def test_rates_bounded(self):
        tl = timeline("je ne fume pas", "je fume pas", "les chevaux",
                      "les cheval", "rien ne va")
        _, prof = profile_user(tl, LEX)
        assert 0.0 <= prof.L_cn <= 1.0
        assert 0.0 <= prof.L_cp <= 1.0
        assert prof.L_vs <= max(len(p.tokens) for p in tl.posts)

    def test_permutation_invariance(self):
        texts = ["je ne fume pas", "les cheval", "je vois rien", "des chevaux"]
        tl1 = timeline(*texts)
        tl2 = timeline(*reversed(texts))
        assert count_markers(tl1, LEX) == count_markers(tl2, LEX)

    def test_streaming_matches_timeline(self):
        texts = ["je ne fume pas", "les cheval", "pas cool", "des choux", "x y"]
        tl = timeline(*texts)
        streamed = accumulate_markers(tl.posts, LEX)
        assert streamed["u1"] == count_markers(tl, LEX)


class TestGroupAverage:
    PROFILES = {
        "a": LinguisticProfile(L_cn=0.5, L_cp=None, L_vs=1.0),
        "b": LinguisticProfile(L_cn=1.0, L_cp=None, L_vs=3.0),
        "c": LinguisticProfile(L_cn=None, L_cp=None, L_vs=2.0),
    }

    def test_mean_of_two(self):
        mean, n = group_average(self.PROFILES, ["a", "b"], "cn")
        assert mean == 0.75
        assert n == 2

    def test_singleton(self):
        mean, n = group_average(self.PROFILES, ["a"], "cn")
        assert (mean, n) == (0.5, 1)

    def test_all_absent(self):
        mean, n = group_average(self.PROFILES, ["a", "b", "c"], "cp")
        assert mean is None
        assert n == 0

    def test_weighted_mean_consistency(self):
        whole, n_whole = group_average(self.PROFILES, ["a", "b", "c"], "vs")
        m1, n1 = group_average(self.PROFILES, ["a"], "vs")
        m2, n2 = group_average(self.PROFILES, ["b", "c"], "vs")
        recombined = (m1 * n1 + m2 * n2) / (n1 + n2)
        assert recombined == pytest.approx(whole)
        assert n1 + n2 == n_whole
