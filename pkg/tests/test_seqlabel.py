import random

import numpy as np
import pytest

from helpers import FORMS, random_form_sentence, random_linear_model
from sylpipe import seqlabel
from sylpipe.model import Sentence, Token
from sylpipe.seqlabel import (DecodeError, FeatureTemplate, LinearModel,
                              TrainingError, bio_transition_mask,
                              brute_force_decode, extract_features,
                              load_linear_model, make_templates,
                              save_linear_model, sequence_score,
                              train_averaged_perceptron, viterbi_decode,
                              word_shape)


def sentence(*forms):
    return Sentence(Token(index=i + 1, form=f) for i, f in enumerate(forms))


class TestTemplates:
    def test_basic_extraction(self):
        tpls = make_templates(["form@0", "form@-1", "prefix2@0", "suffix2@0",
                               "shape@0", "isfirst@0"])
        s = sentence("Hà_Nội", "xanh")
        feats = extract_features(tpls, s.tokens, 0)
        assert "form@0=Hà_Nội" in feats
        assert "form@-1=<s>" in feats
        assert "prefix2@0=Hà" in feats
        assert "suffix2@0=ội" in feats
        assert "shape@0=AaxAa" in feats
        assert "isfirst@0=1" in feats
        feats1 = extract_features(tpls, s.tokens, 1)
        assert "form@-1=Hà_Nội" in feats1
        assert "isfirst@0=0" in feats1

    def test_unset_attribute_skips_template(self):
        tpls = make_templates(["pos@0", "form@0&pos@0"])
        s = sentence("a")
        assert extract_features(tpls, s.tokens, 0) == []

    def test_bad_descriptor(self):
        with pytest.raises(ValueError):
            FeatureTemplate("x", "frm@0")

    def test_word_shape(self):
        assert word_shape("Nguyễn_Khắc_Chúc") == "AaxAaxAa"
        assert word_shape("12a") == "9a"
        assert word_shape("ABC") == "A"


class TestDecoding:
    def test_zero_weights_tie_break(self):
        m = random_linear_model(random.Random(0), ["A", "B"], lo=0, hi=0)
        labels, score = viterbi_decode(m, sentence("xe", "máy", "nhà"))
        assert labels == ["A", "A", "A"]
        assert score == 0.0

    def test_single_position_max_emission(self):
        rng = random.Random(1)
        m = random_linear_model(rng, ["A", "B", "C"])
        s = sentence("xe")
        labels, score = viterbi_decode(m, s)
        b_labels, b_score = brute_force_decode(m, s)
        assert labels == b_labels and score == b_score

    def test_oracle_equivalence_200_random(self):
        rng = random.Random(2024)
        alphabets = [["A"], ["A", "B"], ["A", "B", "C"], ["A", "B", "C", "D"]]
        for _ in range(200):
            labels = rng.choice(alphabets)
            m = random_linear_model(rng, labels)
            s = random_form_sentence(rng, n=rng.randint(1, 6))
            v = viterbi_decode(m, s)
            b = brute_force_decode(m, s)
            assert v == b

    def test_equivalence_with_position_masks(self):
        rng = random.Random(7)
        labels = ["A", "B", "C"]
        for _ in range(60):
            m = random_linear_model(rng, labels)
            s = random_form_sentence(rng, n=rng.randint(1, 5))
            legal = [rng.sample(labels, rng.randint(1, 3)) for _ in range(len(s))]
            assert viterbi_decode(m, s, legal) == brute_force_decode(m, s, legal)

    def test_empty_legal_set_is_error(self):
        m = random_linear_model(random.Random(3), ["A", "B"])
        with pytest.raises(DecodeError):
            viterbi_decode(m, sentence("xe", "máy"), [["A"], []])

    def test_unknown_legal_label_is_error(self):
        m = random_linear_model(random.Random(3), ["A", "B"])
        with pytest.raises(ValueError):
            viterbi_decode(m, sentence("xe"), [["Z"]])

    def test_brute_force_refuses_large_instances(self):
        m = random_linear_model(random.Random(4), ["A", "B", "C", "D"])
        s = random_form_sentence(random.Random(5), n=12)
        with pytest.raises(DecodeError):
            brute_force_decode(m, s)

    def test_empty_sentence(self):
        m = random_linear_model(random.Random(6), ["A"])
        assert viterbi_decode(m, Sentence(())) == ([], 0.0)

    def test_score_consistency(self):
        rng = random.Random(8)
        for _ in range(50):
            m = random_linear_model(rng, ["A", "B", "C"])
            s = random_form_sentence(rng, n=rng.randint(1, 7))
            labels, score = viterbi_decode(m, s)
            assert sequence_score(m, s, labels) == score

    def test_argmax_invariant_to_position_constant(self):
        # adding a constant to every label's weight of a feature that fires
        # at exactly one position must not change the argmax
        rng = random.Random(9)
        tpls = make_templates(["form@0", "isfirst@0"])
        m = random_linear_model(rng, ["A", "B", "C"], templates=tpls)
        s = sentence("xe", "máy", "nhà")
        fid = m.feature_index["isfirst@0=1"]
        W2 = m.emission_weights.copy()
        W2[fid] += 17.0
        m2 = LinearModel(m.labels, m.templates, m.feature_index, W2,
                         m.transition_weights)
        l1, s1 = viterbi_decode(m, s)
        l2, s2 = viterbi_decode(m2, s)
        assert l1 == l2
        assert s2 == s1 + 17.0


class TestBioMask:
    def test_mask_shape_and_rules(self):
        labels = ["B-PER", "I-PER", "O"]
        mask = bio_transition_mask(labels)
        assert mask.shape == (4, 3)
        i_per = labels.index("I-PER")
        assert not mask[labels.index("O"), i_per]
        assert mask[labels.index("B-PER"), i_per]
        assert mask[i_per, i_per]
        assert not mask[3, i_per]  # start row

    def test_masked_decode_respects_bio(self):
        rng = random.Random(10)
        labels = sorted(["O", "B-PER", "I-PER", "B-ORG", "I-ORG"])
        for _ in range(50):
            base = random_linear_model(rng, labels)
            m = LinearModel(base.labels, base.templates, base.feature_index,
                            base.emission_weights, base.transition_weights,
                            bio_constrained=True)
            s = random_form_sentence(rng, n=rng.randint(1, 6))
            v = viterbi_decode(m, s)
            b = brute_force_decode(m, s)
            assert v == b
            from sylpipe.ner import is_valid_bio
            assert is_valid_bio(v[0])


class TestTraining:
    def separable_corpus(self):
        corpus = []
        for k in range(5):
            s = sentence(f"red{k}", f"blue{k}", f"green{k}")
            corpus.append((s, ["R", "B", "G"]))
        return corpus

    def test_separable_convergence(self):
        corpus = self.separable_corpus()
        m = train_averaged_perceptron(make_templates(["form@0", "form@-1"]),
                                      corpus, epochs=5)
        for s, gold in corpus:
            assert viterbi_decode(m, s)[0] == gold

    def test_no_update_on_perfect_corpus(self):
        # with a single-label alphabet the zero model is already perfect,
        # so one epoch must leave every weight at zero
        corpus = [(sentence("a", "b"), ["X", "X"]),
                  (sentence("c"), ["X"])]
        m = train_averaged_perceptron(make_templates(["form@0"]), corpus, epochs=1)
        assert not m.emission_weights.any()
        assert not m.transition_weights.any()

    def test_deterministic_rerun_byte_identical(self, tmp_path):
        corpus = self.separable_corpus()
        paths = []
        for run in range(2):
            m = train_averaged_perceptron(make_templates(["form@0", "form@-1"]),
                                          corpus, epochs=3, shuffle_seed=42)
            p = tmp_path / f"m{run}.bin"
            save_linear_model(m, p)
            paths.append(p)
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_empty_corpus_error(self):
        with pytest.raises(TrainingError):
            train_averaged_perceptron(make_templates(["form@0"]), [], epochs=1)

    def test_length_mismatch_error(self):
        with pytest.raises(TrainingError):
            train_averaged_perceptron(make_templates(["form@0"]),
                                      [(sentence("a"), ["X", "Y"])], epochs=1)

    def test_lazy_average_equals_naive(self):
        corpus = [(sentence("a", "b"), ["X", "Y"]),
                  (sentence("b", "a"), ["Y", "X"]),
                  (sentence("a"), ["X"])]
        templates = make_templates(["form@0", "form@-1"])
        trained = train_averaged_perceptron(templates, corpus, epochs=3)

        # independent reference: explicit snapshots after every instance
        labels = sorted({lab for _, g in corpus for lab in g})
        L = len(labels)
        feature_index = {}
        for s, _ in corpus:
            for i in range(len(s)):
                for f in extract_features(templates, s.tokens, i):
                    feature_index.setdefault(f, len(feature_index))
        F = len(feature_index)
        W = np.zeros((F, L))
        T = np.zeros((L + 1, L))
        snaps_w, snaps_t = [], []
        lindex = {lab: i for i, lab in enumerate(labels)}
        for _ in range(3):
            for s, gold in corpus:
                model = LinearModel(labels, templates, feature_index,
                                    W.copy(), T.copy())
                pred = viterbi_decode(model, s)[0]
                if pred != gold:
                    for i in range(len(s)):
                        ids = model.position_feature_ids(s.tokens, i)
                        g, p = lindex[gold[i]], lindex[pred[i]]
                        if g != p:
                            W[ids, g] += 1.0
                            W[ids, p] -= 1.0
                        pg = lindex[gold[i - 1]] if i else L
                        pp = lindex[pred[i - 1]] if i else L
                        if (pg, g) != (pp, p):
                            T[pg, g] += 1.0
                            T[pp, p] -= 1.0
                snaps_w.append(W.copy())
                snaps_t.append(T.copy())
        naive_w = sum(snaps_w) / len(snaps_w)
        naive_t = sum(snaps_t) / len(snaps_t)
        np.testing.assert_allclose(trained.emission_weights, naive_w, rtol=1e-9,
                                   atol=1e-12)
        np.testing.assert_allclose(trained.transition_weights, naive_t, rtol=1e-9,
                                   atol=1e-12)

    def test_epoch_callback(self):
        seen = []
        train_averaged_perceptron(
            make_templates(["form@0"]), self.separable_corpus(), epochs=3,
            on_epoch=lambda e, m, a: seen.append((e, a)))
        assert [e for e, _ in seen] == [1, 2, 3]
        assert seen[-1][1] >= seen[0][1]


class TestSerialization:
    def test_round_trip(self, tmp_path):
        rng = random.Random(11)
        m = random_linear_model(rng, ["A", "B"])
        p = tmp_path / "m.bin"
        save_linear_model(m, p)
        loaded = load_linear_model(p)
        assert loaded.labels == m.labels
        assert loaded.feature_index == m.feature_index
        assert np.array_equal(loaded.emission_weights, m.emission_weights)
        assert np.array_equal(loaded.transition_weights, m.transition_weights)
        s = random_form_sentence(rng, n=5)
        assert viterbi_decode(loaded, s) == viterbi_decode(m, s)

    def test_resave_byte_identical(self, tmp_path):
        m = random_linear_model(random.Random(12), ["A", "B"])
        p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
        save_linear_model(m, p1)
        save_linear_model(load_linear_model(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "junk.bin"
        p.write_bytes(b"not a model\n")
        with pytest.raises(ValueError):
            load_linear_model(p)
