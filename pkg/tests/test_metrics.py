import random

import pytest

from helpers import random_bio_labels
from sylpipe.metrics import (AlignmentError, AttachmentScores, ChunkF1, PRF,
                             attachment_scores, chunk_f1, prf, report_lines,
                             segmentation_f1, tagging_accuracy)
from sylpipe.model import Sentence, Token, from_six_column

FIXTURE_BLOCK = """1\tÔng\tNc\tO\t4\tsub
2\tNguyễn_Khắc_Chúc\tNp\tB-PER\t1\tnmod
3\tđang\tR\tO\t4\tadv
4\tlàm_việc\tV\tO\t0\troot
5\ttại\tE\tO\t4\tloc
6\tĐại_học\tN\tB-ORG\t5\tpob
7\tQuốc_gia\tN\tI-ORG\t6\tnmod
8\tHà_Nội\tNp\tI-ORG\t6\tnmod
9\t.\tCH\tO\t4\tpunct"""


class TestSegmentationF1:
    def test_identical(self):
        s = segmentation_f1([["a_b", "c"]], [["a_b", "c"]])
        assert (s.precision, s.recall, s.f1) == (1.0, 1.0, 1.0)

    def test_no_overlap(self):
        s = segmentation_f1([["a_b", "c"]], [["a", "b_c"]])
        assert s.f1 == 0.0

    def test_two_fifths_case(self):
        s = segmentation_f1([["a_b", "c", "d"]], [["a_b", "c_d"]])
        assert s.precision == 1 / 2
        assert s.recall == 1 / 3
        assert s.f1 == pytest.approx(2 / 5)

    def test_syllable_mismatch(self):
        with pytest.raises(AlignmentError):
            segmentation_f1([["a_b"]], [["a_c"]])

    def test_sentence_count_mismatch(self):
        with pytest.raises(AlignmentError):
            segmentation_f1([["a"]], [["a"], ["b"]])

    def test_symmetric_swap(self):
        gold = [["a_b", "c", "d"]]
        pred = [["a_b", "c_d"]]
        fwd = segmentation_f1(gold, pred)
        rev = segmentation_f1(pred, gold)
        assert fwd.precision == rev.recall
        assert fwd.recall == rev.precision
        assert fwd.f1 == rev.f1


class TestTaggingAccuracy:
    def test_identical(self):
        assert tagging_accuracy([["A", "B"]], [["A", "B"]]) == 1.0

    def test_all_different(self):
        assert tagging_accuracy([["A", "B"]], [["B", "A"]]) == 0.0

    def test_eight_of_nine(self):
        gold = [list("ABCDEFGHI")]
        pred = [list("ABCDEFGHX")]
        assert tagging_accuracy(gold, pred) == pytest.approx(8 / 9)

    def test_length_mismatch(self):
        with pytest.raises(AlignmentError):
            tagging_accuracy([["A"]], [["A", "B"]])


class TestChunkF1:
    GOLD = [["O", "B-PER", "O", "O", "O", "B-ORG", "I-ORG", "I-ORG", "O"]]

    def test_identical(self):
        score = chunk_f1(self.GOLD, self.GOLD)
        assert score.overall.f1 == 1.0
        assert set(score.by_type) == {"PER", "ORG"}

    def test_half_recall(self):
        pred = [["O", "B-PER", "O", "O", "O", "O", "O", "O", "O"]]
        score = chunk_f1(self.GOLD, pred)
        assert score.overall.precision == 1.0
        assert score.overall.recall == 0.5
        assert score.overall.f1 == pytest.approx(2 / 3)

    def test_boundary_off_by_one_counts_twice(self):
        pred = [["O", "B-PER", "O", "O", "O", "B-ORG", "I-ORG", "O", "O"]]
        score = chunk_f1(self.GOLD, pred)
        # ORG[6,7] is a false positive AND ORG[6,8] a false negative
        org = score.by_type["ORG"]
        assert org.correct == 0
        assert org.predicted == 1
        assert org.gold == 1

    def test_invalid_bio_rejected(self):
        with pytest.raises(ValueError):
            chunk_f1([["O", "I-PER"]], [["O", "O"]])
        with pytest.raises(ValueError):
            chunk_f1([["O", "O"]], [["O", "I-PER"]])

    def test_micro_average_equals_pooled_counts(self):
        rng = random.Random(13)
        gold = [random_bio_labels(rng, rng.randint(1, 10)) for _ in range(50)]
        pred = [random_bio_labels(rng, len(g)) for g in gold]
        score = chunk_f1(gold, pred)
        c = sum(s.correct for s in score.by_type.values())
        p = sum(s.predicted for s in score.by_type.values())
        g = sum(s.gold for s in score.by_type.values())
        assert score.overall == prf(c, p, g)

    def test_symmetric_swap(self):
        rng = random.Random(14)
        gold = [random_bio_labels(rng, 8) for _ in range(20)]
        pred = [random_bio_labels(rng, 8) for _ in range(20)]
        fwd = chunk_f1(gold, pred).overall
        rev = chunk_f1(pred, gold).overall
        assert fwd.precision == rev.recall
        assert fwd.recall == rev.precision
        assert fwd.f1 == rev.f1


class TestAttachmentScores:
    def fixture(self):
        return from_six_column(FIXTURE_BLOCK)[0]

    def change(self, sent, i, head=None, dep=None):
        heads = [t.head for t in sent]
        deps = [t.dep_label for t in sent]
        if head is not None:
            heads[i] = head
        if dep is not None:
            deps[i] = dep
        return sent.with_parse(heads, deps)

    def test_identical(self):
        s = self.fixture()
        scores = attachment_scores([s], [s])
        assert scores.las == 1.0 and scores.uas == 1.0
        assert scores.token_count == 9

    def test_one_head_changed(self):
        s = self.fixture()
        pred = self.change(s, 8, head=6)  # "." attached elsewhere
        scores = attachment_scores([s], [pred])
        assert scores.uas == pytest.approx(8 / 9)
        assert scores.las == pytest.approx(8 / 9)

    def test_label_only_wrong(self):
        s = self.fixture()
        pred = self.change(s, 2, dep="nmod")
        scores = attachment_scores([s], [pred])
        assert scores.uas == 1.0
        assert scores.las == pytest.approx(8 / 9)

    def test_las_never_exceeds_uas(self):
        rng = random.Random(15)
        from helpers import random_gold_tree
        for _ in range(50):
            g = random_gold_tree(rng, rng.randint(1, 10))
            p = random_gold_tree(rng, len(g))
            p = Sentence(Token(t.index, g[i].form, pos_tag=t.pos_tag,
                               head=t.head, dep_label=t.dep_label)
                         for i, t in enumerate(p))
            scores = attachment_scores([g], [p])
            assert scores.las <= scores.uas

    def test_misalignment(self):
        s = self.fixture()
        other = Sentence([Token(index=1, form="x", head=0, dep_label="root")])
        with pytest.raises(AlignmentError):
            attachment_scores([s], [other])

    def test_punctuation_counted(self):
        s = self.fixture()
        # flipping only the punctuation head must move the score
        pred = self.change(s, 8, head=1)
        assert attachment_scores([s], [pred]).uas < 1.0


def test_report_lines():
    lines = report_lines({"f1": 0.5, "tokens": 9})
    assert lines == ["f1=0.5000", "tokens=9"]


def test_prf_zero_denominators():
    assert prf(0, 0, 0) == PRF(0.0, 0.0, 0.0, 0, 0, 0)
