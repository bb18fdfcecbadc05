import os

import pytest

from sylpipe import depparse, ner, pos, wseg
from sylpipe.model import Sentence, Token, read_six_column
from sylpipe.seqlabel import save_linear_model

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")
TOY_DIR = os.path.join(DATA_DIR, "toy")

DEMO_INPUT = os.path.join(DATA_DIR, "demo_input.txt")
DEMO_ANNOTATED = os.path.join(DATA_DIR, "demo_annotated.txt")


@pytest.fixture(scope="session")
def toy_seg_corpus():
    return wseg.read_segmented_corpus(os.path.join(TOY_DIR, "wseg.txt"))


@pytest.fixture(scope="session")
def toy_pos_corpus():
    return pos.read_two_column(os.path.join(TOY_DIR, "pos.tsv"))


@pytest.fixture(scope="session")
def toy_ner_sentences():
    return ner.read_three_column(os.path.join(TOY_DIR, "ner.tsv"))


@pytest.fixture(scope="session")
def toy_treebank():
    return read_six_column(os.path.join(TOY_DIR, "parse.conll"))


@pytest.fixture(scope="session")
def seg_model(toy_seg_corpus):
    return wseg.train_segmenter(toy_seg_corpus)


@pytest.fixture(scope="session")
def pos_model(toy_pos_corpus):
    return pos.train_pos(toy_pos_corpus)


@pytest.fixture(scope="session")
def ner_model(toy_ner_sentences):
    return ner.train_ner(ner.training_pairs(toy_ner_sentences))


@pytest.fixture(scope="session")
def parse_model(toy_treebank):
    return depparse.train_parser(toy_treebank, epochs=12)


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory, seg_model, pos_model, ner_model, parse_model):
    path = tmp_path_factory.mktemp("models")
    wseg.save_segmenter(seg_model, path / "wseg.model")
    save_linear_model(pos_model, path / "pos.model")
    save_linear_model(ner_model, path / "ner.model")
    depparse.save_parser(parse_model, path / "parse.model")
    return path


def strip_annotations(sentence, keep_pos=False, keep_ner=False):
    return Sentence(
        Token(index=t.index, form=t.form,
              pos_tag=t.pos_tag if keep_pos else None,
              ner_label=t.ner_label if keep_ner else None)
        for t in sentence)
