"""POS tagging annotator over the linear-chain engine."""

from __future__ import annotations

import unicodedata

from .model import Sentence, Token
from .seqlabel import (TrainingError, make_templates, train_averaged_perceptron,
                       viterbi_decode)

# Word-level context, affix, and shape features; every label stays legal at
# every position.
POS_TEMPLATE_DESCRIPTORS = (
    "form@0", "form@-1", "form@-2", "form@+1", "form@+2",
    "form@-1&form@0", "form@0&form@+1",
    "prefix1@0", "prefix2@0", "prefix3@0", "prefix4@0",
    "suffix1@0", "suffix2@0", "suffix3@0", "suffix4@0",
    "shape@0", "hasdigit@0", "hashyphen@0",
    "isfirst@0", "islast@0",
)


def pos_templates():
    return make_templates(POS_TEMPLATE_DESCRIPTORS)


def tag_pos(model, sentence):
    """Return the sentence with pos_tag set on every token; other fields untouched."""
    if len(sentence) == 0:
        return sentence
    labels, _ = viterbi_decode(model, sentence)
    return sentence.with_pos_tags(labels)


def train_pos(corpus, epochs=8, shuffle_seed=1, templates=None, on_epoch=None):
    """Train a tagging model from (sentence, tags) pairs or a parsed 2-column corpus."""
    if templates is None:
        templates = pos_templates()
    return train_averaged_perceptron(templates, corpus, epochs=epochs,
                                     shuffle_seed=shuffle_seed, on_epoch=on_epoch)


def parse_two_column(text):
    """Parse "form<TAB>tag" lines with blank-line sentence separation."""
    pairs = []
    forms = []
    tags = []

    def flush():
        nonlocal forms, tags
        if forms:
            sent = Sentence(Token(index=i + 1, form=f) for i, f in enumerate(forms))
            pairs.append((sent, tags))
            forms = []
            tags = []

    for line_no, line in enumerate(unicodedata.normalize("NFC", text).split("\n"), start=1):
        if not line.strip():
            flush()
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise TrainingError(f"line {line_no}: expected 2 tab-separated columns, "
                                f"got {len(cols)}")
        forms.append(cols[0])
        tags.append(cols[1])
    flush()
    return pairs


def read_two_column(path):
    with open(path, encoding="utf-8") as fh:
        return parse_two_column(fh.read())


def dump_two_column(pairs):
    blocks = []
    for sent, tags in pairs:
        blocks.append("\n".join(f"{t.form}\t{tag}" for t, tag in zip(sent.tokens, tags)))
    return "\n\n".join(blocks) + ("\n" if blocks else "")
