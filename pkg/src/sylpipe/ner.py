"""BIO named-entity annotator, span extraction, and corpus preprocessing.

Decoding masks illegal BIO transitions (I-X after O or at the sentence
start, I-Y after an X entity), so tagger output never needs repair.
repair_bio exists for third-party files.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, replace

from .model import Sentence, Token
from .pos import POS_TEMPLATE_DESCRIPTORS, tag_pos
from .seqlabel import (TrainingError, make_templates, train_averaged_perceptron,
                       viterbi_decode)

ENTITY_TYPES = ("PER", "LOC", "ORG", "MISC")

NER_TEMPLATE_DESCRIPTORS = POS_TEMPLATE_DESCRIPTORS + (
    "pos@0", "pos@-1", "pos@-2", "pos@+1", "pos@+2",
    "pos@-1&pos@0", "pos@0&pos@+1",
)

GAZETTEER_DESCRIPTORS = ("gaz@0", "gaz@-1", "gaz@+1")


def ner_templates(with_gazetteer=False):
    descriptors = NER_TEMPLATE_DESCRIPTORS
    if with_gazetteer:
        descriptors = descriptors + GAZETTEER_DESCRIPTORS
    return make_templates(descriptors)


@dataclass(frozen=True)
class EntitySpan:
    """A typed entity over 1-based inclusive token indices."""

    type: str
    start: int
    end: int

    def __post_init__(self):
        if not (1 <= self.start <= self.end):
            raise ValueError(f"bad span boundaries [{self.start}, {self.end}]")


def tag_ner(model, sentence):
    """Return the sentence with ner_label set; output is always valid BIO."""
    if len(sentence) == 0:
        return sentence
    if any(t.pos_tag is None for t in sentence):
        raise ValueError("NER tagging requires POS tags on every token")
    labels, _ = viterbi_decode(model, sentence)
    return sentence.with_ner_labels(labels)


def train_ner(corpus, epochs=8, shuffle_seed=1, gazetteer=None,
              combine_top_k=0, templates=None, on_epoch=None):
    """Train a BIO model from (sentence, labels) pairs; sentences carry POS tags.

    combine_top_k > 0 turns on the one-shot pairwise feature-combination
    pass: the K feature pairs most often co-firing at mistaken positions
    after a probe epoch become conjunction features, then training restarts.
    """
    if templates is None:
        templates = ner_templates(with_gazetteer=gazetteer is not None)
    for sent, labels in corpus:
        for lab in labels:
            _split_bio(lab)
    return train_averaged_perceptron(templates, corpus, epochs=epochs,
                                     shuffle_seed=shuffle_seed,
                                     bio_constrained=True, gazetteer=gazetteer,
                                     combine_top_k=combine_top_k,
                                     on_epoch=on_epoch)


def _split_bio(label):
    if label == "O":
        return "O", None
    if len(label) > 2 and label[1] == "-" and label[0] in "BI":
        return label[0], label[2:]
    raise ValueError(f"bad BIO label {label!r}")


def is_valid_bio(labels):
    prev_marker, prev_type = "O", None
    for lab in labels:
        marker, etype = _split_bio(lab)
        if marker == "I" and (prev_marker == "O" or prev_type != etype):
            return False
        prev_marker, prev_type = marker, etype
    return True


def repair_bio(labels):
    """Turn each illegal I-X into B-X; valid sequences come back unchanged."""
    out = []
    prev_marker, prev_type = "O", None
    for lab in labels:
        marker, etype = _split_bio(lab)
        if marker == "I" and (prev_marker == "O" or prev_type != etype):
            marker = "B"
            lab = f"B-{etype}"
        out.append(lab)
        prev_marker, prev_type = marker, etype
    return out


def entity_spans(labels):
    """Maximal B-X (I-X)* runs as EntitySpans; labels must be valid BIO."""
    if not is_valid_bio(labels):
        raise ValueError("invalid BIO sequence; repair_bio it first")
    spans = []
    start = None
    etype = None
    for i, lab in enumerate(labels, start=1):
        marker, t = _split_bio(lab)
        if marker == "B":
            if start is not None:
                spans.append(EntitySpan(etype, start, i - 1))
            start, etype = i, t
        elif marker == "O":
            if start is not None:
                spans.append(EntitySpan(etype, start, i - 1))
            start, etype = None, None
    if start is not None:
        spans.append(EntitySpan(etype, start, len(labels)))
    return spans


def extract_entities(sentence):
    labels = [t.ner_label for t in sentence]
    if any(lab is None for lab in labels):
        raise ValueError("sentence has unset NER labels")
    return entity_spans(labels)


def labels_of_spans(spans, length):
    """Inverse of entity_spans for non-overlapping span lists."""
    labels = ["O"] * length
    for span in spans:
        if span.end > length:
            raise ValueError(f"span {span} exceeds sentence length {length}")
        if any(labels[k] != "O" for k in range(span.start - 1, span.end)):
            raise ValueError(f"span {span} overlaps another span")
        labels[span.start - 1] = f"B-{span.type}"
        for k in range(span.start, span.end):
            labels[k] = f"I-{span.type}"
    return labels


def merge_name_syllables(sentence):
    """Merge each contiguous PER-labeled syllable run into one B-PER token.

    Mirrors the preprocessing that turns per-syllable full-name annotation
    into word-level tokens; everything outside PER runs is untouched.
    """
    tokens = list(sentence.tokens)
    if not any(t.ner_label in ("B-PER", "I-PER") for t in tokens):
        return sentence
    # Indices shift, so any head links would dangle; merged output is
    # pre-parse data and drops them.
    out = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.ner_label in ("B-PER", "I-PER"):
            j = i + 1
            while j < len(tokens) and tokens[j].ner_label == "I-PER":
                j += 1
            form = "_".join(t.form for t in tokens[i:j])
            out.append(Token(index=len(out) + 1, form=form,
                             pos_tag=tok.pos_tag, ner_label="B-PER"))
            i = j
        else:
            out.append(Token(index=len(out) + 1, form=tok.form,
                             pos_tag=tok.pos_tag, ner_label=tok.ner_label))
            i += 1
    return Sentence(out)


def replace_gold_pos_with_predicted(corpus, pos_model):
    """Overwrite every sentence's POS column with the tagger's output."""
    return [tag_pos(pos_model, sent) for sent in corpus]


def parse_three_column(text):
    """Parse "form<TAB>pos<TAB>bio" lines into POS-tagged sentences."""
    sentences = []
    rows = []

    def flush():
        nonlocal rows
        if rows:
            sentences.append(Sentence(
                Token(index=i + 1, form=f, pos_tag=p, ner_label=lab)
                for i, (f, p, lab) in enumerate(rows)))
            rows = []

    for line_no, line in enumerate(unicodedata.normalize("NFC", text).split("\n"), start=1):
        if not line.strip():
            flush()
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise TrainingError(f"line {line_no}: expected 3 tab-separated columns, "
                                f"got {len(cols)}")
        rows.append(cols)
    flush()
    return sentences


def read_three_column(path):
    with open(path, encoding="utf-8") as fh:
        return parse_three_column(fh.read())


def dump_three_column(sentences):
    blocks = []
    for sent in sentences:
        blocks.append("\n".join(f"{t.form}\t{t.pos_tag}\t{t.ner_label}"
                                for t in sent.tokens))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def training_pairs(sentences):
    """3-column sentences -> (sentence stripped of NER, gold labels) pairs."""
    pairs = []
    for sent in sentences:
        labels = [t.ner_label for t in sent]
        if any(lab is None for lab in labels):
            raise TrainingError("NER corpus sentence missing a label")
        stripped = Sentence(replace(t, ner_label=None) for t in sent)
        pairs.append((stripped, labels))
    return pairs


def read_gazetteer(path):
    """One entry per line; entries are word forms with "_"-joined syllables."""
    entries = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            entry = unicodedata.normalize("NFC", line.strip())
            if entry:
                entries.add(entry)
    return frozenset(entries)
