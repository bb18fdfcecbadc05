"""Shared generators for randomized tests: models, sentences, trees, text."""

import random

import numpy as np

from sylpipe import depparse, seqlabel
from sylpipe.model import Sentence, Token

FORMS = ["xe", "máy", "nhà", "sông", "núi", "trời", "đất", "cây", "hoa",
         "chim", "cá", "đi", "về", "lớn", "nhỏ", "ba", "mẹ", "em", "anh",
         "chị", "Hà", "Nội", "Việt", "Nam", "."]

POS_TAGS = ["N", "V", "A", "R", "E", "CH", "Np", "P", "M"]

RELATIONS = ["root", "sub", "dob", "nmod", "adv", "loc", "pob", "punct", "det"]

NER_LABELS = ["O", "B-PER", "I-PER", "B-LOC", "I-LOC", "B-ORG", "I-ORG",
              "B-MISC", "I-MISC"]


def random_form_sentence(rng, n=None, forms=FORMS, with_pos=False):
    if n is None:
        n = rng.randint(1, 8)
    tokens = []
    for i in range(n):
        tokens.append(Token(index=i + 1, form=rng.choice(forms),
                            pos_tag=rng.choice(POS_TAGS) if with_pos else None))
    return Sentence(tokens)


def random_linear_model(rng, labels, templates=None, forms=FORMS, lo=-5, hi=5):
    """Integer-weight model over features of the given forms (exact arithmetic)."""
    if templates is None:
        templates = seqlabel.make_templates(["form@0", "form@-1", "form@+1"])
    feature_index = {}
    probe = Sentence(Token(index=i + 1, form=f) for i, f in enumerate(forms))
    for i in range(len(forms)):
        for f in seqlabel.extract_features(templates, probe.tokens, i):
            feature_index.setdefault(f, len(feature_index))
    L = len(labels)
    F = len(feature_index)
    W = np.array([[rng.randint(lo, hi) for _ in range(L)] for _ in range(F)],
                 dtype=np.float64)
    T = np.array([[rng.randint(lo, hi) for _ in range(L)] for _ in range(L + 1)],
                 dtype=np.float64)
    return seqlabel.LinearModel(labels, templates, feature_index, W, T)


def random_annotated_sentence(rng, max_len=12):
    """A fully valid random Sentence: forms, optional POS, canonical NER, maybe a tree."""
    n = rng.randint(1, max_len)
    forms = [rng.choice(FORMS) for _ in range(n)]
    pos_tags = [rng.choice(POS_TAGS) if rng.random() < 0.8 else None
                for _ in range(n)]
    labels = random_bio_labels(rng, n)
    if rng.random() < 0.7:
        heads, deps = random_projective_heads(rng, n)
    else:
        heads = [None] * n
        deps = [None] * n
    return Sentence(
        Token(index=i + 1, form=forms[i], pos_tag=pos_tags[i],
              ner_label=labels[i], head=heads[i], dep_label=deps[i])
        for i in range(n))


def random_bio_labels(rng, n):
    labels = []
    current = None
    for _ in range(n):
        if current is not None and rng.random() < 0.5:
            labels.append(f"I-{current}")
            continue
        if rng.random() < 0.3:
            current = rng.choice(["PER", "LOC", "ORG", "MISC"])
            labels.append(f"B-{current}")
        else:
            current = None
            labels.append("O")
    return labels


def random_projective_heads(rng, n, relations=RELATIONS):
    """Uniform-ish random projective single-rooted tree over n tokens."""
    heads = [0] * (n + 1)
    labels = [None] * (n + 1)

    def build(lo, hi, head):
        if lo > hi:
            return
        m = rng.randint(lo, hi)
        heads[m] = head
        labels[m] = "root" if head == 0 else rng.choice(relations[1:])
        build(lo, m - 1, m)
        build(m + 1, hi, m)

    build(1, n, 0)
    return heads[1:], labels[1:]


def random_gold_tree(rng, n):
    heads, deps = random_projective_heads(rng, n)
    return Sentence(
        Token(index=i + 1, form=rng.choice(FORMS), pos_tag=rng.choice(POS_TAGS),
              head=heads[i], dep_label=deps[i])
        for i in range(n))


def random_parser_model(rng, relations=("root", "nmod", "sub", "dep"), lo=-5, hi=5):
    """Integer-weight parser model over a fixed synthetic feature inventory."""
    feature_index = {}
    # Touch a spread of states to populate the feature alphabet.
    probe_rng = random.Random(12345)
    for _ in range(60):
        sent = random_form_sentence(probe_rng, n=probe_rng.randint(1, 10),
                                    with_pos=True)
        state = depparse.ParserState(len(sent))
        while not state.is_terminal():
            for f in depparse.state_features(state, sent.tokens):
                feature_index.setdefault(f, len(feature_index))
            kinds = depparse.legal_kinds(state)
            kind = probe_rng.choice(sorted(kinds))
            label = "nmod" if kind in (depparse.LEFT_ARC, depparse.RIGHT_ARC) else None
            if kind == depparse.RIGHT_ARC and state.stack_top() == 0:
                label = "root"
            state.apply((kind, label))
    A = 2 * len(relations) + 2
    W = np.array([[rng.randint(lo, hi) for _ in range(A)]
                  for _ in range(len(feature_index))], dtype=np.float64)
    return depparse.ParserModel(sorted(relations), feature_index, W,
                                root_labels=("root",), root_label="root")


def check_tree(heads):
    """Independent single-root and acyclicity check over 1-based heads."""
    n = len(heads)
    roots = [i + 1 for i, h in enumerate(heads) if h == 0]
    if len(roots) != 1:
        return False
    for start in range(1, n + 1):
        seen = set()
        node = start
        while node != 0:
            if node in seen:
                return False
            seen.add(node)
            node = heads[node - 1]
    return True


def synthetic_raw_text(n_words, seed=42):
    """Deterministic plain text of roughly n_words words for throughput runs."""
    rng = random.Random(seed)
    with open("tests/data/toy/wseg.txt", encoding="utf-8") as fh:
        vocab = sorted({w for line in fh for w in line.split()if w != "."})
    lines = []
    words = 0
    while words < n_words:
        n = rng.randint(12, 18)
        sent = [rng.choice(vocab) for _ in range(n)]
        lines.append(" ".join(w.replace("_", " ") for w in sent) + " .")
        words += n + 1
    return "\n".join(lines) + "\n"
