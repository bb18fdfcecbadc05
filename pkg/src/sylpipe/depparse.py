"""Greedy arc-eager transition-based dependency parser.

Transitions score through a multiclass linear model trained with the
averaged perceptron along static-oracle sequences. Decoding keeps the
output a single-rooted tree: arcs from the artificial root are restricted
to the root relation and to one dependent, and any tokens left unattached
at termination are attached afterwards (the first to the root if none was
chosen, the rest to the root token with a fallback relation).
"""

from __future__ import annotations

import json
import logging
import random

import numpy as np

from . import _kernels
from ._kernels import NEG_INF
from .model import Sentence
from .seqlabel import TrainingError

logger = logging.getLogger(__name__)

SHIFT = "SHIFT"
LEFT_ARC = "LEFT-ARC"
RIGHT_ARC = "RIGHT-ARC"
REDUCE = "REDUCE"

FALLBACK_LABEL = "dep"
DEFAULT_ROOT_LABEL = "root"

_ROOT_VALUE = "<root>"
_NONE_VALUE = "<none>"


class IllegalTransition(ValueError):
    pass


class OracleError(ValueError):
    pass


class ParserState:
    """Stack/buffer/arc configuration over tokens 1..n (0 is the root)."""

    __slots__ = ("n", "stack", "buffer_start", "heads", "labels",
                 "lchild", "rchild", "lval", "rval", "root_child")

    def __init__(self, n):
        self.n = n
        self.stack = [0]
        self.buffer_start = 1
        self.heads = [None] * (n + 1)
        self.labels = [None] * (n + 1)
        self.lchild = [0] * (n + 1)
        self.rchild = [0] * (n + 1)
        self.lval = [0] * (n + 1)
        self.rval = [0] * (n + 1)
        self.root_child = None

    def copy(self):
        other = ParserState.__new__(ParserState)
        other.n = self.n
        other.stack = list(self.stack)
        other.buffer_start = self.buffer_start
        other.heads = list(self.heads)
        other.labels = list(self.labels)
        other.lchild = list(self.lchild)
        other.rchild = list(self.rchild)
        other.lval = list(self.lval)
        other.rval = list(self.rval)
        other.root_child = self.root_child
        return other

    @property
    def buffer(self):
        return range(self.buffer_start, self.n + 1)

    def buffer_front(self):
        return self.buffer_start if self.buffer_start <= self.n else None

    def stack_top(self):
        return self.stack[-1] if self.stack else None

    def is_terminal(self):
        return self.buffer_start > self.n

    @property
    def arcs(self):
        return {(self.heads[d], d, self.labels[d])
                for d in range(1, self.n + 1) if self.heads[d] is not None}

    def _add_arc(self, head, dep, label):
        self.heads[dep] = head
        self.labels[dep] = label
        if dep < head:
            if self.lchild[head] == 0 or dep < self.lchild[head]:
                self.lchild[head] = dep
            self.lval[head] += 1
        else:
            if dep > self.rchild[head]:
                self.rchild[head] = dep
            self.rval[head] += 1
        if head == 0:
            self.root_child = dep

    def apply(self, transition):
        kind, label = transition
        if kind not in legal_kinds(self):
            raise IllegalTransition(f"{kind} is not legal in this state")
        if kind in (LEFT_ARC, RIGHT_ARC):
            if label is None:
                raise IllegalTransition(f"{kind} requires a relation label")
        elif label is not None:
            raise IllegalTransition(f"{kind} takes no relation label")
        if kind == SHIFT:
            self.stack.append(self.buffer_start)
            self.buffer_start += 1
        elif kind == LEFT_ARC:
            s = self.stack.pop()
            self._add_arc(self.buffer_start, s, label)
        elif kind == RIGHT_ARC:
            b = self.buffer_start
            self._add_arc(self.stack[-1], b, label)
            self.stack.append(b)
            self.buffer_start += 1
        else:  # REDUCE
            self.stack.pop()
        return self


def initial_state(n):
    return ParserState(n)


def legal_kinds(state):
    kinds = set()
    has_buffer = state.buffer_start <= state.n
    s = state.stack_top()
    if has_buffer:
        kinds.add(SHIFT)
        if s is not None:
            kinds.add(RIGHT_ARC)
        if s is not None and s != 0 and state.heads[s] is None:
            kinds.add(LEFT_ARC)
    if s is not None and s != 0 and state.heads[s] is not None:
        kinds.add(REDUCE)
    return kinds


def legal_transitions(state, relations):
    """All legal transitions, arc kinds expanded over the relation alphabet."""
    out = set()
    kinds = legal_kinds(state)
    if SHIFT in kinds:
        out.add((SHIFT, None))
    if REDUCE in kinds:
        out.add((REDUCE, None))
    for rel in relations:
        if LEFT_ARC in kinds:
            out.add((LEFT_ARC, rel))
        if RIGHT_ARC in kinds:
            out.add((RIGHT_ARC, rel))
    return out


def apply_transition(state, transition):
    """Functional transition application; raises IllegalTransition when illegal."""
    return state.copy().apply(transition)


def find_crossing_arcs(heads):
    """First pair of crossing arcs in a head list (1-based heads incl. 0), or None."""
    arcs = []
    for dep, head in enumerate(heads, start=1):
        lo, hi = (head, dep) if head < dep else (dep, head)
        arcs.append((lo, hi, head, dep))
    arcs.sort()
    for i in range(len(arcs)):
        lo1, hi1, h1, d1 = arcs[i]
        for j in range(i + 1, len(arcs)):
            lo2, hi2, h2, d2 = arcs[j]
            if lo2 >= hi1:
                break
            if lo1 < lo2 < hi1 < hi2:
                return (h1, d1), (h2, d2)
    return None


def is_projective(heads):
    return find_crossing_arcs(heads) is None


def static_oracle(sentence):
    """Canonical arc-eager transition sequence reproducing the gold tree.

    Prefers LEFT-ARC, then RIGHT-ARC, then REDUCE when the buffer front has
    business left of the stack top, else SHIFT. Raises OracleError on
    non-projective input, naming the crossing arc pair.
    """
    n = len(sentence)
    gold_head = [-1] + [t.head for t in sentence]
    gold_label = [None] + [t.dep_label for t in sentence]
    if any(h is None for h in gold_head[1:]):
        raise OracleError("gold tree has unset heads")
    crossing = find_crossing_arcs(gold_head[1:])
    if crossing is not None:
        raise OracleError(f"non-projective tree: arcs {crossing[0]} and "
                          f"{crossing[1]} cross")
    state = ParserState(n)
    seq = []
    while state.buffer_start <= n:
        s = state.stack[-1]
        b = state.buffer_start
        if s != 0 and gold_head[s] == b:
            t = (LEFT_ARC, gold_label[s])
        elif gold_head[b] == s:
            t = (RIGHT_ARC, gold_label[b])
        elif state.heads[s] is not None and any(
                gold_head[b] == k or (k != 0 and gold_head[k] == b)
                for k in state.stack[:-1]):
            t = (REDUCE, None)
        else:
            t = (SHIFT, None)
        seq.append(t)
        state.apply(t)
    return seq


def replay(transitions, n):
    """Run a transition sequence from the initial state; returns the end state."""
    state = ParserState(n)
    for t in transitions:
        state.apply(t)
    return state


def state_features(state, tokens, use_ner_features=False):
    """Feature strings for one parser configuration.

    tokens is the 0-based token tuple of the sentence; index 0 on the stack
    is the artificial root. NER-derived features all carry the "ner:" prefix
    so the with/without feature sets differ exactly in them.
    """
    def form(i):
        if i is None:
            return _NONE_VALUE
        if i == 0:
            return _ROOT_VALUE
        return tokens[i - 1].form

    def pos(i):
        if i is None:
            return _NONE_VALUE
        if i == 0:
            return _ROOT_VALUE
        tag = tokens[i - 1].pos_tag
        return tag if tag is not None else _NONE_VALUE

    def ner(i):
        if i is None:
            return _NONE_VALUE
        if i == 0:
            return _ROOT_VALUE
        lab = tokens[i - 1].ner_label
        return lab if lab is not None else _NONE_VALUE

    stack = state.stack
    s0 = stack[-1] if stack else None
    s1 = stack[-2] if len(stack) > 1 else None
    s2 = stack[-3] if len(stack) > 2 else None
    b0 = state.buffer_front()
    b1 = b0 + 1 if b0 is not None and b0 + 1 <= state.n else None
    b2 = b0 + 2 if b0 is not None and b0 + 2 <= state.n else None

    def child_pos(child):
        return pos(child) if child else _NONE_VALUE

    s0w, s0p = form(s0), pos(s0)
    b0w, b0p = form(b0), pos(b0)
    b1p = pos(b1)
    if s0 is not None and b0 is not None:
        d = b0 - s0
        dist = str(d) if d <= 4 else "5+"
    else:
        dist = _NONE_VALUE

    def val(v):
        return str(v) if v <= 2 else "3+"

    feats = [
        "s0w=" + s0w,
        "s0p=" + s0p,
        "s1p=" + pos(s1),
        "s2p=" + pos(s2),
        "b0w=" + b0w,
        "b0p=" + b0p,
        "b1w=" + form(b1),
        "b1p=" + b1p,
        "b2p=" + pos(b2),
        "s0p|b0p=" + s0p + "|" + b0p,
        "s0w|b0w=" + s0w + "|" + b0w,
        "s0w|b0p=" + s0w + "|" + b0p,
        "s0p|b0w=" + s0p + "|" + b0w,
        "b0p|b1p=" + b0p + "|" + b1p,
        "s0p|b0p|b1p=" + s0p + "|" + b0p + "|" + b1p,
        "s1p|s0p|b0p=" + pos(s1) + "|" + s0p + "|" + b0p,
        "s0lcp=" + (child_pos(state.lchild[s0]) if s0 is not None else _NONE_VALUE),
        "s0rcp=" + (child_pos(state.rchild[s0]) if s0 is not None else _NONE_VALUE),
        "b0lcp=" + (child_pos(state.lchild[b0]) if b0 is not None else _NONE_VALUE),
        "dist=" + dist,
        "s0p|b0p|dist=" + s0p + "|" + b0p + "|" + dist,
        "s0lv=" + (val(state.lval[s0]) if s0 is not None else _NONE_VALUE),
        "s0rv=" + (val(state.rval[s0]) if s0 is not None else _NONE_VALUE),
        "b0lv=" + (val(state.lval[b0]) if b0 is not None else _NONE_VALUE),
    ]
    if use_ner_features:
        s0n, b0n = ner(s0), ner(b0)
        feats.append("ner:s0n=" + s0n)
        feats.append("ner:b0n=" + b0n)
        feats.append("ner:s0n|b0n=" + s0n + "|" + b0n)
    return feats


class ParserModel:
    """Multiclass linear model over (feature, transition) pairs."""

    def __init__(self, relations, feature_index, weights, use_ner_features=False,
                 root_labels=(DEFAULT_ROOT_LABEL,), root_label=DEFAULT_ROOT_LABEL,
                 fallback_label=FALLBACK_LABEL):
        self.relations = list(relations)
        if not self.relations or len(set(self.relations)) != len(self.relations):
            raise ValueError("relation alphabet must be non-empty and duplicate-free")
        # Fixed tie-break order: SHIFT, LEFT-ARCs, RIGHT-ARCs, REDUCE;
        # labels in alphabet order inside each arc block.
        self.actions = [(SHIFT, None)]
        self.actions += [(LEFT_ARC, rel) for rel in self.relations]
        self.actions += [(RIGHT_ARC, rel) for rel in self.relations]
        self.actions.append((REDUCE, None))
        self.action_index = {a: i for i, a in enumerate(self.actions)}
        self.feature_index = dict(feature_index)
        self.weights = np.ascontiguousarray(weights, dtype=np.float64)
        if self.weights.shape != (len(self.feature_index), len(self.actions)):
            raise ValueError("weight shape mismatch")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite")
        self.use_ner_features = bool(use_ner_features)
        self.root_labels = tuple(root_labels)
        self.root_label = root_label
        self.fallback_label = fallback_label

    def feature_ids(self, feats):
        index = self.feature_index
        ids = {index[f] for f in feats if f in index}
        return np.asarray(sorted(ids), dtype=np.int64)

    def action_mask(self, state):
        """Legal-action mask incl. the single-root decode constraint."""
        return _legal_action_mask(state, len(self.relations), self.root_labels,
                                  self.action_index)


def _legal_action_mask(state, n_relations, root_labels, action_index):
    # Arcs from the artificial root only carry a root relation and only
    # while the root has no dependent yet; everything else follows
    # legal_kinds. Keeps greedy output single-rooted.
    mask = np.zeros(2 * n_relations + 2, dtype=bool)
    kinds = legal_kinds(state)
    if SHIFT in kinds:
        mask[0] = True
    if LEFT_ARC in kinds:
        mask[1:1 + n_relations] = True
    if RIGHT_ARC in kinds:
        if state.stack_top() == 0:
            if state.root_child is None:
                for rel in root_labels:
                    mask[action_index[(RIGHT_ARC, rel)]] = True
        else:
            mask[1 + n_relations:1 + 2 * n_relations] = True
    if REDUCE in kinds:
        mask[-1] = True
    return mask


def _check_pre(sentence, use_ner):
    if any(t.pos_tag is None for t in sentence):
        raise ValueError("parsing requires POS tags on every token")
    if use_ner and any(t.ner_label is None for t in sentence):
        raise ValueError("this parser uses NER features; run NER first")


def parse_sentence(model, sentence, use_ner_features=None):
    """Greedy parse; the result always has exactly one root and no cycles."""
    n = len(sentence)
    if n == 0:
        return sentence
    use_ner = model.use_ner_features if use_ner_features is None else use_ner_features
    _check_pre(sentence, use_ner)
    tokens = sentence.tokens
    state = ParserState(n)
    W = model.weights
    while state.buffer_start <= n:
        feats = state_features(state, tokens, use_ner)
        scores = _kernels.row_sum(W, model.feature_ids(feats))
        mask = model.action_mask(state)
        scores[~mask] = NEG_INF
        state.apply(model.actions[int(np.argmax(scores))])

    heads = state.heads
    labels = state.labels
    headless = [i for i in range(1, n + 1) if heads[i] is None]
    root = state.root_child
    if root is None:
        root = headless.pop(0)
        heads[root] = 0
        labels[root] = model.root_label
    for i in headless:
        heads[i] = root
        labels[i] = model.fallback_label
    return sentence.with_parse(heads[1:], labels[1:])


def _lift_to_projective(heads):
    """Head-lifting until projective; returns new heads or None if stuck.

    A crossing arc's dependent moves to its grandparent. Lifts that would
    make the dependent a second root-child are not taken.
    """
    heads = list(heads)
    guard = len(heads) * len(heads) + 10
    while guard > 0:
        guard -= 1
        crossing = find_crossing_arcs(heads)
        if crossing is None:
            return heads
        lifted = False
        for h, d in (crossing[1], crossing[0]):
            if h == 0:
                continue  # arcs from the root cannot be lifted
            grand = heads[h - 1]
            if grand == 0 or grand == d:
                continue
            heads[d - 1] = grand
            lifted = True
            break
        if not lifted:
            return None
    return None


def projectivize(sentence):
    """Pseudo-projective copy of a gold sentence (labels kept), or None."""
    heads = [t.head for t in sentence]
    lifted = _lift_to_projective(heads)
    if lifted is None:
        return None
    return sentence.with_parse(lifted, [t.dep_label for t in sentence])


def train_parser(treebank, epochs=10, shuffle_seed=1, use_ner_features=False,
                 nonprojective="skip", on_epoch=None):
    """Averaged perceptron over static-oracle transition sequences.

    Non-projective sentences are skipped (default) or pseudo-projectivized
    by head-lifting when nonprojective="lift"; the skip count is logged.
    """
    treebank = [s for s in treebank if len(s)]
    if not treebank:
        raise TrainingError("treebank is empty")
    if nonprojective not in ("skip", "lift"):
        raise ValueError(f"bad nonprojective mode {nonprojective!r}")
    if use_ner_features:
        for sent in treebank:
            if any(t.ner_label is None for t in sent):
                raise TrainingError("use_ner_features needs NER labels on every "
                                    "training token")
    for sent in treebank:
        if any(t.head is None or t.dep_label is None for t in sent):
            raise TrainingError("treebank sentence with unset heads or relations")
        if any(t.pos_tag is None for t in sent):
            raise TrainingError("treebank sentence with unset POS tags")

    usable = []
    skipped = 0
    for sent in treebank:
        if is_projective([t.head for t in sent]):
            usable.append(sent)
            continue
        if nonprojective == "lift":
            lifted = projectivize(sent)
            if lifted is not None:
                usable.append(lifted)
                continue
        skipped += 1
    if skipped:
        logger.info("skipped %d non-projective sentence(s) out of %d",
                    skipped, len(treebank))
    if not usable:
        raise TrainingError("no projective sentences left to train on")

    relations = sorted({t.dep_label for sent in usable for t in sent})
    root_counts = {}
    for sent in usable:
        for t in sent:
            if t.head == 0:
                root_counts[t.dep_label] = root_counts.get(t.dep_label, 0) + 1
    root_labels = tuple(sorted(root_counts))
    root_label = max(sorted(root_counts), key=lambda r: root_counts[r])

    # Replay each gold sequence once, freezing features, masks and gold
    # action ids per decision point.
    R = len(relations)
    actions = [(SHIFT, None)] + [(LEFT_ARC, r) for r in relations] + \
              [(RIGHT_ARC, r) for r in relations] + [(REDUCE, None)]
    action_index = {a: i for i, a in enumerate(actions)}
    A = len(actions)
    feature_index = {}
    per_sentence = []
    for sent in usable:
        seq = static_oracle(sent)
        state = ParserState(len(sent))
        steps = []
        for transition in seq:
            feats = state_features(state, sent.tokens, use_ner_features)
            ids = set()
            for f in feats:
                j = feature_index.setdefault(f, len(feature_index))
                ids.add(j)
            mask = _legal_action_mask(state, R, root_labels, action_index)
            steps.append((np.asarray(sorted(ids), dtype=np.int64), mask,
                          action_index[transition]))
            state.apply(transition)
        per_sentence.append(steps)

    F = len(feature_index)
    W = np.zeros((F, A))
    U = np.zeros((F, A))
    rng = random.Random(shuffle_seed) if shuffle_seed is not None else None
    order = list(range(len(per_sentence)))
    step = 0
    for epoch in range(epochs):
        if rng is not None:
            rng.shuffle(order)
        correct = 0
        total = 0
        for si in order:
            for ids, mask, gold_a in per_sentence[si]:
                step += 1
                scores = _kernels.row_sum(W, ids)
                scores[~mask] = NEG_INF
                pred = int(np.argmax(scores))
                total += 1
                if pred == gold_a:
                    correct += 1
                    continue
                W[ids, gold_a] += 1.0
                W[ids, pred] -= 1.0
                U[ids, gold_a] += step
                U[ids, pred] -= step
        if on_epoch is not None:
            on_epoch(epoch + 1, total - correct, correct / total if total else 1.0)

    if step > 0:
        W = ((step + 1) * W - U) / step
    return ParserModel(relations, feature_index, W,
                       use_ner_features=use_ner_features,
                       root_labels=root_labels, root_label=root_label)


MODEL_MAGIC = b"SYLPIPE-DEP1\n"


def save_parser(model, path):
    header = {
        "relations": model.relations,
        "use_ner": model.use_ner_features,
        "root_labels": list(model.root_labels),
        "root_label": model.root_label,
        "fallback_label": model.fallback_label,
        "feature_count": len(model.feature_index),
    }
    features = sorted(model.feature_index, key=model.feature_index.get)
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(json.dumps(header, sort_keys=True, ensure_ascii=True,
                            separators=(",", ":")).encode("utf-8"))
        fh.write(b"\n")
        for f in features:
            fh.write(f.encode("utf-8"))
            fh.write(b"\n")
        fh.write(b"WEIGHTS\n")
        fh.write(model.weights.astype("<f8").tobytes())


def load_parser(path):
    with open(path, "rb") as fh:
        if fh.readline() != MODEL_MAGIC:
            raise ValueError(f"{path}: not a parser model file")
        header = json.loads(fh.readline().decode("utf-8"))
        F = header["feature_count"]
        feature_index = {}
        for _ in range(F):
            feature_index[fh.readline().decode("utf-8").rstrip("\n")] = len(feature_index)
        if fh.readline() != b"WEIGHTS\n":
            raise ValueError(f"{path}: corrupt model file (missing weight section)")
        A = 2 * len(header["relations"]) + 2
        weights = np.frombuffer(fh.read(F * A * 8), dtype="<f8").reshape(F, A).copy()
    return ParserModel(header["relations"], feature_index, weights,
                       use_ner_features=header["use_ner"],
                       root_labels=header["root_labels"],
                       root_label=header["root_label"],
                       fallback_label=header["fallback_label"])


def read_conllx(path):
    """10-column CoNLL-X-style import: ID, FORM, _, POS, _, _, HEAD, DEPREL, _, _."""
    from .model import FormatError, Token

    sentences = []
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                if rows:
                    sentences.append(Sentence(rows))
                    rows = []
                continue
            if line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 10:
                raise FormatError(f"expected 10 tab-separated columns, got {len(cols)}",
                                  line=line_no)
            try:
                idx = int(cols[0])
                head = int(cols[6])
            except ValueError:
                raise FormatError("non-numeric index or head", line=line_no) from None
            if idx != len(rows) + 1:
                raise FormatError(f"token index {idx} breaks the 1..n sequence",
                                  line=line_no)
            rows.append(Token(index=idx, form=cols[1], pos_tag=cols[3],
                              head=head, dep_label=cols[7]))
    if rows:
        sentences.append(Sentence(rows))
    return sentences
