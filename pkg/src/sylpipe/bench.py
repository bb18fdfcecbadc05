"""Throughput measurement (words per second) and the kernel backend benchmark."""

from __future__ import annotations

import statistics
import time

import numpy as np

from . import _kernels, depparse, ner, pos, wseg
from .model import Document


def _word_count(sentences):
    return sum(len(s) for s in sentences)


def benchmark_throughput(pipeline, document, repetitions=3):
    """Median words/second over warm runs of the full pipeline.

    Model loading stays outside the timed region; one untimed warmup run
    triggers any JIT compilation first.
    """
    if isinstance(document, str):
        document = Document.from_text(document)
    if not document.raw_text.strip() and not document.sentences:
        raise ValueError("cannot benchmark an empty document")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    warm = pipeline.annotate(document)
    words = _word_count(warm.sentences)
    if words == 0:
        raise ValueError("document produced no tokens")
    rates = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        pipeline.annotate(document)
        dt = time.perf_counter() - t0
        rates.append(words / dt)
    return statistics.median(rates)


def benchmark_stages(pipeline, document, repetitions=3):
    """Per-stage words/second, median over warm runs.

    Downstream figures follow the pipeline-speed convention: the POS time is
    included in the NER and parse numbers (and the NER time in the parse
    number when the parser consumes NER labels).
    """
    if isinstance(document, str):
        document = Document.from_text(document)
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    stages = pipeline.order
    seg_model = pipeline.models.get("wseg")
    if seg_model is None:
        raise ValueError("stage benchmark needs a wseg stage")

    syllable_lists = wseg.split_and_tokenize(document.raw_text)
    if not syllable_lists:
        raise ValueError("cannot benchmark an empty document")

    # Warm pass, also producing the inputs each stage is timed on.
    segmented = [wseg.segment(seg_model, s) for s in syllable_lists]
    words = _word_count(segmented)
    tagged = ner_tagged = parsed = None
    if "pos" in stages:
        tagged = [pos.tag_pos(pipeline.models["pos"], s) for s in segmented]
    if "ner" in stages:
        ner_tagged = [ner.tag_ner(pipeline.models["ner"], s) for s in tagged]
    parser_uses_ner = "parse" in stages and pipeline.parser_uses_ner()
    if "parse" in stages:
        parse_input = ner_tagged if parser_uses_ner else tagged
        parsed = [depparse.parse_sentence(pipeline.models["parse"], s,
                                          use_ner_features=parser_uses_ner)
                  for s in parse_input]

    times = {kind: [] for kind in stages}
    for _ in range(repetitions):
        t0 = time.perf_counter()
        for s in syllable_lists:
            wseg.segment(seg_model, s)
        times["wseg"].append(time.perf_counter() - t0)
        if "pos" in stages:
            model = pipeline.models["pos"]
            t0 = time.perf_counter()
            for s in segmented:
                pos.tag_pos(model, s)
            times["pos"].append(time.perf_counter() - t0)
        if "ner" in stages:
            model = pipeline.models["ner"]
            t0 = time.perf_counter()
            for s in tagged:
                ner.tag_ner(model, s)
            times["ner"].append(time.perf_counter() - t0)
        if "parse" in stages:
            model = pipeline.models["parse"]
            parse_input = ner_tagged if parser_uses_ner else tagged
            t0 = time.perf_counter()
            for s in parse_input:
                depparse.parse_sentence(model, s, use_ner_features=parser_uses_ner)
            times["parse"].append(time.perf_counter() - t0)

    med = {kind: statistics.median(ts) for kind, ts in times.items()}
    rates = {"wseg": words / med["wseg"]}
    if "pos" in med:
        rates["pos"] = words / med["pos"]
    if "ner" in med:
        rates["ner"] = words / (med["pos"] + med["ner"])
    if "parse" in med:
        t = med["pos"] + med["parse"]
        if parser_uses_ner:
            t += med["ner"]
        rates["parse"] = words / t
    return rates, words


def compare_kernels(lattice_shape=(40, 24), n_lattices=200, gather_rows=30,
                    repetitions=3, seed=7):
    """Time the numba and numpy kernel paths on synthetic inputs.

    Returns a list of (kernel, backend, seconds) rows. The numba rows are
    absent when the numba path is unavailable (SYLPIPE_NO_NUMBA=1 or numba
    missing).
    """
    rng = np.random.default_rng(seed)
    T, L = lattice_shape
    emissions = [rng.standard_normal((T, L)) for _ in range(n_lattices)]
    trans = rng.standard_normal((L, L))
    start = rng.standard_normal(L)
    weights = rng.standard_normal((5000, L))
    id_sets = [rng.integers(0, 5000, size=gather_rows).astype(np.int64)
               for _ in range(n_lattices)]
    path = np.empty(T, dtype=np.int64)
    out = np.empty(L)

    backends = [("numpy", _kernels._viterbi_numpy, _kernels._row_sum_numpy)]
    if _kernels.HAVE_NUMBA:
        backends.append(("numba", _kernels._viterbi_numba, _kernels._row_sum_numba))

    rows = []
    for name, viterbi_fn, row_sum_fn in backends:
        viterbi_fn(emissions[0], trans, start, path)  # warm / compile
        best = None
        for _ in range(repetitions):
            t0 = time.perf_counter()
            for em in emissions:
                viterbi_fn(em, trans, start, path)
            dt = time.perf_counter() - t0
            best = dt if best is None else min(best, dt)
        rows.append(("viterbi", name, best))

        row_sum_fn(weights, id_sets[0], out)
        best = None
        for _ in range(repetitions):
            t0 = time.perf_counter()
            for ids in id_sets:
                row_sum_fn(weights, ids, out)
            dt = time.perf_counter() - t0
            best = dt if best is None else min(best, dt)
        rows.append(("row_sum", name, best))
    return rows


def format_kernel_report(rows):
    lines = [f"active backend: {_kernels.BACKEND}"]
    for kernel, backend, seconds in rows:
        lines.append(f"{kernel:<8} {backend:<6} {seconds * 1e3:8.2f} ms")
    return "\n".join(lines)
