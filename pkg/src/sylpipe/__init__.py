"""sylpipe: word segmentation, POS tagging, NER and dependency parsing
for syllable-scripted text, built for throughput.

Typical use mirrors the command line::

    import sylpipe

    pipe = sylpipe.build_pipeline(("wseg", "pos", "ner", "parse"), model_dir="models")
    doc = pipe.annotate("Ông Nguyễn Khắc Chúc đang làm việc tại Đại học Quốc gia Hà Nội.")
    print(doc.to_text())
"""

from .model import (Document, FormatError, Sentence, Token, dump_six_column,
                    from_six_column, read_six_column, to_six_column,
                    write_six_column)
from .pipeline import (ANNOTATOR_KINDS, AnnotationError, ModelLoadError,
                       Pipeline, PipelineConfigError, build_pipeline)

__version__ = "0.1.0"

__all__ = [
    "ANNOTATOR_KINDS",
    "AnnotationError",
    "Document",
    "FormatError",
    "ModelLoadError",
    "Pipeline",
    "PipelineConfigError",
    "Sentence",
    "Token",
    "build_pipeline",
    "dump_six_column",
    "from_six_column",
    "read_six_column",
    "to_six_column",
    "write_six_column",
    "__version__",
]
