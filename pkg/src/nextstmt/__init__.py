"""Toolkit for next-statement completion of JVM unit tests.

Subpackages and modules:
    jclass     classfile parsing, writing, and type-level bytecode interpretation
    jsource    Java lexing, statement splitting, masking, subtokenization
    elements   code-element store, corpus construction, filtering, splits
    semantics  the six per-task semantic extractions
    predictor  model-input assembly plus retrieval/external predictors
    execution  harness synthesis, compile/run classification, reranking
    metrics    lexical/semantic metrics, significance testing, reports
    minijdk    bundled Java-subset toolchain used when no JDK is installed
"""

__version__ = "0.1.0"
