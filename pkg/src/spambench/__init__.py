"""Few-shot spam-detection benchmark workbench.

Corpus ingestion for four public spam corpora, a tf-idf pipeline with six
baseline classifiers, train/test + few-shot sampling protocols, metric and
timing capture, and an experiment harness that scores external model runners
through a file-based prediction-exchange protocol.
"""

__version__ = "0.1.0"
