"""Token-count features over a train-built vocabulary."""

from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .errors import EmptyCorpus

TokenizedText = Sequence[str]


class TokenCountVectorizer(BaseEstimator, TransformerMixin):
    """Convert tokenized documents into a sparse matrix of token counts.

    The vocabulary is built exclusively from the documents passed to
    ``fit`` (the train split), ranked by document frequency with
    lexicographic tie-break, and optionally truncated to ``max_features``.
    Out-of-vocabulary tokens are ignored at transform time.
    """

    def __init__(self, max_features: int | None = None):
        self.max_features = max_features

    @classmethod
    def from_vocabulary(cls, vocabulary: dict[str, int]) -> "TokenCountVectorizer":
        """Rebuild a fitted vectorizer from a persisted vocabulary."""
        vec = cls()
        vec.vocabulary_ = dict(vocabulary)
        vec.document_frequencies_ = np.zeros(len(vocabulary), dtype=np.int64)
        return vec

    def fit(self, docs: Sequence[TokenizedText], y=None) -> "TokenCountVectorizer":
        if len(docs) == 0:
            raise EmptyCorpus("cannot build a vocabulary from zero documents")
        df: dict[str, int] = {}
        for doc in docs:
            for token in set(doc):
                df[token] = df.get(token, 0) + 1
        if not df:
            raise EmptyCorpus("no tokens in any document")
        ranked = sorted(df, key=lambda t: (-df[t], t))
        if self.max_features is not None:
            ranked = ranked[: self.max_features]
        self.vocabulary_ = {token: idx for idx, token in enumerate(ranked)}
        self.document_frequencies_ = np.array([df[t] for t in ranked], dtype=np.int64)
        return self

    def transform(self, docs: Sequence[TokenizedText]) -> sp.csr_matrix:
        if not hasattr(self, "vocabulary_"):
            raise NotFittedError("TokenCountVectorizer.transform called before fit")
        vocab = self.vocabulary_
        indptr = [0]
        indices: list[int] = []
        data: list[int] = []
        for doc in docs:
            counts: dict[int, int] = {}
            for token in doc:
                idx = vocab.get(token)
                if idx is not None:
                    counts[idx] = counts.get(idx, 0) + 1
            for idx in sorted(counts):
                indices.append(idx)
                data.append(counts[idx])
            indptr.append(len(indices))
        return sp.csr_matrix(
            (np.array(data, dtype=np.int64), np.array(indices, dtype=np.int32), np.array(indptr)),
            shape=(len(docs), len(vocab)),
        )

    def n_features(self) -> int:
        if not hasattr(self, "vocabulary_"):
            raise NotFittedError("vectorizer not fitted")
        return len(self.vocabulary_)
