"""Corpus loading, segmentation, deterministic splitting and stats."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .textprep import StopwordSet, prepare_text, tokenize_whitespace

CORPUS_FORMATS = ("author-dirs", "jsonl", "csv")


@dataclass(frozen=True)
class Document:
    id: str
    author: str
    text: str
    source: str = ""


@dataclass(frozen=True)
class Corpus:
    """Documents plus the sorted author list that defines label indices 0..K-1."""

    documents: tuple[Document, ...]
    authors: tuple[str, ...]

    @classmethod
    def from_documents(cls, documents) -> "Corpus":
        docs = tuple(documents)
        seen_ids = set()
        for doc in docs:
            if not doc.author:
                raise DataError(f"document {doc.id!r} has an empty author label")
            if doc.id in seen_ids:
                raise DataError(f"duplicate document id {doc.id!r}")
            seen_ids.add(doc.id)
        authors = tuple(sorted({doc.author for doc in docs}))
        if len(authors) < 2:
            raise DataError(f"fewer than 2 authors (got {len(authors)}); cannot attribute")
        return cls(documents=docs, authors=authors)

    def label_array(self) -> np.ndarray:
        lut = {a: i for i, a in enumerate(self.authors)}
        return np.array([lut[d.author] for d in self.documents], dtype=np.int64)


@dataclass(frozen=True)
class SplitPair:
    train: Corpus
    test: Corpus
    seed: int
    ratio: float

    def fingerprint(self) -> str:
        """Content digest over seed, ratio and the exact id assignment."""
        payload = {
            "seed": self.seed,
            "ratio": self.ratio,
            "train": [d.id for d in self.train.documents],
            "test": [d.id for d in self.test.documents],
        }
        blob = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class AuthorStats:
    author: str
    sample_count: int
    total_words: int
    stopword_count: int
    stopword_pct: float


@dataclass(frozen=True)
class CorpusStats:
    per_author: tuple[AuthorStats, ...]
    mean_samples_per_author: float


# ----------------------------------------------------------------------- load

def load_corpus(path: str | Path, fmt: str = "author-dirs") -> Corpus:
    """Load a labeled corpus.

    author-dirs: <root>/<author>/<file>.txt, one document per file.
    jsonl: one object per line with keys author, text, optional id.
    csv: header row author,text (optional id column).
    """
    if fmt not in CORPUS_FORMATS:
        raise ConfigError(f"unknown corpus format {fmt!r}; expected one of {CORPUS_FORMATS}")
    p = Path(path)
    if not p.exists():
        raise DataError(f"corpus path does not exist: {p}")
    if fmt == "author-dirs":
        docs = _load_author_dirs(p)
    elif fmt == "jsonl":
        docs = _load_jsonl(p)
    else:
        docs = _load_csv(p)
    return Corpus.from_documents(docs)


def _load_author_dirs(root: Path) -> list[Document]:
    if not root.is_dir():
        raise DataError(f"author-dirs root is not a directory: {root}")
    docs = []
    for author_dir in sorted(d for d in root.iterdir() if d.is_dir()):
        author = author_dir.name
        for f in sorted(author_dir.glob("*.txt")):
            try:
                text = f.read_text(encoding="utf-8")
            except (OSError, UnicodeDecodeError) as exc:
                raise DataError(f"cannot read {f}: {exc}") from exc
            if not text.strip():
                raise DataError(f"empty text in {f}")
            docs.append(Document(id=f"{author}/{f.stem}", author=author,
                                 text=text, source=f"{author}/{f.name}"))
    return docs


def _load_jsonl(path: Path) -> list[Document]:
    if not path.is_file():
        raise DataError(f"jsonl path is not a file: {path}")
    docs = []
    with path.open(encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path} line {n}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise DataError(f"{path} line {n}: record is not an object")
            author = record.get("author")
            text = record.get("text")
            if not author:
                raise DataError(f"{path} line {n}: missing author")
            if not text or not str(text).strip():
                raise DataError(f"{path} line {n}: missing or empty text")
            doc_id = str(record.get("id") or f"line-{n}")
            docs.append(Document(id=doc_id, author=str(author), text=str(text),
                                 source=f"{path.name}:{n}"))
    return docs


def _load_csv(path: Path) -> list[Document]:
    if not path.is_file():
        raise DataError(f"csv path is not a file: {path}")
    docs = []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        if "author" not in fields or "text" not in fields:
            raise DataError(f"{path}: csv header must contain author,text (got {fields})")
        for n, row in enumerate(reader, start=2):
            author = (row.get("author") or "").strip()
            text = row.get("text") or ""
            if not author:
                raise DataError(f"{path} line {n}: missing author")
            if not text.strip():
                raise DataError(f"{path} line {n}: missing or empty text")
            doc_id = (row.get("id") or "").strip() or f"row-{n}"
            docs.append(Document(id=doc_id, author=author, text=text, source=f"{path.name}:{n}"))
    return docs


# -------------------------------------------------------------------- segment

def segment_documents(corpus: Corpus, words_per_segment: int) -> Corpus:
    """Cut each document into consecutive segments of exactly
    words_per_segment whitespace tokens; the trailing remainder is dropped.
    Runs before the split, so sibling segments can straddle train/test."""
    if words_per_segment < 1:
        raise ConfigError(f"words_per_segment must be >= 1, got {words_per_segment}")
    segments = []
    for doc in corpus.documents:
        tokens = tokenize_whitespace(doc.text)
        for k in range(len(tokens) // words_per_segment):
            chunk = tokens[k * words_per_segment:(k + 1) * words_per_segment]
            segments.append(Document(id=f"{doc.id}#{k}", author=doc.author,
                                     text=" ".join(chunk), source=doc.source))
    return Corpus.from_documents(segments)


# ---------------------------------------------------------------------- split

def stratified_split(corpus: Corpus, ratio: float = 0.8, seed: int = 42) -> SplitPair:
    """Per-author seeded shuffle; floor(ratio*n) documents go to train,
    clamped so both sides keep at least one document per author."""
    if not (0.0 < ratio < 1.0):
        raise ConfigError(f"split ratio must lie in (0, 1), got {ratio}")
    by_author: dict[str, list[str]] = {a: [] for a in corpus.authors}
    for doc in corpus.documents:
        by_author[doc.author].append(doc.id)
    for author, ids in by_author.items():
        if len(ids) < 2:
            raise DataError(f"author {author!r} has {len(ids)} document(s); need at least 2 to split")

    rng = random.Random(seed)
    train_ids: set[str] = set()
    for author in corpus.authors:  # sorted order fixes the RNG consumption
        ids = list(by_author[author])
        rng.shuffle(ids)
        n = len(ids)
        # +1e-9 guards decimal ratios stored as binary floats (0.7*10 = 6.999...)
        quota = int(math.floor(ratio * n + 1e-9))
        quota = min(max(quota, 1), n - 1)
        train_ids.update(ids[:quota])

    train_docs = [d for d in corpus.documents if d.id in train_ids]
    test_docs = [d for d in corpus.documents if d.id not in train_ids]
    return SplitPair(
        train=Corpus.from_documents(train_docs),
        test=Corpus.from_documents(test_docs),
        seed=seed,
        ratio=ratio,
    )


# ---------------------------------------------------------------------- stats

def corpus_stats(corpus: Corpus, stopwords: StopwordSet) -> CorpusStats:
    """Word totals and raw-surface stop-word ratios per author.

    Words are whitespace tokens of punctuation-stripped, NFC-normalized text;
    a token counts as a stop-word when its surface form is in the raw list.
    """
    samples = {a: 0 for a in corpus.authors}
    words = {a: 0 for a in corpus.authors}
    hits = {a: 0 for a in corpus.authors}
    raw = stopwords.raw
    for doc in corpus.documents:
        samples[doc.author] += 1
        tokens = tokenize_whitespace(prepare_text(doc.text))
        words[doc.author] += len(tokens)
        hits[doc.author] += sum(1 for t in tokens if t in raw)

    rows = []
    for author in corpus.authors:
        total_words = words[author]
        pct = 100.0 * hits[author] / total_words if total_words else 0.0
        rows.append(AuthorStats(author=author, sample_count=samples[author],
                                total_words=total_words, stopword_count=hits[author],
                                stopword_pct=pct))
    mean_samples = len(corpus.documents) / len(corpus.authors)
    return CorpusStats(per_author=tuple(rows), mean_samples_per_author=mean_samples)
