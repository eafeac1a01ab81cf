"""Text preparation for Bangla corpora.

Normalization, punctuation stripping, tokenization and stop-word projection
are kept as small composable functions so the exact same preprocessing feeds
corpus statistics, feature extraction and stop-word handling.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError, DataError

ANALYZER_MODES = ("reference-compatible", "whitespace")

# Minimum token length per mode. The reference-compatible analyzer mirrors
# tokenizers that require at least two word characters per token.
_DEFAULT_MIN_LEN = {"reference-compatible": 2, "whitespace": 1}

# Lazy per-codepoint category caches. Corpora reuse a few hundred distinct
# codepoints, so classifying each once and using str.translate keeps the
# per-document cost in C.
_PUNCT_ORDS: set[int] = set()
_PLAIN_ORDS: set[int] = set()
_BREAK_ORDS: set[int] = set()
_WORD_ORDS: set[int] = set()


@dataclass(frozen=True)
class AnalyzerConfig:
    """How raw text becomes model-ready tokens."""

    mode: str = "reference-compatible"
    min_token_len: int | None = None

    def __post_init__(self):
        if self.mode not in ANALYZER_MODES:
            raise ConfigError(f"unknown analyzer mode {self.mode!r}; expected one of {ANALYZER_MODES}")
        if self.min_token_len is None:
            object.__setattr__(self, "min_token_len", _DEFAULT_MIN_LEN[self.mode])
        elif self.min_token_len < 1:
            raise ConfigError(f"min_token_len must be >= 1, got {self.min_token_len}")

    def to_dict(self) -> dict:
        return {"mode": self.mode, "min_token_len": self.min_token_len}

    @classmethod
    def from_dict(cls, payload: dict) -> "AnalyzerConfig":
        return cls(mode=payload.get("mode", "reference-compatible"),
                   min_token_len=payload.get("min_token_len"))


@dataclass(frozen=True)
class StopwordSet:
    """Raw surface forms plus their analyzer-projected (model-ready) tokens.

    unprojected records raw entries that vanish under the analyzer; they can
    never match a vocabulary column.
    """

    raw: frozenset[str]
    projected: frozenset[str]
    unprojected: tuple[str, ...] = ()
    source: str = ""


def normalize_unicode(text: str) -> str:
    """Canonical composition (NFC). Idempotent. Never NFKC: compatibility
    folding would change token identities."""
    return unicodedata.normalize("NFC", text)


def strip_punctuation(text: str) -> str:
    """Replace every punctuation/symbol codepoint (categories P*, S*) with one
    space each, danda and double danda included. Length is preserved."""
    table = {}
    for ch in set(text):
        o = ord(ch)
        if o in _PUNCT_ORDS:
            table[o] = " "
        elif o not in _PLAIN_ORDS:
            if unicodedata.category(ch)[0] in ("P", "S"):
                _PUNCT_ORDS.add(o)
                table[o] = " "
            else:
                _PLAIN_ORDS.add(o)
    return text.translate(table)


def tokenize_whitespace(text: str) -> list[str]:
    """Maximal runs of non-whitespace characters, in order."""
    return text.split()


def prepare_text(text: str) -> str:
    """The standard preprocessing pass: NFC then punctuation stripping."""
    return strip_punctuation(normalize_unicode(text))


def _letter_digit_runs(text: str) -> list[str]:
    # Combining marks (Mn, Mc), joiners (Cf) and anything else outside the
    # letter/digit categories terminate a run and are discarded.
    table = {}
    for ch in set(text):
        o = ord(ch)
        if o in _BREAK_ORDS:
            table[o] = " "
        elif o not in _WORD_ORDS:
            if unicodedata.category(ch)[0] in ("L", "N"):
                _WORD_ORDS.add(o)
            else:
                _BREAK_ORDS.add(o)
                table[o] = " "
    return text.translate(table).split()


def analyze(text: str, config: AnalyzerConfig | None = None) -> list[str]:
    """Produce model-ready tokens from normalized, punctuation-stripped text.

    reference-compatible mode keeps maximal letter/digit runs; a dependent
    vowel sign inside a word ends the run, which is what turns মতো into মত.
    whitespace mode is tokenize_whitespace plus the length filter.
    """
    cfg = config or AnalyzerConfig()
    if cfg.mode == "whitespace":
        tokens = text.split()
    else:
        tokens = _letter_digit_runs(text)
    if cfg.min_token_len <= 1:
        return tokens
    return [t for t in tokens if len(t) >= cfg.min_token_len]


def load_stopwords(path: str | Path, config: AnalyzerConfig | None = None) -> StopwordSet:
    """Read a one-token-per-line UTF-8 list (# starts a comment line) and
    project each entry through the analyzer."""
    cfg = config or AnalyzerConfig()
    p = Path(path)
    try:
        lines = p.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataError(f"cannot read stop-word list {p}: {exc}") from exc

    raw: list[str] = []
    seen = set()
    for line in lines:
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        entry = normalize_unicode(entry)
        if entry not in seen:
            seen.add(entry)
            raw.append(entry)
    if not raw:
        raise DataError(f"empty effective list: {p}")

    projected: set[str] = set()
    unprojected: list[str] = []
    for entry in raw:
        tokens = analyze(strip_punctuation(entry), cfg)
        if tokens:
            projected.update(tokens)
        else:
            unprojected.append(entry)
    return StopwordSet(
        raw=frozenset(raw),
        projected=frozenset(projected),
        unprojected=tuple(sorted(unprojected)),
        source=str(p),
    )


def remove_stopwords_from_text(text: str, stopwords: StopwordSet) -> str:
    """Drop whitespace tokens whose surface form is in the raw list; rejoin
    with single spaces. Expects normalized (and usually stripped) text so the
    surface forms actually line up."""
    kept = [t for t in text.split() if t not in stopwords.raw]
    return " ".join(kept)
