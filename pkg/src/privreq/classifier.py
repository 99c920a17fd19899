"""Lexical multi-label classification of issues against requirement profiles.

Each requirement gets a text profile (pattern text plus curated keywords);
issues are ranked by cosine similarity between tf-idf vectors fitted over
the profiles and the issue corpus as one document collection.
"""

import gzip
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional, Sequence

from .errors import EmbeddingLoadError, EmptyDocument, MissingGold
from .taxonomy import Taxonomy

DEFAULT_K = 3
DEFAULT_FLOOR = 0.05
DEFAULT_MIN_TOKEN_LENGTH = 2

_default_stopwords: Optional[frozenset] = None


def default_stopwords() -> frozenset:
    """Bundled English stopword list, one token per line."""
    global _default_stopwords
    if _default_stopwords is None:
        text = resources.files("privreq.data").joinpath("stopwords.txt").read_text("utf-8")
        _default_stopwords = frozenset(w for w in text.split() if w)
    return _default_stopwords


def tokenize(text: str, min_token_length: int = DEFAULT_MIN_TOKEN_LENGTH,
             stopwords: Optional[frozenset] = None) -> list[str]:
    """Lowercase, split on non-alphanumeric runs, drop short and stop tokens."""
    if stopwords is None:
        stopwords = default_stopwords()
    tokens = []
    word = []
    for ch in text.lower():
        if ch.isalnum():
            word.append(ch)
        elif word:
            tokens.append("".join(word))
            word = []
    if word:
        tokens.append("".join(word))
    return [t for t in tokens if len(t) >= min_token_length and t not in stopwords]


@dataclass(frozen=True)
class VectorizerConfig:
    mode: str = "tfidf"
    min_token_length: int = DEFAULT_MIN_TOKEN_LENGTH
    stopwords: Optional[frozenset] = None  # None selects the bundled list
    sublinear_tf: bool = True
    idf_smoothing: bool = True
    embedding_path: Optional[str] = None

    def resolved_stopwords(self) -> frozenset:
        return self.stopwords if self.stopwords is not None else default_stopwords()

    def tokenize(self, text: str) -> list[str]:
        return tokenize(text, self.min_token_length, self.resolved_stopwords())


def config_fingerprint(cfg: VectorizerConfig, taxonomy_version: str) -> str:
    payload = {
        "mode": cfg.mode,
        "min_token_length": cfg.min_token_length,
        "stopwords": sorted(cfg.resolved_stopwords()),
        "sublinear_tf": cfg.sublinear_tf,
        "idf_smoothing": cfg.idf_smoothing,
        "embedding_path": cfg.embedding_path,
        "taxonomy_version": taxonomy_version,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class TextProfile:
    requirement_id: str
    tokens: tuple[str, ...]
    vector: dict[str, float]

    @property
    def is_zero(self) -> bool:
        return not self.vector


@dataclass(frozen=True)
class ClassificationResult:
    issue_key: str
    ranked: tuple[tuple[str, float], ...]
    config_fingerprint: str

    def as_dict(self) -> dict:
        return {
            "issue_key": self.issue_key,
            "ranked": [{"requirement_id": r, "score": s} for r, s in self.ranked],
            "config_fingerprint": self.config_fingerprint,
        }


@dataclass(frozen=True)
class ProfileSet:
    """Fitted profiles plus the idf table they were weighted with.

    Iterates like a plain list of TextProfile.
    """
    profiles: tuple[TextProfile, ...]
    idf: dict[str, float]
    n_documents: int
    config: VectorizerConfig
    fingerprint: str
    embeddings: Optional[dict] = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.profiles)

    def __iter__(self):
        return iter(self.profiles)

    def __getitem__(self, i):
        return self.profiles[i]


def _term_counts(tokens: Iterable[str]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for t in tokens:
        counts[t] = counts.get(t, 0) + 1
    return counts


def _idf_value(n_docs: int, df: int, smoothing: bool) -> float:
    if smoothing:
        return math.log((1 + n_docs) / (1 + df)) + 1.0
    if df == 0:
        return 0.0
    return math.log(n_docs / df) + 1.0


def _weigh(counts: dict[str, int], idf: dict[str, float], n_docs: int,
           cfg: VectorizerConfig) -> dict[str, float]:
    vec = {}
    for token, count in counts.items():
        tf = 1.0 + math.log(count) if cfg.sublinear_tf else float(count)
        vec[token] = tf * idf.get(token, _idf_value(n_docs, 0, cfg.idf_smoothing))
    norm = math.sqrt(sum(w * w for w in vec.values()))
    if norm == 0.0:
        return {}
    return {t: w / norm for t, w in sorted(vec.items())}


def _load_embeddings(path: str) -> dict[str, list[float]]:
    opener = gzip.open if str(path).endswith(".gz") else open
    table: dict[str, list[float]] = {}
    dim = None
    try:
        with opener(path, "rt", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                parts = line.rstrip("\n").split(" ")
                if len(parts) < 2:
                    continue
                if line_no == 1 and len(parts) == 2 and parts[0].isdigit() and parts[1].isdigit():
                    continue  # optional "count dim" header line
                try:
                    table[parts[0]] = [float(v) for v in parts[1:]]
                except ValueError as exc:
                    raise EmbeddingLoadError(f"line {line_no}: {exc}") from exc
                if dim is None:
                    dim = len(parts) - 1
                elif len(parts) - 1 != dim:
                    raise EmbeddingLoadError(f"line {line_no}: dimension mismatch")
    except OSError as exc:
        raise EmbeddingLoadError(str(exc)) from exc
    if not table:
        raise EmbeddingLoadError(f"no vectors found in {path}")
    return table


def _embed(tokens: Sequence[str], table: dict[str, list[float]]) -> dict[str, float]:
    vectors = [table[t] for t in tokens if t in table]
    if not vectors:
        return {}
    dim = len(vectors[0])
    mean = [sum(v[i] for v in vectors) / len(vectors) for i in range(dim)]
    norm = math.sqrt(sum(c * c for c in mean))
    if norm == 0.0:
        return {}
    return {str(i): c / norm for i, c in enumerate(mean)}


def profile_text(requirement) -> str:
    parts = [requirement.text]
    parts.extend(requirement.keywords)
    return " ".join(parts)


def build_profiles(taxonomy: Taxonomy, cfg: Optional[VectorizerConfig] = None,
                   corpus_texts: Sequence[str] = ()) -> ProfileSet:
    """One unit-normalized profile per requirement.

    The idf table is fitted over the requirement profile documents plus
    any supplied corpus documents, so classification weights reflect the
    collection being classified.
    """
    if cfg is None:
        cfg = VectorizerConfig()
    fingerprint = config_fingerprint(cfg, taxonomy.version)

    profile_tokens = [
        (r.id, tuple(cfg.tokenize(profile_text(r)))) for r in taxonomy.requirements
    ]

    if cfg.mode == "embedding":
        if not cfg.embedding_path:
            raise EmbeddingLoadError("embedding mode requires embedding_path")
        table = _load_embeddings(cfg.embedding_path)
        profiles = tuple(
            TextProfile(rid, toks, _embed(toks, table)) for rid, toks in profile_tokens
        )
        return ProfileSet(profiles=profiles, idf={}, n_documents=0, config=cfg,
                          fingerprint=fingerprint, embeddings=table)

    documents = [toks for _, toks in profile_tokens]
    documents.extend(tuple(cfg.tokenize(t)) for t in corpus_texts)
    n_docs = len(documents)
    df: dict[str, int] = {}
    for doc in documents:
        for token in set(doc):
            df[token] = df.get(token, 0) + 1
    idf = {t: _idf_value(n_docs, d, cfg.idf_smoothing) for t, d in df.items()}

    profiles = tuple(
        TextProfile(rid, toks, _weigh(_term_counts(toks), idf, n_docs, cfg))
        for rid, toks in profile_tokens
    )
    return ProfileSet(profiles=profiles, idf=idf, n_documents=n_docs,
                      config=cfg, fingerprint=fingerprint)


def _cosine(a: dict[str, float], b: dict[str, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    # both unit vectors: dot product over the smaller key set, stable order
    return sum(w * b[t] for t, w in sorted(a.items()) if t in b)


def vectorize_text(text: str, profiles: ProfileSet) -> dict[str, float]:
    cfg = profiles.config
    tokens = cfg.tokenize(text)
    if not tokens:
        raise EmptyDocument("no tokens survive tokenization")
    if cfg.mode == "embedding":
        vec = _embed(tokens, profiles.embeddings or {})
        if not vec:
            raise EmptyDocument("no tokens present in the embedding vocabulary")
        return vec
    return _weigh(_term_counts(tokens), profiles.idf, profiles.n_documents, cfg)


def classify_text(issue_key: str, text: str, profiles: ProfileSet,
                  k: int = DEFAULT_K, floor: float = DEFAULT_FLOOR) -> ClassificationResult:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not 0.0 <= floor <= 1.0:
        raise ValueError(f"floor must be in [0, 1], got {floor}")
    vec = vectorize_text(text, profiles)
    scored = []
    for p in profiles:
        if p.is_zero:
            continue
        score = _cosine(vec, p.vector)
        if profiles.config.mode == "embedding":
            score = max(0.0, score)
        if score >= floor:
            scored.append((p.requirement_id, score))
    scored.sort(key=lambda rs: (-rs[1], int(rs[0][1:])))
    return ClassificationResult(
        issue_key=issue_key,
        ranked=tuple(scored[:k]),
        config_fingerprint=profiles.fingerprint,
    )


def classify_issue(issue, profiles: ProfileSet, k: int = DEFAULT_K,
                   floor: float = DEFAULT_FLOOR) -> ClassificationResult:
    """Rank requirements for one issue by title+description similarity."""
    text = f"{issue.title} {issue.description}"
    return classify_text(issue.key, text, profiles, k=k, floor=floor)


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    if tp == fp == fn == 0:
        return 1.0, 1.0, 1.0
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f1


def evaluate(predictions: Sequence[ClassificationResult], gold) -> dict:
    """Example-based and micro/macro precision/recall/F1 over label sets.

    An issue with empty gold and empty prediction counts as an exact match.
    """
    entries = gold.entries if hasattr(gold, "entries") else gold
    ex_p = ex_r = ex_f = 0.0
    tp_all = fp_all = fn_all = 0
    per_label: dict[str, list[int]] = {}
    for pred in predictions:
        if pred.issue_key not in entries:
            raise MissingGold(pred.issue_key)
        predicted = {rid for rid, _ in pred.ranked}
        expected = set(entries[pred.issue_key])
        tp = len(predicted & expected)
        fp = len(predicted - expected)
        fn = len(expected - predicted)
        p, r, f1 = _prf(tp, fp, fn)
        ex_p += p
        ex_r += r
        ex_f += f1
        tp_all += tp
        fp_all += fp
        fn_all += fn
        for label in predicted | expected:
            cell = per_label.setdefault(label, [0, 0, 0])
            cell[0] += int(label in predicted and label in expected)
            cell[1] += int(label in predicted and label not in expected)
            cell[2] += int(label not in predicted and label in expected)
    n = len(predictions)
    if n == 0:
        raise MissingGold("no predictions to evaluate")
    micro = _prf(tp_all, fp_all, fn_all)
    macro_parts = [_prf(*cell) for cell in per_label.values()]
    if macro_parts:
        macro = tuple(sum(part[i] for part in macro_parts) / len(macro_parts) for i in range(3))
    else:
        macro = (1.0, 1.0, 1.0)
    return {
        "n_issues": n,
        "example_precision": ex_p / n,
        "example_recall": ex_r / n,
        "example_f1": ex_f / n,
        "micro_precision": micro[0],
        "micro_recall": micro[1],
        "micro_f1": micro[2],
        "macro_precision": macro[0],
        "macro_recall": macro[1],
        "macro_f1": macro[2],
    }
