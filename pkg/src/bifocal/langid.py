"""Language inference from URLs alone.

Three interchangeable scorers:

* a rule baseline that scans URL components for ISO 639 codes,
* a trainable linear classifier over hashed character n-grams,
* a client for an external scorer process (see :mod:`bifocal.external`).

The n-gram model hashes character n-grams of each token (sentinels excluded)
into a fixed number of buckets, averages their embeddings, and applies a
softmax layer.  Training is plain SGD on cross-entropy, fully deterministic
for a fixed seed.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLabels, NotAUrl
from .isodata import UNKNOWN_LANG, LanguageTable, bundled_languages
from .urls import NormalizedUrl, UrlComponents, normalize_url, parse_components

# ---------------------------------------------------------------------------
# Rule baseline


def rule_langid(components: UrlComponents, table: LanguageTable | None = None) -> str:
    """Pick a language from URL components, or ``unk``.

    Components are examined in a fixed order: query parameter values first,
    then directory names (both in URL order), then the public suffix, then the
    subdomain.  The first component whose lowercased value is an ISO 639 code
    decides.
    """
    if table is None:
        table = bundled_languages()
    for _, value in components.query_params:
        code = table.canonical(value)
        if code:
            return code
    for segment in components.path_segments:
        code = table.canonical(segment)
        if code:
            return code
    code = table.canonical(components.public_suffix)
    if code:
        return code
    code = table.canonical(components.subdomain)
    if code:
        return code
    return UNKNOWN_LANG


# ---------------------------------------------------------------------------
# Hashed n-gram linear classifier

BOUNDARY_START = "^"
BOUNDARY_END = "$"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_FNV_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash; the stable feature hash used by the classifier."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _FNV_MASK
    return h


def ngram_features(token: str, n_min: int, n_max: int) -> list[str]:
    """Character n-grams of a token, with boundary markers affixed first.

    Tokens shorter than ``n_min`` yield the whole marked token as a single
    feature.  Returns a multiset (a list, duplicates preserved).
    """
    if not 1 <= n_min <= n_max:
        raise ValueError("need 1 <= n_min <= n_max")
    marked = BOUNDARY_START + token + BOUNDARY_END
    if len(token) < n_min:
        return [marked]
    feats = []
    for n in range(n_min, n_max + 1):
        for i in range(len(marked) - n + 1):
            feats.append(marked[i : i + n])
    return feats


@dataclass
class NgramHyperparams:
    n_min: int = 2
    n_max: int = 4
    dim: int = 16
    bucket_count: int = 1 << 20
    epochs: int = 10
    learning_rate: float = 0.1


@dataclass
class NgramLangModel:
    n_min: int
    n_max: int
    dim: int
    bucket_count: int
    labels: tuple[str, ...]
    embeddings: np.ndarray  # bucket_count x dim
    output_weights: np.ndarray  # dim x len(labels)
    epochs: int = 0
    learning_rate: float = 0.0
    epoch_losses: tuple[float, ...] = field(default=())

    def feature_ids(self, url: "str | NormalizedUrl") -> np.ndarray:
        norm = normalize_url(url) if isinstance(url, str) else url
        ids = []
        for token in norm.core_tokens():
            for feat in ngram_features(token, self.n_min, self.n_max):
                ids.append(fnv1a64(feat.encode("utf-8")) % self.bucket_count)
        return np.asarray(ids, dtype=np.int64)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def ngram_train(
    data,
    hp: NgramHyperparams | None = None,
    seed: int = 0,
) -> NgramLangModel:
    """Train the classifier on ``(url, lang)`` pairs.

    Deterministic for a fixed seed: the seed drives both embedding
    initialization and per-epoch shuffling.  The learning rate decays linearly
    to zero over all updates.

    Raises:
        DegenerateLabels: fewer than two distinct labels in ``data``.
    """
    if hp is None:
        hp = NgramHyperparams()
    pairs = list(data)
    labels = tuple(sorted({lang for _, lang in pairs}))
    if len(labels) < 2:
        raise DegenerateLabels(f"need at least 2 labels, got {labels}")
    label_index = {lab: i for i, lab in enumerate(labels)}

    rng = np.random.default_rng(seed)
    emb = (rng.random((hp.bucket_count, hp.dim)) * 2.0 - 1.0) / hp.dim
    weights = np.zeros((hp.dim, len(labels)))

    model = NgramLangModel(
        n_min=hp.n_min,
        n_max=hp.n_max,
        dim=hp.dim,
        bucket_count=hp.bucket_count,
        labels=labels,
        embeddings=emb,
        output_weights=weights,
        epochs=hp.epochs,
        learning_rate=hp.learning_rate,
    )
    encoded = [(model.feature_ids(url), label_index[lang]) for url, lang in pairs]

    total_updates = hp.epochs * len(encoded)
    step = 0
    losses = []
    for _ in range(hp.epochs):
        order = rng.permutation(len(encoded))
        epoch_loss = 0.0
        seen = 0
        for idx in order:
            ids, y = encoded[idx]
            lr = hp.learning_rate * (1.0 - step / total_updates)
            step += 1
            if ids.size == 0:
                continue
            hidden = emb[ids].mean(axis=0)
            probs = _softmax(hidden @ weights)
            epoch_loss += -float(np.log(max(probs[y], 1e-300)))
            seen += 1
            dz = probs
            dz[y] -= 1.0
            grad_hidden = weights @ dz
            weights -= lr * np.outer(hidden, dz)
            np.add.at(emb, ids, -lr * grad_hidden / ids.size)
        losses.append(epoch_loss / max(seen, 1))
    model.epoch_losses = tuple(losses)
    return model


def ngram_predict(model: NgramLangModel, url: "str | NormalizedUrl") -> dict[str, float]:
    """Probability distribution over the model's labels.

    A URL with no features (sentinels only) yields the uniform distribution.
    """
    ids = model.feature_ids(url)
    if ids.size == 0:
        p = 1.0 / len(model.labels)
        return {label: p for label in model.labels}
    hidden = model.embeddings[ids].mean(axis=0)
    probs = _softmax(hidden @ model.output_weights)
    return dict(zip(model.labels, probs.tolist()))


def loss_and_gradients(model: NgramLangModel, batch) -> "tuple[float, np.ndarray, np.ndarray]":
    """Mean cross-entropy and analytic gradients over ``(url, label_idx)`` pairs.

    Exposed so the gradients can be checked against finite differences.
    """
    grad_emb = np.zeros_like(model.embeddings)
    grad_w = np.zeros_like(model.output_weights)
    total = 0.0
    count = 0
    for url, y in batch:
        ids = model.feature_ids(url)
        if ids.size == 0:
            continue
        hidden = model.embeddings[ids].mean(axis=0)
        probs = _softmax(hidden @ model.output_weights)
        total += -float(np.log(max(probs[y], 1e-300)))
        count += 1
        dz = probs.copy()
        dz[y] -= 1.0
        grad_w += np.outer(hidden, dz)
        np.add.at(grad_emb, ids, (model.output_weights @ dz) / ids.size)
    if count == 0:
        return 0.0, grad_emb, grad_w
    return total / count, grad_emb / count, grad_w / count


# ---------------------------------------------------------------------------
# Serialization: versioned binary container, little-endian float32 matrices.

_MAGIC = b"NGLM"
_VERSION = 1


def model_to_bytes(model: NgramLangModel) -> bytes:
    parts = [
        _MAGIC,
        struct.pack(
            "<IIIIII",
            _VERSION,
            model.n_min,
            model.n_max,
            model.dim,
            model.bucket_count,
            len(model.labels),
        ),
    ]
    for label in model.labels:
        encoded = label.encode("utf-8")
        parts.append(struct.pack("<I", len(encoded)))
        parts.append(encoded)
    parts.append(np.ascontiguousarray(model.embeddings, dtype="<f4").tobytes())
    parts.append(np.ascontiguousarray(model.output_weights, dtype="<f4").tobytes())
    return b"".join(parts)


def model_from_bytes(blob: bytes) -> NgramLangModel:
    if blob[:4] != _MAGIC:
        raise ValueError("not a classifier model file")
    version, n_min, n_max, dim, buckets, n_labels = struct.unpack_from("<IIIIII", blob, 4)
    if version != _VERSION:
        raise ValueError(f"unsupported model version {version}")
    offset = 4 + 24
    labels = []
    for _ in range(n_labels):
        (length,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        labels.append(blob[offset : offset + length].decode("utf-8"))
        offset += length
    emb_bytes = buckets * dim * 4
    emb = np.frombuffer(blob, dtype="<f4", count=buckets * dim, offset=offset)
    emb = emb.reshape(buckets, dim).astype(np.float64)
    offset += emb_bytes
    weights = np.frombuffer(blob, dtype="<f4", count=dim * n_labels, offset=offset)
    weights = weights.reshape(dim, n_labels).astype(np.float64)
    return NgramLangModel(
        n_min=n_min,
        n_max=n_max,
        dim=dim,
        bucket_count=buckets,
        labels=tuple(labels),
        embeddings=emb,
        output_weights=weights,
    )


def save_model(model: NgramLangModel, path) -> None:
    with open(path, "wb") as handle:
        handle.write(model_to_bytes(model))


def load_model(path) -> NgramLangModel:
    with open(path, "rb") as handle:
        return model_from_bytes(handle.read())


def load_labeled_urls(path) -> "list[tuple[str, str]]":
    """Read ``url<TAB>lang`` training data, one record per line."""
    out = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line:
                continue
            url, _, lang = line.partition("\t")
            out.append((url, lang))
    return out


# ---------------------------------------------------------------------------
# Scorers

class RuleLanguageScorer:
    """Wraps the rule baseline: probability 1 for the matched language."""

    def __init__(self, table: LanguageTable | None = None):
        self.table = table or bundled_languages()

    def classify(self, url: str) -> str:
        try:
            components = parse_components(url)
        except NotAUrl:
            return UNKNOWN_LANG
        return rule_langid(components, self.table)

    def distribution(self, url: str) -> dict[str, float]:
        return {self.classify(url): 1.0}

    def probability(self, url: str, target: str) -> float:
        code = self.classify(url)
        if code == UNKNOWN_LANG:
            return 0.0
        return 1.0 if code == target else 0.0


class NgramLanguageScorer:
    """Scorer backed by a trained n-gram model."""

    def __init__(self, model: NgramLangModel):
        self.model = model

    def distribution(self, url: str) -> dict[str, float]:
        return ngram_predict(self.model, url)

    def probability(self, url: str, target: str) -> float:
        return self.distribution(url).get(target, 0.0)


def lang_probability(scorer, url: str, target: str) -> float:
    """Probability that the document behind ``url`` is in ``target``."""
    return scorer.probability(url, target)
