"""Corpus loading, preprocessing rules, embedding files, and checkpoints."""

from __future__ import annotations

import json
import logging
import os
import string
import tempfile
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

CHECKPOINT_MAGIC = b"QSANCKPT"
CHECKPOINT_VERSION = 1

MIN_COMMENTS = 3
MIN_COMMENT_CHARS = 10


class CorpusFormatError(ValueError):
    pass


class CheckpointError(ValueError):
    pass


@dataclass(frozen=True)
class CorpusExample:
    """One post (as a list of sentences), its comments, and a binary label.

    Label 1 marks the post as false, label 0 as true.
    """

    id: str
    label: int
    post: tuple[str, ...]
    comments: tuple[str, ...]


@dataclass(frozen=True)
class LineError:
    line_number: int
    message: str


@dataclass
class DropReport:
    posts_in: int = 0
    posts_kept: int = 0
    duplicate_comments_removed: int = 0
    short_comments_removed: int = 0
    posts_dropped_few_comments: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip punctuation at token edges."""
    tokens = []
    for raw in text.lower().split():
        tok = raw.strip(string.punctuation)
        if tok:
            tokens.append(tok)
    return tokens


def _parse_record(obj: dict) -> CorpusExample:
    for key in ("id", "label", "post", "comments"):
        if key not in obj:
            raise CorpusFormatError(f"missing key {key!r}")
    ident = obj["id"]
    if isinstance(ident, (int, float)) and not isinstance(ident, bool):
        ident = str(ident)
    if not isinstance(ident, str):
        raise CorpusFormatError("key 'id' must be a string")
    label = obj["label"]
    if isinstance(label, bool) or label not in (0, 1):
        raise CorpusFormatError("key 'label' must be 0 or 1")
    post = obj["post"]
    comments = obj["comments"]
    if not isinstance(post, list) or not all(isinstance(s, str) for s in post):
        raise CorpusFormatError("key 'post' must be an array of strings")
    if not isinstance(comments, list) or not all(isinstance(s, str) for s in comments):
        raise CorpusFormatError("key 'comments' must be an array of strings")
    return CorpusExample(id=ident, label=int(label), post=tuple(post), comments=tuple(comments))


def load_corpus(path: str) -> tuple[list[CorpusExample], list[LineError]]:
    """Read a line-delimited corpus; one JSON object per line.

    Malformed lines are skipped and reported with their line number and the
    offending key rather than aborting the whole load.
    """
    examples: list[CorpusExample] = []
    errors: list[LineError] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise CorpusFormatError("record is not an object")
                examples.append(_parse_record(obj))
            except (json.JSONDecodeError, CorpusFormatError) as exc:
                errors.append(LineError(line_number, f"line {line_number}: {exc}"))
    if not examples and not errors:
        log.warning("corpus file %s is empty", path)
    return examples, errors


def save_corpus(path: str, examples: list[CorpusExample]) -> None:
    lines = []
    for ex in examples:
        lines.append(
            json.dumps(
                {
                    "id": ex.id,
                    "label": ex.label,
                    "post": list(ex.post),
                    "comments": list(ex.comments),
                },
                ensure_ascii=True,
                sort_keys=True,
            )
        )
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def preprocess(
    examples: list[CorpusExample],
) -> tuple[list[CorpusExample], DropReport]:
    """Apply the corpus filtering rules, in order: deduplicate comments
    within each post (first occurrence kept), drop comments shorter than
    10 characters, drop posts left with fewer than 3 comments.

    The character count is over code points, not bytes, so CJK text is
    measured by visible characters.
    """
    report = DropReport(posts_in=len(examples))
    kept: list[CorpusExample] = []
    for ex in examples:
        seen: set[str] = set()
        deduped = []
        for c in ex.comments:
            if c in seen:
                report.duplicate_comments_removed += 1
                continue
            seen.add(c)
            deduped.append(c)
        long_enough = []
        for c in deduped:
            if len(c) < MIN_COMMENT_CHARS:
                report.short_comments_removed += 1
            else:
                long_enough.append(c)
        if len(long_enough) < MIN_COMMENTS:
            report.posts_dropped_few_comments += 1
            continue
        kept.append(
            CorpusExample(id=ex.id, label=ex.label, post=ex.post, comments=tuple(long_enough))
        )
    report.posts_kept = len(kept)
    return kept, report


def build_vocab(examples: list[CorpusExample]) -> list[str]:
    """Token vocabulary in first-occurrence order, with a reserved fallback
    token at index 0 for unknown or empty input."""
    vocab = ["<unk>"]
    seen = {"<unk>"}
    for ex in examples:
        for text in list(ex.post) + list(ex.comments):
            for tok in tokenize(text):
                if tok not in seen:
                    seen.add(tok)
                    vocab.append(tok)
    return vocab


def load_embedding_table(path: str, dim: int) -> dict[str, np.ndarray]:
    """Plain-text embeddings: token followed by ``dim`` decimal values per line."""
    table: dict[str, np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if len(parts) != dim + 1:
                raise CorpusFormatError(
                    f"embedding file line {line_number}: expected token + {dim} values, "
                    f"got {len(parts) - 1} values"
                )
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise CorpusFormatError(f"embedding file line {line_number}: {exc}") from exc
            table[parts[0]] = vec
    return table


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def atomic_write_bytes(path: str, data: bytes) -> None:
    """Write via a temp file in the same directory and rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# checkpoints
#
# Layout: 8-byte magic, one compact JSON header line (format version, config,
# vocabulary, and per-tensor name/shape/offset records), "\n", then raw
# little-endian float64 planes. Complex tensors store the real plane followed
# by the imaginary plane; offsets are relative to the start of the payload.


@dataclass
class TensorRecord:
    name: str
    complex: bool
    re: np.ndarray
    im: np.ndarray | None = None


@dataclass
class CheckpointData:
    version: int
    config: dict
    vocab: list[str]
    tensors: dict[str, TensorRecord] = field(default_factory=dict)


def serialize_checkpoint(config: dict, vocab: list[str], tensors: list[TensorRecord]) -> bytes:
    header_tensors = []
    payload_parts: list[bytes] = []
    offset = 0
    for rec in tensors:
        header_tensors.append(
            {
                "name": rec.name,
                "complex": rec.complex,
                "shape": list(rec.re.shape),
                "offset": offset,
            }
        )
        re_bytes = np.ascontiguousarray(rec.re, dtype="<f8").tobytes()
        payload_parts.append(re_bytes)
        offset += len(re_bytes)
        if rec.complex:
            if rec.im is None or rec.im.shape != rec.re.shape:
                raise CheckpointError(f"tensor {rec.name!r}: malformed imaginary plane")
            im_bytes = np.ascontiguousarray(rec.im, dtype="<f8").tobytes()
            payload_parts.append(im_bytes)
            offset += len(im_bytes)
    header = {
        "version": CHECKPOINT_VERSION,
        "config": config,
        "vocab": vocab,
        "tensors": header_tensors,
    }
    header_line = json.dumps(header, ensure_ascii=True, sort_keys=True, separators=(",", ":"))
    return CHECKPOINT_MAGIC + header_line.encode("utf-8") + b"\n" + b"".join(payload_parts)


def save_checkpoint(path: str, config: dict, vocab: list[str], tensors: list[TensorRecord]) -> None:
    atomic_write_bytes(path, serialize_checkpoint(config, vocab, tensors))


def load_checkpoint(path: str) -> CheckpointData:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(CHECKPOINT_MAGIC) or blob[: len(CHECKPOINT_MAGIC)] != CHECKPOINT_MAGIC:
        raise CheckpointError(f"{path}: bad magic, not a checkpoint file")
    newline = blob.find(b"\n", len(CHECKPOINT_MAGIC))
    if newline < 0:
        raise CheckpointError(f"{path}: truncated header")
    try:
        header = json.loads(blob[len(CHECKPOINT_MAGIC) : newline].decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CheckpointError(f"{path}: unreadable header ({exc})") from exc
    version = header.get("version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported format version {version!r}")
    payload = blob[newline + 1 :]

    data = CheckpointData(version=version, config=header["config"], vocab=list(header["vocab"]))
    expected_end = 0
    for rec in header["tensors"]:
        name = rec["name"]
        shape = tuple(rec["shape"])
        count = int(np.prod(shape)) if shape else 1
        plane_bytes = count * 8
        n_planes = 2 if rec["complex"] else 1
        start = rec["offset"]
        end = start + n_planes * plane_bytes
        if end > len(payload):
            raise CheckpointError(f"{path}: truncated payload for tensor {name!r}")
        re = np.frombuffer(payload, dtype="<f8", count=count, offset=start).reshape(shape).copy()
        im = None
        if rec["complex"]:
            im = (
                np.frombuffer(payload, dtype="<f8", count=count, offset=start + plane_bytes)
                .reshape(shape)
                .copy()
            )
        data.tensors[name] = TensorRecord(name=name, complex=rec["complex"], re=re, im=im)
        expected_end = max(expected_end, end)
    if expected_end != len(payload):
        raise CheckpointError(
            f"{path}: payload size mismatch (expected {expected_end} bytes, found {len(payload)})"
        )
    return data
