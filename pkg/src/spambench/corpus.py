"""Dataset adapters and the canonical labeled-message format.

Four adapters parse the published corpus layouts into one shape:

  ling          directory tree of message files (``bare`` variant preferred),
                first line ``Subject: ...``; spam files are named ``spmsg*``
  sms           one tab-separated file, ``ham``/``spam`` label then the text
  spamassassin  five part directories of RFC-822 files (``easy_ham``,
                ``easy_ham_2``, ``hard_ham``, ``spam``, ``spam_2``)
  enron         ``enron1``..``enron6`` directories with ``ham``/``spam``
                subdirectories of preprocessed message files

Cleaning: whitespace is collapsed, undecodable bytes become replacement
characters, empty texts are dropped, then exact-duplicate texts are dropped
keeping the first occurrence in id order. Ids are stable relative paths (or
line numbers for sms), so two runs over the same tree are identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

SOURCES = ("ling", "sms", "spamassassin", "enron")


class IngestError(ValueError):
    pass


class FormatError(IngestError):
    pass


class EmptyCorpusError(IngestError):
    pass


class CanonicalParseError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledMessage:
    id: str
    text: str
    label: int
    source: str


@dataclass(frozen=True)
class CorpusStats:
    total: int
    spam: int
    ham: int
    spam_rate: float
    duplicates_removed: int
    empties_removed: int


def _decode(raw: bytes) -> str:
    return raw.decode("utf-8", errors="replace")


def _collapse_whitespace(text: str) -> str:
    return " ".join(text.split())


def _message_files(directory: Path) -> list[Path]:
    return sorted(
        p for p in directory.rglob("*")
        if p.is_file() and not p.name.startswith(".") and p.name != "cmds"
    )


def _split_subject_body(text: str) -> tuple[str, str]:
    """First-line ``Subject:`` convention used by the ling and enron releases."""
    head, _, rest = text.partition("\n")
    if head.lower().startswith("subject:"):
        return head[len("subject:"):].strip(), rest
    return "", text


def _parse_rfc822(text: str) -> tuple[str, str]:
    """Subject plus body of a raw message; headers end at the first blank line."""
    lines = text.split("\n")
    subject_parts: list[str] = []
    body_start = len(lines)
    in_subject = False
    for i, line in enumerate(lines):
        if line.strip() == "":
            body_start = i + 1
            break
        if line[:1] in (" ", "\t"):  # folded continuation of the previous header
            if in_subject:
                subject_parts.append(line.strip())
            continue
        in_subject = line.lower().startswith("subject:")
        if in_subject:
            subject_parts.append(line[len("subject:"):].strip())
    return " ".join(subject_parts), "\n".join(lines[body_start:])


def _looks_like_rfc822(text: str) -> bool:
    head = text.lstrip("\n").split("\n", 1)[0]
    if head.startswith("From "):
        return True
    name = head.split(":", 1)[0]
    return ":" in head and bool(name) and " " not in name.strip()


def _ingest_ling(root: Path) -> list[LabeledMessage]:
    base = root / "bare" if (root / "bare").is_dir() else root
    out = []
    for path in _message_files(base):
        text = _decode(path.read_bytes())
        if not text.lower().startswith("subject:"):
            raise FormatError(f"{path}: expected a 'Subject:' first line")
        subject, body = _split_subject_body(text)
        label = 1 if path.name.startswith("spmsg") else 0
        out.append(
            LabeledMessage(
                id=path.relative_to(base).as_posix(),
                text=subject + " " + body,
                label=label,
                source="ling",
            )
        )
    return out


def _sms_file(root: Path) -> Path:
    if root.is_file():
        return root
    for name in ("SMSSpamCollection", "SMSSpamCollection.txt", "sms.tsv"):
        candidate = root / name
        if candidate.is_file():
            return candidate
    raise IngestError(f"{root}: no SMS collection file found")


def _ingest_sms(root: Path) -> list[LabeledMessage]:
    path = _sms_file(root)
    out = []
    labels = {"ham": 0, "spam": 1}
    for lineno, line in enumerate(_decode(path.read_bytes()).split("\n"), start=1):
        if not line.strip():
            continue
        tag, tab, text = line.partition("\t")
        if tab != "\t" or tag not in labels:
            raise FormatError(f"{path}:{lineno}: expected 'ham<TAB>text' or 'spam<TAB>text'")
        out.append(
            LabeledMessage(id=f"sms-{lineno:05d}", text=text, label=labels[tag], source="sms")
        )
    return out


def _ingest_spamassassin(root: Path) -> list[LabeledMessage]:
    parts = sorted(
        d for d in root.iterdir()
        if d.is_dir() and (d.name.startswith("spam") or "ham" in d.name)
    )
    if not parts:
        raise FormatError(f"{root}: no spam/ham part directories found")
    out = []
    for part in parts:
        label = 1 if part.name.startswith("spam") else 0
        for path in _message_files(part):
            text = _decode(path.read_bytes())
            if not _looks_like_rfc822(text):
                raise FormatError(f"{path}: does not look like a raw message file")
            subject, body = _parse_rfc822(text)
            out.append(
                LabeledMessage(
                    id=path.relative_to(root).as_posix(),
                    text=subject + " " + body,
                    label=label,
                    source="spamassassin",
                )
            )
    return out


def _ingest_enron(root: Path) -> list[LabeledMessage]:
    out = []
    for path in _message_files(root):
        parent = path.parent.name
        if parent not in ("ham", "spam"):
            continue
        subject, body = _split_subject_body(_decode(path.read_bytes()))
        out.append(
            LabeledMessage(
                id=path.relative_to(root).as_posix(),
                text=subject + " " + body,
                label=1 if parent == "spam" else 0,
                source="enron",
            )
        )
    if not out:
        raise FormatError(f"{root}: no ham/spam subdirectories with message files found")
    return out


_ADAPTERS: dict[str, Callable[[Path], list[LabeledMessage]]] = {
    "ling": _ingest_ling,
    "sms": _ingest_sms,
    "spamassassin": _ingest_spamassassin,
    "enron": _ingest_enron,
}


def ingest(source: str, root: str | Path) -> tuple[list[LabeledMessage], CorpusStats]:
    """Parse one dataset tree, clean it, and report pre-clean counts plus removals."""
    if source not in _ADAPTERS:
        raise IngestError(f"unknown source {source!r}; expected one of {SOURCES}")
    root = Path(root)
    if not root.exists():
        raise IngestError(f"dataset root does not exist: {root}")
    raw = _ADAPTERS[source](root)
    if not raw:
        raise EmptyCorpusError(f"{root}: zero messages parsed")
    raw.sort(key=lambda m: m.id)

    total = len(raw)
    spam = sum(m.label for m in raw)
    empties_removed = 0
    duplicates_removed = 0
    seen: set[str] = set()
    messages: list[LabeledMessage] = []
    for m in raw:
        text = _collapse_whitespace(m.text)
        if not text:
            empties_removed += 1
            continue
        if text in seen:
            duplicates_removed += 1
            continue
        seen.add(text)
        messages.append(LabeledMessage(id=m.id, text=text, label=m.label, source=m.source))
    stats = CorpusStats(
        total=total,
        spam=spam,
        ham=total - spam,
        spam_rate=spam / total,
        duplicates_removed=duplicates_removed,
        empties_removed=empties_removed,
    )
    return messages, stats


def _validate(messages: Iterable[LabeledMessage]) -> None:
    seen_ids: set[str] = set()
    for m in messages:
        if not m.text:
            raise ValueError(f"message {m.id!r}: empty text")
        if m.label not in (0, 1):
            raise ValueError(f"message {m.id!r}: label must be 0 or 1, got {m.label!r}")
        if m.id in seen_ids:
            raise ValueError(f"duplicate message id {m.id!r}")
        seen_ids.add(m.id)


def save_canonical(messages: list[LabeledMessage], path: str | Path) -> None:
    _validate(messages)
    with Path(path).open("w", encoding="utf-8") as fh:
        for m in messages:
            fh.write(
                json.dumps(
                    {"id": m.id, "text": m.text, "label": m.label, "source": m.source},
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_canonical(path: str | Path) -> list[LabeledMessage]:
    messages = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                messages.append(
                    LabeledMessage(
                        id=rec["id"], text=rec["text"], label=int(rec["label"]),
                        source=rec["source"],
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CanonicalParseError(f"{path}:{lineno}: malformed record: {exc}") from exc
    return messages


def spam_rate(messages: list[LabeledMessage]) -> float:
    return sum(m.label for m in messages) / len(messages)
