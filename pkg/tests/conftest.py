"""Shared fixtures: synthetic corpora and dataset trees in the published layouts."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from spambench.corpus import LabeledMessage

SPAM_WORDS = "win free cash prize claim urgent offer click lottery bonus viagra deal".split()
HAM_WORDS = "meeting report schedule project lunch notes review agenda team deadline budget quarter".split()
SHARED_WORDS = "please today tomorrow new time week send call".split()


def synthetic_messages(n: int, seed: int, spam_fraction: float = 0.3) -> list[LabeledMessage]:
    rng = random.Random(seed)
    out = []
    for i in range(n):
        label = int(rng.random() < spam_fraction)
        pool = SPAM_WORDS if label else HAM_WORDS
        words = [rng.choice(pool) for _ in range(rng.randint(4, 12))]
        words += [rng.choice(SHARED_WORDS) for _ in range(rng.randint(2, 6))]
        rng.shuffle(words)
        out.append(
            LabeledMessage(id=f"m{i:05d}", text=" ".join(words), label=label, source="synth")
        )
    return out


@pytest.fixture
def small_corpus() -> list[LabeledMessage]:
    return synthetic_messages(240, seed=1)


def make_ling_tree(root: Path, ham: list[tuple[str, str, str]], spam: list[tuple[str, str, str]]) -> Path:
    """Each message is (filename, subject, body); spam filenames must start with spmsg."""
    base = root / "bare" / "part1"
    base.mkdir(parents=True)
    for name, subject, body in ham + spam:
        (base / name).write_text(f"Subject: {subject}\n\n{body}\n", encoding="utf-8")
    return root


def make_sms_file(root: Path, rows: list[tuple[str, str]]) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    path = root / "SMSSpamCollection"
    path.write_text("".join(f"{tag}\t{text}\n" for tag, text in rows), encoding="utf-8")
    return root


def make_spamassassin_tree(root: Path, parts: dict[str, list[bytes]]) -> Path:
    """parts maps part-dir name (easy_ham, spam_2, ...) to raw RFC-822 payloads."""
    for part, payloads in parts.items():
        d = root / part
        d.mkdir(parents=True)
        (d / "cmds").write_text("not a message\n", encoding="utf-8")
        for i, payload in enumerate(payloads):
            (d / f"{i:05d}.deadbeef").write_bytes(payload)
    return root


def rfc822(subject: str, body: str, extra_headers: str = "") -> bytes:
    head = f"Return-Path: <x@example.com>\n{extra_headers}Subject: {subject}\nTo: y@example.com\n"
    return (head + "\n" + body + "\n").encode("utf-8")


def make_enron_tree(root: Path, ham: list[tuple[str, str]], spam: list[tuple[str, str]]) -> Path:
    """Messages are (subject, body) pairs, dealt into enron1/enron2 ham|spam dirs."""
    for i, (subject, body) in enumerate(ham):
        d = root / f"enron{1 + i % 2}" / "ham"
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{i:04d}.2002-01-01.ham.txt").write_text(f"Subject: {subject}\n{body}\n", encoding="utf-8")
    for i, (subject, body) in enumerate(spam):
        d = root / f"enron{1 + i % 2}" / "spam"
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{i:04d}.2002-01-01.spam.txt").write_text(f"Subject: {subject}\n{body}\n", encoding="utf-8")
    return root
