"""Text preprocessing chain: word tokenization, stopword removal, Porter stemming."""

from __future__ import annotations

import re
from dataclasses import dataclass

# The classic 127-word English stopword list, embedded verbatim so the
# pipeline never depends on an external data download.
STOPWORDS = frozenset("""
i me my myself we our ours ourselves you your yours yourself yourselves
he him his himself she her hers herself it its itself
they them their theirs themselves what which who whom
this that these those am is are was were be been being
have has had having do does did doing a an the and but if or because
as until while of at by for with about against between into through
during before after above below to from up down in out on off over under
again further then once here there when where why how
all any both each few more most other some such
no nor not only own same so than too very
s t can will just don should now
""".split())

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)
_ALPHA_RE = re.compile(r"[a-z]+\Z")


@dataclass(frozen=True)
class TokenizedDoc:
    doc_id: str
    tokens: tuple[str, ...]


def tokenize(text: str) -> list[str]:
    """Lowercase and split on Unicode non-alphanumeric boundaries.

    Pure-numeric and single-character tokens are kept; underscores count as
    boundaries.
    """
    return _WORD_RE.findall(text.lower())


def remove_stopwords(tokens: list[str]) -> list[str]:
    return [t for t in tokens if t not in STOPWORDS]


# ---------------------------------------------------------------------------
# Porter stemmer (1980 five-step suffix stripping, canonical-reference
# variant: step 2 uses bli->ble and includes logi->log).
# ---------------------------------------------------------------------------


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in "aeiou":
        return False
    if ch == "y":
        return True if i == 0 else not _is_consonant(word, i - 1)
    return True


def _measure(word: str, end: int) -> int:
    """Number of vowel->consonant transitions in word[:end] (the VC count m)."""
    m = 0
    prev_cons = True
    for i in range(end):
        cons = _is_consonant(word, i)
        if i > 0 and cons and not prev_cons:
            m += 1
        prev_cons = cons
    return m


def _has_vowel(word: str, end: int) -> bool:
    return any(not _is_consonant(word, i) for i in range(end))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_consonant(word, len(word) - 1)
    )


def _ends_cvc(word: str, end: int) -> bool:
    # consonant-vowel-consonant at word[end-3:end], final consonant not w/x/y
    if end < 3:
        return False
    return (
        _is_consonant(word, end - 3)
        and not _is_consonant(word, end - 2)
        and _is_consonant(word, end - 1)
        and word[end - 1] not in "wxy"
    )


def _replace_suffix(word: str, suffix: str, repl: str, min_measure: int) -> str | None:
    """Apply suffix->repl when the remaining stem has measure > min_measure.

    Returns None when the suffix does not match at all (caller keeps probing);
    returns the unchanged word when it matches but the measure test fails
    (caller must stop probing, mirroring the reference control flow).
    """
    if not word.endswith(suffix):
        return None
    stem_len = len(word) - len(suffix)
    if _measure(word, stem_len) > min_measure:
        return word[:stem_len] + repl
    return word


def _step1a(word: str) -> str:
    if word.endswith("sses"):
        return word[:-2]
    if word.endswith("ies"):
        return word[:-2]
    if word.endswith("ss"):
        return word
    if word.endswith("s"):
        return word[:-1]
    return word


def _step1b(word: str) -> str:
    if word.endswith("eed"):
        if _measure(word, len(word) - 3) > 0:
            return word[:-1]
        return word
    if word.endswith("ed") and _has_vowel(word, len(word) - 2):
        stem = word[:-2]
    elif word.endswith("ing") and _has_vowel(word, len(word) - 3):
        stem = word[:-3]
    else:
        return word
    # post-trim fixups
    if stem.endswith(("at", "bl", "iz")):
        return stem + "e"
    if _ends_double_consonant(stem) and stem[-1] not in "lsz":
        return stem[:-1]
    if _measure(stem, len(stem)) == 1 and _ends_cvc(stem, len(stem)):
        return stem + "e"
    return stem


def _step1c(word: str) -> str:
    if word.endswith("y") and _has_vowel(word, len(word) - 1):
        return word[:-1] + "i"
    return word


_STEP2_RULES = {
    "a": (("ational", "ate"), ("tional", "tion")),
    "c": (("enci", "ence"), ("anci", "ance")),
    "e": (("izer", "ize"),),
    "l": (("bli", "ble"), ("alli", "al"), ("entli", "ent"), ("eli", "e"), ("ousli", "ous")),
    "o": (("ization", "ize"), ("ation", "ate"), ("ator", "ate")),
    "s": (("alism", "al"), ("iveness", "ive"), ("fulness", "ful"), ("ousness", "ous")),
    "t": (("aliti", "al"), ("iviti", "ive"), ("biliti", "ble")),
    "g": (("logi", "log"),),
}

_STEP3_RULES = {
    "e": (("icate", "ic"), ("ative", ""), ("alize", "al")),
    "i": (("iciti", "ic"),),
    "l": (("ical", "ic"), ("ful", "")),
    "s": (("ness", ""),),
}


def _apply_rule_table(word: str, rules: tuple[tuple[str, str], ...], min_measure: int) -> str:
    for suffix, repl in rules:
        result = _replace_suffix(word, suffix, repl, min_measure)
        if result is not None:
            return result
    return word


def _step2(word: str) -> str:
    if len(word) < 2:
        return word
    rules = _STEP2_RULES.get(word[-2])
    return _apply_rule_table(word, rules, 0) if rules else word


def _step3(word: str) -> str:
    rules = _STEP3_RULES.get(word[-1])
    return _apply_rule_table(word, rules, 0) if rules else word


_STEP4_SUFFIXES = {
    "a": ("al",),
    "c": ("ance", "ence"),
    "e": ("er",),
    "i": ("ic",),
    "l": ("able", "ible"),
    "n": ("ant", "ement", "ment", "ent"),
    "s": ("ism",),
    "t": ("ate", "iti"),
    "u": ("ous",),
    "v": ("ive",),
    "z": ("ize",),
}


def _step4(word: str) -> str:
    if len(word) < 2:
        return word
    ch = word[-2]
    if ch == "o":
        # "ion" drops only after s/t; "ou" drops unconditionally on measure
        if word.endswith("ion") and len(word) >= 4 and word[-4] in "st":
            suffixes: tuple[str, ...] = ("ion",)
        elif word.endswith("ou"):
            suffixes = ("ou",)
        else:
            return word
    else:
        suffixes = _STEP4_SUFFIXES.get(ch, ())
    for suffix in suffixes:
        result = _replace_suffix(word, suffix, "", 1)
        if result is not None:
            return result
    return word


def _step5(word: str) -> str:
    if word.endswith("e"):
        m = _measure(word, len(word))
        if m > 1 or (m == 1 and not _ends_cvc(word, len(word) - 1)):
            word = word[:-1]
    if word.endswith("l") and _ends_double_consonant(word) and _measure(word, len(word)) > 1:
        word = word[:-1]
    return word


def porter_stem(token: str) -> str:
    """Stem one lowercase token; non-alphabetic tokens pass through unchanged."""
    if len(token) <= 2 or not _ALPHA_RE.match(token):
        return token
    word = _step1a(token)
    word = _step1b(word)
    word = _step1c(word)
    word = _step2(word)
    word = _step3(word)
    word = _step4(word)
    word = _step5(word)
    return word


def preprocess_text(text: str) -> list[str]:
    # stemming can land on a stopword ("cans" -> "can"); the no-stopword
    # guarantee covers the output, so filter those too
    stems = (porter_stem(t) for t in remove_stopwords(tokenize(text)))
    return [s for s in stems if s not in STOPWORDS]


def preprocess(doc_id: str, text: str) -> TokenizedDoc:
    """Tokenize, drop stopwords, then stem, in that order."""
    return TokenizedDoc(doc_id=doc_id, tokens=tuple(preprocess_text(text)))
