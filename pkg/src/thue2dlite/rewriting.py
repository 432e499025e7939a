"""Rewriting instances and the bounded word-equivalence search.

An instance is a finite alphabet, a list of rewrite pairs and a goal pair of
words.  A word is a tuple of symbol names; ``()`` is the empty word.  Two
words are equivalent when one can be turned into the other by repeatedly
replacing an occurrence of one side of a rewrite pair with the other side.

The search here is deliberately bounded: :func:`decide_equivalence` explores
the rewrite graph bidirectionally up to a word-length cap and an expansion
budget.  An ``Equivalent`` verdict always carries a step-by-step path that
re-validates against :func:`rewrite_neighbors`; an ``Unknown`` verdict never
claims anything beyond which bound ran out.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .errors import (
    DuplicateAlphabetSymbolError,
    EmptyRuleSideError,
    MissingGoalError,
    ReservedSymbolError,
    ThueParseError,
    UnknownSymbolError,
)

Word = tuple[str, ...]

# Names carrying a fixed meaning in structures/ontologies; an alphabet may
# not reuse them.
RESERVED_SYMBOLS = ("A", "T")

_TOKEN_RE = re.compile(r"[A-Za-z0-9_]+\Z")

# Word separator used for interned search keys; cannot occur in tokens.
_SEP = "\x1f"


def format_word(word: Word) -> str:
    """Render a word in .thue syntax (multi-character symbols in parens)."""
    return "".join(s if len(s) == 1 else f"({s})" for s in word)


@dataclass(frozen=True)
class RewritePair:
    """One rewrite pair; both sides are nonempty words."""

    left: Word
    right: Word

    def __post_init__(self):
        if not self.left or not self.right:
            raise ValueError("rewrite pair sides must be nonempty")


@dataclass(frozen=True)
class ThueInstance:
    """Alphabet, rewrite pairs and the goal pair of a word-problem instance."""

    alphabet: tuple[str, ...]
    rules: tuple[RewritePair, ...]
    goal_left: Word
    goal_right: Word

    def __post_init__(self):
        if not self.alphabet:
            raise ValueError("alphabet must be nonempty")
        if list(self.alphabet) != sorted(set(self.alphabet)):
            raise ValueError("alphabet must be sorted and duplicate-free")
        for sym in self.alphabet:
            if not _TOKEN_RE.match(sym):
                raise ValueError(f"invalid symbol token {sym!r}")
            if sym in RESERVED_SYMBOLS:
                raise ValueError(f"symbol {sym!r} is reserved")
        known = set(self.alphabet)
        for rule in self.rules:
            for side in (rule.left, rule.right):
                self._check_word(side, known)
        if not self.goal_left or not self.goal_right:
            raise ValueError("goal words must be nonempty")
        self._check_word(self.goal_left, known)
        self._check_word(self.goal_right, known)

    @staticmethod
    def _check_word(word: Word, known: set[str]):
        for sym in word:
            if sym not in known:
                raise ValueError(f"word uses symbol {sym!r} outside the alphabet")

    @property
    def rule_count(self) -> int:
        return len(self.rules)

    @property
    def alphabet_size(self) -> int:
        return len(self.alphabet)

    def slot_count(self, variant: str) -> int:
        """Number of slot gadgets the compiled ontology postulates."""
        base = self.rule_count + self.alphabet_size
        if variant == "neq":
            return base
        if variant == "neg":
            return 2 * base
        raise ValueError(f"unknown variant {variant!r}")

    def rule(self, k: int) -> RewritePair:
        """Rewrite pair number ``k`` (1-based, as reported in justifications)."""
        if not 1 <= k <= self.rule_count:
            raise ValueError(f"rule index {k} out of range 1..{self.rule_count}")
        return self.rules[k - 1]


@dataclass(frozen=True)
class RewriteStep:
    """One rewrite application: rule number (1-based), position, direction.

    ``forward`` means the left side was replaced by the right side.
    """

    rule: int
    position: int
    forward: bool


@dataclass(frozen=True)
class RewritePath:
    """A checkable derivation; ``len(words) == len(steps) + 1``."""

    words: tuple[Word, ...]
    steps: tuple[RewriteStep, ...]

    def __post_init__(self):
        if len(self.words) != len(self.steps) + 1:
            raise ValueError("path must have one more word than steps")


@dataclass(frozen=True)
class Equivalent:
    path: RewritePath


@dataclass(frozen=True)
class Unknown:
    """Search gave up; ``exhausted`` names the bound that ran out.

    ``expansions``: the expansion budget was consumed.
    ``word_len``: frontiers emptied but some neighbors were over the cap.
    ``frontier``: frontiers emptied with nothing suppressed.
    """

    exhausted: str
    expansions: int
    visited: int


Verdict = Equivalent | Unknown


def parse_word(text: str, alphabet: Iterable[str], line: int | None = None) -> Word:
    """Parse .thue word syntax: bare single characters or ``(token)`` groups."""
    known = set(alphabet)
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "(":
            end = text.find(")", i)
            if end < 0:
                raise ThueParseError("unterminated '(' in word", line)
            token = text[i + 1 : end]
            i = end + 1
        else:
            token = ch
            i += 1
        if not _TOKEN_RE.match(token):
            raise ThueParseError(f"invalid symbol token {token!r}", line)
        if token not in known:
            raise UnknownSymbolError(f"unknown symbol {token!r}", line)
        out.append(token)
    return tuple(out)


def _split_equation(rest: str, line: int) -> tuple[str, str]:
    parts = rest.split("=")
    if len(parts) != 2:
        raise ThueParseError("expected exactly one '=' between two words", line)
    left, right = parts[0].strip(), parts[1].strip()
    for side in (left, right):
        if any(c.isspace() for c in side):
            raise ThueParseError("words must be whitespace-free", line)
    return left, right


def parse_thue(text: str) -> ThueInstance:
    """Parse a .thue document.

    Line-oriented format with ``#`` comments: one ``alphabet:`` line, any
    number of ``rule: w = w'`` lines, exactly one ``goal: w = w'`` line.
    The alphabet line must precede the words that use it.
    """
    alphabet: list[str] | None = None
    rules: list[RewritePair] = []
    goal: tuple[Word, Word] | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        head, sep, rest = stripped.partition(":")
        if not sep:
            raise ThueParseError(
                "expected an 'alphabet:', 'rule:' or 'goal:' directive", lineno
            )
        key = head.strip()
        if key == "alphabet":
            if alphabet is not None:
                raise ThueParseError("duplicate alphabet line", lineno)
            symbols = rest.split()
            if not symbols:
                raise ThueParseError("alphabet line lists no symbols", lineno)
            seen = set()
            for sym in symbols:
                if not _TOKEN_RE.match(sym):
                    raise ThueParseError(f"invalid symbol token {sym!r}", lineno)
                if sym in RESERVED_SYMBOLS:
                    raise ReservedSymbolError(
                        f"symbol {sym!r} is reserved for the structure signature",
                        lineno,
                    )
                if sym in seen:
                    raise DuplicateAlphabetSymbolError(
                        f"duplicate alphabet symbol {sym!r}", lineno
                    )
                seen.add(sym)
            alphabet = symbols
        elif key in ("rule", "goal"):
            if alphabet is None:
                raise ThueParseError("alphabet line must come first", lineno)
            left_text, right_text = _split_equation(rest, lineno)
            left = parse_word(left_text, alphabet, lineno)
            right = parse_word(right_text, alphabet, lineno)
            if not left or not right:
                raise EmptyRuleSideError(f"empty word on a {key} line", lineno)
            if key == "rule":
                rules.append(RewritePair(left, right))
            else:
                if goal is not None:
                    raise ThueParseError("duplicate goal line", lineno)
                goal = (left, right)
        else:
            raise ThueParseError(f"unknown directive {key!r}", lineno)

    if alphabet is None:
        raise ThueParseError("missing alphabet line")
    if goal is None:
        raise MissingGoalError("missing goal line")
    return ThueInstance(tuple(sorted(alphabet)), tuple(rules), goal[0], goal[1])


def format_thue(inst: ThueInstance) -> str:
    """Render an instance back to .thue text."""
    lines = ["alphabet: " + " ".join(inst.alphabet)]
    for rule in inst.rules:
        lines.append(f"rule: {format_word(rule.left)} = {format_word(rule.right)}")
    lines.append(
        f"goal: {format_word(inst.goal_left)} = {format_word(inst.goal_right)}"
    )
    return "\n".join(lines) + "\n"


def rewrite_neighbors(
    word: Word, rules: Iterable[RewritePair]
) -> list[tuple[Word, RewriteStep]]:
    """All single-step rewrites of ``word``, in (rule, position, direction) order.

    Each result pairs the rewritten word with the justification that produced
    it; the same word may appear under several justifications.
    """
    out = []
    n = len(word)
    for idx, rule in enumerate(rules, start=1):
        for pos in range(n + 1):
            for forward, src, dst in (
                (True, rule.left, rule.right),
                (False, rule.right, rule.left),
            ):
                end = pos + len(src)
                if end <= n and word[pos:end] == src:
                    out.append(
                        (word[:pos] + dst + word[end:], RewriteStep(idx, pos, forward))
                    )
    return out


def apply_step(word: Word, rules: tuple[RewritePair, ...], step: RewriteStep) -> Word | None:
    """Apply one justification to ``word``; None if it does not match."""
    if not 1 <= step.rule <= len(rules):
        return None
    rule = rules[step.rule - 1]
    src, dst = (rule.left, rule.right) if step.forward else (rule.right, rule.left)
    end = step.position + len(src)
    if end > len(word) or word[step.position : end] != src:
        return None
    return word[: step.position] + dst + word[end:]


def validate_path(path: RewritePath, rules: tuple[RewritePair, ...]) -> bool:
    """Re-check a derivation step by step."""
    for i, step in enumerate(path.steps):
        if apply_step(path.words[i], rules, step) != path.words[i + 1]:
            return False
    return True


def _key(word: Word) -> str:
    return _SEP.join(word)


def _unkey(key: str) -> Word:
    return tuple(key.split(_SEP)) if key else ()


class _Side:
    """One direction of the bidirectional search."""

    def __init__(self, root: Word):
        key = _key(root)
        self.queue = deque([key])
        # key -> (parent key, step that turned parent into key), None at root
        self.parents: dict[str, tuple[str, RewriteStep] | None] = {key: None}

    def chain(self, key: str) -> list[tuple[str, RewriteStep | None]]:
        """Keys from the root to ``key`` with the step that produced each."""
        out = []
        cur: str | None = key
        while cur is not None:
            entry = self.parents[cur]
            if entry is None:
                out.append((cur, None))
                cur = None
            else:
                out.append((cur, entry[1]))
                cur = entry[0]
        out.reverse()
        return out


def decide_equivalence(
    u: Word,
    v: Word,
    rules: tuple[RewritePair, ...],
    max_word_len: int,
    max_expansions: int,
) -> Verdict:
    """Bounded bidirectional breadth-first search for a rewrite path u -> v.

    Sound but incomplete: ``Equivalent`` comes with a replayable path, while
    ``Unknown`` only reports which bound was exhausted.  Deterministic for
    fixed inputs and bounds.
    """
    if max_word_len < max(len(u), len(v)):
        raise ValueError("max_word_len must cover both input words")
    if u == v:
        return Equivalent(RewritePath((u,), ()))

    fwd, bwd = _Side(u), _Side(v)
    expansions = 0
    truncated = False

    while (fwd.queue or bwd.queue) and expansions < max_expansions:
        if not fwd.queue:
            side, other = bwd, fwd
        elif not bwd.queue:
            side, other = fwd, bwd
        elif len(fwd.queue) <= len(bwd.queue):
            side, other = fwd, bwd
        else:
            side, other = bwd, fwd
        key = side.queue.popleft()
        expansions += 1
        word = _unkey(key)
        for neighbor, step in rewrite_neighbors(word, rules):
            if len(neighbor) > max_word_len:
                truncated = True
                continue
            nkey = _key(neighbor)
            if nkey in side.parents:
                continue
            side.parents[nkey] = (key, step)
            if nkey in other.parents:
                return Equivalent(_stitch(fwd, bwd, nkey))
            side.queue.append(nkey)

    visited = len(fwd.parents) + len(bwd.parents)
    if fwd.queue or bwd.queue:
        return Unknown("expansions", expansions, visited)
    return Unknown("word_len" if truncated else "frontier", expansions, visited)


def _stitch(fwd: _Side, bwd: _Side, meet: str) -> RewritePath:
    words: list[Word] = []
    steps: list[RewriteStep] = []
    for key, step in fwd.chain(meet):
        words.append(_unkey(key))
        if step is not None:
            steps.append(step)
    # The backward chain runs target-to-meet; walk it back out to the target,
    # flipping each step's direction.  A step recorded at position i turned
    # back[i-1] into back[i], so the flipped step turns back[i] into back[i-1]
    # at the same position.
    back = bwd.chain(meet)
    for i in range(len(back) - 1, 0, -1):
        _, step = back[i]
        assert step is not None
        steps.append(RewriteStep(step.rule, step.position, not step.forward))
        words.append(_unkey(back[i - 1][0]))
    return RewritePath(tuple(words), tuple(steps))
