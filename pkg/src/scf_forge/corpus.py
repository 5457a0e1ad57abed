"""Readers and writers for dependency-parsed corpora.

Supported formats:

* ``syntex``: pipe-separated ``POS|lemma|surface|index|govlink|deplist``
  lines, where ``govlink`` is a single ``REL;idx`` pair (empty for roots)
  and ``deplist`` is a comma-separated list of ``REL;idx`` pairs.  Root
  lines may drop the empty governor field entirely, leaving their dependent
  list in field 5.
* ``tsv``: the canonical interchange format, one token per line with six
  tab-separated columns (index, surface, lemma, pos, governor index,
  governor relation); ``_`` marks roots.  Dependent lists are reconstructed
  from the governor column.

Blank lines separate sentences in both formats.  Sentences are normalized
so every link is recorded on both ends, then validated: token indices must
run 1..n without gaps, link targets must exist, and governor chains must be
acyclic.  The streaming reader skips and counts invalid sentences instead
of aborting the whole corpus.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, TextIO, Tuple, Union

logger = logging.getLogger(__name__)

SYNTEX = "syntex"
CANONICAL_TSV = "tsv"

_FORMAT_ALIASES = {
    "syntex": SYNTEX,
    "tsv": CANONICAL_TSV,
    "canonical-tsv": CANONICAL_TSV,
    "canonical_tsv": CANONICAL_TSV,
}

Link = Tuple[str, int]


class CorpusError(ValueError):
    """Base class for corpus parsing failures."""


class LineParseError(CorpusError):
    """A single token line could not be parsed."""

    def __init__(self, message: str, line_no: int = 0, text: str = ""):
        detail = f"line {line_no}: {message}"
        if text:
            detail += f" [{text}]"
        super().__init__(detail)
        self.line_no = line_no
        self.text = text


class SentenceError(CorpusError):
    """A sentence block violates a structural invariant."""

    def __init__(self, message: str, sentence_id: str = ""):
        super().__init__(f"sentence {sentence_id or '?'}: {message}")
        self.sentence_id = sentence_id


def normalize_format(fmt: str) -> str:
    try:
        return _FORMAT_ALIASES[fmt.lower()]
    except KeyError:
        raise CorpusError(f"unknown corpus format {fmt!r} (expected one of {sorted(set(_FORMAT_ALIASES))})")


@dataclass(frozen=True)
class Token:
    """One token of a dependency-parsed sentence (immutable)."""

    index: int
    surface: str
    lemma: str
    pos: str
    governor: Optional[Link] = None
    dependents: Tuple[Link, ...] = ()


@dataclass(frozen=True)
class Sentence:
    """A normalized dependency-parsed sentence; tokens are 1-indexed."""

    id: str
    tokens: Tuple[Token, ...]

    @property
    def length(self) -> int:
        return len(self.tokens)

    def token(self, index: int) -> Token:
        """Return the token with 1-based position ``index``."""
        return self.tokens[index - 1]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)


def _parse_link(text: str, line_no: int) -> Link:
    rel, sep, idx = text.partition(";")
    if not sep or not rel:
        raise LineParseError(f"malformed link pair {text!r} (expected REL;idx)", line_no, text)
    try:
        return rel, int(idx)
    except ValueError:
        raise LineParseError(f"non-integer link index in {text!r}", line_no, text)


def _parse_link_list(text: str, line_no: int) -> Tuple[Link, ...]:
    if not text:
        return ()
    return tuple(_parse_link(item, line_no) for item in text.split(","))


def _parse_syntex_fields(line: str, line_no: int) -> Tuple[Token, bool]:
    """Parse one syntex line; the flag marks an ambiguous 5-field link.

    A 5-field line puts its link material in field 5: a comma-separated
    list is unambiguously a dependent list (the root layout seen in parser
    output), while a single ``REL;idx`` pair defaults to a governor link.
    ``parse_sentence`` flips the ambiguous case to a dependent list when the
    target token claims this one as its governor with the same relation.
    """
    fields = line.split("|")
    if len(fields) not in (5, 6):
        raise LineParseError(f"expected 5 or 6 pipe-separated fields, got {len(fields)}", line_no, line)
    pos, lemma, surface, raw_index = fields[0], fields[1], fields[2], fields[3]
    try:
        index = int(raw_index)
    except ValueError:
        raise LineParseError(f"non-integer token index {raw_index!r}", line_no, raw_index)
    if index < 1:
        raise LineParseError(f"token index must be >= 1, got {index}", line_no, raw_index)

    governor: Optional[Link] = None
    dependents: Tuple[Link, ...] = ()
    ambiguous = False
    if len(fields) == 6:
        if fields[4]:
            governor = _parse_link(fields[4], line_no)
        dependents = _parse_link_list(fields[5], line_no)
    else:
        tail = fields[4]
        if "," in tail:
            dependents = _parse_link_list(tail, line_no)
        elif tail:
            governor = _parse_link(tail, line_no)
            ambiguous = True
    return Token(index=index, surface=surface, lemma=lemma, pos=pos,
                 governor=governor, dependents=dependents), ambiguous


def parse_syntex_line(line: str, line_no: int = 0) -> Token:
    """Parse a single syntex token line."""
    token, _ = _parse_syntex_fields(line, line_no)
    return token


def parse_tsv_line(line: str, line_no: int = 0) -> Token:
    """Parse a single canonical-tsv token line."""
    cols = line.split("\t")
    if len(cols) != 6:
        raise LineParseError(f"expected 6 tab-separated columns, got {len(cols)}", line_no, line)
    raw_index, surface, lemma, pos, gov_idx, gov_rel = cols
    try:
        index = int(raw_index)
    except ValueError:
        raise LineParseError(f"non-integer token index {raw_index!r}", line_no, raw_index)
    if index < 1:
        raise LineParseError(f"token index must be >= 1, got {index}", line_no, raw_index)
    governor: Optional[Link] = None
    if gov_idx != "_" or gov_rel != "_":
        if gov_idx == "_" or gov_rel == "_":
            raise LineParseError("governor index and relation must both be set or both be '_'", line_no, line)
        try:
            governor = (gov_rel, int(gov_idx))
        except ValueError:
            raise LineParseError(f"non-integer governor index {gov_idx!r}", line_no, gov_idx)
    return Token(index=index, surface=surface, lemma=lemma, pos=pos, governor=governor)


def parse_sentence(lines: Sequence[str], sentence_id: str = "", fmt: str = SYNTEX) -> Sentence:
    """Parse a block of token lines into a normalized, validated ``Sentence``."""
    fmt = normalize_format(fmt)
    parsed: List[Tuple[Token, bool]] = []
    for offset, line in enumerate(lines, start=1):
        if fmt == SYNTEX:
            parsed.append(_parse_syntex_fields(line, offset))
        else:
            parsed.append((parse_tsv_line(line, offset), False))

    n = len(parsed)
    by_index: Dict[int, Token] = {}
    for token, _ in parsed:
        if token.index in by_index:
            raise SentenceError(f"duplicate token index {token.index}", sentence_id)
        by_index[token.index] = token
    missing = set(range(1, n + 1)) - set(by_index)
    if missing:
        raise SentenceError(f"index gap: missing {sorted(missing)}", sentence_id)

    # Resolve ambiguous 5-field links: if the claimed governor itself points
    # back here with the same relation, the field was a dependent list.
    resolved: Dict[int, Token] = {}
    for token, ambiguous in parsed:
        if ambiguous and token.governor is not None:
            rel, target = token.governor
            other = by_index.get(target)
            if other is not None and other.governor == (rel, token.index):
                token = Token(index=token.index, surface=token.surface, lemma=token.lemma,
                              pos=token.pos, governor=None, dependents=((rel, target),))
        resolved[token.index] = token

    # Normalize: collect every link as (relation, governor, dependent) and
    # check that no token ends up with two governors.
    governor_of: Dict[int, Link] = {}

    def _check_target(idx: int, where: str, owner: int) -> None:
        if idx == owner:
            raise SentenceError(f"token {owner} lists itself as {where}", sentence_id)
        if idx not in resolved:
            raise SentenceError(f"dangling {where} target {idx} on token {owner}", sentence_id)

    for token in resolved.values():
        if token.governor is not None:
            rel, gov = token.governor
            _check_target(gov, "governor", token.index)
            governor_of[token.index] = (rel, gov)
    for token in resolved.values():
        for rel, dep in dict.fromkeys(token.dependents):  # drop duplicates, keep order
            _check_target(dep, "dependent", token.index)
            recorded = governor_of.get(dep)
            if recorded is None:
                governor_of[dep] = (rel, token.index)
            elif recorded != (rel, token.index):
                raise SentenceError(
                    f"conflicting links for token {dep}: governor {recorded} vs ({rel}, {token.index})",
                    sentence_id)

    _check_acyclic(governor_of, sentence_id)

    dependents_of: Dict[int, List[Link]] = {}
    for dep, (rel, gov) in governor_of.items():
        dependents_of.setdefault(gov, []).append((rel, dep))
    tokens = []
    for index in range(1, n + 1):
        src = resolved[index]
        deps = tuple(sorted(dependents_of.get(index, ()), key=lambda link: link[1]))
        tokens.append(Token(index=index, surface=src.surface, lemma=src.lemma, pos=src.pos,
                            governor=governor_of.get(index), dependents=deps))
    return Sentence(id=sentence_id, tokens=tuple(tokens))


def _check_acyclic(governor_of: Dict[int, Link], sentence_id: str) -> None:
    state: Dict[int, int] = {}  # 1 = on current chain, 2 = done
    for start in governor_of:
        node = start
        chain = []
        while node in governor_of and state.get(node) != 2:
            if state.get(node) == 1:
                raise SentenceError(f"cycle through token {node}", sentence_id)
            state[node] = 1
            chain.append(node)
            node = governor_of[node][1]
        for visited in chain:
            state[visited] = 2


def to_canonical_tsv(sentence: Sentence) -> str:
    """Serialize a sentence to canonical-tsv (no trailing blank line)."""
    lines = []
    for token in sentence.tokens:
        if token.governor is None:
            gov_idx, gov_rel = "_", "_"
        else:
            gov_rel, idx = token.governor
            gov_idx = str(idx)
        lines.append("\t".join([str(token.index), token.surface, token.lemma, token.pos, gov_idx, gov_rel]))
    return "\n".join(lines)


def write_corpus(sentences: Iterable[Sentence], out: TextIO) -> int:
    """Write sentences as canonical-tsv blocks; returns the block count."""
    count = 0
    for sentence in sentences:
        out.write(to_canonical_tsv(sentence))
        out.write("\n\n")
        count += 1
    return count


def _iter_blocks(lines: Iterable[str]) -> Iterator[List[str]]:
    block: List[str] = []
    for raw in lines:
        line = raw.rstrip("\r\n")
        if line.strip():
            block.append(line)
        elif block:
            yield block
            block = []
    if block:
        yield block


class CorpusReader:
    """Stream sentences from a corpus source, skipping malformed blocks.

    Counters (``sentences_read``, ``sentences_skipped``, ``tokens_read``)
    accumulate as iteration proceeds and are final once the stream is
    exhausted.  Sentence ids are ``<source-name>:<block-ordinal>``.
    """

    def __init__(self, source: Union[str, Path, TextIO, Iterable[str]],
                 fmt: str = SYNTEX, source_name: Optional[str] = None):
        self._source = source
        self.fmt = normalize_format(fmt)
        if source_name is None:
            source_name = Path(source).name if isinstance(source, (str, Path)) else "corpus"
        self.source_name = source_name
        self.sentences_read = 0
        self.sentences_skipped = 0
        self.tokens_read = 0

    def _open_lines(self):
        if isinstance(self._source, (str, Path)):
            return open(self._source, encoding="utf-8"), True
        return self._source, False

    def __iter__(self) -> Iterator[Sentence]:
        lines, owned = self._open_lines()
        try:
            for ordinal, block in enumerate(_iter_blocks(lines), start=1):
                sentence_id = f"{self.source_name}:{ordinal}"
                try:
                    sentence = parse_sentence(block, sentence_id, self.fmt)
                except CorpusError as exc:
                    logger.warning("skipping %s: %s", sentence_id, exc)
                    self.sentences_skipped += 1
                    continue
                self.sentences_read += 1
                self.tokens_read += len(sentence)
                yield sentence
        finally:
            if owned:
                lines.close()


def read_corpus(source: Union[str, Path, TextIO, Iterable[str]],
                fmt: str = SYNTEX, source_name: Optional[str] = None) -> CorpusReader:
    """Open a streaming reader over a corpus file, stream, or line iterable."""
    return CorpusReader(source, fmt, source_name)


def _parse_block_job(args):
    block, sentence_id, fmt = args
    try:
        return parse_sentence(block, sentence_id, fmt), None
    except CorpusError as exc:
        return None, str(exc)


class ParallelCorpusReader:
    """Fan block parsing out to worker processes, yielding in block order.

    Same counters as ``CorpusReader``; parsing is pure per block, so the
    only effect of ``jobs`` is wall-clock time.
    """

    def __init__(self, path: Union[str, Path], fmt: str = SYNTEX, jobs: int = 2,
                 source_name: Optional[str] = None):
        self.path = Path(path)
        self.fmt = normalize_format(fmt)
        self.jobs = max(1, jobs)
        self.source_name = source_name or self.path.name
        self.sentences_read = 0
        self.sentences_skipped = 0
        self.tokens_read = 0

    def _jobs_args(self, lines):
        for ordinal, block in enumerate(_iter_blocks(lines), start=1):
            yield block, f"{self.source_name}:{ordinal}", self.fmt

    def __iter__(self) -> Iterator[Sentence]:
        import multiprocessing

        with open(self.path, encoding="utf-8") as lines:
            if self.jobs == 1:
                results = map(_parse_block_job, self._jobs_args(lines))
                yield from self._consume(results)
            else:
                with multiprocessing.Pool(self.jobs) as pool:
                    results = pool.imap(_parse_block_job, self._jobs_args(lines),
                                        chunksize=64)
                    yield from self._consume(results)

    def _consume(self, results) -> Iterator[Sentence]:
        for sentence, error in results:
            if sentence is None:
                logger.warning("skipping block: %s", error)
                self.sentences_skipped += 1
                continue
            self.sentences_read += 1
            self.tokens_read += len(sentence)
            yield sentence
