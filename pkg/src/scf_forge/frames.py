"""Candidate frame construction and (verb, frame) tallying.

A frame is a multiset of constituent labels (``SN``, ``SINF``, ``SA``,
``COMPL``, ``SP[prep+SN]``, ``SP[prep+SINF]``) kept in a canonical order so
that word-order variation never duplicates frames; the empty frame renders
as ``INTRANS``.  The candidate generator produces the sub-frame lattice of
an occurrence: every frame obtainable by deleting some subset of its slots,
which is exactly the hypothesis space of the argument/adjunct decision.
"""

import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .patterns import VerbOccurrence, OTHER

INTRANS = "INTRANS"

_SIMPLE_ORDER = {"SN": 0, "SINF": 1, "SA": 2, "COMPL": 3}
_SP_INNER = {"SN": 0, "SINF": 1}


class FrameParseError(ValueError):
    """A frame string or constituent label is not well-formed."""


def label_sort_key(label: str) -> Tuple[int, str, int]:
    """Canonical ordering key: SN < SINF < SA < COMPL < SP[...] by prep then inner."""
    if label in _SIMPLE_ORDER:
        return (_SIMPLE_ORDER[label], "", 0)
    if label.startswith("SP[") and label.endswith("]"):
        body = label[3:-1]
        prep, sep, inner = body.rpartition("+")
        if sep and prep and inner in _SP_INNER:
            return (4, prep, _SP_INNER[inner])
    raise FrameParseError(f"unknown constituent label {label!r}")


def sp_prep(label: str) -> Optional[str]:
    """The preposition of an SP label, or None for other constituents."""
    if label.startswith("SP["):
        return label[3:-1].rpartition("+")[0]
    return None


@dataclass(frozen=True)
class Scf:
    """A canonicalized subcategorization frame (a label multiset)."""

    constituents: Tuple[str, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(self.constituents, key=label_sort_key))
        if ordered != tuple(self.constituents):
            object.__setattr__(self, "constituents", ordered)

    @property
    def string_form(self) -> str:
        return "_".join(self.constituents) if self.constituents else INTRANS

    @classmethod
    def of(cls, labels: Iterable[str]) -> "Scf":
        return cls(tuple(labels))

    @classmethod
    def from_string(cls, text: str) -> "Scf":
        text = text.strip()
        if not text:
            raise FrameParseError("empty frame string")
        if text == INTRANS:
            return cls()
        return cls(tuple(text.split("_")))

    def __len__(self) -> int:
        return len(self.constituents)

    def without(self, label: str) -> "Scf":
        """Remove one instance of ``label`` (multiset deletion)."""
        remaining = list(self.constituents)
        remaining.remove(label)
        return Scf(tuple(remaining))

    def __str__(self) -> str:
        return self.string_form


def build_scf(occurrence: VerbOccurrence) -> Scf:
    """Map an occurrence to its full canonical frame (INTRANS when slotless)."""
    labels = []
    for slot in occurrence.slots:
        if slot.kind == OTHER:
            raise ValueError("occurrence slots must not contain OTHER")
        labels.append(slot.label())
    return Scf.of(labels)


def corpus_order_string(occurrence: VerbOccurrence) -> str:
    """Frame string with constituents in token order (display adapter)."""
    labels = [slot.label() for slot in occurrence.slots]
    return "_".join(labels) if labels else INTRANS


def candidates(occurrence: VerbOccurrence, cap: int = 5) -> List[Scf]:
    """The sub-frame lattice of an occurrence, deduplicated.

    Up to ``cap`` slots the full deletion lattice is generated; beyond that
    only the full frame, each single-slot deletion, and INTRANS are kept so
    the candidate count stays linear.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    labels = [slot.label() for slot in occurrence.slots]
    n = len(labels)
    subsets: List[Tuple[str, ...]]
    if n <= cap:
        subsets = []
        for size in range(n, -1, -1):
            subsets.extend(combinations(labels, size))
    else:
        subsets = [tuple(labels)]
        for drop in range(n):
            subsets.append(tuple(labels[:drop] + labels[drop + 1:]))
        subsets.append(())
    seen = set()
    result = []
    for subset in subsets:
        frame = Scf.of(subset)
        if frame.string_form not in seen:
            seen.add(frame.string_form)
            result.append(frame)
    return result


@dataclass
class TallyRow:
    """Counts and bounded evidence for one (verb, frame) pair."""

    scf: Scf
    raw: int = 0
    weighted: float = 0.0
    evidence: List[str] = field(default_factory=list)
    seen: int = 0  # evidence candidates offered to the reservoir


class ScfTally:
    """Per-verb frame counts: raw occurrences and reliability-weighted mass.

    Evidence sentence ids are kept per row as a bounded reservoir sample
    with a deterministic per-row seed, so identical corpora produce
    identical evidence.  Merging tallies is associative and commutative on
    the counts.
    """

    def __init__(self, seed: int = 0, evidence_cap: int = 20):
        self.seed = seed
        self.evidence_cap = evidence_cap
        self._rows: Dict[str, Dict[str, TallyRow]] = {}
        self._rngs: Dict[Tuple[str, str], random.Random] = {}

    def _rng(self, verb_key: str, scf_string: str) -> random.Random:
        key = (verb_key, scf_string)
        rng = self._rngs.get(key)
        if rng is None:
            rng = random.Random(f"{self.seed}\x1f{verb_key}\x1f{scf_string}")
            self._rngs[key] = rng
        return rng

    def add(self, verb_key: str, scf: Scf, reliability: float = 1.0,
            sentence_id: Optional[str] = None) -> None:
        rows = self._rows.setdefault(verb_key, {})
        row = rows.get(scf.string_form)
        if row is None:
            row = TallyRow(scf=scf)
            rows[scf.string_form] = row
        row.raw += 1
        row.weighted += reliability
        if sentence_id is not None:
            row.seen += 1
            if len(row.evidence) < self.evidence_cap:
                row.evidence.append(sentence_id)
            else:
                slot = self._rng(verb_key, scf.string_form).randrange(row.seen)
                if slot < self.evidence_cap:
                    row.evidence[slot] = sentence_id

    def merge(self, other: "ScfTally") -> "ScfTally":
        for verb_key, rows in other._rows.items():
            mine = self._rows.setdefault(verb_key, {})
            for scf_string, row in rows.items():
                target = mine.get(scf_string)
                if target is None:
                    mine[scf_string] = TallyRow(scf=row.scf, raw=row.raw, weighted=row.weighted,
                                                evidence=list(row.evidence), seen=row.seen)
                else:
                    target.raw += row.raw
                    target.weighted += row.weighted
                    target.evidence = (target.evidence + row.evidence)[: self.evidence_cap]
                    target.seen += row.seen
        return self

    def verbs(self) -> List[str]:
        return sorted(self._rows)

    def rows(self, verb_key: str) -> Dict[str, TallyRow]:
        return self._rows.get(verb_key, {})

    def get(self, verb_key: str, scf_string: str) -> Optional[TallyRow]:
        return self._rows.get(verb_key, {}).get(scf_string)

    def total_raw(self, verb_key: str) -> int:
        return sum(row.raw for row in self._rows.get(verb_key, {}).values())

    def total_weighted(self, verb_key: str) -> float:
        return sum(row.weighted for row in self._rows.get(verb_key, {}).values())

    def export_lines(self) -> Iterator[str]:
        """Line-delimited export: verb, frame, raw count, weighted count."""
        for verb_key in self.verbs():
            for scf_string in sorted(self._rows[verb_key]):
                row = self._rows[verb_key][scf_string]
                yield f"{verb_key}\t{scf_string}\t{row.raw}\t{row.weighted!r}"


def tally(occurrences: Iterable[VerbOccurrence], seed: int = 0,
          evidence_cap: int = 20) -> ScfTally:
    """Tally the full frame of every occurrence."""
    out = ScfTally(seed=seed, evidence_cap=evidence_cap)
    for occurrence in occurrences:
        out.add(occurrence.verb_key, build_scf(occurrence),
                occurrence.reliability, occurrence.sentence_id)
    return out
