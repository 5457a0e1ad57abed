"""Corpus statistics and the ranked violable constraints.

Four constraints judge a candidate frame against the occurrence it came
from and the corpus at large:

* ``FAITH-ARG``: one mark per observed slot the candidate deleted; keeps
  deletion minimal.
* ``STAR-DISPERSED-PP``: one mark per retained prepositional slot whose
  preposition spreads over many verbs (high normalized entropy); such PPs
  behave like modifiers, not arguments.
* ``STAR-IDIOM-SLOT``: one mark per retained SP or SN slot whose head noun
  is heavily concentrated on a single lemma; such combinations belong in a
  multiword-expression list, not in a productive frame.
* ``FREQ-FLOOR``: one mark when the candidate's weighted relative frequency
  with the verb falls under the threshold tau.

Profiles are mark vectors aligned with a ranking (an ordered constraint
list plus the tau/delta/kappa parameters).
"""

import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

from .frames import Scf, ScfTally, sp_prep
from .patterns import PREP_SINF, PREP_SN, SN, VerbOccurrence

FAITH_ARG = "FAITH-ARG"
STAR_DISPERSED_PP = "STAR-DISPERSED-PP"
STAR_IDIOM_SLOT = "STAR-IDIOM-SLOT"
FREQ_FLOOR = "FREQ-FLOOR"

CONSTRAINT_IDS = (FAITH_ARG, STAR_DISPERSED_PP, STAR_IDIOM_SLOT, FREQ_FLOOR)
DEFAULT_RANKING_ORDER = (STAR_DISPERSED_PP, STAR_IDIOM_SLOT, FAITH_ARG, FREQ_FLOOR)


class ConfigError(ValueError):
    """Invalid constraint ranking or parameter."""


class UndefinedInputError(ValueError):
    """A statistic was requested for inputs where it is undefined."""


class Measure(float):
    """A [0, 1] statistic carrying an ``unseen`` flag for unobserved inputs."""

    unseen: bool

    def __new__(cls, value: float, unseen: bool = False):
        out = super().__new__(cls, value)
        out.unseen = unseen
        return out


@dataclass(frozen=True)
class ConstraintRanking:
    """An ordered constraint list with the shared threshold parameters."""

    order: Tuple[str, ...] = DEFAULT_RANKING_ORDER
    tau: float = 0.01
    delta: float = 0.6
    kappa: float = 0.8

    def __post_init__(self):
        order = tuple(self.order)
        object.__setattr__(self, "order", order)
        if not order:
            raise ConfigError("constraint ranking must not be empty")
        unknown = [cid for cid in order if cid not in CONSTRAINT_IDS]
        if unknown:
            raise ConfigError(f"unknown constraint id(s): {', '.join(unknown)}")
        if len(set(order)) != len(order):
            raise ConfigError("duplicate constraint ids in ranking")
        for name in ("tau", "delta", "kappa"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")

    def index(self, constraint_id: str) -> int:
        return self.order.index(constraint_id)

    def __len__(self) -> int:
        return len(self.order)


@dataclass(frozen=True)
class ConstraintProfile:
    """Violation marks, index-aligned to a ranking."""

    marks: Tuple[int, ...]

    def __post_init__(self):
        marks = tuple(int(m) for m in self.marks)
        object.__setattr__(self, "marks", marks)
        if any(m < 0 for m in marks):
            raise ValueError("violation marks must be non-negative")

    def __len__(self) -> int:
        return len(self.marks)


class CorpusStatistics:
    """Aggregate corpus counts feeding constraint evaluation.

    Shards can be built independently and merged; after building, the
    object is treated as read-only.
    """

    def __init__(self):
        self.verb_raw: Counter = Counter()
        self.verb_weighted: Dict[str, float] = {}
        self.prep_verb_counts: Dict[str, Counter] = {}
        self.headnoun_counts: Dict[Tuple[str, str], Counter] = {}

    @property
    def distinct_verbs(self) -> int:
        return len(self.verb_raw)

    def add_occurrence(self, occurrence: VerbOccurrence) -> None:
        verb = occurrence.verb_key
        self.verb_raw[verb] += 1
        self.verb_weighted[verb] = self.verb_weighted.get(verb, 0.0) + occurrence.reliability
        preps = []
        for slot in occurrence.slots:
            if slot.prep:
                preps.append(slot.prep)
            if slot.kind in (SN, PREP_SN, PREP_SINF) and slot.head_lemma:
                key = (verb, slot.label())
                heads = self.headnoun_counts.get(key)
                if heads is None:
                    heads = self.headnoun_counts[key] = Counter()
                heads[slot.head_lemma] += 1
        # An occurrence feeds a preposition's verb spread at most once.
        for prep in dict.fromkeys(preps):
            verbs = self.prep_verb_counts.get(prep)
            if verbs is None:
                verbs = self.prep_verb_counts[prep] = Counter()
            verbs[verb] += 1

    def merge(self, other: "CorpusStatistics") -> "CorpusStatistics":
        self.verb_raw.update(other.verb_raw)
        for verb, weight in other.verb_weighted.items():
            self.verb_weighted[verb] = self.verb_weighted.get(verb, 0.0) + weight
        for prep, verbs in other.prep_verb_counts.items():
            self.prep_verb_counts.setdefault(prep, Counter()).update(verbs)
        for key, heads in other.headnoun_counts.items():
            self.headnoun_counts.setdefault(key, Counter()).update(heads)
        return self


def build_statistics(occurrences: Iterable[VerbOccurrence]) -> CorpusStatistics:
    stats = CorpusStatistics()
    for occurrence in occurrences:
        stats.add_occurrence(occurrence)
    return stats


def rel_freq(count: float, total: float) -> float:
    """Relative frequency count/total; undefined for an empty total."""
    if total <= 0:
        raise UndefinedInputError("rel_freq is undefined for total <= 0")
    if count < 0 or count > total:
        raise UndefinedInputError(f"count {count} outside [0, {total}]")
    return count / total


def prep_dispersion(prep: str, stats: CorpusStatistics) -> Measure:
    """How widely a preposition's PPs spread over verbs, in [0, 1].

    Normalized Shannon entropy (natural log) of the verb distribution given
    the preposition, over the corpus's distinct-verb count.  1 means the
    preposition attaches indiscriminately (modifier-like); 0 means it
    sticks to a single verb.  Unseen prepositions return 0 flagged unseen.
    """
    verbs = stats.prep_verb_counts.get(prep)
    if not verbs:
        return Measure(0.0, unseen=True)
    if stats.distinct_verbs <= 1 or len(verbs) <= 1:
        return Measure(0.0)
    total = sum(verbs.values())
    entropy = -sum((c / total) * math.log(c / total) for c in verbs.values() if c > 0)
    return Measure(min(1.0, entropy / math.log(stats.distinct_verbs)))


def head_noun_concentration(verb_key: str, slot_label: str, stats: CorpusStatistics) -> Measure:
    """Share of the most frequent head lemma for a (verb, slot) pair."""
    heads = stats.headnoun_counts.get((verb_key, slot_label))
    if not heads:
        return Measure(0.0, unseen=True)
    return Measure(max(heads.values()) / sum(heads.values()))


class MweCandidate(NamedTuple):
    """A slot whose head concentration marks it as semi-idiomatic."""

    verb_key: str
    slot_label: str
    head: str
    share: float
    count: int


def mwe_candidates(stats: CorpusStatistics, kappa: float, min_count: int = 1) -> List[MweCandidate]:
    """Slots whose head concentration reaches kappa, for the MWE side-channel."""
    found = []
    for (verb_key, slot_label), heads in stats.headnoun_counts.items():
        total = sum(heads.values())
        if total < min_count:
            continue
        head, count = max(heads.items(), key=lambda item: (item[1], item[0]))
        share = count / total
        if share >= kappa:
            found.append(MweCandidate(verb_key, slot_label, head, share, total))
    found.sort()
    return found


def dispersion_table(stats: CorpusStatistics) -> Iterable[str]:
    """Line-delimited dispersion dump: prep, entropy, distinct verb count."""
    for prep in sorted(stats.prep_verb_counts):
        value = prep_dispersion(prep, stats)
        yield f"{prep}\t{float(value)!r}\t{len(stats.prep_verb_counts[prep])}"


def mwe_table(stats: CorpusStatistics, kappa: float) -> Iterable[str]:
    """Line-delimited MWE dump: verb, slot, head, share."""
    for cand in mwe_candidates(stats, kappa):
        yield f"{cand.verb_key}\t{cand.slot_label}\t{cand.head}\t{cand.share!r}"


def evaluate(candidate: Scf, occurrence: VerbOccurrence, tally: ScfTally,
             stats: CorpusStatistics, ranking: ConstraintRanking) -> ConstraintProfile:
    """Compute the violation profile of one candidate frame.

    The candidate must be a sub-multiset of the occurrence's full frame.
    Marks come out aligned with ``ranking.order``.
    """
    full_labels = [slot.label() for slot in occurrence.slots]
    retained = list(candidate.constituents)
    pool = list(full_labels)
    for label in retained:
        try:
            pool.remove(label)
        except ValueError:
            raise ValueError(f"candidate {candidate.string_form} is not a sub-frame "
                             f"of the occurrence ({'_'.join(full_labels) or 'INTRANS'})")

    faith = len(full_labels) - len(retained)

    dispersed = 0
    idiom = 0
    for label in retained:
        prep = sp_prep(label)
        if prep is not None and prep_dispersion(prep, stats) > ranking.delta:
            dispersed += 1
        if (prep is not None or label == SN) and \
                head_noun_concentration(occurrence.verb_key, label, stats) >= ranking.kappa:
            idiom += 1

    total = tally.total_weighted(occurrence.verb_key)
    if total <= 0:
        floor = 1
    else:
        row = tally.get(occurrence.verb_key, candidate.string_form)
        weighted = row.weighted if row is not None else 0.0
        floor = 1 if rel_freq(weighted, total) < ranking.tau else 0

    by_id = {
        FAITH_ARG: faith,
        STAR_DISPERSED_PP: dispersed,
        STAR_IDIOM_SLOT: idiom,
        FREQ_FLOOR: floor,
    }
    return ConstraintProfile(tuple(by_id[cid] for cid in ranking.order))
