"""Frame selection and lexicon assembly.

Three acquisition modes share the same candidate generator and constraint
profiles but pick frames differently:

* ``baseline``: tally full frames per verb, accept those whose relative
  frequency clears tau, and salvage rejected prepositional frames by
  re-assigning their counts to the same frame without the least frequent
  PP (iterated until nothing splittable is left).
* ``ot``: per occurrence, candidates compete on the ranked constraints;
  the lexicographically least-violating candidate is credited with the
  occurrence's reliability weight, then the re-credited tally goes through
  the frequency floor.
* ``linear``: like ``ot`` but the winner minimizes a weighted mark sum;
  occurrences whose best score exceeds theta are discarded as noise.

Ties in any mode credit one deterministic winner (fewest constituents,
then smallest frame string) so counts stay reproducible; co-winners are
kept on the tableau for display.
"""

import enum
import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .constraints import (
    CONSTRAINT_IDS,
    ConfigError,
    ConstraintProfile,
    ConstraintRanking,
    CorpusStatistics,
    build_statistics,
    evaluate,
    mwe_candidates,
    prep_dispersion,
    rel_freq,
)
from .corpus import Sentence
from .frames import INTRANS, Scf, ScfTally, TallyRow, candidates, sp_prep, tally
from .lexicon import (
    AUTO_ACCEPTED,
    AUTO_REJECTED,
    PENDING,
    DecisionRecord,
    Lexicon,
    LexiconEntry,
)
from .patterns import PatternExtractor, VerbOccurrence

logger = logging.getLogger(__name__)

MODE_BASELINE = "baseline"
MODE_LINEAR = "linear"
MODE_OT = "ot"
MODES = (MODE_BASELINE, MODE_LINEAR, MODE_OT)

DEFAULT_MIN_VERB_OCCURRENCES = 200
DEFAULT_LINEAR_WEIGHTS = {
    "STAR-DISPERSED-PP": 1.0,
    "STAR-IDIOM-SLOT": 1.0,
    "FAITH-ARG": 0.25,
    "FREQ-FLOOR": 0.25,
}


class Ordering(enum.Enum):
    A_BETTER = "a-better"
    B_BETTER = "b-better"
    TIE = "tie"


def compare(a: ConstraintProfile, b: ConstraintProfile,
            ranking: Optional[ConstraintRanking] = None) -> Ordering:
    """Lexicographic comparison from the highest-ranked constraint down."""
    if len(a) != len(b):
        raise ValueError(f"profile length mismatch: {len(a)} vs {len(b)}")
    if ranking is not None and len(ranking) != len(a):
        raise ValueError(f"profiles have {len(a)} marks but ranking has {len(ranking)}")
    for x, y in zip(a.marks, b.marks):
        if x < y:
            return Ordering.A_BETTER
        if x > y:
            return Ordering.B_BETTER
    return Ordering.TIE


def credit_key(scf: Scf) -> Tuple[int, str]:
    """Deterministic tie-break: fewest constituents, then smallest string."""
    return (len(scf.constituents), scf.string_form)


def optimal(rows: Sequence[Tuple[Scf, ConstraintProfile]],
            ranking: Optional[ConstraintRanking] = None) -> Tuple[List[int], int]:
    """Indices of the rows beaten by no other row, plus the credited winner."""
    if not rows:
        raise ValueError("cannot pick an optimal candidate from an empty row set")
    best = 0
    for i in range(1, len(rows)):
        if compare(rows[i][1], rows[best][1], ranking) is Ordering.A_BETTER:
            best = i
    winners = [i for i, (_, profile) in enumerate(rows)
               if compare(profile, rows[best][1], ranking) is Ordering.TIE]
    credited = min(winners, key=lambda i: credit_key(rows[i][0]))
    return winners, credited


@dataclass
class TableauRow:
    scf: Scf
    profile: ConstraintProfile
    winner: bool = False
    credited: bool = False


@dataclass
class Tableau:
    """One occurrence's candidate competition, ready for display."""

    verb_key: str
    sentence_id: str
    ranking: ConstraintRanking
    rows: List[TableauRow]

    @property
    def credited(self) -> Scf:
        for row in self.rows:
            if row.credited:
                return row.scf
        raise ValueError("tableau has no credited winner")

    def record_lines(self) -> Iterable[str]:
        for row in self.rows:
            marks = ",".join(str(m) for m in row.profile.marks)
            yield "\t".join([self.sentence_id, self.verb_key, row.scf.string_form,
                             marks, "1" if row.winner else "0", "1" if row.credited else "0"])


def build_tableau(occurrence: VerbOccurrence, full_tally: ScfTally,
                  stats: CorpusStatistics, ranking: ConstraintRanking,
                  gen_cap: int = 5) -> Tableau:
    """Evaluate every candidate of an occurrence and mark the winners."""
    frames = candidates(occurrence, gen_cap)
    scored = [(frame, evaluate(frame, occurrence, full_tally, stats, ranking))
              for frame in frames]
    winners, credited = optimal(scored, ranking)
    rows = [TableauRow(scf=frame, profile=profile) for frame, profile in scored]
    for i in winners:
        rows[i].winner = True
    rows[credited].credited = True
    return Tableau(verb_key=occurrence.verb_key, sentence_id=occurrence.sentence_id,
                   ranking=ranking, rows=rows)


def linear_score(profile: ConstraintProfile, weights: Mapping[str, float],
                 ranking: ConstraintRanking) -> float:
    """Weighted mark sum; validates that every ranked constraint has a weight."""
    missing = [cid for cid in ranking.order if cid not in weights]
    if missing:
        raise ConfigError(f"missing linear weight(s) for: {', '.join(missing)}")
    negative = [cid for cid in ranking.order if weights[cid] < 0]
    if negative:
        raise ConfigError(f"negative linear weight(s) for: {', '.join(negative)}")
    return sum(weights[cid] * mark for cid, mark in zip(ranking.order, profile.marks))


def confidence(raw_count: int, rel_freq_value: float, mean_reliability: float) -> float:
    """Confidence in [0, 1]: share x support saturation x parse reliability."""
    if raw_count <= 0:
        return 0.0
    value = rel_freq_value * (raw_count / (raw_count + 5.0)) * mean_reliability
    return min(1.0, max(0.0, value))


@dataclass
class SplitEvent:
    """One PP re-assignment: source frame, removed PP, receiving frame."""

    source: str
    victim: str
    target: str
    raw: int
    weighted: float


@dataclass
class FrameDecision:
    scf: Scf
    raw: int
    weighted: float
    rel_freq: float
    accepted: bool
    reason: str = ""
    evidence: Tuple[str, ...] = ()


@dataclass
class VerbFilterResult:
    verb_key: str
    total_raw: int
    total_weighted: float
    decisions: Dict[str, FrameDecision] = field(default_factory=dict)
    splits: List[SplitEvent] = field(default_factory=list)


def pp_split(frame: Scf, verb_rows: Mapping[str, TallyRow],
             stats: Optional[CorpusStatistics] = None) -> Optional[Tuple[Scf, str]]:
    """Pick the PP to strip from a rejected frame; None when not applicable.

    The victim is the SP constituent whose standalone single-PP frame is
    rarest for this verb (ties: higher dispersion first, then label order).
    Single-constituent frames are never split: re-assignment must not
    manufacture INTRANS readings.
    """
    sp_labels = sorted({label for label in frame.constituents if sp_prep(label) is not None})
    if not sp_labels or len(frame.constituents) < 2:
        return None

    def victim_key(label: str) -> Tuple[float, float, str]:
        row = verb_rows.get(Scf.of([label]).string_form)
        standalone = row.weighted if row is not None else 0.0
        dispersion = 0.0
        if stats is not None:
            prep = sp_prep(label)
            dispersion = float(prep_dispersion(prep, stats))
        return (standalone, -dispersion, label)

    victim = min(sp_labels, key=victim_key)
    return frame.without(victim), victim


def _filter_verb(verb_key: str, rows: Mapping[str, TallyRow], tau: float,
                 stats: Optional[CorpusStatistics], evidence_cap: int) -> VerbFilterResult:
    working: Dict[str, TallyRow] = {
        s: TallyRow(scf=row.scf, raw=row.raw, weighted=row.weighted,
                    evidence=list(row.evidence), seen=row.seen)
        for s, row in rows.items()
    }
    total_raw = sum(row.raw for row in working.values())
    total_weighted = sum(row.weighted for row in working.values())
    result = VerbFilterResult(verb_key=verb_key, total_raw=total_raw,
                              total_weighted=total_weighted)
    if total_weighted <= 0:
        return result

    while True:
        splittable = []
        for scf_string, row in working.items():
            if row.raw <= 0:
                continue
            if rel_freq(row.weighted, total_weighted) >= tau:
                continue
            split = pp_split(row.scf, working, stats)
            if split is not None:
                splittable.append((row.weighted, row.raw, scf_string, split))
        if not splittable:
            break
        _, _, source_string, (reduced, victim) = min(splittable, key=lambda t: (t[0], t[1], t[2]))
        source = working[source_string]
        target = working.get(reduced.string_form)
        if target is None:
            target = TallyRow(scf=reduced)
            working[reduced.string_form] = target
        target.raw += source.raw
        target.weighted += source.weighted
        target.evidence = (target.evidence + source.evidence)[:evidence_cap]
        target.seen += source.seen
        result.splits.append(SplitEvent(source=source_string, victim=victim,
                                        target=reduced.string_form,
                                        raw=source.raw, weighted=source.weighted))
        source.raw = 0
        source.weighted = 0.0
        source.evidence = []
        source.seen = 0
        del working[source_string]

    for scf_string in sorted(working):
        row = working[scf_string]
        if row.raw <= 0:
            continue
        share = rel_freq(row.weighted, total_weighted)
        accepted = share >= tau
        reason = "" if accepted else "below threshold"
        result.decisions[scf_string] = FrameDecision(
            scf=row.scf, raw=row.raw, weighted=row.weighted, rel_freq=share,
            accepted=accepted, reason=reason, evidence=tuple(row.evidence))
    return result


def baseline_filter(full_tally: ScfTally, tau: float,
                    stats: Optional[CorpusStatistics] = None,
                    verbs: Optional[Iterable[str]] = None,
                    evidence_cap: int = 20) -> Dict[str, VerbFilterResult]:
    """Threshold + iterative PP-split over the full-frame tally.

    Counts are conserved per verb: every split moves mass, nothing is
    dropped, and termination is guaranteed because each split strictly
    reduces total constituent-weighted mass.
    """
    if not 0.0 <= tau <= 1.0:
        raise ConfigError(f"tau must lie in [0, 1], got {tau}")
    wanted = sorted(verbs) if verbs is not None else full_tally.verbs()
    return {verb_key: _filter_verb(verb_key, full_tally.rows(verb_key), tau, stats, evidence_cap)
            for verb_key in wanted}


@dataclass
class AcquisitionConfig:
    """Everything that shapes an acquisition run (and its fingerprint)."""

    mode: str = MODE_BASELINE
    ranking: ConstraintRanking = field(default_factory=ConstraintRanking)
    weights: Optional[Dict[str, float]] = None
    theta: float = 1.0
    min_verb_occurrences: int = DEFAULT_MIN_VERB_OCCURRENCES
    gen_cap: int = 5
    reliability_pivot: int = 15
    evidence_cap: int = 20
    seed: int = 0

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r} (expected one of {MODES})")
        if self.min_verb_occurrences < 1:
            raise ConfigError("min_verb_occurrences must be >= 1")
        if self.gen_cap < 1:
            raise ConfigError("gen_cap must be >= 1")
        if self.reliability_pivot < 1:
            raise ConfigError("reliability_pivot must be >= 1")
        if self.theta < 0:
            raise ConfigError("theta must be >= 0")
        if self.mode == MODE_LINEAR:
            weights = self.effective_weights()
            for cid in self.ranking.order:
                if cid not in weights:
                    raise ConfigError(f"linear mode requires a weight for {cid}")
                if weights[cid] < 0:
                    raise ConfigError(f"weight for {cid} must be >= 0")

    def effective_weights(self) -> Dict[str, float]:
        return dict(DEFAULT_LINEAR_WEIGHTS if self.weights is None else self.weights)

    def semantic_dict(self) -> Dict:
        return {
            "mode": self.mode,
            "ranking": list(self.ranking.order),
            "tau": self.ranking.tau,
            "delta": self.ranking.delta,
            "kappa": self.ranking.kappa,
            "weights": self.effective_weights() if self.mode == MODE_LINEAR else None,
            "theta": self.theta,
            "min_verb_occurrences": self.min_verb_occurrences,
            "gen_cap": self.gen_cap,
            "reliability_pivot": self.reliability_pivot,
            "evidence_cap": self.evidence_cap,
            "seed": self.seed,
        }

    def fingerprint(self) -> str:
        blob = json.dumps(self.semantic_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class AcquisitionResult:
    """A lexicon plus run diagnostics that do not belong in the file."""

    lexicon: Lexicon
    summary: Dict[str, int] = field(default_factory=dict)
    tableaux: List[Tableau] = field(default_factory=list)
    stats: Optional[CorpusStatistics] = None
    full_tally: Optional[ScfTally] = None


def _pick_linear(scored: Sequence[Tuple[Scf, ConstraintProfile]],
                 weights: Mapping[str, float], ranking: ConstraintRanking) -> Tuple[int, float]:
    best_index = 0
    best = (linear_score(scored[0][1], weights, ranking),) + credit_key(scored[0][0])
    for i in range(1, len(scored)):
        key = (linear_score(scored[i][1], weights, ranking),) + credit_key(scored[i][0])
        if key < best:
            best = key
            best_index = i
    return best_index, best[0]


def _entry(verb_key: str, decision: FrameDecision, status: str, mode: str,
           mwe_by_verb: Mapping[str, Dict[str, str]]) -> LexiconEntry:
    mean_rel = decision.weighted / decision.raw if decision.raw > 0 else 0.0
    flags = []
    verb_flags = mwe_by_verb.get(verb_key, {})
    for label in decision.scf.constituents:
        if label in verb_flags:
            flags.append(verb_flags[label])
    return LexiconEntry(
        verb_key=verb_key, scf=decision.scf.string_form, raw_count=decision.raw,
        weighted_count=decision.weighted, rel_freq=decision.rel_freq,
        confidence=confidence(decision.raw, decision.rel_freq, mean_rel),
        status=status, mode=mode, evidence=decision.evidence,
        mwe_flags=tuple(flags),
    )


def acquire(corpus: Iterable[Sentence], config: Optional[AcquisitionConfig] = None,
            decisions: Sequence[DecisionRecord] = (),
            collect_tableaux: bool = False) -> AcquisitionResult:
    """Run a full acquisition pass over a corpus of parsed sentences.

    ``decisions`` only matters for the below-minimum rule: verbs without
    enough occurrences are dropped unless a human has already ruled on
    them, in which case their frames come out with status ``pending``.
    Deterministic: the same corpus bytes and config yield the same lexicon.
    """
    config = config or AcquisitionConfig()
    config.validate()
    ranking = config.ranking

    extractor = PatternExtractor(reliability_pivot=config.reliability_pivot)
    occurrences: List[VerbOccurrence] = []
    for sentence in corpus:
        occurrences.extend(extractor.extract(sentence))

    summary = {
        "sentences_read": getattr(corpus, "sentences_read", 0),
        "sentences_skipped": getattr(corpus, "sentences_skipped", 0),
        "occurrences": len(occurrences),
        "other_slots_dropped": extractor.other_slots_dropped,
    }
    fingerprint = config.fingerprint()
    if not occurrences:
        logger.warning("no verb occurrences found; emitting an empty lexicon")
        summary.update(verbs_processed=0, verbs_insufficient=0, frames_emitted=0)
        return AcquisitionResult(lexicon=Lexicon(config.mode, fingerprint), summary=summary)

    full_tally = tally(occurrences, seed=config.seed, evidence_cap=config.evidence_cap)
    stats = build_statistics(occurrences)

    eligible = {v for v in full_tally.verbs()
                if full_tally.total_raw(v) >= config.min_verb_occurrences}
    decided_verbs = {record.verb_key for record in decisions}
    tentative = {v for v in full_tally.verbs() if v not in eligible and v in decided_verbs}

    mwe = mwe_candidates(stats, ranking.kappa)
    mwe_by_verb: Dict[str, Dict[str, str]] = {}
    for cand in mwe:
        mwe_by_verb.setdefault(cand.verb_key, {})[cand.slot_label] = (
            f"{cand.slot_label}~{cand.head}:{cand.share:.2f}")

    entries: List[LexiconEntry] = []
    tableaux: List[Tableau] = []
    skipped_theta = 0

    if config.mode == MODE_BASELINE:
        results = baseline_filter(full_tally, ranking.tau, stats, verbs=eligible,
                                  evidence_cap=config.evidence_cap)
        for verb_key in sorted(results):
            for scf_string in sorted(results[verb_key].decisions):
                decision = results[verb_key].decisions[scf_string]
                status = AUTO_ACCEPTED if decision.accepted else AUTO_REJECTED
                entries.append(_entry(verb_key, decision, status, config.mode, mwe_by_verb))
        if collect_tableaux:
            for occurrence in occurrences:
                if occurrence.verb_key in eligible:
                    tableaux.append(build_tableau(occurrence, full_tally, stats,
                                                  ranking, config.gen_cap))
    else:
        weights = config.effective_weights() if config.mode == MODE_LINEAR else None
        credited_tally = ScfTally(seed=config.seed, evidence_cap=config.evidence_cap)
        for occurrence in occurrences:
            if occurrence.verb_key not in eligible:
                continue
            tableau = build_tableau(occurrence, full_tally, stats, ranking, config.gen_cap)
            if weights is None:
                winner = tableau.credited
            else:
                scored = [(row.scf, row.profile) for row in tableau.rows]
                index, score = _pick_linear(scored, weights, ranking)
                if score > config.theta:
                    skipped_theta += 1
                    continue
                winner = scored[index][0]
                scores = [linear_score(p, weights, ranking) for _, p in scored]
                for row, row_score in zip(tableau.rows, scores):
                    row.winner = row_score == score
                    row.credited = row.scf.string_form == winner.string_form
            credited_tally.add(occurrence.verb_key, winner,
                               occurrence.reliability, occurrence.sentence_id)
            if collect_tableaux:
                tableaux.append(tableau)
        for verb_key in credited_tally.verbs():
            total_weighted = credited_tally.total_weighted(verb_key)
            for scf_string in sorted(credited_tally.rows(verb_key)):
                row = credited_tally.rows(verb_key)[scf_string]
                share = rel_freq(row.weighted, total_weighted) if total_weighted > 0 else 0.0
                decision = FrameDecision(scf=row.scf, raw=row.raw, weighted=row.weighted,
                                         rel_freq=share, accepted=share >= ranking.tau,
                                         evidence=tuple(row.evidence))
                status = AUTO_ACCEPTED if decision.accepted else AUTO_REJECTED
                entries.append(_entry(verb_key, decision, status, config.mode, mwe_by_verb))

    # Verbs with too little data but an existing human trail surface as pending.
    for verb_key in sorted(tentative):
        total_weighted = full_tally.total_weighted(verb_key)
        for scf_string in sorted(full_tally.rows(verb_key)):
            row = full_tally.rows(verb_key)[scf_string]
            share = rel_freq(row.weighted, total_weighted) if total_weighted > 0 else 0.0
            decision = FrameDecision(scf=row.scf, raw=row.raw, weighted=row.weighted,
                                     rel_freq=share, accepted=False,
                                     evidence=tuple(row.evidence))
            entries.append(_entry(verb_key, decision, PENDING, config.mode, mwe_by_verb))

    lexicon = Lexicon(mode=config.mode, fingerprint=fingerprint, entries=entries)
    lexicon.sort()
    summary.update(
        verbs_processed=len(eligible),
        verbs_insufficient=len(full_tally.verbs()) - len(eligible),
        verbs_pending=len(tentative),
        frames_emitted=len(entries),
        frames_accepted=sum(1 for e in entries if e.status == AUTO_ACCEPTED),
        frames_rejected=sum(1 for e in entries if e.status == AUTO_REJECTED),
        occurrences_skipped_theta=skipped_theta,
        idiom_candidates=len(mwe),
    )
    return AcquisitionResult(lexicon=lexicon, summary=summary, tableaux=tableaux,
                             stats=stats, full_tally=full_tally)
