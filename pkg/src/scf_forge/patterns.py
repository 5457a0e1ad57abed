"""Per-verb pattern extraction from normalized sentences.

Each occurrence of a target verb is turned into an ordered list of slot
realizations built from its dependents.  Subjects and reflexive pronouns
are consumed rather than emitted: a ``se`` reflexive renames the verb
(``abattre`` -> ``se|abattre``), and the subject never enters a frame.
Prepositional dependents are expanded through the analysis to decide
whether the preposition introduces a noun phrase or an infinitive.
Dependents whose relation maps to no constituent class are dropped and
counted.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Collection, Dict, Iterable, List, Optional, Tuple, Union

from .corpus import Sentence, Token

logger = logging.getLogger(__name__)

# Slot kinds.
SN = "SN"
SINF = "SINF"
SA = "SA"
COMPL = "COMPL"
PREP_SN = "PrepSN"
PREP_SINF = "PrepSINF"
OTHER = "OTHER"

# Relation classes (what the extractor does with a dependency).
SUBJECT = "subject"
REFLEXIVE = "reflexive"
OBJECT = "object"
PREPOSITION = "preposition"
ATTRIBUTE = "attribute"
COMPLETIVE = "completive"

DEFAULT_RELATION_CLASSES: Dict[str, str] = {
    "SUJ": SUBJECT,
    "REF": REFLEXIVE,
    "OBJ": OBJECT,
    "PREP": PREPOSITION,
    "ATB": ATTRIBUTE,
    "ATTR": ATTRIBUTE,
    "COMPL": COMPLETIVE,
    "COMP": COMPLETIVE,
}

DEFAULT_NOMPREP_RELATION = "NOMPREP"
DEFAULT_RELIABILITY_PIVOT = 15

REFLEXIVE_MARKER = "se|"
_ELIDABLE = "aàâäeéèêëiîïoôöuùûüyh"


def _is_verb(pos: str) -> bool:
    return pos.startswith("V")


def _is_infinitive(pos: str) -> bool:
    return pos.startswith("VINF")


def _is_nominal(pos: str) -> bool:
    return pos.startswith("Nom") or pos.startswith("Pro")


def _is_adjectival(pos: str) -> bool:
    return pos.startswith("Adj")


def _is_preposition(pos: str) -> bool:
    return pos.startswith("Prep")


@dataclass(frozen=True)
class SlotRealization:
    """One dependent of a verb occurrence, classified for frame building."""

    kind: str
    relation: str
    token_index: int
    prep: Optional[str] = None
    head_lemma: Optional[str] = None

    def __post_init__(self):
        if self.kind in (PREP_SN, PREP_SINF):
            if not self.prep:
                raise ValueError(f"{self.kind} slot requires a preposition lemma")
            if self.prep != self.prep.lower():
                object.__setattr__(self, "prep", self.prep.lower())

    def label(self) -> str:
        """The constituent label this slot contributes to a frame."""
        if self.kind == PREP_SN:
            return f"SP[{self.prep}+SN]"
        if self.kind == PREP_SINF:
            return f"SP[{self.prep}+SINF]"
        return self.kind


@dataclass(frozen=True)
class VerbOccurrence:
    """A verb instance with its extracted slots and a reliability weight."""

    verb_key: str
    sentence_id: str
    slots: Tuple[SlotRealization, ...]
    reliability: float
    verb_index: int = 0
    verb_pos: str = ""


def sentence_reliability(sentence: Sentence, pivot: int = DEFAULT_RELIABILITY_PIVOT) -> float:
    """Reliability weight in (0, 1]: 1 up to ``pivot`` tokens, then pivot/length.

    Longer sentences are harder to parse, so their occurrences count for
    less when frames are tallied.
    """
    length = len(sentence)
    if length < 1:
        raise ValueError("reliability is undefined for an empty sentence")
    return min(1.0, pivot / length)


def reflexive_key(verb_lemma: str, has_reflexive_dependent: bool) -> str:
    """Key a verb lemma, marking reflexive uses as a distinct verb."""
    if not verb_lemma:
        raise ValueError("empty verb lemma")
    if has_reflexive_dependent:
        return REFLEXIVE_MARKER + verb_lemma
    return verb_lemma


def display_verb(verb_key: str) -> str:
    """Human-facing rendering: ``se|abattre`` -> ``s'abattre``, ``se|laver`` -> ``se laver``."""
    if verb_key.startswith(REFLEXIVE_MARKER):
        lemma = verb_key[len(REFLEXIVE_MARKER):]
        if lemma and lemma[0].lower() in _ELIDABLE:
            return "s'" + lemma
        return "se " + lemma
    return verb_key


def expand_preposition(prep_token: Token, sentence: Sentence,
                       relation: str = "PREP",
                       nomprep_relation: str = DEFAULT_NOMPREP_RELATION) -> SlotRealization:
    """Classify a prepositional dependent by what the preposition governs.

    A nominal complement yields a ``SP[prep+SN]`` slot, an infinitive a
    ``SP[prep+SINF]`` slot; anything else (including a bare preposition)
    is OTHER and will be dropped from the occurrence.
    """
    complement = None
    for rel, dep in prep_token.dependents:
        if rel == nomprep_relation:
            complement = sentence.token(dep)
            break
    if complement is None:
        return SlotRealization(OTHER, relation, prep_token.index)
    prep = prep_token.lemma.lower()
    if _is_infinitive(complement.pos):
        return SlotRealization(PREP_SINF, relation, prep_token.index,
                               prep=prep, head_lemma=complement.lemma)
    if _is_nominal(complement.pos):
        return SlotRealization(PREP_SN, relation, prep_token.index,
                               prep=prep, head_lemma=complement.lemma)
    return SlotRealization(OTHER, relation, prep_token.index)


TargetFilter = Union[None, Callable[[str], bool], Collection[str]]


class PatternExtractor:
    """Extracts verb occurrences from sentences, with running counters.

    ``targets`` restricts extraction to some verb lemmas (a collection or a
    predicate over bare lemmas); by default every token whose POS starts
    with ``V`` is a target.
    """

    def __init__(self, targets: TargetFilter = None,
                 relation_classes: Optional[Dict[str, str]] = None,
                 reliability_pivot: int = DEFAULT_RELIABILITY_PIVOT,
                 nomprep_relation: str = DEFAULT_NOMPREP_RELATION):
        if targets is None:
            self._match = lambda lemma: True
        elif callable(targets):
            self._match = targets
        else:
            wanted = set(targets)
            self._match = lambda lemma: lemma in wanted
        self.relation_classes = dict(DEFAULT_RELATION_CLASSES if relation_classes is None
                                     else relation_classes)
        self.reliability_pivot = reliability_pivot
        self.nomprep_relation = nomprep_relation
        self.occurrences_extracted = 0
        self.other_slots_dropped = 0

    def extract(self, sentence: Sentence) -> List[VerbOccurrence]:
        occurrences = []
        reliability = None
        for token in sentence:
            if not _is_verb(token.pos) or not self._match(token.lemma):
                continue
            if reliability is None:
                reliability = sentence_reliability(sentence, self.reliability_pivot)
            occurrences.append(self._extract_one(token, sentence, reliability))
        self.occurrences_extracted += len(occurrences)
        return occurrences

    def _extract_one(self, verb: Token, sentence: Sentence, reliability: float) -> VerbOccurrence:
        slots: List[SlotRealization] = []
        has_reflexive = False
        for rel, dep_index in sorted(verb.dependents, key=lambda link: link[1]):
            dep = sentence.token(dep_index)
            klass = self.relation_classes.get(rel)
            if klass == SUBJECT:
                continue
            if klass == REFLEXIVE:
                if dep.lemma == "se":
                    has_reflexive = True
                continue
            slot = self._classify(klass, rel, dep, sentence)
            if slot.kind == OTHER:
                self.other_slots_dropped += 1
                continue
            slots.append(slot)
        return VerbOccurrence(
            verb_key=reflexive_key(verb.lemma, has_reflexive),
            sentence_id=sentence.id,
            slots=tuple(slots),
            reliability=reliability,
            verb_index=verb.index,
            verb_pos=verb.pos,
        )

    def _classify(self, klass: Optional[str], rel: str, dep: Token,
                  sentence: Sentence) -> SlotRealization:
        if klass == PREPOSITION and _is_preposition(dep.pos):
            return expand_preposition(dep, sentence, rel, self.nomprep_relation)
        if klass == OBJECT:
            if _is_infinitive(dep.pos):
                return SlotRealization(SINF, rel, dep.index, head_lemma=dep.lemma)
            if _is_nominal(dep.pos):
                return SlotRealization(SN, rel, dep.index, head_lemma=dep.lemma)
            if _is_adjectival(dep.pos):
                return SlotRealization(SA, rel, dep.index, head_lemma=dep.lemma)
        elif klass == ATTRIBUTE:
            if _is_adjectival(dep.pos):
                return SlotRealization(SA, rel, dep.index, head_lemma=dep.lemma)
            if _is_nominal(dep.pos):
                return SlotRealization(SN, rel, dep.index, head_lemma=dep.lemma)
        elif klass == COMPLETIVE:
            return SlotRealization(COMPL, rel, dep.index, head_lemma=dep.lemma)
        return SlotRealization(OTHER, rel, dep.index)


def extract_occurrences(sentence: Sentence, targets: TargetFilter = None,
                        **kwargs) -> List[VerbOccurrence]:
    """One-shot extraction; see ``PatternExtractor`` for the knobs."""
    return PatternExtractor(targets, **kwargs).extract(sentence)


def sp_slot_token_indices(slot: SlotRealization, sentence: Sentence) -> List[int]:
    """Token indices a slot spans: its head, plus the complement for preps."""
    indices = [slot.token_index]
    if slot.kind in (PREP_SN, PREP_SINF):
        prep_token = sentence.token(slot.token_index)
        for rel, dep in prep_token.dependents:
            if rel == DEFAULT_NOMPREP_RELATION:
                indices.append(dep)
                break
    return indices


def render_slots(occurrence: VerbOccurrence) -> str:
    """Render slots in the debug pattern notation, e.g. ``Prep+SN|sur|PREP``."""
    parts = []
    for slot in occurrence.slots:
        if slot.kind == PREP_SN:
            parts.append(f"Prep+SN|{slot.prep}|{slot.relation}")
        elif slot.kind == PREP_SINF:
            parts.append(f"Prep+SINF|{slot.prep}|{slot.relation}")
        else:
            parts.append(f"{slot.kind}|{slot.head_lemma or ''}|{slot.relation}")
    return "__".join(parts)


def render_pattern(occurrence: VerbOccurrence) -> str:
    """Two-line debug rendering of an extracted pattern."""
    header = f"{occurrence.verb_pos}|{display_verb(occurrence.verb_key)}~:"
    return header + "\n" + render_slots(occurrence)
