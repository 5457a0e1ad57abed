"""Synthetic corpora with a known gold lexicon, and type-level scoring.

The generator realizes each verb occurrence as a small dependency tree:
subject, optional reflexive, the verb, the constituents of one sampled
gold frame, at most one adjunct PP (drawn by per-preposition attach
probabilities), optional idiom PPs with a fixed head noun, and detached
filler tokens that pad the sentence without touching the verb.  Sentences
come out as canonical-tsv and are valid by construction, so whatever the
acquisition modes recover can be scored against the gold frame set.
"""

import json
import random
from dataclasses import dataclass, field
from io import StringIO
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .corpus import Sentence, Token, write_corpus
from .frames import INTRANS, Scf, sp_prep
from .lexicon import AUTO_ACCEPTED, ACCEPTED_STATUSES, Lexicon, LexiconEntry

DEFAULT_NOUNS = ["maison", "porte", "chat", "route", "ville", "main",
                 "livre", "arbre", "voiture", "mur", "table", "fleur"]
DEFAULT_INFINITIVES = ["partir", "manger", "dormir", "venir", "travailler", "lire"]
DEFAULT_ADJECTIVES = ["grand", "petit", "rouge", "calme", "vide", "clair"]
DEFAULT_FILLERS = ["hier", "souvent", "encore", "presque", "ici", "vite", "enfin", "toujours"]


class SpecError(ValueError):
    """A gold specification is inconsistent."""


@dataclass
class GoldVerb:
    verb_key: str
    frames: Dict[str, float]
    occurrences: Optional[int] = None


@dataclass
class AdjunctPrep:
    prep: str
    attach_prob: float
    heads: List[str] = field(default_factory=lambda: list(DEFAULT_NOUNS[:6]))


@dataclass
class IdiomSpec:
    verb_key: str
    prep: str
    head: str
    attach_prob: float


@dataclass
class GoldSpec:
    """Everything the generator needs; serializable as JSON."""

    verbs: List[GoldVerb]
    adjunct_preps: List[AdjunctPrep] = field(default_factory=list)
    idioms: List[IdiomSpec] = field(default_factory=list)
    occurrences_per_verb: int = 300
    padding_min: int = 0
    padding_max: int = 4
    argument_nouns: List[str] = field(default_factory=lambda: list(DEFAULT_NOUNS))
    argument_infinitives: List[str] = field(default_factory=lambda: list(DEFAULT_INFINITIVES))
    adjectives: List[str] = field(default_factory=lambda: list(DEFAULT_ADJECTIVES))
    seed: int = 0

    def validate(self) -> None:
        if not self.verbs:
            raise SpecError("spec lists no verbs")
        for verb in self.verbs:
            if not verb.frames:
                raise SpecError(f"verb {verb.verb_key} has no frames")
            total = sum(verb.frames.values())
            if abs(total - 1.0) > 1e-9:
                raise SpecError(f"frame probabilities for {verb.verb_key} sum to {total}, not 1")
            for frame_string, prob in verb.frames.items():
                if not 0.0 <= prob <= 1.0:
                    raise SpecError(f"probability {prob} for {verb.verb_key} outside [0, 1]")
                Scf.from_string(frame_string)  # raises FrameParseError when malformed
        attach_total = 0.0
        for adjunct in self.adjunct_preps:
            if not 0.0 <= adjunct.attach_prob <= 1.0:
                raise SpecError(f"attach probability {adjunct.attach_prob} outside [0, 1]")
            attach_total += adjunct.attach_prob
        if attach_total > 1.0 + 1e-9:
            raise SpecError(f"adjunct attach probabilities sum to {attach_total} > 1; "
                            "at most one adjunct attaches per sentence")
        for idiom in self.idioms:
            if not 0.0 <= idiom.attach_prob <= 1.0:
                raise SpecError("idiom attach probability outside [0, 1]")
        if self.padding_min < 0 or self.padding_max < self.padding_min:
            raise SpecError("invalid padding range")

    @classmethod
    def from_dict(cls, data: Dict) -> "GoldSpec":
        verbs = [GoldVerb(verb_key=v["verb_key"], frames=dict(v["frames"]),
                          occurrences=v.get("occurrences"))
                 for v in data.get("verbs", [])]
        adjuncts = [AdjunctPrep(prep=a["prep"], attach_prob=a["attach_prob"],
                                heads=list(a.get("heads", DEFAULT_NOUNS[:6])))
                    for a in data.get("adjunct_preps", [])]
        idioms = [IdiomSpec(verb_key=i["verb_key"], prep=i["prep"], head=i["head"],
                            attach_prob=i["attach_prob"])
                  for i in data.get("idioms", [])]
        spec = cls(
            verbs=verbs, adjunct_preps=adjuncts, idioms=idioms,
            occurrences_per_verb=data.get("occurrences_per_verb", 300),
            padding_min=data.get("padding_min", 0),
            padding_max=data.get("padding_max", 4),
            argument_nouns=list(data.get("argument_nouns", DEFAULT_NOUNS)),
            argument_infinitives=list(data.get("argument_infinitives", DEFAULT_INFINITIVES)),
            adjectives=list(data.get("adjectives", DEFAULT_ADJECTIVES)),
            seed=data.get("seed", 0),
        )
        spec.validate()
        return spec

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "GoldSpec":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


class _SentenceBuilder:
    """Accumulates tokens with object-level links, then assigns indices."""

    def __init__(self):
        self._tokens: List[List] = []  # [surface, lemma, pos, gov_slot or None, rel]

    def add(self, surface: str, lemma: str, pos: str,
            governor: Optional[int] = None, relation: str = "") -> int:
        self._tokens.append([surface, lemma, pos, governor, relation])
        return len(self._tokens) - 1

    def set_link(self, slot: int, governor: int, relation: str) -> None:
        self._tokens[slot][3] = governor
        self._tokens[slot][4] = relation

    def build(self, sentence_id: str) -> Sentence:
        tokens = []
        for i, (surface, lemma, pos, gov, rel) in enumerate(self._tokens):
            governor = (rel, gov + 1) if gov is not None else None
            tokens.append(Token(index=i + 1, surface=surface, lemma=lemma,
                                pos=pos, governor=governor))
        dependents: Dict[int, List[Tuple[str, int]]] = {}
        for token in tokens:
            if token.governor is not None:
                rel, gov = token.governor
                dependents.setdefault(gov, []).append((rel, token.index))
        final = [
            Token(index=t.index, surface=t.surface, lemma=t.lemma, pos=t.pos,
                  governor=t.governor,
                  dependents=tuple(sorted(dependents.get(t.index, ()), key=lambda l: l[1])))
            for t in tokens
        ]
        return Sentence(id=sentence_id, tokens=tuple(final))


def _realize_constituent(builder: _SentenceBuilder, verb_slot: int, label: str,
                         rng: random.Random, spec: GoldSpec) -> None:
    prep = sp_prep(label)
    if prep is not None:
        prep_slot = builder.add(prep, prep, "Prep", verb_slot, "PREP")
        if label.endswith("+SINF]"):
            inf = rng.choice(spec.argument_infinitives)
            builder.add(inf, inf, "VINF", prep_slot, "NOMPREP")
        else:
            noun = rng.choice(spec.argument_nouns)
            builder.add(noun, noun, "NomMS", prep_slot, "NOMPREP")
    elif label == "SN":
        noun = rng.choice(spec.argument_nouns)
        builder.add(noun, noun, "NomMS", verb_slot, "OBJ")
    elif label == "SINF":
        inf = rng.choice(spec.argument_infinitives)
        builder.add(inf, inf, "VINF", verb_slot, "OBJ")
    elif label == "SA":
        adj = rng.choice(spec.adjectives)
        builder.add(adj, adj, "AdjMS", verb_slot, "ATB")
    elif label == "COMPL":
        builder.add("que", "que", "ConjSub", verb_slot, "COMPL")
    else:
        raise SpecError(f"cannot realize constituent {label!r}")


def _sample_frame(rng: random.Random, frames: Sequence[Tuple[str, float]]) -> str:
    draw = rng.random()
    cumulative = 0.0
    for frame_string, prob in frames:
        cumulative += prob
        if draw < cumulative:
            return frame_string
    return frames[-1][0]


def _realize_sentence(rng: random.Random, spec: GoldSpec, verb: GoldVerb,
                      frame_string: str) -> _SentenceBuilder:
    builder = _SentenceBuilder()
    reflexive = verb.verb_key.startswith("se|")
    lemma = verb.verb_key[3:] if reflexive else verb.verb_key

    subject = rng.choice(spec.argument_nouns)
    subject_slot = builder.add(subject, subject, "NomMS")
    reflexive_slot = builder.add("se", "se", "Pro") if reflexive else None
    verb_slot = builder.add(lemma, lemma, "VCONJS")
    # Wire the pre-verbal tokens now that the verb slot exists.
    builder.set_link(subject_slot, verb_slot, "SUJ")
    if reflexive_slot is not None:
        builder.set_link(reflexive_slot, verb_slot, "REF")

    post_verb: List[Tuple[str, Optional[str]]] = []  # (label, forced head)
    if frame_string != INTRANS:
        for label in Scf.from_string(frame_string).constituents:
            post_verb.append((label, None))

    draw = rng.random()
    cumulative = 0.0
    for adjunct in spec.adjunct_preps:
        cumulative += adjunct.attach_prob
        if draw < cumulative:
            post_verb.append((f"SP[{adjunct.prep}+SN]", rng.choice(adjunct.heads)))
            break
    for idiom in spec.idioms:
        if idiom.verb_key == verb.verb_key and rng.random() < idiom.attach_prob:
            post_verb.append((f"SP[{idiom.prep}+SN]", idiom.head))

    rng.shuffle(post_verb)
    for label, forced_head in post_verb:
        if forced_head is None:
            _realize_constituent(builder, verb_slot, label, rng, spec)
        else:
            prep = sp_prep(label)
            prep_slot = builder.add(prep, prep, "Prep", verb_slot, "PREP")
            builder.add(forced_head, forced_head, "NomMS", prep_slot, "NOMPREP")

    for _ in range(rng.randint(spec.padding_min, spec.padding_max)):
        filler = rng.choice(DEFAULT_FILLERS)
        builder.add(filler, filler, "Adv", None, "")
    builder.add(".", ".", "Typo", None, "")
    return builder


def gold_lexicon(spec: GoldSpec) -> Lexicon:
    """The gold (verb, frame) set as a lexicon, probabilities as rel_freq."""
    entries = []
    for verb in spec.verbs:
        count = verb.occurrences or spec.occurrences_per_verb
        for frame_string, prob in sorted(verb.frames.items()):
            if prob <= 0:
                continue
            canonical = Scf.from_string(frame_string).string_form
            entries.append(LexiconEntry(
                verb_key=verb.verb_key, scf=canonical,
                raw_count=round(prob * count), weighted_count=prob * count,
                rel_freq=prob, confidence=1.0, status=AUTO_ACCEPTED, mode="gold"))
    lexicon = Lexicon(mode="gold", fingerprint=f"gold-{spec.seed}", entries=entries)
    lexicon.sort()
    return lexicon


def generate(spec: GoldSpec) -> Tuple[str, Lexicon]:
    """Generate a canonical-tsv corpus and its gold lexicon (seed-deterministic)."""
    spec.validate()
    rng = random.Random(spec.seed)
    sentences: List[Sentence] = []
    ordinal = 0
    for verb in spec.verbs:
        frames = sorted(verb.frames.items())
        count = verb.occurrences or spec.occurrences_per_verb
        for _ in range(count):
            ordinal += 1
            frame_string = _sample_frame(rng, frames)
            builder = _realize_sentence(rng, spec, verb, frame_string)
            sentences.append(builder.build(f"synthetic:{ordinal}"))
    out = StringIO()
    write_corpus(sentences, out)
    return out.getvalue(), gold_lexicon(spec)


@dataclass
class VerbScore:
    precision: float
    recall: float
    f1: float


@dataclass
class ScoreReport:
    """Type-level precision/recall/F1 of an acquired lexicon against gold."""

    mode: str
    precision: float
    recall: float
    f1: float
    per_verb: Dict[str, VerbScore] = field(default_factory=dict)
    spurious: List[Tuple[str, str]] = field(default_factory=list)
    missing: List[Tuple[str, str]] = field(default_factory=list)

    def table_lines(self) -> List[str]:
        lines = [f"{'mode':<10} {'precision':>9} {'recall':>9} {'F1':>9}",
                 f"{self.mode:<10} {self.precision:>9.3f} {self.recall:>9.3f} {self.f1:>9.3f}"]
        return lines

    def record_lines(self) -> Iterable[str]:
        yield f"{self.mode}\t__all__\t{self.precision!r}\t{self.recall!r}\t{self.f1!r}"
        for verb_key in sorted(self.per_verb):
            score = self.per_verb[verb_key]
            yield f"{self.mode}\t{verb_key}\t{score.precision!r}\t{score.recall!r}\t{score.f1!r}"


def _prf(acquired: set, gold: set) -> Tuple[float, float, float]:
    hit = len(acquired & gold)
    precision = hit / len(acquired) if acquired else 0.0
    recall = hit / len(gold) if gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def score(acquired: Lexicon, gold: Lexicon) -> ScoreReport:
    """Type-level match on (verb, canonical frame string) over accepted entries."""
    acquired_set = {(e.verb_key, e.scf) for e in acquired.entries
                    if e.status in ACCEPTED_STATUSES}
    gold_set = {(e.verb_key, e.scf) for e in gold.entries
                if e.status in ACCEPTED_STATUSES}
    precision, recall, f1 = _prf(acquired_set, gold_set)
    per_verb: Dict[str, VerbScore] = {}
    for verb_key in sorted({v for v, _ in gold_set} | {v for v, _ in acquired_set}):
        verb_acquired = {pair for pair in acquired_set if pair[0] == verb_key}
        verb_gold = {pair for pair in gold_set if pair[0] == verb_key}
        per_verb[verb_key] = VerbScore(*_prf(verb_acquired, verb_gold))
    return ScoreReport(
        mode=acquired.mode, precision=precision, recall=recall, f1=f1,
        per_verb=per_verb,
        spurious=sorted(acquired_set - gold_set),
        missing=sorted(gold_set - acquired_set),
    )


def compare_modes(spec: GoldSpec, configs: Dict[str, "AcquisitionConfig"]) -> Dict[str, ScoreReport]:
    """Acquire with several configs on one generated corpus; score each."""
    from .corpus import read_corpus
    from .evaluation import acquire

    corpus_text, gold = generate(spec)
    reports = {}
    for name, config in configs.items():
        reader = read_corpus(StringIO(corpus_text), fmt="tsv", source_name="synthetic")
        result = acquire(reader, config)
        reports[name] = score(result.lexicon, gold)
        reports[name].mode = name
    return reports
