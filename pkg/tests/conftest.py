import pytest

from scf_forge import (
    PatternExtractor,
    Sentence,
    Token,
    build_statistics,
    parse_sentence,
    tally,
)

# The worked example sentence: "La sécheresse s'abattit sur le Sahel en
# 1972-1973." in shallow-parser pipe notation.
PAPER_BLOCK = [
    "DetFS|le|La|1|DET;2|",
    "NomFS|sécheresse|sécheresse|2|SUJ;4|DET;1",
    "Pro|se|s'|3|REF;4|",
    "VCONJS|abattre|abattit|4|SUJ;2,REF;3,PREP;5,PREP;8",
    "Prep|sur|sur|5|PREP;4|NOMPREP;7",
    "DetMS|le|le|6|DET;7|",
    "NomMS|sahel|Sahel|7|NOMPREP;5|DET;6",
    "Prep|en|en|8|PREP;4|NOMPREP;9",
    "NomXXDate|1972-1973|1972-1973|9|NOMPREP;8|",
    "Typo|.|.|10||",
]


def support_block(head):
    """A reinforcing syntex sentence: 's'abattre sur <head>' with no adjunct."""
    return "\n".join([
        "NomFS|pluie|pluie|1|SUJ;3|",
        "Pro|se|se|2|REF;3|",
        "VCONJS|abattre|abattit|3|SUJ;1,REF;2,PREP;4",
        "Prep|sur|sur|4|PREP;3|NOMPREP;5",
        f"NomFS|{head}|{head}|5|NOMPREP;4|",
        "Typo|.|.|6||",
    ])


def golden_corpus_text():
    """The worked example plus three 'sur'-only occurrences, so the joint
    two-PP frame falls below a 0.6 threshold and must be split."""
    blocks = ["\n".join(PAPER_BLOCK)] + [support_block(h) for h in ("ville", "région", "désert")]
    return "\n\n".join(blocks) + "\n"


def make_sentence(sid, specs):
    """Build a normalized Sentence from (surface, lemma, pos, gov_idx, rel) tuples."""
    tokens = []
    dependents = {}
    for i, (surface, lemma, pos, gov, rel) in enumerate(specs, start=1):
        governor = (rel, gov) if gov is not None else None
        tokens.append((i, surface, lemma, pos, governor))
        if governor is not None:
            dependents.setdefault(gov, []).append((rel, i))
    built = tuple(
        Token(index=i, surface=surface, lemma=lemma, pos=pos, governor=governor,
              dependents=tuple(sorted(dependents.get(i, ()), key=lambda l: l[1])))
        for i, surface, lemma, pos, governor in tokens
    )
    return Sentence(id=sid, tokens=built)


def _reflexive_sur(sid, head):
    return make_sentence(sid, [
        ("pluie", "pluie", "NomFS", 3, "SUJ"),
        ("s'", "se", "Pro", 3, "REF"),
        ("abattit", "abattre", "VCONJS", None, ""),
        ("sur", "sur", "Prep", 3, "PREP"),
        (head, head, "NomFS", 4, "NOMPREP"),
    ])


def _simple_pp(sid, verb_lemma, verb_surface, prep, head):
    return make_sentence(sid, [
        ("il", "il", "Pro", 2, "SUJ"),
        (verb_surface, verb_lemma, "VCONJS", None, ""),
        (prep, prep, "Prep", 2, "PREP"),
        (head, head, "NomFS", 3, "NOMPREP"),
    ])


@pytest.fixture(scope="session")
def paper_sentence():
    return parse_sentence(PAPER_BLOCK, "paper:1")


@pytest.fixture(scope="session")
def toy_sentences(paper_sentence):
    """Five-verb corpus: 'sur' sticks to one verb, 'en' spreads over all five."""
    return [
        _reflexive_sur("toy:1", "ville"),
        _reflexive_sur("toy:2", "région"),
        _reflexive_sur("toy:3", "désert"),
        paper_sentence,
        _simple_pp("toy:5", "tomber", "tomba", "sur", "pierre"),
        _simple_pp("toy:6", "venir", "vint", "en", "ville"),
        _simple_pp("toy:7", "rester", "resta", "en", "ville"),
        _simple_pp("toy:8", "partir", "partit", "en", "voyage"),
        _simple_pp("toy:9", "tomber", "tomba", "en", "panne"),
    ]


@pytest.fixture(scope="session")
def toy_occurrences(toy_sentences):
    extractor = PatternExtractor()
    occurrences = []
    for sentence in toy_sentences:
        occurrences.extend(extractor.extract(sentence))
    return occurrences


def recovery_spec(seed):
    """20 verbs x 300 occurrences; widely-attached adjunct preps at 0.5 total."""
    from scf_forge import GoldSpec

    verbs = [
        ("parler", {"INTRANS": 0.5, "SP[de+SN]": 0.5}),
        ("dormir", {"INTRANS": 0.5, "SN": 0.25, "SP[sur+SN]": 0.25}),
        ("manger", {"SN": 0.5, "INTRANS": 0.5}),
        ("donner", {"SN_SP[à+SN]": 0.5, "SN": 0.5}),
        ("venir", {"SP[de+SN]": 0.45, "INTRANS": 0.3, "SP[à+SINF]": 0.25}),
        ("rester", {"INTRANS": 0.5, "SA": 0.5}),
        ("penser", {"SP[à+SN]": 0.5, "COMPL": 0.5}),
        ("compter", {"SP[sur+SN]": 0.5, "SINF": 0.5}),
        ("jouer", {"SP[à+SN]": 0.4, "INTRANS": 0.35, "SN": 0.25}),
        ("chanter", {"SN": 0.5, "INTRANS": 0.5}),
        ("marcher", {"INTRANS": 0.5, "SP[contre+SN]": 0.5}),
        ("lutter", {"SP[contre+SN]": 0.5, "INTRANS": 0.5}),
        ("dépendre", {"SP[de+SN]": 0.5, "INTRANS": 0.5}),
        ("songer", {"SP[à+SINF]": 0.5, "SP[à+SN]": 0.5}),
        ("voter", {"SP[par+SN]": 0.5, "INTRANS": 0.5}),
        ("passer", {"SP[par+SN]": 0.5, "SN": 0.5}),
        ("hésiter", {"SP[entre+SN]": 0.5, "SINF": 0.5}),
        ("croire", {"COMPL": 0.5, "SN": 0.5}),
        ("se|méfier", {"SP[de+SN]": 0.5, "INTRANS": 0.5}),
        ("se|battre", {"SP[contre+SN]": 0.5, "INTRANS": 0.5}),
    ]
    adjuncts = ["en", "dans", "pour", "avec", "sans", "sous", "vers", "chez",
                "devant", "depuis"]
    return GoldSpec.from_dict({
        "seed": seed,
        "occurrences_per_verb": 300,
        "padding_min": 0,
        "padding_max": 6,
        "argument_infinitives": ["courir", "nager", "écrire", "boire", "sortir", "finir"],
        "verbs": [{"verb_key": v, "frames": f} for v, f in verbs],
        "adjunct_preps": [{"prep": p, "attach_prob": 0.05} for p in adjuncts],
    })


@pytest.fixture(scope="session")
def toy_tally(toy_occurrences):
    return tally(toy_occurrences)


@pytest.fixture(scope="session")
def toy_stats(toy_occurrences):
    return build_statistics(toy_occurrences)
