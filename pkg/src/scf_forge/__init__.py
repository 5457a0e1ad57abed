"""scf-forge: subcategorization-frame lexicon acquisition.

From dependency-parsed corpora to a validated verb valency lexicon:
pattern extraction, candidate frame generation, ranked violable
constraints, competitive or threshold-based selection, and a
human-in-the-loop review service.
"""

from .constraints import (
    CONSTRAINT_IDS,
    FAITH_ARG,
    FREQ_FLOOR,
    STAR_DISPERSED_PP,
    STAR_IDIOM_SLOT,
    ConfigError,
    ConstraintProfile,
    ConstraintRanking,
    CorpusStatistics,
    Measure,
    UndefinedInputError,
    build_statistics,
    evaluate,
    head_noun_concentration,
    mwe_candidates,
    prep_dispersion,
    rel_freq,
)
from .corpus import (
    CANONICAL_TSV,
    SYNTEX,
    CorpusError,
    CorpusReader,
    LineParseError,
    Sentence,
    SentenceError,
    Token,
    parse_sentence,
    parse_syntex_line,
    read_corpus,
    to_canonical_tsv,
    write_corpus,
)
from .estimator import ScfAcquirer, check_sentences
from .evaluation import (
    MODES,
    AcquisitionConfig,
    AcquisitionResult,
    Ordering,
    Tableau,
    acquire,
    baseline_filter,
    build_tableau,
    compare,
    confidence,
    linear_score,
    optimal,
    pp_split,
)
from .frames import (
    INTRANS,
    FrameParseError,
    Scf,
    ScfTally,
    build_scf,
    candidates,
    corpus_order_string,
    tally,
)
from .harness import GoldSpec, ScoreReport, compare_modes, generate, gold_lexicon, score
from .lexicon import (
    DecisionRecord,
    Lexicon,
    LexiconEntry,
    LexiconStore,
    apply_overrides,
    export_lexicon,
    load_lexicon,
    save_lexicon,
)
from .patterns import (
    PatternExtractor,
    SlotRealization,
    VerbOccurrence,
    display_verb,
    expand_preposition,
    extract_occurrences,
    reflexive_key,
    render_pattern,
    render_slots,
    sentence_reliability,
)

__version__ = "0.1.0"
