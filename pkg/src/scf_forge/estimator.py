"""Scikit-learn style front end for the acquisition pipeline.

``ScfAcquirer`` behaves like an unsupervised estimator: ``fit`` consumes an
iterable of parsed ``Sentence`` objects and learns a frame lexicon, and
``predict`` maps sentences to the frame selected for each verb occurrence
under the fitted corpus statistics.  Parameters follow the sklearn
contract (stored verbatim by ``__init__``, introspectable through
``get_params``), so the acquirer composes with ``clone``, pipelines, and
parameter searches.
"""

from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from sklearn.base import BaseEstimator

from .constraints import ConstraintRanking, DEFAULT_RANKING_ORDER
from .corpus import Sentence
from .evaluation import (
    MODE_BASELINE,
    MODE_LINEAR,
    MODES,
    AcquisitionConfig,
    acquire,
    build_tableau,
    linear_score,
    _pick_linear,
)
from .frames import build_scf
from .patterns import PatternExtractor


def check_sentences(X: Iterable) -> List[Sentence]:
    """Validate estimator input: a non-string iterable of ``Sentence``."""
    if isinstance(X, (str, bytes)):
        raise TypeError("X must be an iterable of Sentence objects, not a string; "
                        "parse corpora with scf_forge.read_corpus first")
    sentences = list(X)
    for item in sentences:
        if not isinstance(item, Sentence):
            raise TypeError(f"X must contain Sentence objects, got {type(item).__name__}")
    return sentences


class ScfAcquirer(BaseEstimator):
    """Learn a verb subcategorization lexicon from parsed sentences.

    Parameters mirror ``AcquisitionConfig``; ``min_verb_occurrences``
    defaults low because estimator users typically feed curated samples
    rather than full corpora.
    """

    def __init__(self, mode: str = MODE_BASELINE, tau: float = 0.01, delta: float = 0.6,
                 kappa: float = 0.8, ranking: Optional[Tuple[str, ...]] = None,
                 weights: Optional[Dict[str, float]] = None, theta: float = 1.0,
                 min_verb_occurrences: int = 1, gen_cap: int = 5,
                 reliability_pivot: int = 15, seed: int = 0):
        self.mode = mode
        self.tau = tau
        self.delta = delta
        self.kappa = kappa
        self.ranking = ranking
        self.weights = weights
        self.theta = theta
        self.min_verb_occurrences = min_verb_occurrences
        self.gen_cap = gen_cap
        self.reliability_pivot = reliability_pivot
        self.seed = seed

    def _config(self) -> AcquisitionConfig:
        order = tuple(self.ranking) if self.ranking is not None else DEFAULT_RANKING_ORDER
        config = AcquisitionConfig(
            mode=self.mode,
            ranking=ConstraintRanking(order=order, tau=self.tau, delta=self.delta,
                                      kappa=self.kappa),
            weights=self.weights, theta=self.theta,
            min_verb_occurrences=self.min_verb_occurrences,
            gen_cap=self.gen_cap, reliability_pivot=self.reliability_pivot,
            seed=self.seed,
        )
        config.validate()
        return config

    def fit(self, X: Iterable[Sentence], y=None) -> "ScfAcquirer":
        """Acquire a lexicon from sentences; y is ignored (unsupervised)."""
        sentences = check_sentences(X)
        config = self._config()
        result = acquire(sentences, config)
        self.config_ = config
        self.lexicon_ = result.lexicon
        self.summary_ = result.summary
        self.stats_ = result.stats
        self.tally_ = result.full_tally
        self.n_sentences_ = len(sentences)
        return self

    def _check_fitted(self) -> None:
        if not hasattr(self, "lexicon_"):
            raise RuntimeError("this ScfAcquirer instance is not fitted yet; call fit first")

    def predict(self, X: Iterable[Sentence]) -> List[List[Tuple[str, str]]]:
        """Per sentence, the (verb_key, frame) selected for each occurrence.

        In ``ot``/``linear`` modes the fitted statistics drive a candidate
        competition per occurrence; in ``baseline`` mode the full observed
        frame is returned unchanged.
        """
        self._check_fitted()
        sentences = check_sentences(X)
        extractor = PatternExtractor(reliability_pivot=self.config_.reliability_pivot)
        ranking = self.config_.ranking
        weights = (self.config_.effective_weights()
                   if self.config_.mode == MODE_LINEAR else None)
        predictions: List[List[Tuple[str, str]]] = []
        for sentence in sentences:
            row: List[Tuple[str, str]] = []
            for occurrence in extractor.extract(sentence):
                if self.config_.mode == MODE_BASELINE or self.stats_ is None:
                    frame = build_scf(occurrence)
                else:
                    tableau = build_tableau(occurrence, self.tally_, self.stats_,
                                            ranking, self.config_.gen_cap)
                    if weights is None:
                        frame = tableau.credited
                    else:
                        scored = [(r.scf, r.profile) for r in tableau.rows]
                        index, _ = _pick_linear(scored, weights, ranking)
                        frame = scored[index][0]
                row.append((occurrence.verb_key, frame.string_form))
            predictions.append(row)
        return predictions

    def fit_predict(self, X: Iterable[Sentence], y=None) -> List[List[Tuple[str, str]]]:
        return self.fit(X, y).predict(X)
