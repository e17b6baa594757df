"""Sequential smoothing of per-frame posteriors with an M+1-state HMM.

The transition matrix is an "almost identity": probability mass 1 - M*eps on
the diagonal and eps on every off-diagonal entry, so lowering eps makes
state changes increasingly expensive. Decoding maximizes the product of
transition and emission probabilities (uniform prior over the first state)
and runs entirely in log space, which keeps eps values down to 1e-300 exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import (
    MERGED,
    POSITIVE_ONLY,
    LabelSeries,
    PosteriorSeries,
    Segmentation,
    SeriesError,
    labels_to_segmentation,
)
from .rejection import (
    RejectionConfig,
    map_assign,
    merge_posterior,
    negative_probability_series,
)

#: Emission probabilities are clamped here before the log; merged posteriors
#: contain exact zeros and log space needs finite values.
EMISSION_FLOOR = 1e-12


@dataclass(frozen=True)
class TransitionModel:
    """Uniform off-diagonal transition structure over ``num_states`` states.

    Stored implicitly via ``epsilon``; a dense matrix is never materialized.
    """

    num_states: int
    epsilon: float

    def __post_init__(self):
        if self.num_states < 2:
            raise SeriesError("transition model needs >= 2 states")
        m = self.num_states - 1
        if not (self.epsilon > 0.0 and m * self.epsilon < 1.0):
            raise SeriesError(
                f"epsilon must satisfy 0 < epsilon < 1/{m} "
                f"for {self.num_states} states, got {self.epsilon!r}"
            )

    @property
    def log_self(self) -> float:
        """log(1 - M*eps), computed via log1p for accuracy at tiny eps."""
        return math.log1p(-(self.num_states - 1) * self.epsilon)

    @property
    def log_cross(self) -> float:
        return math.log(self.epsilon)


def transition_logprob(model: TransitionModel, from_state: int, to_state: int) -> float:
    """Log transition probability between two states."""
    for s in (from_state, to_state):
        if not 0 <= s < model.num_states:
            raise SeriesError(f"state {s} out of range for {model.num_states} states")
    return model.log_self if from_state == to_state else model.log_cross


@dataclass(frozen=True)
class DecodeResult:
    labels: LabelSeries
    log_joint: float


@njit(cache=True)
def _viterbi_kernel(log_emis, log_self, log_cross):  # pragma: no cover
    n, s = log_emis.shape
    prev = log_emis[0].copy()
    cur = np.empty(s, dtype=np.float64)
    backptr = np.empty((n, s), dtype=np.int32)
    for t in range(1, n):
        # Uniform off-diagonal transitions: the best cross predecessor of any
        # state is the global argmax (or the runner-up when the argmax is the
        # state itself). Ties resolve to the lowest state id throughout.
        m1 = prev[0]
        j1 = 0
        for j in range(1, s):
            if prev[j] > m1:
                m1 = prev[j]
                j1 = j
        m2 = -np.inf
        j2 = 0
        for j in range(s):
            if j != j1 and prev[j] > m2:
                m2 = prev[j]
                j2 = j
        for j in range(s):
            self_score = prev[j] + log_self
            if j == j1:
                cross_max = m2
                cross_j = j2
            else:
                cross_max = m1
                cross_j = j1
            cross_score = cross_max + log_cross
            if self_score > cross_score:
                best = self_score
                bp = j
            elif cross_score > self_score:
                best = cross_score
                bp = cross_j
            else:
                best = self_score
                bp = j if j < cross_j else cross_j
            cur[j] = log_emis[t, j] + best
            backptr[t, j] = bp
        prev, cur = cur, prev
    best_state = 0
    best = prev[0]
    for j in range(1, s):
        if prev[j] > best:
            best = prev[j]
            best_state = j
    path = np.empty(n, dtype=np.int64)
    path[n - 1] = best_state
    for t in range(n - 1, 0, -1):
        path[t - 1] = backptr[t, path[t]]
    return path, best


def viterbi_decode(emissions: PosteriorSeries, model: TransitionModel) -> DecodeResult:
    """MAP state path through the smoothing HMM.

    ``log_joint`` is the sum of the chosen log-emissions (after flooring) and
    log-transitions; there is no initial-state term.
    """
    if emissions.kind != MERGED:
        raise SeriesError("viterbi_decode expects a merged posterior series")
    if emissions.num_columns != model.num_states:
        raise SeriesError(
            f"emission width {emissions.num_columns} != "
            f"model states {model.num_states}"
        )
    log_emis = np.log(np.maximum(emissions.rows, EMISSION_FLOOR))
    path, score = _viterbi_kernel(log_emis, model.log_self, model.log_cross)
    return DecodeResult(labels=LabelSeries(path), log_joint=float(score))


def segment_video(
    positive: PosteriorSeries, k: int, epsilon: float
) -> Segmentation:
    """Full pipeline: discrimination argmax, negative rejection, HMM
    smoothing, then run-length segments.
    """
    if positive.kind != POSITIVE_ONLY:
        raise SeriesError("segment_video expects a positive-only series")
    m = positive.positive_count
    model = TransitionModel(num_states=m + 1, epsilon=epsilon)
    hard = map_assign(positive)
    p_neg = negative_probability_series(hard, RejectionConfig(window_k=k))
    merged = merge_posterior(positive, p_neg)
    decoded = viterbi_decode(merged, model)
    return labels_to_segmentation(decoded.labels)
