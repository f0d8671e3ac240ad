"""Tempered boosting of real-valued weak hypotheses.

The loop generalizes AdaBoost by maintaining its example weights on the
co-simplex instead of the probability simplex.  Per round it computes a
normalized edge rho_j from the current weights, a closed-form weight-update
coefficient mu_j, a distinct leveraging coefficient alpha_j for the model
(they coincide only at t=1), applies the multiplicative weight update and
records the normalizer Z_tj.  The per-round factor

    K_t(z) = (1 - z^2) / M_(1-t)(1 - z, 1 + z)

drives the guarantee: the training 0/1 risk of both the plain and the
progressively clamped model is at most
prod_j (1 + m_dagger_j q_dagger_j^(2-t)) K_t(rho_j) for t in [0, 1].

A weak hypothesis is any object with ``predict(data) -> ndarray`` over a
Dataset and ``predict_row(row) -> float`` for a single observation; a weak
learner is a callable ``learner(weights, data) -> hypothesis``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dataio import Dataset
from .errors import DegenerateHypothesisError, EdgeSaturatedError
from .talgebra import TemperConfig, clamped_sum, exp_t, log_t, power_mean
from .weights import TemWeights, co_density, tempered_update, uniform_init

RHO_CAP = 1e-12


@dataclass(frozen=True)
class IterationRecord:
    """Everything one boosting round produces, for traces and bounds.

    ``v`` is the coefficient under which the weights unravel into a clamped
    sum of margins, m^(1-t*) (prod Z)^(1-t) mu; it equals ``alpha`` by
    construction and is recorded separately because the weight-unravel
    identity is stated in terms of it.
    """

    rho: float
    r_max: float
    q_dagger: float
    m_dagger: int
    mu: float
    alpha: float
    z: float
    v: float
    min_codensity: float
    max_codensity: float
    infinite_weights: int = 0


@dataclass(frozen=True)
class EnsembleMember:
    hypothesis: object
    mu: float
    alpha: float
    z: float


@dataclass(frozen=True)
class Ensemble:
    """Ordered weak hypotheses with leveraging coefficients.

    Member order is part of the contract: the clamped score folds the
    members in training order through a doubly clamped running sum at
    delta = 1/(1-t), so permuting members changes clamped predictions.
    """

    members: tuple
    cfg: TemperConfig
    m: int

    @property
    def clamp_delta(self) -> float:
        if self.cfg.t < 1.0 and not self.cfg.is_classic():
            return 1.0 / (1.0 - self.cfg.t)
        return math.inf

    def _require_clampable(self):
        if self.cfg.is_classic() or self.cfg.t > 1.0:
            raise ValueError("clamped prediction requires t < 1")

    def decision_scores(self, data: Dataset, clamped: bool = False) -> np.ndarray:
        """Scores of every row of ``data``; clamped uses the running fold."""
        if not self.members:
            raise ValueError("empty ensemble")
        scores = np.zeros(data.m)
        if clamped:
            self._require_clampable()
            delta = self.clamp_delta
            for member in self.members:
                scores = np.clip(
                    scores + member.alpha * member.hypothesis.predict(data),
                    -delta,
                    delta,
                )
        else:
            for member in self.members:
                scores += member.alpha * member.hypothesis.predict(data)
        return scores


def predict(ensemble: Ensemble, x, clamped: bool = False):
    """Score and +/-1 label for one observation (a row of raw values).

    Clamped prediction folds the per-member contributions in training order
    through the doubly clamped sum at delta = 1/(1-t); ties in the sign go
    to +1.
    """
    if not ensemble.members:
        raise ValueError("empty ensemble")
    contributions = [
        member.alpha * member.hypothesis.predict_row(x) for member in ensemble.members
    ]
    if clamped:
        ensemble._require_clampable()
        score = clamped_sum(contributions, ensemble.clamp_delta, mode="double")
    else:
        score = math.fsum(contributions)
    return score, (1 if score >= 0 else -1)


def zero_one_error(scores: np.ndarray, labels: np.ndarray) -> float:
    """Empirical 0/1 risk of sign(scores) against +/-1 labels, sign(0)=+1."""
    predicted = np.where(np.asarray(scores) >= 0, 1, -1)
    return float(np.mean(predicted != np.asarray(labels)))


def confidence_bounds(weights: TemWeights, u):
    """Largest weight-normalized confidence R and the surrogate weight.

    R = max over supported i of |u_i| / q_i^(1-t).  Switched-off examples
    get the surrogate (max_dagger |u_i| / R)^(1/(1-t)), which is
    homogeneous to a weight; it is 0 when no weight is switched off.
    """
    t = weights.cfg.t
    q = weights.q
    u = np.asarray(u, dtype=float)
    support = q > 0
    if not np.any(np.abs(u[support]) > 0):
        raise DegenerateHypothesisError("all supported margins are zero")
    r_max = float(np.max(np.abs(u[support]) / q[support] ** (1.0 - t)))
    dagger = weights.dagger_indices()
    if dagger.size == 0:
        return r_max, 0.0
    if t >= 1.0 - 1e-9:
        raise ValueError("switched-off weights are undefined for t >= 1")
    top = float(np.max(np.abs(u[dagger])))
    return r_max, (top / r_max) ** (1.0 / (1.0 - t))


def edge(weights: TemWeights, u, r_max: float, q_dagger: float) -> float:
    """Normalized correlation between margins and weights, in [-1, 1].

    Switched-off entries enter through the surrogate weight, and the
    normalizer (1 + m_dagger q_dagger^(2-t)) R keeps the value in [-1, 1].
    """
    if r_max <= 0:
        raise DegenerateHypothesisError("degenerate hypothesis: R = 0")
    t = weights.cfg.t
    u = np.asarray(u, dtype=float)
    q_eff = np.array(weights.q)
    dagger = weights.dagger_indices()
    q_eff[dagger] = q_dagger
    scale = (1.0 + dagger.size * q_dagger ** (2.0 - t)) * r_max
    return float(np.clip(np.dot(q_eff, u) / scale, -1.0, 1.0))


def leveraging(rho: float, r_max: float, cfg: TemperConfig, z_product: float, m: int):
    """Closed-form update coefficient mu and model coefficient alpha.

    mu = -(1/R) log_t((1 - rho) / M_(1-t)(1 - rho, 1 + rho)), which is the
    AdaBoost coefficient (1/2R) ln((1+rho)/(1-rho)) at t=1.  The model
    coefficient rescales it by m^(1-t*) (prod of past Z)^(1-t): past
    normalizers progressively dampen the leverage of later hypotheses.
    For t in [0, 1) this gives |mu| < 1/(R (1-t)) strictly.
    """
    if abs(rho) > 1.0 - RHO_CAP:
        raise EdgeSaturatedError(f"|edge| = {abs(rho)} is saturated")
    if cfg.is_classic():
        mu = math.log((1.0 + rho) / (1.0 - rho)) / (2.0 * r_max)
        return mu, mu
    t = cfg.t
    mean = power_mean(1.0 - rho, 1.0 + rho, 1.0 - t)
    mu = -log_t((1.0 - rho) / mean, cfg) / r_max
    if t < 1.0 and not abs(mu) < 1.0 / (r_max * (1.0 - t)):
        raise RuntimeError("leveraging bound violated; numerical failure")
    alpha = m ** (1.0 - cfg.t_star) * z_product ** (1.0 - t) * mu
    return mu, alpha


def kt_bound(rho: float, cfg: TemperConfig) -> float:
    """Per-round guarantee factor (1 - z^2) / M_(1-t)(1-z, 1+z).

    Equals sqrt(1 - z^2) at t=1 and 1 - z^2 at t=0, and is dominated by
    exp(-z^2 (2-t) / 2) on t in [0, 1].
    """
    if abs(rho) > 1.0:
        raise ValueError("edge must lie in [-1, 1]")
    if abs(rho) == 1.0:
        return 0.0 if cfg.t <= 1.0 else 2.0 ** (1.0 + 1.0 / (1.0 - cfg.t))
    if cfg.is_classic():
        return math.sqrt(1.0 - rho * rho)
    return (1.0 - rho * rho) / power_mean(1.0 - rho, 1.0 + rho, 1.0 - cfg.t)


def risk_bound(trace, cfg: TemperConfig) -> float:
    """Guaranteed training-risk bound prod_j (1 + m+ q+^(2-t)) K_t(rho_j)."""
    bound = 1.0
    for record in trace:
        factor = 1.0 + record.m_dagger * record.q_dagger ** (2.0 - cfg.t)
        bound *= factor * kt_bound(record.rho, cfg)
    return bound


def tempered_exp_loss(margins, cfg: TemperConfig) -> float:
    """Mean of exp_t(-margin)^(2-t); upper-bounds the 0/1 risk for t <= 2.

    At t=1 this is the exponential loss the classic AdaBoost minimizes.
    """
    margins = np.asarray(margins, dtype=float)
    with np.errstate(over="ignore"):
        values = exp_t(-margins, cfg) ** (2.0 - cfg.t)
    return float(np.mean(values))


def boost(data: Dataset, weak_learner, rounds: int, cfg: TemperConfig, on_round=None):
    """Run the tempered boosting loop for ``rounds`` iterations.

    Starts from uniform co-simplex weights; per round requests a weak
    hypothesis, computes margins u_i = y_i h(x_i), the confidence bound,
    the edge, the closed-form coefficients, and the weight update.  Returns
    (ensemble, trace).  A saturated edge (a perfect hypothesis) stops the
    loop and returns the partial ensemble; weak-learner failures propagate.

    ``on_round(member, record, weights)``, when given, runs after every
    round with the freshly updated weights; a truthy return stops early.
    The training-risk guarantee is re-checked on exit for t <= 1.
    """
    if rounds < 1:
        raise ValueError("need at least one round")
    if cfg.t < 0:
        raise ValueError("boosting requires t in [0, 2)")
    labels = data.labels.astype(float)
    if not (np.any(labels > 0) and np.any(labels < 0)):
        raise ValueError("training data must contain both classes")

    weights = uniform_init(data.m, cfg)
    z_product = 1.0
    members = []
    trace = []
    for _ in range(rounds):
        hypothesis = weak_learner(weights, data)
        u = labels * np.asarray(hypothesis.predict(data), dtype=float)
        m_dagger = len(weights.dagger_set)
        r_max, q_dagger = confidence_bounds(weights, u)
        rho = edge(weights, u, r_max, q_dagger)
        try:
            mu, alpha = leveraging(rho, r_max, cfg, z_product, data.m)
        except EdgeSaturatedError:
            break
        weights, z = tempered_update(weights, u, mu)
        z_product *= z
        p = co_density(weights).p
        member = EnsembleMember(hypothesis, mu, alpha, z)
        record = IterationRecord(
            rho=rho,
            r_max=r_max,
            q_dagger=q_dagger,
            m_dagger=m_dagger,
            mu=mu,
            alpha=alpha,
            z=z,
            v=alpha,
            min_codensity=float(p.min()),
            max_codensity=float(p.max()),
        )
        members.append(member)
        trace.append(record)
        if on_round is not None and on_round(member, record, weights):
            break

    ensemble = Ensemble(tuple(members), cfg, data.m)
    if members and cfg.t <= 1.0:
        _check_guarantee(ensemble, trace, data, labels)
    return ensemble, trace


def _check_guarantee(ensemble, trace, data, labels):
    bound = risk_bound(trace, ensemble.cfg) + 1e-9
    err = zero_one_error(ensemble.decision_scores(data), labels)
    if err > bound:
        raise RuntimeError(f"risk guarantee violated: {err} > {bound}")
    if ensemble.cfg.t < 1.0 and not ensemble.cfg.is_classic():
        err_clamped = zero_one_error(
            ensemble.decision_scores(data, clamped=True), labels
        )
        if err_clamped > bound:
            raise RuntimeError(
                f"clamped risk guarantee violated: {err_clamped} > {bound}"
            )
