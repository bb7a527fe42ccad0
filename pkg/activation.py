#!/usr/bin/env python3
"""
Activation of grammar objects.

    A_i  = B_i + sum_j W_j * F_j * S_ji
    S_ji = MAS - ln(fan_j)
    B_i  = ln(1 + access_count) - d * ln(time_since_last_access)

plus semantic coherence (mean thematic fit of filled roles) and salience
(accumulated weight of satisfied cues), which are reported but do not enter A.
"""

import logging
import math
from dataclasses import dataclass, field, fields, replace

from errors import ConfigError, DomainError, NoScorableRoles
from feature_structure import (
    FeatureList,
    FeatureStructure,
    Provenance,
    VectorRef,
    resolve_path,
)
from vector_space import thematic_fit

logger = logging.getLogger(__name__)

LEXICAL = "lexical"
SYNTACTIC = "syntactic"


@dataclass(frozen=True)
class ActivationParams:
    mas: float = 2.0
    default_cue_weight: float = 1.0
    hard_cue_weight: float = 1.0
    soft_cue_weight: float = 0.4
    recognition_threshold: float = 1.5
    base_decay: float = 0.5
    soft_penalty: float = 0.25
    sim_threshold: float = 0.6

    def __post_init__(self):
        problems = []
        if not self.mas > 0:
            problems.append(f"mas must be > 0, got {self.mas}")
        for name in ("default_cue_weight", "hard_cue_weight", "soft_cue_weight", "base_decay"):
            if getattr(self, name) < 0:
                problems.append(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.hard_cue_weight < self.soft_cue_weight:
            problems.append("hard_cue_weight must be >= soft_cue_weight")
        if not 0.0 < self.soft_penalty <= 1.0:
            problems.append(f"soft_penalty must lie in (0, 1], got {self.soft_penalty}")
        if not -1.0 <= self.sim_threshold <= 1.0:
            problems.append(f"sim_threshold must lie in [-1, 1], got {self.sim_threshold}")
        if problems:
            raise ConfigError("; ".join(problems))

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]

    def as_dict(self):
        return {name: getattr(self, name) for name in self.field_names()}


@dataclass(frozen=True)
class CueMatch:
    cue: str
    kind: str
    weight_class: str
    F: float = 1.0
    fan: int = 1
    satisfied: bool = False
    multiplier: float = 1.0
    declared: bool = True

    def __post_init__(self):
        if self.kind == SYNTACTIC and self.F != 1.0:
            raise DomainError(f"syntactic cue {self.cue} must have F = 1.0")
        if self.fan < 1:
            raise DomainError(f"cue {self.cue} has fan {self.fan} < 1")


@dataclass(frozen=True)
class ActivationRecord:
    name: str
    category: str = "construction"
    B: float = 0.0
    cue_matches: tuple = field(default_factory=tuple)
    A: float = 0.0
    theta: object = None
    sigma: float = 0.0
    relaxation: float = 1.0

    @property
    def satisfied(self):
        return [match for match in self.cue_matches if match.satisfied]

    @property
    def hard_cues_satisfied(self):
        """True when no hard cue is unsatisfied; an empty hard set holds vacuously."""
        return all(match.satisfied for match in self.cue_matches if match.weight_class == "hard")

    @property
    def cued(self):
        return any(match.satisfied for match in self.cue_matches)

    @property
    def support(self):
        """A scaled by the relaxation score of the property constraints."""
        return self.A * self.relaxation


def associative_strength(params, fan):
    """MAS - ln(fan): the more objects share a cue, the weaker it is."""
    if fan < 1:
        raise DomainError(f"fan must be >= 1, got {fan}")
    return params.mas - math.log(fan)


def base_activation(access_count, time_since_last_access, params):
    if access_count < 0:
        raise DomainError(f"access_count must be >= 0, got {access_count}")
    if time_since_last_access <= 0:
        raise DomainError(f"time since last access must be > 0, got {time_since_last_access}")
    return math.log(1 + access_count) - params.base_decay * math.log(time_since_last_access)


def weight_of(match, params):
    if match.weight_class == "soft":
        return params.soft_cue_weight
    if not match.declared:
        return params.default_cue_weight
    return params.hard_cue_weight


def total_activation(record, params):
    """B plus the contribution of every satisfied cue, summed in declaration order."""
    total = record.B
    for match in record.cue_matches:
        if match.satisfied:
            total += weight_of(match, params) * match.F * match.multiplier \
                * associative_strength(params, match.fan)
    return total


def equation_one(base, weights, strengths):
    """A = B + sum W_j * S_j, the distribution-free form."""
    total = base
    for weight, strength in zip(weights, strengths):
        total += weight * strength
    return total


def salience(record, params=None):
    """Sum of the weights of satisfied cues."""
    params = params or ActivationParams()
    total = 0.0
    for match in record.cue_matches:
        if match.satisfied:
            total += weight_of(match, params)
    return total


def lexical_F(token_form, cue, vectors):
    """1/0 exact match for surface cues; clamped cosine for vector cues, 0 when out of vocabulary."""
    if isinstance(cue, VectorRef):
        score = vectors.similarity(token_form, cue.word) if vectors is not None else None
        if score is None:
            logger.debug("No vector for %r or %r, F = 0", token_form, cue.word)
            return 0.0
        return max(0.0, score)
    return 1.0 if str(token_form).lower() == str(cue).lower() else 0.0


def filler_word(value):
    """Word of the distributional vector a role filler carries, or None."""
    if isinstance(value, FeatureStructure) and value.provenance == Provenance.EXPECTED:
        return None
    for path in ((), ("meaning", "sem", "ds-vector"), ("sem", "ds-vector"), ("ds-vector",)):
        found = resolve_path(value, path)
        if isinstance(found, VectorRef):
            return None if found.prototype else found.word
    return None


def role_fillers(instance):
    """(role, filler) pairs of the frames an instance carries, or of the instance itself."""
    frames = resolve_path(instance, ("meaning", "sem", "frames"))
    if isinstance(frames, FeatureList):
        pairs = []
        for frame in frames.items:
            if isinstance(frame, FeatureStructure):
                pairs.extend(frame.features.items())
        return pairs
    if isinstance(instance, FeatureStructure):
        return list(instance.features.items())
    return []


def semantic_coherence(instance, prototypes, vectors):
    """Mean thematic fit over filled roles that have a prototype and an in-vocabulary filler."""
    fits = []
    for role, filler in role_fillers(instance):
        prototype = prototypes.get(role)
        word = filler_word(filler)
        if prototype is None or word is None or word not in vectors:
            continue
        fits.append(thematic_fit(word, prototype, vectors))
    if not fits:
        raise NoScorableRoles("no filled role has both a prototype and an in-vocabulary filler")
    return sum(fits) / len(fits)


def recompute(record, params):
    """Record with A and sigma refreshed from its B and cue matches."""
    return replace(record, A=total_activation(record, params), sigma=salience(record, params))
