"""Explainability scores over chunk counts and interaction strength.

The scoring chain, from the single-count form to the weighted segregated
form actually used in reports:

    score_basic        E = 1 / N
    score_penalized    E = 1 / N + (1 - I)        (unnormalized; can exceed 1)
    score_segregated   E = 1/N_in + 1/N_out + (1 - I)
    score_global       E = w1/N_in + w2/N_out + w3 (1 - I)

Weights are nonnegative and sum to 1; default is exact thirds. The local
variant keeps the input-chunk predicate and recounts output chunks as those
whose contribution magnitude exceeds a threshold for one instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DataError, WeightError

_WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class WeightVector:
    """Predicate weights (input chunks, output chunks, interaction)."""

    w1: float
    w2: float
    w3: float

    def __post_init__(self) -> None:
        for name, w in zip(("w1", "w2", "w3"), self.as_tuple()):
            if not (w >= 0.0):
                raise WeightError(f"{name} must be nonnegative, got {w}")
        total = (self.w1 + self.w2) + self.w3
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise WeightError(f"weights must sum to 1, got {total!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.w1, self.w2, self.w3)

    @classmethod
    def default(cls) -> "WeightVector":
        return cls(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)

    @classmethod
    def parse(cls, text: str) -> "WeightVector":
        parts = text.split(",")
        if len(parts) != 3:
            raise WeightError(f"expected three comma-separated weights, got {text!r}")
        try:
            w1, w2, w3 = (float(tok) for tok in parts)
        except ValueError:
            raise WeightError(f"weights must be numbers, got {text!r}") from None
        return cls(w1, w2, w3)

    def is_default(self) -> bool:
        return self.as_tuple() == WeightVector.default().as_tuple()


@dataclass(frozen=True)
class ExplainabilityScore:
    """E with its three weighted predicates and full provenance."""

    value: float
    predicate_input: float
    predicate_output: float
    predicate_interaction: float
    n_input_chunks: int
    n_output_chunks: int
    interaction: float
    weights: WeightVector
    scope: str = "global"
    instance: int | None = None
    flags: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        out = {
            "value": self.value,
            "predicate_input": self.predicate_input,
            "predicate_output": self.predicate_output,
            "predicate_interaction": self.predicate_interaction,
            "inputs": {
                "n_input_chunks": self.n_input_chunks,
                "n_output_chunks": self.n_output_chunks,
                "interaction": self.interaction,
                "weights": list(self.weights.as_tuple()),
            },
            "scope": self.scope,
            "flags": list(self.flags),
        }
        if self.instance is not None:
            out["instance"] = int(self.instance)
        return out


def _check_count(name: str, n) -> int:
    if n != int(n) or int(n) < 1:
        raise DataError(f"{name} must be an integer >= 1, got {n!r}")
    return int(n)


def _check_interaction(value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise DataError(f"interaction strength must be in [0, 1], got {value}")
    return value


def score_basic(n_chunks: int) -> float:
    """Reciprocal of the cognitive-chunk count: fewer chunks, higher score."""
    return 1.0 / _check_count("chunk count", n_chunks)


def score_penalized(n_chunks: int, interaction: float) -> float:
    """Chunk-count score plus the interaction complement.

    Deliberately unnormalized (one chunk with zero interaction scores 2.0);
    kept as the documented stepping stone toward the weighted form.
    """
    return 1.0 / _check_count("chunk count", n_chunks) + (1.0 - _check_interaction(interaction))


def score_segregated(n_input_chunks: int, n_output_chunks: int, interaction: float) -> float:
    """Unweighted form with input and output chunk counts segregated."""
    ni = _check_count("input chunk count", n_input_chunks)
    no = _check_count("output chunk count", n_output_chunks)
    return 1.0 / ni + 1.0 / no + (1.0 - _check_interaction(interaction))


def score_global(
    n_input_chunks: int,
    n_output_chunks: int,
    interaction: float,
    weights: WeightVector | None = None,
) -> ExplainabilityScore:
    """Weighted explainability E = w1/N_in + w2/N_out + w3 (1 - I)."""
    w = weights if weights is not None else WeightVector.default()
    ni = _check_count("input chunk count", n_input_chunks)
    no = _check_count("output chunk count", n_output_chunks)
    i = _check_interaction(interaction)
    p1 = w.w1 / ni
    p2 = w.w2 / no
    p3 = w.w3 * (1.0 - i)
    return ExplainabilityScore(
        value=(p1 + p2) + p3,
        predicate_input=p1,
        predicate_output=p2,
        predicate_interaction=p3,
        n_input_chunks=ni,
        n_output_chunks=no,
        interaction=i,
        weights=w,
    )


def score_local(
    n_input_chunks: int,
    spec,
    breakdown: list[tuple[str, float]],
    interaction_local: float,
    weights: WeightVector | None = None,
    epsilon: float = 0.0,
    instance: int | None = None,
) -> ExplainabilityScore:
    """Instance-level score: output chunks recounted as those contributing.

    ``breakdown`` holds (chunk, contribution) for the instance; chunks with
    |contribution| > epsilon count toward the local N_out. When nothing
    clears the threshold, N_out floors at 1 and the score is flagged
    degenerate.
    """
    if epsilon < 0.0:
        raise DataError(f"epsilon must be >= 0, got {epsilon}")
    declared = set(spec.output_chunks)
    seen = [name for name, _ in breakdown]
    if set(seen) != declared:
        raise DataError("breakdown chunks do not match the spec's output chunks")
    contributing = sum(1 for _, value in breakdown if abs(value) > epsilon)
    flags: tuple[str, ...] = ()
    if contributing == 0:
        contributing = 1
        flags = ("degenerate_instance",)
    base = score_global(n_input_chunks, contributing, interaction_local, weights)
    return ExplainabilityScore(
        value=base.value,
        predicate_input=base.predicate_input,
        predicate_output=base.predicate_output,
        predicate_interaction=base.predicate_interaction,
        n_input_chunks=base.n_input_chunks,
        n_output_chunks=base.n_output_chunks,
        interaction=base.interaction,
        weights=base.weights,
        scope="local",
        instance=instance,
        flags=flags,
    )
