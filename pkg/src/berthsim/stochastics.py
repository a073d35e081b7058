"""Seeded random variates on named, independently reproducible streams.

Every draw is a pure function of ``(master_seed, stream_name, draw_count)``:
streams are derived by hashing, not by sharing generator state, so any
stream can be split off cheaply, replayed exactly, and moved between
workers without coordination.  Scenario sweeps rely on this for common
random numbers: the same stream names under the same master seed produce
the same variates no matter what other streams consumed in between.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .errors import InvalidParamsError

__all__ = [
    "Distribution",
    "RandomStream",
    "constant",
    "uniform",
    "triangular",
    "exponential",
    "bernoulli",
    "discrete",
    "sample",
    "mean_of",
    "support_of",
    "derive_stream",
    "derive_seed",
    "parse_distribution",
    "format_distribution",
]

_TWO64 = float(2**64)


@dataclass(frozen=True)
class Distribution:
    """A variate recipe: one of constant/uniform/triangular/exponential/bernoulli/discrete."""

    kind: str
    params: tuple

    def __post_init__(self):
        _validate(self.kind, self.params)


def _validate(kind, params):
    if kind == "constant":
        (v,) = params
        if not math.isfinite(v):
            raise InvalidParamsError(f"constant value must be finite, got {v}")
    elif kind == "uniform":
        a, b = params
        if not (a <= b):
            raise InvalidParamsError(f"uniform requires a <= b, got ({a}, {b})")
    elif kind == "triangular":
        a, m, b = params
        if not (a <= m <= b):
            raise InvalidParamsError(f"triangular requires a <= m <= b, got ({a}, {m}, {b})")
    elif kind == "exponential":
        (mean,) = params
        if not (mean > 0):
            raise InvalidParamsError(f"exponential mean must be > 0, got {mean}")
    elif kind == "bernoulli":
        (p,) = params
        if not (0.0 <= p <= 1.0):
            raise InvalidParamsError(f"bernoulli p must be in [0,1], got {p}")
    elif kind == "discrete":
        pairs = params
        if not pairs:
            raise InvalidParamsError("discrete needs at least one (value, weight) pair")
        for v, w in pairs:
            if not (w > 0 and math.isfinite(w)):
                raise InvalidParamsError(f"discrete weights must be positive and finite, got {w}")
    else:
        raise InvalidParamsError(f"unknown distribution kind {kind!r}")


def constant(v):
    return Distribution("constant", (float(v),))


def uniform(a, b):
    return Distribution("uniform", (float(a), float(b)))


def triangular(a, m, b):
    return Distribution("triangular", (float(a), float(m), float(b)))


def exponential(mean):
    return Distribution("exponential", (float(mean),))


def bernoulli(p):
    return Distribution("bernoulli", (float(p),))


def discrete(pairs):
    return Distribution("discrete", tuple((float(v), float(w)) for v, w in pairs))


try:  # hashlib.blake2b is the fastest stdlib keyed hash for short inputs
    from hashlib import blake2b as _blake2b
except ImportError:  # pragma: no cover
    _blake2b = None


def _hash_u64(text: str) -> int:
    return int.from_bytes(_blake2b(text.encode(), digest_size=8).digest(), "big")


def derive_seed(master_seed: int, name: str) -> int:
    """A new master seed derived deterministically from a seed and a label."""
    return _hash_u64(f"seed|{master_seed}|{name}") & 0x7FFFFFFFFFFFFFFF


@dataclass
class RandomStream:
    """A named counter-based stream.

    The next variate depends only on ``(master_seed, stream_name,
    draw_count)``; drawing never touches global state, and copying the
    dataclass clones the stream mid-sequence.
    """

    master_seed: int
    stream_name: str
    draw_count: int = 0
    _prefix: str = field(default="", repr=False, compare=False)

    def __post_init__(self):
        self._prefix = f"{self.master_seed}|{self.stream_name}|"

    def next_uniform(self) -> float:
        """Uniform draw in [0, 1)."""
        u = _hash_u64(self._prefix + str(self.draw_count)) / _TWO64
        self.draw_count += 1
        return u


def derive_stream(master_seed: int, stream_name: str) -> RandomStream:
    """The stream for ``stream_name`` under ``master_seed``, at draw 0."""
    return RandomStream(master_seed, stream_name)


def sample(d: Distribution, s: RandomStream) -> float:
    """One variate from ``d`` on stream ``s``.

    Consumes exactly one uniform for every stochastic kind and none for
    constants, so draw counts stay aligned across scenario variants.
    """
    kind = d.kind
    p = d.params
    if kind == "constant":
        return p[0]
    u = s.next_uniform()
    if kind == "uniform":
        a, b = p
        return a + (b - a) * u
    if kind == "triangular":
        a, m, b = p
        span = b - a
        if span == 0.0:
            return a
        cut = (m - a) / span
        if u < cut:
            return a + math.sqrt(u * span * (m - a))
        return b - math.sqrt((1.0 - u) * span * (b - m))
    if kind == "exponential":
        return -p[0] * math.log(1.0 - u)
    if kind == "bernoulli":
        return 1.0 if u < p[0] else 0.0
    # discrete
    total = 0.0
    for _, w in p:
        total += w
    target = u * total
    acc = 0.0
    for v, w in p:
        acc += w
        if target < acc:
            return v
    return p[-1][0]


def mean_of(d: Distribution) -> float:
    """Analytic mean, used by moment checks."""
    kind, p = d.kind, d.params
    if kind == "constant":
        return p[0]
    if kind == "uniform":
        return (p[0] + p[1]) / 2.0
    if kind == "triangular":
        return (p[0] + p[1] + p[2]) / 3.0
    if kind == "exponential":
        return p[0]
    if kind == "bernoulli":
        return p[0]
    total = sum(w for _, w in p)
    return sum(v * w for v, w in p) / total


def support_of(d: Distribution) -> tuple[float, float]:
    """Closed interval that must contain every sample."""
    kind, p = d.kind, d.params
    if kind == "constant":
        return (p[0], p[0])
    if kind == "uniform":
        return (p[0], p[1])
    if kind == "triangular":
        return (p[0], p[2])
    if kind == "exponential":
        return (0.0, math.inf)
    if kind == "bernoulli":
        return (0.0, 1.0)
    values = [v for v, _ in p]
    return (min(values), max(values))


# ---------------------------------------------------------------------------
# Literals: const(30), uniform(a,b), tri(a,m,b), exp(mean), bern(p),
# disc(v1:w1, v2:w2, ...)

_LITERAL_RE = re.compile(r"^\s*([A-Za-z_]+)\s*\(\s*([^()]*)\s*\)\s*$")

_KIND_BY_TAG = {
    "const": "constant",
    "uniform": "uniform",
    "tri": "triangular",
    "exp": "exponential",
    "bern": "bernoulli",
    "disc": "discrete",
}
_ARITY = {"constant": 1, "uniform": 2, "triangular": 3, "exponential": 1, "bernoulli": 1}


def parse_distribution(text: str) -> Distribution:
    """Parse a distribution literal; raises InvalidParamsError on bad input."""
    m = _LITERAL_RE.match(text)
    if not m:
        raise InvalidParamsError(f"not a distribution literal: {text!r}")
    tag, body = m.group(1), m.group(2)
    kind = _KIND_BY_TAG.get(tag)
    if kind is None:
        raise InvalidParamsError(f"unknown distribution {tag!r} in {text!r}")
    parts = [part.strip() for part in body.split(",")] if body.strip() else []
    try:
        if kind == "discrete":
            pairs = []
            for part in parts:
                v, _, w = part.partition(":")
                if not _:
                    raise ValueError("missing ':'")
                pairs.append((float(v), float(w)))
            return Distribution("discrete", tuple(pairs))
        if len(parts) != _ARITY[kind]:
            raise ValueError(f"expected {_ARITY[kind]} parameters")
        return Distribution(kind, tuple(float(x) for x in parts))
    except ValueError as exc:
        raise InvalidParamsError(f"bad distribution literal {text!r}: {exc}") from None


_TAG_BY_KIND = {v: k for k, v in _KIND_BY_TAG.items()}


def _num(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() else repr(x)


def format_distribution(d: Distribution) -> str:
    """Canonical literal; parse(format(d)) == d."""
    if d.kind == "discrete":
        body = ", ".join(f"{_num(v)}:{_num(w)}" for v, w in d.params)
    else:
        body = ", ".join(_num(x) for x in d.params)
    return f"{_TAG_BY_KIND[d.kind]}({body})"
