"""Seeded synthetic datasets: the simulation recipes and a generic mixture sampler.

Every generator returns ``(DataMatrix, Assignment, RelevanceVector)`` with rows
grouped by component in component order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._seeding import rng_for
from .core import Assignment, DataMatrix, InvalidArgumentError
from .metrics import RelevanceVector


class GenSpecError(InvalidArgumentError):
    code = "invalid-genspec"


@dataclass(frozen=True)
class Normal:
    mu: float = 0.0
    sigma: float = 1.0

    def validate(self):
        if not (np.isfinite(self.mu) and np.isfinite(self.sigma)) or self.sigma <= 0:
            raise GenSpecError(f"normal needs finite mu and sigma > 0, got {self}")

    def sample(self, rng, size):
        return rng.normal(self.mu, self.sigma, size)


@dataclass(frozen=True)
class Uniform:
    a: float = 0.0
    b: float = 1.0

    def validate(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.b <= self.a:
            raise GenSpecError(f"uniform needs finite a < b, got {self}")

    def sample(self, rng, size):
        return rng.uniform(self.a, self.b, size)


@dataclass(frozen=True)
class ChiSquare:
    df: float = 1.0

    def validate(self):
        if not np.isfinite(self.df) or self.df <= 0:
            raise GenSpecError(f"chi-square needs df > 0, got {self}")

    def sample(self, rng, size):
        return rng.chisquare(self.df, size)


_DISTS = {"normal": Normal, "uniform": Uniform, "chisquare": ChiSquare, "chi2": ChiSquare}


@dataclass(frozen=True)
class Component:
    features: tuple
    count: int | None = None
    weight: float = 1.0


@dataclass(frozen=True)
class GenSpec:
    """Recipe for a mixture dataset.

    Each component lists one distribution per feature. With ``n_samples`` unset
    every component contributes exactly ``count`` rows; otherwise the counts are
    drawn multinomially from the component weights. ``relevance`` defaults to
    "the feature's distribution differs between components".
    """

    components: tuple
    seed: int = 0
    n_samples: int | None = None
    relevance: tuple | None = None
    name: str = "mixture"

    def validate(self):
        if not self.components:
            raise GenSpecError("at least one component is required")
        p = len(self.components[0].features)
        if p < 1:
            raise GenSpecError("components need at least one feature")
        for c in self.components:
            if len(c.features) != p:
                raise GenSpecError("all components must have the same number of features")
            for d in c.features:
                d.validate()
            if self.n_samples is None and (c.count is None or c.count < 1):
                raise GenSpecError(f"component counts must be >= 1, got {c.count}")
            if not np.isfinite(c.weight) or c.weight <= 0:
                raise GenSpecError(f"component weights must be positive, got {c.weight}")
        if self.n_samples is not None and self.n_samples < 2:
            raise GenSpecError("n_samples must be at least 2")
        if self.relevance is not None and len(self.relevance) != p:
            raise GenSpecError("relevance must list one flag per feature")
        return self


def _default_relevance(components):
    p = len(components[0].features)
    return [len({c.features[l] for c in components}) > 1 for l in range(p)]


def gen_mixture(spec: GenSpec):
    spec.validate()
    rng = rng_for(spec.seed)
    comps = spec.components
    if spec.n_samples is None:
        counts = [int(c.count) for c in comps]
    else:
        probs = np.array([c.weight for c in comps], dtype=float)
        counts = rng.multinomial(spec.n_samples, probs / probs.sum()).tolist()
    p = len(comps[0].features)
    blocks = []
    for c, m in zip(comps, counts):
        block = np.empty((m, p))
        for l, dist in enumerate(c.features):
            block[:, l] = dist.sample(rng, m)
        blocks.append(block)
    values = np.vstack(blocks)
    labels = np.repeat(np.arange(len(comps)), counts)
    relevance = spec.relevance if spec.relevance is not None else _default_relevance(comps)
    return DataMatrix(values), Assignment(labels, len(comps)), RelevanceVector(relevance)


def gen_example1(seed=0):
    """Four clusters of 100 points; only the first feature separates them."""
    layout = [
        (Normal(0, 1), Normal(0, 1)),
        (Normal(7, 1), Normal(2, 1)),
        (Normal(13, 1), Normal(-2, 1)),
        (Normal(19, 1), Uniform(-10, 10)),
    ]
    spec = GenSpec(tuple(Component(f, 100) for f in layout), seed=seed,
                   relevance=(True, False), name="example1")
    return gen_mixture(spec)


def gen_example2(seed=0, p_noise=950, p_signal=50):
    """Three clusters of 100 points: ``p_signal`` shifted normals, then chi-square(5) noise."""
    if p_signal < 1 or p_noise < 0:
        raise GenSpecError("need p_signal >= 1 and p_noise >= 0")
    noise = (ChiSquare(5),) * p_noise
    comps = tuple(Component((Normal(mu, 1),) * p_signal + noise, 100) for mu in (0, 5, 10))
    spec = GenSpec(comps, seed=seed, relevance=(True,) * p_signal + (False,) * p_noise,
                   name="example2")
    return gen_mixture(spec)


# Analog of the two-feature motivating dataset: three compact groups split along
# x, plus a group stretched along y that inflates y's within-cluster spread.
DATA1_LAYOUT = (
    (Normal(-4.0, 0.5), Normal(0.0, 0.5), 100),
    (Normal(0.0, 0.5), Normal(0.0, 0.5), 100),
    (Normal(4.0, 0.5), Uniform(-12.0, 12.0), 100),
)


def gen_data1_analog(seed=0):
    comps = tuple(Component((fx, fy), m) for fx, fy, m in DATA1_LAYOUT)
    return gen_mixture(GenSpec(comps, seed=seed, relevance=(True, False), name="data1"))


def gen_toy1_analog(seed=0, per_cluster=50):
    """Ten features, the first four informative (means 0/6/12), the rest N(0, 1)."""
    comps = tuple(
        Component((Normal(mu, 1),) * 4 + (Normal(0, 1),) * 6, per_cluster) for mu in (0, 6, 12)
    )
    return gen_mixture(GenSpec(comps, seed=seed, relevance=(True,) * 4 + (False,) * 6, name="toy1"))


def _dist_from_dict(d):
    d = dict(d)
    kind = str(d.pop("dist", "")).lower()
    d.pop("repeat", None)
    if kind not in _DISTS:
        raise GenSpecError(f"unknown distribution {kind!r}; expected one of {sorted(_DISTS)}")
    try:
        return _DISTS[kind](**{k: float(v) for k, v in d.items()})
    except TypeError as exc:
        raise GenSpecError(f"bad parameters for {kind}: {exc}") from None


def genspec_from_dict(data, seed=None) -> GenSpec:
    """Build a :class:`GenSpec` from its JSON form.

    ``{"components": [{"count": 100, "features": [{"dist": "normal", "mu": 0,
    "sigma": 1, "repeat": 3}, ...]}], "n_samples": null, "relevance": null}``
    """
    comps = []
    for c in data.get("components", []):
        feats = []
        for f in c.get("features", []):
            feats.extend([_dist_from_dict(f)] * int(f.get("repeat", 1)))
        comps.append(Component(tuple(feats), c.get("count"), float(c.get("weight", 1.0))))
    rel = data.get("relevance")
    spec = GenSpec(
        tuple(comps),
        seed=int(data.get("seed", 0) if seed is None else seed),
        n_samples=data.get("n_samples"),
        relevance=None if rel is None else tuple(bool(r) for r in rel),
        name=str(data.get("name", "mixture")),
    )
    return spec.validate()


def load_genspec(path, seed=None) -> GenSpec:
    with open(path, encoding="utf-8") as fh:
        return genspec_from_dict(json.load(fh), seed=seed)


SCHEMES = {
    "example1": gen_example1,
    "example2": gen_example2,
    "data1": gen_data1_analog,
    "toy1": gen_toy1_analog,
}
