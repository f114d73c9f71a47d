"""Layered two-radius network family: construction, labeling, enumeration.

A family instance has one source node, m components of k middle-layer nodes
each (all adjacent to the source), and one leaf node per component adjacent
to a nonempty subset of that component's middle nodes. The subset is encoded
as a bitmask tau in [1, 2^k): bit j set means middle node j of the component
is adjacent to the component's leaf.

Canonical labeling (fixed for the whole family):
    source                      -> 0
    middle node j of comp i     -> 1 + i*k + j
    leaf node of comp i         -> 1 + m*k + i
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from typing import Iterator

from .core import Network
from .errors import EnumerationTooLarge, InvalidTau, UnknownLabel

DEFAULT_ENUM_CAP = 10**6
ENUM_CAP_ENV = "RADIOLB_ENUM_CAP"


@dataclass(frozen=True, order=True)
class C2Params:
    m: int  # number of components
    k: int  # middle-layer nodes per component

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise ValueError("m and k must be positive")

    @property
    def n(self) -> int:
        return 1 + self.m * (self.k + 1)


@dataclass(frozen=True, order=True)
class TopologyVector:
    taus: tuple[int, ...]

    def replace(self, component: int, tau: int) -> "TopologyVector":
        taus = list(self.taus)
        taus[component] = tau
        return TopologyVector(tuple(taus))


def l1_label(params: C2Params, component: int, index: int) -> int:
    return 1 + component * params.k + index


def l2_label(params: C2Params, component: int) -> int:
    return 1 + params.m * params.k + component


def layer_of(label: int, params: C2Params) -> int:
    if label < 0 or label >= params.n:
        raise UnknownLabel(f"label {label} outside [0, {params.n})")
    if label == 0:
        return 0
    return 1 if label <= params.m * params.k else 2


def component_of(label: int, params: C2Params) -> int | None:
    """Component index of a label, or None for the source."""
    lay = layer_of(label, params)
    if lay == 0:
        return None
    if lay == 1:
        return (label - 1) // params.k
    return label - 1 - params.m * params.k


def l1_index(label: int, params: C2Params) -> int:
    """Within-component index of a middle-layer label."""
    if layer_of(label, params) != 1:
        raise UnknownLabel(f"label {label} is not in the middle layer")
    return (label - 1) % params.k


def _check_tau(tau: int, k: int) -> None:
    if not 1 <= tau < (1 << k):
        raise InvalidTau(f"tau={tau} outside [1, {1 << k})")


def build_c2(params: C2Params, tv: TopologyVector) -> Network:
    if len(tv.taus) != params.m:
        raise InvalidTau(f"expected {params.m} taus, got {len(tv.taus)}")
    for tau in tv.taus:
        _check_tau(tau, params.k)
    labels = range(params.n)
    edges = []
    for i in range(params.m):
        for j in range(params.k):
            edges.append((0, l1_label(params, i, j)))
            if (tv.taus[i] >> j) & 1:
                edges.append((l2_label(params, i), l1_label(params, i, j)))
    return Network(labels, edges, c2_params=params, c2_taus=tv.taus)


def enumeration_cap() -> int:
    return int(os.environ.get(ENUM_CAP_ENV, DEFAULT_ENUM_CAP))


def family_size(params: C2Params) -> int:
    return ((1 << params.k) - 1) ** params.m


def enumerate_c2(params: C2Params, cap: int | None = None) -> Iterator[TopologyVector]:
    """All topology vectors in lexicographic order, [1,..,1] first."""
    total = family_size(params)
    limit = enumeration_cap() if cap is None else cap
    if total > limit:
        raise EnumerationTooLarge(f"family has {total} networks, cap is {limit}")

    def gen():
        taus = [1] * params.m
        top = (1 << params.k) - 1
        while True:
            yield TopologyVector(tuple(taus))
            i = params.m - 1
            while i >= 0 and taus[i] == top:
                taus[i] = 1
                i -= 1
            if i < 0:
                return
            taus[i] += 1

    return gen()


def encode_c2(params: C2Params, tv: TopologyVector) -> str:
    taus = ",".join(str(t) for t in tv.taus)
    return f"c2:m={params.m},k={params.k},taus={taus}"


def decode_c2(text: str) -> tuple[C2Params, TopologyVector]:
    match = re.fullmatch(r"c2:m=(\d+),k=(\d+),taus=(\d+(?:,\d+)*)", text.strip())
    if not match:
        raise ValueError(f"malformed c2 encoding: {text!r}")
    m, k = int(match.group(1)), int(match.group(2))
    taus = tuple(int(t) for t in match.group(3).split(","))
    params = C2Params(m, k)
    if len(taus) != m:
        raise InvalidTau(f"expected {m} taus, got {len(taus)}")
    for tau in taus:
        _check_tau(tau, k)
    return params, TopologyVector(taus)
