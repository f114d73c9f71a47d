"""Deterministic protocol abstraction and the reference protocols.

A protocol is a pure step function from a node's local view (own label,
neighbor labels, round number, observation history) to an action. All nodes
run identical copies; behavior may differ only through the local view.
Family parameters (m, k) are public constants, so a node can derive its
layer and component from its own label.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

from . import core
from .c2 import C2Params, l1_index, layer_of
from .core import (
    LISTEN,
    PAYLOAD,
    SOURCE,
    Action,
    BroadcastPayload,
    Network,
    Observation,
    Received,
    Transmit,
    is_payload,
)
from .errors import IndexOutOfUniverse
from .selfam import SetFamily


class StageTag(Enum):
    PI0 = "pi0"
    PI1 = "pi1"
    PI2 = "pi2"
    PI3 = "pi3"
    PI4 = "pi4"


@dataclass(frozen=True)
class ProtocolContext:
    """Everything a node is allowed to see when choosing an action."""

    own_label: int
    neighbor_labels: tuple[int, ...]
    round: int
    history: tuple[Observation, ...]  # index = round, covers rounds < round
    params: C2Params | None = None


@dataclass(frozen=True)
class Protocol:
    """A named deterministic step function, optionally with per-network setup.

    ``setup(net, max_rounds)`` returns a copy of the protocol specialized to
    the network (privileged inputs such as full topology or an advice string
    live there, never in the per-node context). The engine binds
    automatically at the start of a run.
    """

    name: str
    step: Callable[[ProtocolContext], Action]
    setup: Callable[[Network, int], "Protocol"] | None = None
    stage: StageTag = StageTag.PI0
    params: C2Params | None = None


def has_received_payload(history) -> bool:
    return any(
        isinstance(o, Received) and is_payload(o.message) for o in history
    )


def check_legality(proto: Protocol, net: Network, max_rounds: int) -> list:
    """Trial-run the protocol and return all legality violations as data.

    Illegal transmissions are suppressed (turned into Listen) so that the
    probe can keep going and report everything it finds.
    """
    violations: list = []
    core.run(net, proto, max_rounds, collect_violations=violations)
    return violations


# ---------------------------------------------------------------------------
# Reference protocols (test subjects and adversary prey)
# ---------------------------------------------------------------------------

def _source_announce_only(ctx: ProtocolContext) -> Action | None:
    """Shared source behavior: payload in round 0, then listen."""
    if ctx.own_label == SOURCE:
        return Transmit(BroadcastPayload(PAYLOAD)) if ctx.round == 0 else LISTEN
    return None


def round_robin(params: C2Params) -> Protocol:
    """Middle node with label l transmits the payload at round l, once informed."""

    def step(ctx: ProtocolContext) -> Action:
        src = _source_announce_only(ctx)
        if src is not None:
            return src
        if (
            layer_of(ctx.own_label, params) == 1
            and ctx.round == ctx.own_label
            and has_received_payload(ctx.history)
        ):
            return Transmit(BroadcastPayload(PAYLOAD))
        return LISTEN

    return Protocol("round-robin", step, params=params)


def silent_l1(params: C2Params) -> Protocol:
    """Nothing ever transmits except the source's round-0 announcement."""

    def step(ctx: ProtocolContext) -> Action:
        src = _source_announce_only(ctx)
        return src if src is not None else LISTEN

    return Protocol("silent", step, params=params)


def selfam_driven(params: C2Params, fam: SetFamily) -> Protocol:
    """Middle node with within-component index j transmits at round t >= 1
    iff j is in the family's set t-1 (and the node is informed)."""
    if fam.universe != params.k:
        raise IndexOutOfUniverse(
            f"family universe {fam.universe} does not match k={params.k}"
        )

    def step(ctx: ProtocolContext) -> Action:
        src = _source_announce_only(ctx)
        if src is not None:
            return src
        if layer_of(ctx.own_label, params) == 1 and 1 <= ctx.round <= len(fam.sets):
            j = l1_index(ctx.own_label, params)
            if (fam.sets[ctx.round - 1] >> j) & 1 and has_received_payload(ctx.history):
                return Transmit(BroadcastPayload(PAYLOAD))
        return LISTEN

    return Protocol("selfam", step, params=params)


REGISTRY = {
    "round-robin": round_robin,
    "silent": silent_l1,
}


def get_protocol(name: str, params: C2Params) -> Protocol:
    """Resolve a CLI protocol name; 'selfam:<file>' loads a family file."""
    if name.startswith("selfam:"):
        from .selfam import family_from_lines

        path = name.split(":", 1)[1]
        with open(path, "r", encoding="utf-8") as fh:
            fam = family_from_lines(fh.read().splitlines())
        return selfam_driven(params, fam)
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown protocol {name!r}") from None
    return factory(params)
