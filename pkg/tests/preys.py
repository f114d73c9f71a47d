"""Extra prey protocols for the transformer tests.

These exercise paths the registry protocols never touch: leaf
transmissions, an active source, content-dependent middle-layer behavior,
and pseudo-random but deterministic schedules.
"""

from __future__ import annotations

from radiolb import (
    LISTEN,
    PAYLOAD,
    SOURCE,
    BroadcastPayload,
    C2Params,
    Opaque,
    Protocol,
    Received,
    Transmit,
)
from radiolb.c2 import layer_of
from radiolb.protocols import has_received_payload


def leaf_ack_prey(params: C2Params) -> Protocol:
    """Round-robin middle layer plus a one-shot leaf acknowledgement.

    Exercises leaf-to-middle deliveries inside the transformers: the leaf
    transmits an opaque ack in the round right after it is informed.
    """

    def step(ctx):
        own = ctx.own_label
        if own == SOURCE:
            return Transmit(BroadcastPayload(PAYLOAD)) if ctx.round == 0 else LISTEN
        if layer_of(own, params) == 2:
            for t, obs in enumerate(ctx.history):
                if isinstance(obs, Received):
                    if ctx.round == t + 1:
                        return Transmit(Opaque(b"ack"))
                    break
            return LISTEN
        if ctx.round == own and has_received_payload(ctx.history):
            return Transmit(BroadcastPayload(PAYLOAD))
        return LISTEN

    return Protocol("leaf-ack", step, params=params)


def hash_prey(params: C2Params, seed: int) -> Protocol:
    """Pseudo-random but fully deterministic prey.

    Every informed node (and the source at any time) decides each round
    from a hash of (seed, own label, round, observed message contents), so
    arbitrary transmission patterns arise: active sources, leaf chatter,
    simultaneous source+leaf rounds, non-payload traffic. Sender labels are
    deliberately left out of the hash: a bare echo cannot preserve them, so
    source behavior must not depend on them.
    """
    import hashlib

    def fingerprint(history) -> str:
        parts = []
        for obs in history:
            if isinstance(obs, Received):
                msg = obs.message
                if isinstance(msg, BroadcastPayload):
                    parts.append("mu" + msg.data.hex())
                elif isinstance(msg, Opaque):
                    parts.append("op" + msg.data.hex())
                else:
                    parts.append(f"cd{msg.component}:{msg.tau}")
            else:
                parts.append("phi")
        return ",".join(parts)

    def step(ctx):
        if ctx.round == 0:
            if ctx.own_label == SOURCE:
                return Transmit(BroadcastPayload(PAYLOAD))
            return LISTEN
        allowed = ctx.own_label == SOURCE or any(
            isinstance(o, Received) for o in ctx.history
        )
        if not allowed:
            return LISTEN
        text = f"{seed}:{ctx.own_label}:{ctx.round}:{fingerprint(ctx.history)}"
        digest = hashlib.blake2b(text.encode(), digest_size=2).digest()
        roll = digest[0] % 4
        if roll == 0:
            return Transmit(BroadcastPayload(PAYLOAD + bytes([digest[1] % 7])))
        if roll == 1:
            return Transmit(Opaque(bytes([digest[1]])))
        return LISTEN

    return Protocol(f"hash-{seed}", step, params=params)


def relay_prey(params: C2Params) -> Protocol:
    """A topology-sensitive prey: the source parrots whatever it hears,
    leaves acknowledge once, and middle nodes relay acks upward and react
    to parroted relays. Middle-layer behavior then genuinely depends on the
    source's stream, which makes stage-4 runs advice-sensitive.
    """

    def step(ctx):
        own = ctx.own_label
        if own == SOURCE:
            if ctx.round == 0:
                return Transmit(BroadcastPayload(PAYLOAD))
            last = ctx.history[-1]
            return Transmit(last.message) if isinstance(last, Received) else LISTEN
        if layer_of(own, params) == 2:
            for t, obs in enumerate(ctx.history):
                if isinstance(obs, Received):
                    if ctx.round == t + 1:
                        return Transmit(Opaque(b"ack"))
                    break
            return LISTEN
        if ctx.round == own and has_received_payload(ctx.history):
            return Transmit(BroadcastPayload(PAYLOAD))
        if ctx.history and isinstance(ctx.history[-1], Received):
            last = ctx.history[-1]
            if isinstance(last.message, Opaque):
                if last.message.data == b"ack" and last.sender != SOURCE:
                    return Transmit(Opaque(b"relay"))
                if (
                    last.message.data == b"relay"
                    and last.sender == SOURCE
                    and has_received_payload(ctx.history)
                ):
                    return Transmit(BroadcastPayload(PAYLOAD))
        return LISTEN

    return Protocol("relay", step, params=params)
