"""Behavior-preserving protocol transformers and advice-string machinery.

Four transformers, applied in order, progressively restrict what the source
contributes while preserving per-network outcomes of the middle and leaf
layers:

  stage 1  phase separation: base round t is re-enacted over rounds
           3t, 3t+1, 3t+2, with the source, middle and leaf layers acting
           in sub-rounds 0, 1, 2. Cross-layer collisions disappear.
  stage 2  the source stops computing: at round 3t it just retransmits
           whatever it received in round 3t-2 (or stays silent). Middle
           nodes replay the stage-1 source locally from the echo stream.
  stage 3  the source (given the full topology as a privileged input) sends
           only component descriptors <i, tau>. Middle nodes rebuild the
           echo stream by simulating the named component from scratch.
  stage 4  the source transmits the whole descriptor sequence once, as an
           advice string attached to the round-0 payload, then stays silent.

Middle- and leaf-layer transmissions are identical, round for round, across
all four stages; only the source's column of the trace changes. Internal
replicas are re-derived from the node's own observations on every step, so
steps stay pure functions of their context; lru caches only memoize those
pure derivations.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import core
from .c2 import C2Params, component_of, l1_label, l2_label, layer_of
from .core import (
    LISTEN,
    PAYLOAD,
    PHI,
    SOURCE,
    Action,
    BroadcastPayload,
    ComponentDesc,
    Message,
    Network,
    Observation,
    Received,
    Transmit,
)
from .errors import ProtocolBindingError, StageMismatch
from .protocols import Protocol, ProtocolContext, StageTag

# A bare echo carries the message but not who originally sent it, so the
# replayed source sees receptions under this pseudo-label. Exact for every
# source step that does not branch on sender identity.
UNKNOWN_SENDER = -1


@dataclass(frozen=True)
class AdviceString:
    """Per-round source messages for rounds 3t, t = 1..r-1: descriptor or phi."""

    entries: tuple[ComponentDesc | None, ...]

    def entry(self, t: int) -> ComponentDesc | None:
        return self.entries[t - 1]

    def encode(self) -> str:
        body = ",".join(
            "phi" if e is None else f"{e.component}:{e.tau}" for e in self.entries
        )
        return "adv:" + body

    @staticmethod
    def decode(text: str) -> "AdviceString":
        if not text.startswith("adv:"):
            raise ValueError(f"not an advice encoding: {text!r}")
        body = text[4:]
        if not body:
            return AdviceString(())
        entries: list[ComponentDesc | None] = []
        for part in body.split(","):
            if part == "phi":
                entries.append(None)
            else:
                i, tau = part.split(":")
                entries.append(ComponentDesc(int(i), int(tau)))
        return AdviceString(tuple(entries))


def _require_stage(proto: Protocol, stage: StageTag, op: str) -> None:
    if proto.stage is not stage:
        raise StageMismatch(f"{op} needs a {stage.value} protocol, got {proto.stage.value}")
    if proto.params is None:
        raise StageMismatch(f"{op} needs a protocol carrying family parameters")


# ---------------------------------------------------------------------------
# Stage 1: phase separation
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _replay_base(p0: Protocol, params: C2Params, own: int, neighbors: tuple[int, ...],
                 window: tuple[Observation, ...], upto: int) -> Action:
    """Base action at round ``upto`` reconstructed from tripled observations.

    ``window`` holds the node's (possibly synthesized) stage-1 observations
    for rounds < 3*upto. Per re-enacted round s the node records phi if it
    transmitted; otherwise the unique reception across rounds 3s..3s+2, with
    zero or two-plus receptions collapsing to phi, exactly mirroring what a
    single base round would have delivered.
    """
    sigma: list[Observation] = []
    for s in range(upto):
        act = p0.step(ProtocolContext(own, neighbors, s, tuple(sigma), params))
        if isinstance(act, Transmit):
            sigma.append(PHI)
        else:
            got = [
                window[r]
                for r in range(3 * s, min(3 * s + 3, len(window)))
                if isinstance(window[r], Received)
            ]
            sigma.append(got[0] if len(got) == 1 else PHI)
    return p0.step(ProtocolContext(own, neighbors, upto, tuple(sigma), params))


def to_pi1(p0: Protocol, params: C2Params) -> Protocol:
    """Phase-separate a base protocol over round triples (stage 1)."""

    @lru_cache(maxsize=None)
    def step(ctx: ProtocolContext) -> Action:
        lay = layer_of(ctx.own_label, params)
        t, phase = divmod(ctx.round, 3)
        if phase != lay:
            return LISTEN
        act = _replay_base(
            p0, params, ctx.own_label, ctx.neighbor_labels, ctx.history, t
        )
        return act if isinstance(act, Transmit) else LISTEN

    return Protocol(f"pi1[{p0.name}]", step, stage=StageTag.PI1, params=params)


# ---------------------------------------------------------------------------
# Stage 2: echoing source
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _pi1_source_actions(p1: Protocol, params: C2Params,
                        source_obs: tuple[Observation, ...]) -> tuple[Action, ...]:
    """Stage-1 source actions at rounds 3s, s = 1..len(source_obs).

    ``source_obs[s-1]`` is what the source received in round 3(s-1)+1; its
    observations in the other sub-rounds are necessarily phi (no neighbor of
    the source may transmit there).
    """
    all_l1 = tuple(range(1, params.m * params.k + 1))
    hist: list[Observation] = []
    actions: list[Action] = []
    for s in range(1, len(source_obs) + 1):
        hist.append(PHI)
        hist.append(source_obs[s - 1])
        hist.append(PHI)
        actions.append(
            p1.step(ProtocolContext(SOURCE, all_l1, 3 * s, tuple(hist), params))
        )
    return tuple(actions)


def _strip_advice(obs: Observation) -> Observation:
    if isinstance(obs, Received) and isinstance(obs.message, BroadcastPayload):
        if obs.message.advice is not None:
            return Received(obs.sender, BroadcastPayload(obs.message.data, None))
    return obs


def _synth_history(ctx: ProtocolContext, source_round_obs) -> tuple[Observation, ...]:
    """A middle node's history with rounds 3s (s >= 1) replaced by
    ``source_round_obs(s)``. Sub-round 1 observations are necessarily phi
    for a middle node; sub-round 2 receptions (leaf neighbor) stay real, and
    the round-0 payload is kept with any advice attachment stripped."""
    synth: list[Observation] = []
    for r in range(ctx.round):
        if r == 0:
            synth.append(_strip_advice(ctx.history[0]))
        elif r % 3 == 0:
            synth.append(source_round_obs(r // 3))
        elif r % 3 == 1:
            synth.append(PHI)
        else:
            synth.append(ctx.history[r])
    return tuple(synth)


def to_pi2(p1: Protocol) -> Protocol:
    """Make the source a pure repeater (stage 2)."""
    _require_stage(p1, StageTag.PI1, "to_pi2")
    params = p1.params

    @lru_cache(maxsize=None)
    def step(ctx: ProtocolContext) -> Action:
        if ctx.own_label == SOURCE:
            if ctx.round == 0:
                return Transmit(BroadcastPayload(PAYLOAD))
            if ctx.round % 3 == 0:
                heard = ctx.history[ctx.round - 2]
                if isinstance(heard, Received):
                    return Transmit(heard.message)
            return LISTEN
        if layer_of(ctx.own_label, params) == 2:
            return p1.step(ctx)
        t, phase = divmod(ctx.round, 3)
        if phase != 1:
            return LISTEN
        source_obs = []
        for s in range(1, t + 1):
            echoed = ctx.history[3 * s]
            if isinstance(echoed, Received):
                source_obs.append(Received(UNKNOWN_SENDER, echoed.message))
            else:
                source_obs.append(PHI)
        src_actions = _pi1_source_actions(p1, params, tuple(source_obs))

        def obs_at(s: int) -> Observation:
            act = src_actions[s - 1]
            return Received(SOURCE, act.message) if isinstance(act, Transmit) else PHI

        synth = _synth_history(ctx, obs_at)
        return p1.step(
            ProtocolContext(ctx.own_label, ctx.neighbor_labels, ctx.round, synth, params)
        )

    return Protocol(f"pi2[{p1.name}]", step, stage=StageTag.PI2, params=params)


# ---------------------------------------------------------------------------
# Stage 3: topology descriptors
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _sim_component(p2: Protocol, params: C2Params, comp: int, tau: int,
                   echoes: tuple[Message | None, ...]) -> tuple[tuple[int, Message], ...]:
    """Simulate one component against a scripted source and return its
    middle-layer transmissions in the round right after the script ends.

    The script: payload at round 0, then ``echoes[s-1]`` (or silence) at
    round 3s. Middle nodes and the leaf run the stage-2 step on histories
    assembled purely from the script and each other, which matches their
    real behavior on any network where the script matches the source.
    """
    k = params.k
    mids = [l1_label(params, comp, j) for j in range(k)]
    leaf = l2_label(params, comp)
    adjacent = [j for j in range(k) if (tau >> j) & 1]
    leaf_nbrs = tuple(sorted(mids[j] for j in adjacent))
    hist: dict[int, list[Observation]] = {x: [] for x in mids + [leaf]}
    horizon = 3 * len(echoes) + 2
    final_tx: list[tuple[int, Message]] = []
    for r in range(horizon):
        if r == 0:
            src_msg: Message | None = BroadcastPayload(PAYLOAD)
        elif r % 3 == 0:
            src_msg = echoes[r // 3 - 1]
        else:
            src_msg = None
        acts: dict[int, Action] = {}
        for j, x in enumerate(mids):
            nbrs = (SOURCE, leaf) if j in adjacent else (SOURCE,)
            acts[x] = p2.step(ProtocolContext(x, nbrs, r, tuple(hist[x]), params))
        acts[leaf] = p2.step(ProtocolContext(leaf, leaf_nbrs, r, tuple(hist[leaf]), params))

        mid_tx = [(x, acts[x].message) for x in mids if isinstance(acts[x], Transmit)]
        leaf_msg = acts[leaf].message if isinstance(acts[leaf], Transmit) else None
        if r == horizon - 1:
            final_tx = mid_tx
        for j, x in enumerate(mids):
            if isinstance(acts[x], Transmit):
                hist[x].append(PHI)
                continue
            got = []
            if src_msg is not None:
                got.append(Received(SOURCE, src_msg))
            if j in adjacent and leaf_msg is not None:
                got.append(Received(leaf, leaf_msg))
            hist[x].append(got[0] if len(got) == 1 else PHI)
        if isinstance(acts[leaf], Transmit):
            hist[leaf].append(PHI)
        else:
            got = [Received(x, m) for x, m in mid_tx if x in leaf_nbrs]
            hist[leaf].append(got[0] if len(got) == 1 else PHI)
    return tuple(sorted(final_tx))


@lru_cache(maxsize=None)
def _echo_stream(p2: Protocol, params: C2Params,
                 descs: tuple[ComponentDesc | None, ...]) -> tuple[Message | None, ...]:
    """Rebuild the stage-2 source stream from a descriptor stream.

    Entry s names the component whose lone member was heard in round 3s-2;
    simulating that component recovers the message itself. A descriptor
    whose simulation does not yield exactly one transmitter cannot have
    come from a matching execution (wrong-network advice); it maps to
    silence, keeping the step total and deterministic.
    """
    echoes: list[Message | None] = []
    for desc in descs:
        if desc is None:
            echoes.append(None)
            continue
        tx = _sim_component(p2, params, desc.component, desc.tau, tuple(echoes))
        echoes.append(tx[0][1] if len(tx) == 1 else None)
    return tuple(echoes)


def _pi3_l1_step(p2: Protocol, params: C2Params, ctx: ProtocolContext,
                 descs: tuple[ComponentDesc | None, ...]) -> Action:
    echoes = _echo_stream(p2, params, descs)

    def obs_at(s: int) -> Observation:
        msg = echoes[s - 1]
        return Received(SOURCE, msg) if msg is not None else PHI

    synth = _synth_history(ctx, obs_at)
    return p2.step(
        ProtocolContext(ctx.own_label, ctx.neighbor_labels, ctx.round, synth, params)
    )


def _descs_from_history(ctx: ProtocolContext, t: int) -> tuple[ComponentDesc | None, ...]:
    descs: list[ComponentDesc | None] = []
    for s in range(1, t + 1):
        heard = ctx.history[3 * s]
        if isinstance(heard, Received):
            if not isinstance(heard.message, ComponentDesc):
                raise ProtocolBindingError(
                    f"expected a component descriptor at round {3 * s}"
                )
            descs.append(heard.message)
        else:
            descs.append(None)
    return tuple(descs)


def _make_pi3(p2: Protocol, taus: tuple[int, ...] | None) -> Protocol:
    params = p2.params

    @lru_cache(maxsize=None)
    def step(ctx: ProtocolContext) -> Action:
        if ctx.own_label == SOURCE:
            if taus is None:
                raise ProtocolBindingError(
                    "stage-3 source needs the network topology; run() binds it via setup"
                )
            if ctx.round == 0:
                return Transmit(BroadcastPayload(PAYLOAD))
            if ctx.round % 3 == 0:
                heard = ctx.history[ctx.round - 2]
                if isinstance(heard, Received):
                    comp = component_of(heard.sender, params)
                    return Transmit(ComponentDesc(comp, taus[comp]))
            return LISTEN
        if layer_of(ctx.own_label, params) == 2:
            return p2.step(ctx)
        t, phase = divmod(ctx.round, 3)
        if phase != 1:
            return LISTEN
        return _pi3_l1_step(p2, params, ctx, _descs_from_history(ctx, t))

    def setup(net: Network, max_rounds: int) -> Protocol:
        if net.c2_taus is None:
            raise ProtocolBindingError("stage-3 protocols run only on c2 networks")
        return _make_pi3(p2, tuple(net.c2_taus))

    return Protocol(
        f"pi3[{p2.name}]",
        step,
        setup=None if taus is not None else setup,
        stage=StageTag.PI3,
        params=params,
    )


def to_pi3(p2: Protocol) -> Protocol:
    """Restrict the source to component descriptors (stage 3). The returned
    protocol binds the network topology as the source's private input when a
    run starts."""
    _require_stage(p2, StageTag.PI2, "to_pi3")
    return _make_pi3(p2, None)


# ---------------------------------------------------------------------------
# Stage 4: one-shot advice
# ---------------------------------------------------------------------------

def make_advice(p3: Protocol, net: Network, r: int) -> AdviceString:
    """Advice for a budget of r base rounds: the source's stage-3
    transmissions at rounds 3t, t = 1..r-1, on the given network."""
    _require_stage(p3, StageTag.PI3, "make_advice")
    if r <= 1:
        return AdviceString(())
    trace = core.run(net, p3, 3 * (r - 1) + 1)
    entries: list[ComponentDesc | None] = []
    for t in range(1, r):
        act = trace.rounds[3 * t].actions[SOURCE]
        if isinstance(act, Transmit):
            if not isinstance(act.message, ComponentDesc):
                raise StageMismatch("stage-3 source transmitted a non-descriptor")
            entries.append(act.message)
        else:
            entries.append(None)
    return AdviceString(tuple(entries))


def pi4_with_advice(p3: Protocol, advice: AdviceString) -> Protocol:
    """Stage 4 under a fixed advice string (not necessarily the network's own)."""
    _require_stage(p3, StageTag.PI3, "pi4_with_advice")
    params = p3.params

    @lru_cache(maxsize=None)
    def step(ctx: ProtocolContext) -> Action:
        if ctx.own_label == SOURCE:
            if ctx.round == 0:
                return Transmit(BroadcastPayload(PAYLOAD, advice))
            return LISTEN
        if layer_of(ctx.own_label, params) == 2:
            return p3.step(ctx)
        t, phase = divmod(ctx.round, 3)
        if phase != 1:
            return LISTEN
        first = ctx.history[0] if ctx.history else PHI
        if not (isinstance(first, Received) and isinstance(first.message, BroadcastPayload)
                and isinstance(first.message.advice, AdviceString)):
            raise ProtocolBindingError("middle node saw no advice in round 0")
        got: AdviceString = first.message.advice
        if len(got.entries) < t:
            raise ProtocolBindingError(
                f"advice has {len(got.entries)} entries, round {ctx.round} needs {t}"
            )

        # The advice is exactly the descriptor stream a stage-3 source would
        # have transmitted; hand the stage-3 step a history that says so.
        def obs_at(s: int) -> Observation:
            entry = got.entries[s - 1]
            return Received(SOURCE, entry) if entry is not None else PHI

        synth = _synth_history(ctx, obs_at)
        return p3.step(
            ProtocolContext(ctx.own_label, ctx.neighbor_labels, ctx.round, synth, params)
        )

    return Protocol(f"pi4[{p3.name}]", step, stage=StageTag.PI4, params=params)


def to_pi4(p3: Protocol) -> Protocol:
    """Advised stage 4: setup computes the network's own advice, the source
    transmits it once with the payload and then stays silent."""
    _require_stage(p3, StageTag.PI3, "to_pi4")
    params = p3.params

    def unbound_step(ctx: ProtocolContext) -> Action:
        raise ProtocolBindingError("stage-4 protocol used without setup binding")

    def setup(net: Network, max_rounds: int) -> Protocol:
        budget = 1 if max_rounds < 2 else (max_rounds - 2) // 3 + 1
        return pi4_with_advice(p3, make_advice(p3, net, budget))

    return Protocol(f"pi4[{p3.name}]", unbound_step, setup=setup,
                    stage=StageTag.PI4, params=params)


def transform_chain(p0: Protocol, params: C2Params, stage: int) -> Protocol:
    """Apply the transformer ladder up to the requested stage (1..4)."""
    if not 1 <= stage <= 4:
        raise ValueError("stage must be in 1..4")
    proto = to_pi1(p0, params)
    if stage >= 2:
        proto = to_pi2(proto)
    if stage >= 3:
        proto = to_pi3(proto)
    if stage == 4:
        proto = to_pi4(proto)
    return proto
