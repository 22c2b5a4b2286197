"""Simulated node cluster: heartbeats, failure detection, checkpoints, balancing.

Time is a logical tick counter owned by the cluster, so every run is
deterministic. Nodes are stepped by the coordinator (no threads); all
work travels as encoded envelopes even in-process, which keeps the codec
on the hot path.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass
from enum import Enum

from ..errors import InvalidArgument, NodeUnreachable
from .envelope import CURRENT_VERSION, MessageEnvelope, QoS, decode, encode
from .fusion import Modality, modality_process

COORDINATOR_ID = 0
METRIC_WINDOW = 3
LOAD_WEIGHTS = (0.5, 0.3, 0.2)  # cpu, mem, io


class Liveness(Enum):
    ALIVE = "alive"
    SUSPECT = "suspect"
    FAILED = "failed"


@dataclass(frozen=True)
class Heartbeat:
    node_id: int
    seq: int
    tick: int


@dataclass(frozen=True)
class Checkpoint:
    node_id: int
    seq: int
    snapshot: bytes


class Node:
    """One simulated worker node with an inbox ordered Realtime before Bulk."""

    def __init__(self, node_id: int, modalities: frozenset[Modality]):
        if node_id == COORDINATOR_ID:
            raise InvalidArgument(f"node id {COORDINATOR_ID} is reserved for the coordinator")
        self.id = node_id
        self.modalities = frozenset(modalities)
        self.liveness = Liveness.ALIVE
        self.silenced = False
        self.heartbeat_seq = 0
        self.processed: list[list] = []  # [tick, modality, tag, label]
        self.last_outputs: dict[Modality, tuple[str, tuple[float, ...]]] = {}
        self.checkpoint_store: dict[tuple[int, int], Checkpoint] = {}
        self._metrics: dict[str, deque] = {
            "cpu": deque(maxlen=METRIC_WINDOW),
            "mem": deque(maxlen=METRIC_WINDOW),
            "io": deque(maxlen=METRIC_WINDOW),
        }
        self._inbox_rt: deque[MessageEnvelope] = deque()
        self._inbox_bulk: deque[MessageEnvelope] = deque()

    def push_metrics(self, cpu: float, mem: float, io: float) -> None:
        for name, value in (("cpu", cpu), ("mem", mem), ("io", io)):
            if not 0.0 <= value <= 1.0:
                raise InvalidArgument(f"{name} load {value} outside [0, 1]")
            self._metrics[name].append(value)

    def _avg(self, name: str) -> float:
        window = self._metrics[name]
        return sum(window) / len(window) if window else 0.0

    def predicted_load(self) -> float:
        """0.5*cpu + 0.3*mem + 0.2*io over 3-sample moving averages."""
        w_cpu, w_mem, w_io = LOAD_WEIGHTS
        return w_cpu * self._avg("cpu") + w_mem * self._avg("mem") + w_io * self._avg("io")

    def deliver(self, env: MessageEnvelope) -> None:
        if env.qos is QoS.REALTIME:
            self._inbox_rt.append(env)
        else:
            self._inbox_bulk.append(env)

    def pop_next(self) -> MessageEnvelope | None:
        if self._inbox_rt:
            return self._inbox_rt.popleft()
        if self._inbox_bulk:
            return self._inbox_bulk.popleft()
        return None

    def drain_inbox(self) -> list[MessageEnvelope]:
        pending = list(self._inbox_rt) + list(self._inbox_bulk)
        self._inbox_rt.clear()
        self._inbox_bulk.clear()
        return pending

    @property
    def pending(self) -> int:
        return len(self._inbox_rt) + len(self._inbox_bulk)

    def state_dict(self) -> dict:
        return {
            "node_id": self.id,
            "modalities": sorted(m.value for m in self.modalities),
            "heartbeat_seq": self.heartbeat_seq,
            "metrics": {k: list(v) for k, v in self._metrics.items()},
            "processed": [list(r) for r in self.processed],
            "last_outputs": {
                m.value: {"label": label, "tensor": list(vec)}
                for m, (label, vec) in sorted(self.last_outputs.items(), key=lambda kv: kv[0].value)
            },
        }


def _serialize_state(state: dict) -> bytes:
    return json.dumps(state, sort_keys=True, separators=(",", ":")).encode("utf-8")


class Cluster:
    """Coordinator-stepped cluster with two-phase heartbeat failure detection."""

    def __init__(self, timeout_ticks: int = 3):
        if timeout_ticks < 1:
            raise InvalidArgument(f"timeout_ticks must be >= 1, got {timeout_ticks}")
        self.timeout_ticks = timeout_ticks
        self.tick = 0
        self.nodes: dict[int, Node] = {}
        self.heartbeat_log: list[Heartbeat] = []
        self._last_heartbeat: dict[int, int] = {}
        self._checkpoint_seq: dict[int, itertools.count] = {}
        self._next_msg_id = itertools.count(1)
        self._failover_log: list[tuple[int, int | None]] = []

    # -- membership ---------------------------------------------------------

    def add_node(self, node_id: int, modalities) -> Node:
        if node_id in self.nodes:
            raise InvalidArgument(f"node {node_id} already exists")
        node = Node(node_id, frozenset(modalities))
        self.nodes[node_id] = node
        self._last_heartbeat[node_id] = self.tick
        self._checkpoint_seq[node_id] = itertools.count(1)
        return node

    def node(self, node_id: int) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise InvalidArgument(f"unknown node {node_id}") from None

    def silence(self, node_id: int) -> None:
        """Stop a node's heartbeats (models a crash or partition)."""
        self.node(node_id).silenced = True

    def unsilence(self, node_id: int) -> None:
        self.node(node_id).silenced = False

    # -- heartbeats and failure detection ------------------------------------

    def heartbeat_tick(self) -> list[Heartbeat]:
        """Advance logical time one tick; every responsive node beats."""
        self.tick += 1
        beats = []
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            if node.silenced or node.liveness is Liveness.FAILED:
                continue
            node.heartbeat_seq += 1
            beat = Heartbeat(node_id, node.heartbeat_seq, self.tick)
            self.heartbeat_log.append(beat)
            self._last_heartbeat[node_id] = self.tick
            beats.append(beat)
        return beats

    def detect_failures(self, timeout_ticks: int | None = None) -> list[int]:
        """Two-phase detection; returns ids that became Failed on this call.

        A gap longer than the timeout makes a node Suspect, longer than
        twice the timeout makes it Failed and triggers failover of its
        pending work. Suspects whose heartbeats resume return to Alive.
        """
        timeout = self.timeout_ticks if timeout_ticks is None else timeout_ticks
        if timeout < 1:
            raise InvalidArgument(f"timeout_ticks must be >= 1, got {timeout}")
        newly_failed = []
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            if node.liveness is Liveness.FAILED:
                continue
            gap = self.tick - self._last_heartbeat[node_id]
            if gap > 2 * timeout:
                node.liveness = Liveness.FAILED
                newly_failed.append(node_id)
            elif gap > timeout:
                node.liveness = Liveness.SUSPECT
            else:
                node.liveness = Liveness.ALIVE
        self._failover_log = []
        for node_id in newly_failed:
            self._failover_log.extend(self._failover(node_id))
        return newly_failed

    def last_failover_events(self) -> list[tuple[int, int | None]]:
        """(msg_id, new node or None if dropped) pairs from the last detection."""
        return list(self._failover_log)

    def _failover(self, failed_id: int) -> list[tuple[int, int | None]]:
        events = []
        for env in self.nodes[failed_id].drain_inbox():
            try:
                request = json.loads(env.payload)
                modality = Modality(request["modality"])
                target = self.balance_load(modality)
            except (ValueError, KeyError, NodeUnreachable):
                events.append((env.msg_id, None))  # nothing can serve it
                continue
            rerouted = MessageEnvelope(
                msg_id=env.msg_id, source=env.source, dest=target,
                payload=env.payload, qos=env.qos, version=env.version,
            )
            self.route(rerouted)
            events.append((env.msg_id, target))
        return events

    # -- messaging ------------------------------------------------------------

    def route(self, env: MessageEnvelope) -> None:
        """Deliver an envelope through the wire codec to the dest inbox."""
        dest = self.node(env.dest)
        if dest.liveness is Liveness.FAILED:
            raise NodeUnreachable(f"node {env.dest} has failed")
        dest.deliver(decode(encode(env)))

    def submit_input(self, modality: Modality, tag: str, qos: QoS = QoS.REALTIME) -> tuple[int, int]:
        """Balance, wrap, and route one modality work item; (node, msg_id)."""
        target = self.balance_load(modality)
        payload = json.dumps(
            {"modality": modality.value, "tag": tag}, sort_keys=True
        ).encode("utf-8")
        env = MessageEnvelope(
            msg_id=next(self._next_msg_id), source=COORDINATOR_ID, dest=target,
            payload=payload, qos=qos, version=CURRENT_VERSION,
        )
        self.route(env)
        return target, env.msg_id

    def process_step(self) -> list[tuple[int, Modality, str, str]]:
        """Let every non-failed node process one inbox item.

        Returns (node, modality, tag, label) records in node-id order.
        """
        records = []
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            if node.liveness is Liveness.FAILED or node.silenced:
                continue
            env = node.pop_next()
            if env is None:
                continue
            request = json.loads(env.payload)
            modality = Modality(request["modality"])
            if modality not in node.modalities:
                raise InvalidArgument(
                    f"node {node_id} does not support {modality.value}"
                )
            tag = request["tag"]
            label, vec = modality_process(modality, tag.encode("utf-8"))
            node.processed.append([self.tick, modality.value, tag, label])
            node.last_outputs[modality] = (label, vec)
            records.append((node_id, modality, tag, label))
        return records

    # -- load balancing ---------------------------------------------------------

    def balance_load(self, modality: Modality) -> int:
        """Pick the non-failed supporter with the lowest predicted load.

        Ties break toward the lowest node id; identical metric histories
        therefore always give identical selections.
        """
        candidates = [
            node for node_id, node in sorted(self.nodes.items())
            if node.liveness is not Liveness.FAILED and modality in node.modalities
        ]
        if not candidates:
            raise NodeUnreachable(f"no live node supports {modality.value}")
        return min(candidates, key=lambda n: (n.predicted_load(), n.id)).id

    # -- checkpoints ---------------------------------------------------------

    def checkpoint_node(self, node_id: int) -> Checkpoint:
        """Snapshot a node's state and replicate the checkpoint to one peer."""
        node = self.node(node_id)
        seq = next(self._checkpoint_seq[node_id])
        chk = Checkpoint(node_id, seq, _serialize_state(node.state_dict()))
        peers = [
            n for nid, n in sorted(self.nodes.items())
            if nid != node_id and n.liveness is not Liveness.FAILED
        ]
        if not peers:
            raise NodeUnreachable("no peer available to replicate the checkpoint")
        peers[0].checkpoint_store[(node_id, seq)] = chk
        return chk

    def restore_node(self, chk: Checkpoint, target_id: int | None = None) -> Node:
        """Rebuild a node from a checkpoint, optionally onto a replacement id."""
        try:
            state = json.loads(chk.snapshot)
            modalities = frozenset(Modality(m) for m in state["modalities"])
            if state["node_id"] != chk.node_id:
                raise ValueError("snapshot does not match checkpoint header")
        except (ValueError, KeyError, TypeError):
            raise InvalidArgument("unknown or corrupt checkpoint") from None
        node_id = chk.node_id if target_id is None else target_id
        node = Node(node_id, modalities)
        node.heartbeat_seq = state["heartbeat_seq"]
        for name, window in state["metrics"].items():
            for value in window:
                node._metrics[name].append(value)
        node.processed = [list(r) for r in state["processed"]]
        node.last_outputs = {
            Modality(m): (entry["label"], tuple(entry["tensor"]))
            for m, entry in state["last_outputs"].items()
        }
        self.nodes[node_id] = node
        self._last_heartbeat[node_id] = self.tick
        if node_id not in self._checkpoint_seq:
            self._checkpoint_seq[node_id] = itertools.count(1)
        return node

    # -- fusion inputs ---------------------------------------------------------

    def collect_outputs(self) -> dict[Modality, tuple[str, tuple[float, ...]]]:
        """Most recent output per modality across non-failed nodes."""
        latest: dict[Modality, tuple[int, int, str, tuple[float, ...]]] = {}
        for node_id in sorted(self.nodes):
            node = self.nodes[node_id]
            if node.liveness is Liveness.FAILED:
                continue
            for record in node.processed:
                tick, modality_value, _tag, label = record
                modality = Modality(modality_value)
                vec = node.last_outputs.get(modality, (label, ()))[1]
                current = latest.get(modality)
                if current is None or tick >= current[0]:
                    latest[modality] = (tick, node_id, label, vec)
        return {m: (label, vec) for m, (_t, _n, label, vec) in latest.items()}
