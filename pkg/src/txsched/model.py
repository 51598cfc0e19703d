"""Problem instances and the epoch decomposition.

An instance is a set of packets, each carrying a number of bits and a
time window [arrival, deadline] during which those bits must leave the
transmitter.  All later machinery works on the *epoch grid*: the sorted,
deduplicated set of every arrival and deadline instant.  Between two
adjacent grid instants the set of transmittable packets is constant,
which makes the epoch the natural unit for time bookkeeping.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

# Instants closer than this collapse to a single grid point.  Window
# containment and segment checks reuse the same tolerance so that the
# grid and the schedules built on it stay consistent.
INSTANT_MERGE_TOL = 1e-9


class EmptyInstance(ValueError):
    """An instance must contain at least one packet."""


class InstanceFormatError(ValueError):
    """Instance JSON is structurally invalid."""


class MalformedPacket(ValueError):
    """A packet violates its basic invariants; identifies the offender."""

    def __init__(self, packet_id, reason: str):
        self.packet_id = packet_id
        self.reason = reason
        super().__init__(f"packet {packet_id!r}: {reason}")


@dataclass(frozen=True)
class Packet:
    """One transmission job: `bits` must leave within [arrival, deadline]."""

    id: int
    bits: float
    arrival: float
    deadline: float

    def __post_init__(self):
        if not self.bits > 0:
            raise MalformedPacket(self.id, f"bits must be positive, got {self.bits}")
        if not self.deadline > self.arrival:
            raise MalformedPacket(
                self.id,
                f"deadline {self.deadline} must exceed arrival {self.arrival}",
            )

    @property
    def window(self) -> tuple[float, float]:
        return (self.arrival, self.deadline)

    @property
    def window_length(self) -> float:
        return self.deadline - self.arrival


@dataclass(frozen=True)
class Instance:
    """A normalized packet set: sorted by arrival, ids dense 1..N,
    earliest arrival at 0, horizon = latest deadline.

    `id_map` translates the dense ids back to the ids the caller
    supplied (new id -> original id); it does not participate in
    equality.
    """

    packets: tuple[Packet, ...]
    horizon: float
    id_map: dict[int, int] = field(compare=False, repr=False, default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.packets)

    def bits(self) -> np.ndarray:
        return np.array([p.bits for p in self.packets])

    def arrivals(self) -> np.ndarray:
        return np.array([p.arrival for p in self.packets])

    def deadlines(self) -> np.ndarray:
        return np.array([p.deadline for p in self.packets])


@dataclass(frozen=True)
class EpochDecomposition:
    """The instant grid and the two containment set families.

    Epoch indices are 1-based throughout (epoch j covers
    [instants[j-1], instants[j]]), matching packet ids, so
    `epoch_sets_per_packet[i-1]` is the epoch set of packet i and
    `packet_sets_per_epoch[j-1]` is the packet set of epoch j.
    """

    instants: tuple[float, ...]
    epochs: tuple[tuple[float, float], ...]
    epoch_sets_per_packet: tuple[frozenset[int], ...]
    packet_sets_per_epoch: tuple[frozenset[int], ...]

    @property
    def m(self) -> int:
        return len(self.epochs)

    def epoch_lengths(self) -> np.ndarray:
        return np.diff(np.array(self.instants))

    def live_epochs(self) -> list[int]:
        """1-based indices of epochs some packet can transmit in."""
        return [j for j in range(1, self.m + 1) if self.packet_sets_per_epoch[j - 1]]

    def live_region(self) -> list[tuple[float, float]]:
        """Union of live epochs, merged into maximal intervals."""
        out: list[tuple[float, float]] = []
        for j in self.live_epochs():
            s, e = self.epochs[j - 1]
            if out and abs(out[-1][1] - s) <= INSTANT_MERGE_TOL:
                out[-1] = (out[-1][0], e)
            else:
                out.append((s, e))
        return out


def normalize_instance(raw_packets) -> Instance:
    """Sort, shift, and relabel packets into canonical form.

    Packets are sorted by (arrival, deadline, id), all times are shifted
    so the earliest arrival is 0, and ids are reassigned 1..N in sorted
    order; the original ids are kept in the returned instance's id_map.
    """
    packets = list(raw_packets)
    if not packets:
        raise EmptyInstance("no packets")
    for p in packets:
        if not p.bits > 0:
            raise MalformedPacket(p.id, f"bits must be positive, got {p.bits}")
        if not p.deadline > p.arrival:
            raise MalformedPacket(
                p.id, f"deadline {p.deadline} must exceed arrival {p.arrival}"
            )
        if p.deadline - p.arrival < INSTANT_MERGE_TOL:
            raise MalformedPacket(
                p.id,
                f"window [{p.arrival}, {p.deadline}] is shorter than the "
                f"{INSTANT_MERGE_TOL} instant-merge tolerance",
            )
    packets.sort(key=lambda p: (p.arrival, p.deadline, p.id))
    t0 = packets[0].arrival
    shifted = [
        Packet(i + 1, p.bits, p.arrival - t0, p.deadline - t0)
        for i, p in enumerate(packets)
    ]
    id_map = {i + 1: p.id for i, p in enumerate(packets)}
    horizon = max(p.deadline for p in shifted)
    return Instance(tuple(shifted), horizon, id_map)


def decompose(instance: Instance) -> EpochDecomposition:
    """Build the instant grid, epochs, and the C/F set families."""
    raw = np.sort(
        np.concatenate([instance.arrivals(), instance.deadlines()])
    )
    reps: list[float] = []
    for v in raw:
        if not reps or v - reps[-1] > INSTANT_MERGE_TOL:
            reps.append(float(v))
    grid = np.array(reps)
    epochs = tuple((reps[j], reps[j + 1]) for j in range(len(reps) - 1))
    m = len(epochs)
    n = instance.n

    # Map a raw instant to its grid index: the grid point at or just
    # below it (the cluster start), which is within the merge tolerance.
    def gidx(v: float) -> int:
        return int(np.searchsorted(grid, v, side="right")) - 1

    c_sets: list[frozenset[int]] = []
    f_lists: list[set[int]] = [set() for _ in range(m)]
    for p in instance.packets:
        a, d = gidx(p.arrival), gidx(p.deadline)
        epochs_of_p = frozenset(range(a + 1, d + 1))  # 1-based epoch ids
        c_sets.append(epochs_of_p)
        for j in epochs_of_p:
            f_lists[j - 1].add(p.id)
    return EpochDecomposition(
        instants=tuple(reps),
        epochs=epochs,
        epoch_sets_per_packet=tuple(c_sets),
        packet_sets_per_epoch=tuple(frozenset(s) for s in f_lists),
    )


def is_non_fifo(instance: Instance) -> set[int]:
    """Ids of packets whose window is strictly nested inside an
    earlier-arriving packet's window (deadline order inversion)."""
    a = instance.arrivals()
    d = instance.deadlines()
    out = set()
    for i, p in enumerate(instance.packets):
        if np.any((a < p.arrival) & (d > p.deadline)):
            out.add(p.id)
    return out


def instance_to_json(instance: Instance, noise_power: float = 1.0) -> str:
    """Serialize to the on-disk instance format."""
    doc = {
        "noise_power": noise_power,
        "packets": [
            {"id": p.id, "bits": p.bits, "arrival": p.arrival, "deadline": p.deadline}
            for p in instance.packets
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def instance_from_json(text: str) -> tuple[Instance, float]:
    """Parse and normalize an instance document.

    Returns the instance together with the channel noise power
    (defaulting to 1.0 when absent).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "packets" not in doc:
        raise InstanceFormatError("instance document must contain a 'packets' list")
    noise_power = doc.get("noise_power", 1.0)
    if not isinstance(noise_power, (int, float)) or noise_power <= 0:
        raise InstanceFormatError(f"noise_power must be positive, got {noise_power}")
    raw = []
    for k, entry in enumerate(doc["packets"]):
        try:
            raw.append(
                Packet(
                    id=entry["id"],
                    bits=float(entry["bits"]),
                    arrival=float(entry["arrival"]),
                    deadline=float(entry["deadline"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise InstanceFormatError(f"packet entry {k} is malformed: {exc}") from exc
    return normalize_instance(raw), float(noise_power)
