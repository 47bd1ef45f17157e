"""Append-only event trace."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Iterable


class Rec(str, Enum):
    TX_START = "TxStart"
    TX_END = "TxEnd"
    RX_DELIVERED = "RxDelivered"
    RX_COLLIDED = "RxCollided"
    CBF_ARM = "CbfArm"
    CBF_CANCEL = "CbfCancel"
    CBF_KEEP = "CbfKeep"
    CBF_FORWARD = "CbfForward"
    CBF_DROP = "CbfDrop"
    DPL_HIT = "DplHit"
    QUEUE_DROP = "QueueDrop"
    GATE_WAIT = "GateWait"


ALL = frozenset(Rec)
# enough for the metrics pipeline without per-reception records
PROTOCOL = frozenset({Rec.TX_START, Rec.CBF_FORWARD, Rec.QUEUE_DROP, Rec.CBF_DROP})


@dataclass(frozen=True, slots=True)
class TraceRecord:
    t: int
    node: int
    kind: Rec
    message: tuple[int, int] | None = None
    x: float | None = None
    info: object = None


class Trace:
    def __init__(self, kinds: Iterable[Rec] = ALL):
        self.kinds = frozenset(kinds)
        self.records: list[TraceRecord] = []

    def wants(self, kind: Rec) -> bool:
        return kind in self.kinds

    def emit(self, t: int, node: int, kind: Rec, message=None, x=None, info=None) -> None:
        if kind in self.kinds:
            self.records.append(TraceRecord(t, node, kind, message, x, info))

    def of(self, *kinds: Rec) -> list[TraceRecord]:
        return [r for r in self.records if r.kind in kinds]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t_us", "node", "kind", "source_id", "sn", "x", "info"])
            for r in self.records:
                src, sn = r.message if r.message else ("", "")
                x = "" if r.x is None else f"{r.x:.3f}"
                w.writerow([r.t, r.node, r.kind.value, src, sn, x, "" if r.info is None else r.info])
