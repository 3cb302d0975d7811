"""Packet-log parsing, sequence-number loss recovery and distance binning."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .errors import ParseError
from .model import CensoredBin

HEADER = ["seq", "distance_m", "rssi_dbm"]


@dataclass(frozen=True)
class PacketRecord:
    seq: int
    distance_m: float
    rssi_dbm: float | None  # None marks an explicitly logged loss

    @property
    def received(self) -> bool:
        return self.rssi_dbm is not None


@dataclass(frozen=True)
class LossEvent:
    seq: int
    distance_m: float


def parse_packet_log(stream) -> list[PacketRecord]:
    """Parse a packet-log CSV. Comment lines start with '#'. Malformed rows
    are collected and reported together with their line numbers."""
    records = []
    bad = []
    seen = {}
    header_ok = False
    for lineno, row in enumerate(csv.reader(stream), start=1):
        if not row or (row[0].lstrip().startswith("#")):
            continue
        if not header_ok:
            if [c.strip() for c in row] != HEADER:
                raise ParseError(
                    f"line {lineno}: expected header {','.join(HEADER)}",
                    lines=[lineno])
            header_ok = True
            continue
        try:
            if len(row) != 3:
                raise ValueError("wrong field count")
            seq = int(row[0])
            dist = float(row[1])
            if not (math.isfinite(dist) and dist > 0):
                raise ValueError("distance must be positive")
            rssi = float(row[2]) if row[2].strip() != "" else None
        except ValueError:
            bad.append(lineno)
            continue
        if seq in seen:
            bad.extend([seen[seq], lineno])
            continue
        seen[seq] = lineno
        records.append(PacketRecord(seq, dist, rssi))
    if not header_ok:
        raise ParseError("missing header row", lines=[1])
    if bad:
        raise ParseError(
            f"malformed or duplicate rows at lines {sorted(set(bad))}",
            lines=sorted(set(bad)))
    return records


def infer_losses(records: list[PacketRecord]) -> list[LossEvent]:
    """Each gap in the sequence numbers yields that many loss events, at
    distances interpolated between the surrounding known packets."""
    if not records:
        raise ValueError("need at least one record")
    ordered = sorted(records, key=lambda r: r.seq)
    losses = []
    for a, b in zip(ordered, ordered[1:]):
        gap = b.seq - a.seq
        for s in range(a.seq + 1, b.seq):
            frac = (s - a.seq) / gap
            d = a.distance_m + frac * (b.distance_m - a.distance_m)
            losses.append(LossEvent(seq=s, distance_m=d))
    return losses


def bin_by_ld(records: list[PacketRecord], losses: list[LossEvent],
              ld_step: float, c_db: float) -> list[CensoredBin]:
    """Group everything into log-distance bins of width ld_step.

    Received samples at or below c_db count as censored, matching the
    left-censoring model. Bin 'ld' is the lower edge of the cell.
    """
    if ld_step <= 0:
        raise ValueError("ld_step must be > 0")

    def idx(distance_m):
        ld = 10.0 * math.log10(distance_m)
        return math.floor(ld / ld_step + 1e-9)

    observed, censored = {}, {}
    for rec in records:
        i = idx(rec.distance_m)
        if rec.received and rec.rssi_dbm > c_db:
            observed.setdefault(i, []).append(10.0 ** (rec.rssi_dbm / 10.0))
        else:
            censored[i] = censored.get(i, 0) + 1
    for loss in losses:
        i = idx(loss.distance_m)
        censored[i] = censored.get(i, 0) + 1

    bins = []
    for i in sorted(set(observed) | set(censored)):
        obs = observed.get(i, [])
        r1 = censored.get(i, 0)
        bins.append(CensoredBin(ld=i * ld_step, observed=obs,
                                n_total=len(obs) + r1, r1=r1, c_db=c_db))
    return bins
