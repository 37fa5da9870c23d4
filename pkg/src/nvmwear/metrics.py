"""Endurance and lifetime metrics over per-line wear counts.

Definitions over a reporting region (zero-count lines included):

    AE  achieved endurance      mean(counts) / max(counts)
    WO  write overhead          (leveled_total - baseline_total) / baseline_total
    EI  endurance improvement   AE_analyzed / AE_baseline
    LI  lifetime improvement    EI / (WO + 1)
    NE  normalized endurance    AE / (WO + 1)

AE is 1.0 for perfectly uniform wear; NE folds the extra copy traffic a
leveler spends back into its endurance gain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .errors import MetricsError


def achieved_endurance(counts) -> float:
    arr = np.asarray(counts, dtype=np.int64)
    if arr.size == 0:
        raise MetricsError("empty region")
    peak = int(arr.max())
    if peak == 0:
        raise MetricsError("all-zero region has no achieved endurance")
    # single division keeps AE exactly scale-invariant
    return int(arr.sum()) / (arr.size * peak)


def write_overhead(baseline_total: int, leveled_total: int) -> float:
    if baseline_total <= 0:
        raise MetricsError("baseline write total must be positive")
    if leveled_total < baseline_total:
        raise MetricsError("leveled total below baseline total")
    return (leveled_total - baseline_total) / baseline_total


def endurance_improvement(ae_analyzed: float, ae_baseline: float) -> float:
    if ae_baseline <= 0:
        raise MetricsError("baseline AE must be positive")
    return ae_analyzed / ae_baseline


def lifetime_improvement(ei: float, wo: float) -> float:
    return ei / (wo + 1.0)


def normalized_endurance(ae: float, wo: float) -> float:
    return ae / (wo + 1.0)


@dataclass
class MetricsReport:
    ae: float
    wo: float
    ne: float
    ei: Optional[float] = None
    li: Optional[float] = None
    totals: Optional[Dict[str, int]] = None


# ----------------------------------------------------------------------
# histogram export

def export_histogram(counts: Dict[int, int], fmt: str = "csv") -> bytes:
    """Serialize a line-index -> count map.

    csv: header, rows sorted by line index, '#total' trailer.
    json: object with a `lines` array of [index, count] pairs and totals.
    """
    items = sorted(counts.items())
    total = sum(c for _, c in items)
    if fmt == "csv":
        out = ["line_index,count"]
        out.extend("%d,%d" % (idx, c) for idx, c in items)
        out.append("#total,%d" % total)
        out.append("")
        return "\n".join(out).encode("utf-8")
    if fmt == "json":
        doc = {"lines": [[idx, c] for idx, c in items],
               "totals": {"lines": len(items), "writes": total}}
        return (json.dumps(doc, indent=1) + "\n").encode("utf-8")
    raise MetricsError("unknown histogram format %r" % fmt)


def parse_histogram_csv(data: bytes) -> Dict[int, int]:
    counts: Dict[int, int] = {}
    lines = data.decode("utf-8").splitlines()
    for ln in lines[1:]:
        if not ln or ln.startswith("#"):
            continue
        idx, c = ln.split(",")
        counts[int(idx)] = int(c)
    return counts


def log2_bins(counts) -> Dict[int, int]:
    """Bin counts as floor(log2(count) + 1), with bin 0 for zero counts."""
    bins: Dict[int, int] = {}
    for c in counts:
        c = int(c)
        b = 0 if c == 0 else c.bit_length()
        bins[b] = bins.get(b, 0) + 1
    return dict(sorted(bins.items()))
