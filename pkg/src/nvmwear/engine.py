"""Deterministic trace replay driving both wear-leveling mechanisms.

Event order per write: stack translation (fine leveling on), page-table
translation, wear recording, sampling.  When a write is sampled the
coarse leveler sees the sampled frame first, then the fine leveler runs
one relocation step.  Leveler copy traffic goes straight to the wear map
and is never sampled.  Remaps and relocations only happen between
events, so writes are processed in whole sampling periods: within one
period the page table and the stack shift are constant, which lets the
period be translated and charged as an array batch.

A replay is a pure function of (trace, config): identical inputs give
identical wear maps, logs, and reports.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .coarse import CoarseWearLeveler
from .errors import ConfigError, UnmappedPageError
from .memspace import MemorySpace
from .metrics import (MetricsReport, achieved_endurance, endurance_improvement,
                      lifetime_improvement, normalized_endurance,
                      write_overhead)
from .sampler import WriteSampler
from .stack import StackState, relocate_step
from .trace import Trace

_BASELINE_CHUNK = 1 << 20


@dataclass(frozen=True)
class SimConfig:
    sample_interval_n: int = 1000
    remap_threshold_t: int = 64
    stack_step: int = 64
    enable_coarse: bool = True
    enable_fine: bool = True
    pool_pages: Optional[int] = None
    fixed_valid_stack: int = 4096
    seed: int = 0

    def validate(self):
        if self.sample_interval_n < 1:
            raise ConfigError("sample_interval_n must be >= 1")
        if self.remap_threshold_t < 1:
            raise ConfigError("remap_threshold_t must be >= 1")
        if self.stack_step <= 0 or self.stack_step % 64:
            raise ConfigError("stack_step must be a positive multiple of 64")
        if self.fixed_valid_stack < 0:
            raise ConfigError("fixed_valid_stack must be >= 0")

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Dict) -> "SimConfig":
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigError("unknown config keys: %s" % ", ".join(sorted(extra)))
        return cls(**d)


@dataclass
class RunResult:
    space: MemorySpace
    config: SimConfig
    totals: Dict[str, int]
    sample_log: List[Tuple[int, int]] = field(default_factory=list)
    remap_log: List[Tuple[int, int, int, int, int]] = field(default_factory=list)
    reloc_log: List[Tuple[int, int, int, int, int]] = field(default_factory=list)
    sampler: Optional[WriteSampler] = None
    stack_state: Optional[StackState] = None
    coarse_leveler: Optional[CoarseWearLeveler] = None
    report: Optional[MetricsReport] = None

    @property
    def wear(self) -> np.ndarray:
        return self.space.wear


def replay(trace: Trace, config: SimConfig) -> RunResult:
    config.validate()
    trace.validate()
    layout = trace.layout
    if config.pool_pages is not None and layout.total_pages > config.pool_pages:
        raise ConfigError("layout needs %d pages but the pool allows %d"
                          % (layout.total_pages, config.pool_pages))
    space = MemorySpace(layout)
    stack_seg = layout.segment("stack")
    fine = config.enable_fine and stack_seg is not None
    coarse = config.enable_coarse
    sampling = coarse or fine

    kinds = trace.kinds
    w_pos = np.flatnonzero(kinds == 0)
    addrs_w = trace.addrs[w_pos]
    values_w = trace.values[w_pos]
    has_value_w = trace.has_value[w_pos]
    s_pos = np.flatnonzero(kinds == 1)
    sp_vals = trace.addrs[s_pos]
    n_writes = len(addrs_w)
    n_sp = len(s_pos)

    sampler = WriteSampler(config.sample_interval_n, space.n_pages) \
        if sampling else None
    leveler = CoarseWearLeveler(space, config.remap_threshold_t) \
        if coarse else None
    st = None
    if fine:
        if n_sp:
            sp0 = stack_seg.end
        else:
            u0 = min(config.fixed_valid_stack,
                     stack_seg.size - config.stack_step)
            sp0 = stack_seg.end - u0
        st = StackState(region_base=stack_seg.start,
                        region_size=stack_seg.size, sp=sp0,
                        step=config.stack_step,
                        reloc_interval=config.sample_interval_n + 1)

    frames = space.frames
    wear = space.wear
    image = space.image
    has_word = space.has_word
    base = space.base
    lpp = space.lines_per_page
    pshift = space.page_shift
    lshift = space.line_shift
    lmask = lpp - 1
    n_lines = space.n_lines
    s_lo = stack_seg.start if stack_seg is not None else 0
    s_hi = stack_seg.end if stack_seg is not None else 0

    sample_log: List[Tuple[int, int]] = []
    remap_log: List[Tuple[int, int, int, int, int]] = []
    reloc_log: List[Tuple[int, int, int, int, int]] = []
    stack_copy_lines = 0
    chunk = (config.sample_interval_n + 1) if sampling else _BASELINE_CHUNK
    si = 0
    cur_sp = st.sp if fine else 0

    start = 0
    while start < n_writes:
        end = min(start + chunk, n_writes)
        a = addrs_w[start:end]
        if fine and st.shift:
            in_stack = (a >= s_lo) & (a < s_hi)
            v = a - st.shift * in_stack
        else:
            v = a
        vp = (v - base) >> pshift
        f = frames[vp]
        if f.min() < 0:
            bad = int(v[f < 0][0])
            raise UnmappedPageError("address 0x%x hits an unmapped page" % bad)
        lines = f * lpp + ((v >> lshift) & lmask)
        wear += np.bincount(lines, minlength=n_lines)

        hv = has_value_w[start:end]
        any_values = bool(hv.any())
        touched = has_word[lines]
        if any_values or touched.any():
            need = hv | touched
            if any_values:
                need |= np.isin(lines, lines[hv])
            idx = np.flatnonzero(need)
            for ln, val, carries in zip(lines[idx].tolist(),
                                        values_w[start:end][idx].tolist(),
                                        hv[idx].tolist()):
                if carries:
                    image[ln] = val
                    has_word[ln] = True
                elif has_word[ln]:
                    del image[ln]
                    has_word[ln] = False

        if sampling and end - start == chunk:
            tick_pos = w_pos[end - 1]
            while si < n_sp and s_pos[si] < tick_pos:
                cur_sp = int(sp_vals[si])
                si += 1
            frame = int(f[-1])
            sampler.record_tick(frame)
            sample_log.append((end, frame))
            if coarse:
                request = leveler.on_sample(frame)
                if request is not None:
                    result = leveler.perform_remap(request)
                    if result is not None:
                        remap_log.append((end,) + result)
            if fine:
                st.sp = cur_sp
                wraps_before = st.wraps
                copied = relocate_step(st, space)
                stack_copy_lines += copied
                reloc_log.append((end, st.shift, st.valid_bytes, copied,
                                  1 if st.wraps > wraps_before else 0))
        start = end

    coarse_lines = leveler.copy_lines if coarse else 0
    totals = {
        "app_writes": n_writes,
        "coarse_copy_lines": coarse_lines,
        "stack_copy_lines": stack_copy_lines,
        "total_writes": n_writes + coarse_lines + stack_copy_lines,
        "samples": sampler.samples_taken if sampling else 0,
        "remaps": leveler.remaps if coarse else 0,
        "relocations": st.relocations if fine else 0,
        "wraps": st.wraps if fine else 0,
    }

    report = None
    if n_writes:
        region = space.region_lines()
        ae = achieved_endurance(wear[region])
        wo = (totals["total_writes"] - n_writes) / n_writes
        report = MetricsReport(ae=ae, wo=wo,
                               ne=normalized_endurance(ae, wo),
                               totals=dict(totals))
    return RunResult(space=space, config=config, totals=totals,
                     sample_log=sample_log, remap_log=remap_log,
                     reloc_log=reloc_log, sampler=sampler, stack_state=st,
                     coarse_leveler=leveler, report=report)


def paired_run(trace: Trace, config: SimConfig
               ) -> Tuple[RunResult, RunResult, MetricsReport]:
    """Replay a trace twice, leveling off then on, and compare.

    The baseline run uses the identity pipeline (no sampling, no copies),
    so its wear map is exactly the trace's per-line aggregation.
    """
    baseline_cfg = replace(config, enable_coarse=False, enable_fine=False)
    baseline = replay(trace, baseline_cfg)
    leveled = replay(trace, config)
    region = leveled.space.region_lines()
    ae_base = achieved_endurance(baseline.wear[region])
    ae_lev = achieved_endurance(leveled.wear[region])
    wo = write_overhead(baseline.totals["total_writes"],
                        leveled.totals["total_writes"])
    ei = endurance_improvement(ae_lev, ae_base)
    report = MetricsReport(ae=ae_lev, wo=wo,
                           ne=normalized_endurance(ae_lev, wo),
                           ei=ei, li=lifetime_improvement(ei, wo),
                           totals={"baseline": baseline.totals["total_writes"],
                                   "leveled": leveled.totals["total_writes"]})
    return baseline, leveled, report


# ----------------------------------------------------------------------
# report document and log serialization

def report_dict(trace: Trace, config: SimConfig, baseline: RunResult,
                leveled: RunResult, paired: MetricsReport,
                trace_desc: Optional[Dict] = None) -> Dict:
    """Build the run report document written as report.json."""
    layout = trace.layout
    per_segment = {}
    for seg in layout.segments:
        counts = leveled.wear[leveled.space.region_lines(seg.name)]
        peak = int(counts.max())
        per_segment[seg.name] = {
            "AE": None if peak == 0 else achieved_endurance(counts),
            "max": peak,
            "mean": float(counts.mean()),
        }
    return {
        "config": {
            "trace": trace_desc or {},
            "layout": {
                "segments": [[s.name, "0x%x" % s.start, "0x%x" % s.end]
                             for s in layout.segments],
                "page_size": layout.page_size,
                "line_size": layout.line_size,
            },
            "sim": config.to_dict(),
        },
        "totals": {
            "baseline": baseline.totals["total_writes"],
            "leveled": leveled.totals["total_writes"],
            "copies": (leveled.totals["coarse_copy_lines"]
                       + leveled.totals["stack_copy_lines"]),
            "remaps": leveled.totals["remaps"],
            "relocations": leveled.totals["relocations"],
            "samples": leveled.totals["samples"],
        },
        "metrics": {
            "AE": paired.ae, "WO": paired.wo, "EI": paired.ei,
            "NE": paired.ne, "LI": paired.li,
        },
        "per_segment": per_segment,
    }


def sample_log_csv(result: RunResult) -> bytes:
    space = result.space
    fbase = space.base >> space.page_shift
    out = ["event_index,frame"]
    out.extend("%d,%d" % (idx, fbase + f) for idx, f in result.sample_log)
    out.append("")
    return "\n".join(out).encode("utf-8")


def remap_log_csv(result: RunResult) -> bytes:
    space = result.space
    fbase = space.base >> space.page_shift
    out = ["event_index,hot_page_hex,cold_page_hex,hot_frame,cold_frame"]
    out.extend("%d,0x%x,0x%x,%d,%d" % (idx, hp, cp, fbase + hf, fbase + cf)
               for idx, hp, cp, hf, cf in result.remap_log)
    out.append("")
    return "\n".join(out).encode("utf-8")


def relocation_log_csv(result: RunResult) -> bytes:
    out = ["event_index,shift_delta,valid_bytes,copied_lines,wrapped"]
    out.extend("%d,%d,%d,%d,%d" % row for row in result.reloc_log)
    out.append("")
    return "\n".join(out).encode("utf-8")
