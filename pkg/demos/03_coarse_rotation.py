"""Coarse page remapping: hot pages migrate around the frame pool.

A hotspot workload hammers a few data lines.  Without help those lines'
frames die first.  The coarse leveler watches sampled per-frame write
counts and, whenever a frame accumulates a threshold worth of samples,
exchanges its page with the least-written frame through a buffer frame.
The exchange costs three page copies, and the charged age keeps every
frame taking its turn as the migration target.
"""

import numpy as np

from nvmwear import SimConfig, gen_workload, make_layout, paired_run

layout = make_layout(text_pages=4, data_pages=40, bss_pages=8,
                     stack_pages=12)
trace = gen_workload("hotspot", 10**6, layout, seed=0)
config = SimConfig(sample_interval_n=100, remap_threshold_t=4,
                   enable_fine=False)

baseline, leveled, report = paired_run(trace, config)
lev = leveled.coarse_leveler

print("pool: %d pages + 1 buffer frame" % layout.total_pages)
print("samples taken : %6d (1 per %d writes)"
      % (leveled.totals["samples"], config.sample_interval_n + 1))
print("remaps        : %6d (x 192 copy line writes each)"
      % leveled.totals["remaps"])
print("write overhead: %6.2f%%" % (100 * report.wo))
lo, hi = lev.rebalance_check()
print("age spread    : %6d (bound 2t = %d)"
      % (hi - lo, 2 * config.remap_threshold_t))

# how often did each frame host the migrating hot page?
hosts = np.bincount([cold for _, _, _, _, cold in leveled.remap_log],
                    minlength=layout.total_pages + 1)
print("distinct cold-side frames: %d of %d"
      % (int((hosts > 0).sum()), layout.total_pages + 1))

print()
print("              baseline   leveled")
print("peak line wear %8d  %8d"
      % (baseline.wear.max(), leveled.wear.max()))
print("AE             %8.4f  %8.4f   (x%.1f)"
      % (report.ae / report.ei, report.ae, report.ei))
print("lifetime gain  ----      x%.1f after copy overhead" % report.li)
