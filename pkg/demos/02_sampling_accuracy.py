"""How good is one sample every n+1 writes?

The levelers never see true per-frame write counts; they see counts
estimated from periodic samples, the software model of a performance
counter that overflows after n writes.  This script feeds the same
skewed write pattern through samplers of different rates and compares
the estimated per-frame shares against the exact ones.
"""

import numpy as np

from nvmwear import WriteSampler

FRAMES = 16
WRITES = 400000

rng = np.random.default_rng(7)
# frame popularity falls off geometrically: frame 0 takes ~30% of writes
weights = 0.7 ** np.arange(FRAMES)
weights /= weights.sum()
stream = rng.choice(FRAMES, size=WRITES, p=weights)
exact = np.bincount(stream, minlength=FRAMES) / WRITES

print("frame   exact  " + "".join("  n=%-6d" % n for n in (10, 100, 1000)))
samplers = {}
for n in (10, 100, 1000):
    s = WriteSampler(n, FRAMES)
    for f in stream.tolist():
        s.observe_write(f)
    samplers[n] = s

for f in range(8):
    row = "  %2d   %6.3f" % (f, exact[f])
    for n, s in samplers.items():
        row += "    %6.3f" % s.estimate_share(f)
    print(row)

print()
for n, s in samplers.items():
    est = s.estimates / s.samples_taken
    err = np.abs(est - exact).max()
    print("n=%-5d %6d samples, worst per-frame share error %.4f"
          % (n, s.samples_taken, err))

print()
print("Sparser sampling costs accuracy slowly: even 1 sample per 1001")
print("writes keeps hot frames clearly separated from cold ones, which")
print("is all the coarse leveler needs to pick its victims.")
