"""A batch of randomized arms, and what the randomizer draws from."""
import collections

import numpy as np

from manipsim.randomizer import RandomRanges, randomize_config

# %% Narrow the ranges: mostly revolute links, longer links.
ranges = RandomRanges(a_range=(0.85, 0.9), link_type_weights=(0.1, 0.7, 0.2))

counts = collections.Counter()
for seed in range(200):
    dh, _, _ = randomize_config(seed, ranges)
    counts.update(k.letter for k in dh.link_types)
print("link type counts over 200 arms:", dict(counts))

# %% A seed fixes everything, bit for bit.
a = randomize_config(7, ranges)[0].as_array()
b = randomize_config(7, ranges)[0].as_array()
print("same seed, same table:", np.array_equal(a, b))
print(a.round(3))
