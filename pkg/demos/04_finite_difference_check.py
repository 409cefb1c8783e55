"""Compare analytic rates against finite differences of poses alone."""
import numpy as np

from manipsim.chain_model import compile_chain
from manipsim.kinematics import evaluate_chain, finite_difference_oracle
from manipsim.randomizer import randomize_config

worst = dict(omega=0.0, v=0.0, alpha=0.0, a=0.0)
for seed in range(10):
    dh, jt, bt = randomize_config(seed)
    plan = compile_chain(dh)
    for t in (0.3, 2.1, 6.4):
        analytic = evaluate_chain(plan, jt, bt, t)
        numeric = finite_difference_oracle(plan, jt, bt, t, h=1e-4)
        for name, s in analytic.items():
            for key in worst:
                err = np.abs(getattr(s, key) - numeric[name][key]).max()
                worst[key] = max(worst[key], err)

# with h = 1e-4 expect rate errors near 1e-7 and acceleration errors near 1e-6
for key, err in worst.items():
    print(f"max |{key} error| = {err:.2e}")
