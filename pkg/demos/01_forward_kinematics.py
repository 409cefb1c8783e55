"""Forward kinematics of a small modular arm, step by step."""
import numpy as np

from manipsim.chain_model import compile_chain
from manipsim.kinematics import evaluate_chain, fk_pose
from manipsim.trajectory import BaseOscTable, JointOscTable

np.set_printoptions(precision=4, suppress=True)
P2 = np.pi / 2

# %% A chain table: alpha, a, theta, d, type (0 empty, 1 revolute, 2 prismatic).
# Rows 1-6 are links, row 7 the tool, row 8 the base.
dh = np.array([
    [0, 0.85, 0, 0.20, 1],
    [P2, 0.82, 0, 0.15, 1],
    [0, 0.80, P2, 0.25, 2],
    [0, 0.00, 0, 0.00, 0],
    [0, 0.00, 0, 0.00, 0],
    [0, 0.00, 0, 0.00, 0],
    [0, 0.30, 0, 0.10, 1],
    [0, 0.00, 0, 0.00, 1],
])
plan = compile_chain(dh)
print("link types:", [k.letter for k in plan.table.link_types])
print("elementary steps:", len(plan.elements))
for el in plan.elements[:8]:
    print("  ", el.kind.name, round(el.value, 4), "link", el.link)

# %% Pure pose composition with hand-picked joint values.
poses = fk_pose(plan, {1: 0.4, 2: -0.3, 3: 0.12})
print("tooltip position:", poses["tooltip"].p)

# %% The same chain, driven by sine trajectories, with rates and accelerations.
jt = np.zeros((8, 5))
jt[:3] = [[0.5, 0.0, 0.0, 1.0, 0.0],
          [0.3, 0.0, 0.1, 0.7, 1.0],
          [0.0, 0.1, 0.05, 1.5, 0.0]]
bt = np.zeros((2, 4))
states = evaluate_chain(plan, JointOscTable(jt), BaseOscTable(bt), t=0.8)
for name in ("link1_imu_end", "link3_imu_mid", "tooltip"):
    s = states[name]
    print(f"{name:14s} p={s.p} omega={s.omega} a={s.a}")
