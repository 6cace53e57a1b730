#!/usr/bin/env python3
"""The minimum-L1 design program behind the linear sampling rule.

To learn the reward difference along y = x_i - x_j fastest, represent y as
a combination of arm contexts with minimal total weight: the absolute
weights, normalized, give the fraction of pulls each arm deserves. The arm
whose current pull count lags its share the most is the informative one.
"""

import numpy as np

from fedpex import informative_arm_lp, solve_l1

# three arms in the plane: two axes and a diagonal shortcut
contexts = np.array([
    [1.0, 0.0],
    [0.0, 1.0],
    [0.8, 0.6],
])

print("separating arms 1 and 2 (y = x1 - x2):")
y = contexts[0] - contexts[1]
sol = solve_l1(contexts, y)
print("  weights w* :", np.round(sol.w, 6))
print("  mass rho   :", round(sol.rho, 6))
print("  design p*  :", np.round(sol.p, 6))

print("\nwho to pull as counts accumulate (counts -> chosen arm):")
for counts in ([1, 1, 1], [5, 1, 1], [5, 5, 1], [8, 6, 0]):
    arm = informative_arm_lp(counts, sol.p)
    print(f"  T={counts} -> arm {arm}")

print("\na direction served best by the diagonal arm (y = x3):")
sol3 = solve_l1(contexts, contexts[2])
print("  weights w* :", np.round(sol3.w, 6))
print("  design p*  :", np.round(sol3.p, 6))
