"""Hand-checked worked example of the penalized transport variant.

Two short point sequences, their printed Euclidean cost table at four
decimals, separating penalties for the active rectangle rows 1..2 x
cols 1..2, and the tabulated penalized costs. Used by the transport,
CLI, and acceptance tests.
"""

import numpy as np

V_POINTS = [(1.0, 0.1), (2.0, 0.2), (3.0, 0.3)]
W_POINTS = [(1.0, 0.2), (3.0, 0.8), (5.0, 0.6), (6.0, 0.7)]

ACTIVE_T = 2
ACTIVE_K = 2

NU = np.array([2.4839, 1.4893, 0.4950])
MU = np.array([1.4875, 0.0, 1.5070, 2.5014])

C_TABLE = np.array(
    [
        [0.1000, 2.1190, 4.0311, 5.0359],
        [1.0000, 1.1662, 3.0265, 4.0311],
        [2.0025, 0.5000, 2.0224, 3.0265],
    ]
)

D_TABLE = np.array(
    [
        [-3.8714, -0.3650, 0.0402, 0.0505],
        [-1.9768, -0.3231, 0.0302, 0.0404],
        [0.0200, 0.0050, 0.0204, 0.0301],
    ]
)

# the tabulated optimal plan: all mass in the top-left cell
PLAN_TABLE = np.zeros((3, 4))
PLAN_TABLE[0, 0] = 0.25

# entries of D_TABLE that disagree with C - nu - mu by a full 1e-4 print
# unit: the table was evidently produced from higher-precision penalties
# than the ones printed alongside it
D_INCONSISTENT_CELLS = [(0, 1), (0, 3)]
