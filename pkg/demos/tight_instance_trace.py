"""
The hard instance for the cardinality algorithm
===============================================

On this instance the optimum ``O`` has value 1, yet the cardinality algorithm
can be steered, through equally optimal LP solutions, onto distributions over
cyclic runs of the decoy set ``Y``.  The best set it ends with is worth about
``1/e``.
"""

import math

from submax import tightcase

###############################################################################
# Replay with k = 64.  Every round is checked against the predicted cyclic
# distribution; a mismatch would raise.

run = tightcase.adversarial_run(64)
for row in run.trace[::8] + [run.trace[-1]]:
    print(f"i={row.i:3d}  z={row.z:.4f}  case {row.case}  support {row.support:3d}  "
          f"best value {row.max_value:.4f}")

###############################################################################
# The final value against the bound, and f(O).

print(f"final {run.value:.4f}   1/e + 17/k = {math.exp(-1) + 17 / 64:.4f}   "
      f"f(O) = {tightcase.tight_f((1 << 64) - 1, 64):.4f}")

###############################################################################
# As k grows the final value falls toward 1/e = 0.3679.

for k in (32, 64, 128):
    print(k, round(tightcase.adversarial_run(k).value, 4))
