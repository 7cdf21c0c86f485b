"""Certify the built-in rank-7 scheme and run it as a staged pipeline.

With rational entries a zero residual against the structure tensor is a
proof.  The staged form then evaluates one concrete product through the
three stages: linear combinations of each operand, the seven scalar
multiplications, and the recombination back to output entries.
"""

import numpy as np

from bmpnet.network import strassen_stages
from bmpnet.tensor import exact_array
from bmpnet.verify import exponent, known_strassen, verify_scheme

scheme = known_strassen()
report = verify_scheme(scheme)
print("rank-%d scheme for 2x2 product" % scheme.r)
print("exact residual zero:", report.exact_zero)
print("per-slot contribution norms:",
      ["%.3f" % v for v in report.slot_norms])

a = exact_array([[1, 2], [3, 4]])
b = exact_array([[5, 6], [7, 8]])
stages = strassen_stages(a, b, scheme)
print("\noperand combinations (stage 1):")
print(np.array2string(stages["s1"].astype(object)))
print(np.array2string(stages["s2"].astype(object)))
print("the seven scalar multiplications (stage 2):")
print(np.array2string(stages["products"].astype(object)))
print("recombined output, zero-padded to rank length (stage 3):")
print(np.array2string(stages["output"].astype(object)))
print("first four coordinates equal vec(A @ B):",
      np.array_equal(stages["output"][:4], a.dot(b).reshape(4)))

print("\nrecursive application of a rank-%d scheme on %dx%d blocks "
      "gives exponent %.6f" % (scheme.r, scheme.n, scheme.n,
                               exponent(scheme.n, scheme.r)))
