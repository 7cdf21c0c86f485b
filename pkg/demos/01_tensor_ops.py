"""Walk through the three primitive tensor operations.

The product takes d factors of order d; factor k carries the shared
extent in slot k, and the result sums, over the shared index, the
entrywise product of the factors with their k-th slot pinned.  For two
matrices that is ordinary matrix product with the arguments swapped.
"""

import numpy as np

from bmpnet.tensor import blow, bmp, contraction, forget

rng = np.random.default_rng(0)

T1 = rng.integers(0, 5, (3, 4)).astype(float)   # shared extent 3 in slot 0
T2 = rng.integers(0, 5, (2, 3)).astype(float)   # shared extent 3 in slot 1

out = bmp([T1, T2])
print("bmp of a (3,4) and a (2,3) factor has shape", out.shape)
print("it equals T2 @ T1:", np.array_equal(out, T2 @ T1))

v = np.array([1.0, 2.0, 3.0])
print("\nblow duplicates the first index onto a new last slot:")
print(blow(v))

print("\nforget inserts free (constant) slots; here one of extent 2 "
      "in front:")
print(forget(v, [0], [2]))

m = rng.integers(0, 5, (2, 3, 4)).astype(float)
print("\ncontraction sums slots away; summing slots {0, 2} of a "
      "(2,3,4) array:")
print(contraction(m, {0, 2}))
print("same thing by hand:", np.array_equal(contraction(m, {0, 2}),
                                            m.sum(axis=(0, 2))))

# order three: three factors, each of order 3, one shared extent;
# factor k holds the shared index in its slot k
A = rng.standard_normal((2, 3, 4))
B = rng.standard_normal((3, 2, 4))
C = rng.standard_normal((3, 3, 2))
out3 = bmp([A, B, C])
print("\nthree-factor product of shapes (2,3,4), (3,2,4), (3,3,2) "
      "has shape", out3.shape)
check = np.einsum("hjk,ihk,ijh->ijk", A, B, C)
print("matches the defining sum over the shared index:",
      np.allclose(out3, check))
