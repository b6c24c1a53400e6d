"""Pure numpy fallback for the Clifford-algebra product kernel.

Multivectors of Cl(n, 0) are dense arrays of length ``2**n`` indexed by blade
bitmask.  Mirrors the compiled ``_clifford`` module function for function.
"""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def sign_table(size: int) -> np.ndarray:
    """``table[a, b]`` is the sign of the blade product ``e_a e_b`` (int8)."""
    n = size.bit_length() - 1
    a = np.arange(size, dtype=np.int64)[:, None]
    b = np.arange(size, dtype=np.int64)[None, :]
    swaps = np.zeros((size, size), dtype=np.int64)
    for k in range(1, n):
        x = (a >> k) & b
        # popcount of x
        while np.any(x):
            swaps += x & 1
            x = x >> 1
    table = np.where(swaps & 1, -1, 1).astype(np.int8)
    table.setflags(write=False)
    return table


def blade_sign(a: int, b: int) -> int:
    a >>= 1
    s = 0
    while a:
        s += bin(a & b).count("1")
        a >>= 1
    return -1 if s & 1 else 1


def geometric_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    size = a.shape[0]
    ia = np.flatnonzero(a)
    ib = np.flatnonzero(b)
    if len(ia) == 0 or len(ib) == 0:
        return np.zeros(size)
    sg = sign_table(size)[np.ix_(ia, ib)]
    vals = np.outer(a[ia], b[ib]) * sg
    idx = ia[:, None] ^ ib[None, :]
    return np.bincount(idx.ravel(), weights=vals.ravel(), minlength=size)
