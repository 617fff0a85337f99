import numpy as np


# Element dtype of Z_2 shares.
BIT = np.uint8

# Element dtype of Z_{2^64} shares; numpy's wrap-around is the ring reduction.
RING = np.uint64

# Little-endian wire dtype of Z_{2^64} elements.
WIRE_RING = np.dtype("<u8")
