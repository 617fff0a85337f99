"""
Analytic triple and round counts of the building blocks. The dealer
sizes bundles from these, and the tests compare them against what the
transport and bundle counters actually record.
"""
from securetext.params import (
    LR,
    ADABOOST,
    RING_EXPONENT,
    KEEP_SHARED,
)


def _ceil_log2(length):
    return (length - 1).bit_length() if (length > 1) else 0


def _prefix_strides(length):
    stride = 1
    while (stride < length):
        yield stride
        stride <<= 1


def equality_triples(length):
    """ Binary product tree over length bits. """
    return length - 1


def equality_rounds(length):
    return _ceil_log2(length)


def compare_triples(length):
    """ Prefix-OR levels plus the final selection of the differing bit. """
    return sum(length - stride for stride in _prefix_strides(length)) + length


def compare_rounds(length):
    return _ceil_log2(length) + 1


def decompose_triples(length):
    """ Generate bits in one round, then a ripple-carry chain. """
    return (2 * length - 3) if (length > 1) else 0


def decompose_rounds(length):
    return (length - 1) if (length > 1) else 0


CONVERSION_ROUNDS = 2

SHARE_ROUNDS = 1

DISCLOSE_ROUNDS = 1


def scoring_z2_triples(model_kind, exponent=RING_EXPONENT):
    if (model_kind == LR):
        return decompose_triples(exponent)
    return 2 * decompose_triples(exponent) + compare_triples(exponent)


def scoring_rounds(model_kind, exponent=RING_EXPONENT):
    """ Share model inputs, inner product(s), decompose, and compare for stumps. """
    rounds = SHARE_ROUNDS + 1 + decompose_rounds(exponent)
    if (model_kind == ADABOOST):
        rounds += compare_rounds(exponent)
    return rounds


def extraction_rounds(width):
    return SHARE_ROUNDS + equality_rounds(width)


def session_rounds(profile, disclosure):
    """
    Rounds of one complete classification session, handshake excluded.
    Every exchange happens even when a payload is empty, so the count
    depends on the profile alone.
    """
    rounds = (extraction_rounds(profile.width)
              + CONVERSION_ROUNDS
              + scoring_rounds(profile.model_kind, profile.exponent))
    if (disclosure != KEEP_SHARED):
        rounds += DISCLOSE_ROUNDS
    return rounds
