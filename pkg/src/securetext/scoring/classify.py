import numpy as np

from securetext.params import (
    ALICE,
    BOB,
    LR,
    RING_EXPONENT,
    TO_BOB,
    TO_ALICE,
    TO_BOTH,
    KEEP_SHARED,
    DISCLOSURE_POLICIES,
)
from securetext.errors import ModelError
from securetext.types import RING
from securetext.ring.core import (
    Z2,
    ZQ,
    ShareVector,
    BitVectorShare,
    local_add,
    local_add_const,
    reconstruct,
)
from securetext.protocol.context import share_private_inputs
from securetext.protocol.blocks import (
    secure_inner_product,
    secure_bit_decompose,
    secure_compare_geq,
    one_minus,
)


_RECIPIENTS = {
    TO_BOB:(BOB,),
    TO_ALICE:(ALICE,),
    TO_BOTH:(ALICE, BOB),
}


def disclose(ctx, share, policy=TO_BOB):
    """
    Reveal a shared class bit according to policy.

    Parties that learn the label get it as an int; the others get None.
    KEEP_SHARED runs no round and hands each party back its share.
    """
    if policy not in DISCLOSURE_POLICIES:
        raise ValueError("Unknown disclosure policy {!r}.".format(policy))
    if (policy == KEEP_SHARED):
        return share
    recipients = _RECIPIENTS[policy]
    peer = BOB if (ctx.party == ALICE) else ALICE
    payload = share.ring.encode(share.elements) if (peer in recipients) else b""
    received = ctx.exchange(payload)
    if (ctx.party not in recipients):
        return None
    peer_share = ShareVector(share.ring.decode(received, share.shape), share.ring, peer)
    if (ctx.party == ALICE):
        value = reconstruct(share, peer_share)
    else:
        value = reconstruct(peer_share, share)
    return int(value.reshape(-1)[0])


def _bob_inputs(ctx, model, count):
    """ Share Bob's count model values; Alice contributes nothing. """
    if (ctx.party == BOB):
        values = model.bob_inputs()
        if (len(values) != count):
            raise ModelError(reason="model has {} parameters, the session expects {}".format(len(values), count))
        own, _ = share_private_inputs(ctx, values, (0,), ZQ)
        return own
    _, peer = share_private_inputs(ctx, np.zeros(0, dtype=RING), (count,), ZQ)
    return peer


def sign_class(ctx, score, length=RING_EXPONENT):
    """
    [[1]] when score, read as a length-bit two's-complement value, is
    non-negative: NOT msb.
    """
    bits = secure_bit_decompose(ctx, score, length)
    msb = ShareVector(bits.elements[..., length - 1], Z2, ctx.party)
    return local_add_const(1, msb)


def secure_lr_classify(ctx, x, model=None, policy=TO_BOB):
    """
    Class of a logistic regression model held by Bob on a Z_2^64-shared
    binary feature vector x: 1 iff <x, w> + b >= 0.

    Bob shares w and b, one inner product gives the score and its
    negated sign bit is the class. Alice passes model=None.
    """
    n_features = x.shape[0]
    parameters = _bob_inputs(ctx, model, n_features + 1)
    weights, intercept = parameters[:n_features], parameters[n_features:]
    score = local_add(secure_inner_product(ctx, x, weights), intercept)
    return disclose(ctx, sign_class(ctx, score), policy)


def expand_stump_inputs(x):
    """ [[w]] = (1 - x_1, x_1, ..., 1 - x_n, x_n), computed locally. """
    return x.like(np.stack([one_minus(x).elements, x.elements], axis=-1).reshape(-1))


def secure_adaboost_classify(ctx, x, model=None, policy=TO_BOB):
    """
    Class of a decision-stump ensemble held by Bob on a Z_2^64-shared
    binary feature vector x: 1 iff <w, z> >= <w, y>.

    Both aggregated votes come out of one batched inner product; they are
    bit-decomposed together and compared as unsigned integers, which is
    sound because votes are non-negative and below 2^63.
    """
    n_features = x.shape[0]
    w = expand_stump_inputs(x)
    votes = _bob_inputs(ctx, model, 4 * n_features).reshape(2, 2 * n_features)
    both = w.like(np.stack([w.elements, w.elements]))
    totals = secure_inner_product(ctx, both, votes).reshape(2)
    bits = secure_bit_decompose(ctx, totals, RING_EXPONENT)
    p0 = BitVectorShare(bits.elements[0], ctx.party)
    p1 = BitVectorShare(bits.elements[1], ctx.party)
    return disclose(ctx, secure_compare_geq(ctx, p1, p0), policy)


def secure_classify(ctx, x, model_kind, model=None, policy=TO_BOB):
    if (model_kind == LR):
        return secure_lr_classify(ctx, x, model, policy)
    return secure_adaboost_classify(ctx, x, model, policy)
