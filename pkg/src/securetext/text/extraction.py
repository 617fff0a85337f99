import numpy as np
from numba import njit

from securetext.params import (
    ALICE,
    BOB,
    PARTY_NAMES,
    BUCKET_HASH_A,
    BUCKET_HASH_B,
    ALICE_DUMMY_TAG,
    BOB_DUMMY_TAG,
    REAL_TAG,
    DEFAULT_BUCKET_TRIALS,
    DEFAULT_OVERFLOW_TARGET,
)
from securetext.types import RING
from securetext.errors import (
    ProfileError,
    BucketOverflowError,
    PaddingOverflowError,
)
from securetext.ring.core import Z2, ShareVector, BitVectorShare, to_bits
from securetext.protocol.context import share_private_inputs
from securetext.protocol.blocks import secure_equality


class BucketLayout:
    """
    2^t buckets; Bob's hold s1 elements each and Alice's s2. Bucketized
    extraction runs 2^t * s1 * s2 equality tests instead of n * m.
    """
    __slots__ = ("t", "s1", "s2")
    def __init__(self, t, s1, s2):
        if ((t < 0) or (s1 < 1) or (s2 < 1)):
            raise ProfileError(reason="bucket layout needs t >= 0, s1 >= 1, s2 >= 1")
        self.t = t
        self.s1 = s1
        self.s2 = s2

    @classmethod
    def parse(cls, text):
        """ "t,s1,s2" -> BucketLayout """
        t, s1, s2 = (int(part) for part in text.split(","))
        return cls(t, s1, s2)

    @property
    def n_buckets(self):
        return 1 << self.t

    @property
    def bob_slots(self):
        return self.n_buckets * self.s1

    @property
    def alice_slots(self):
        return self.n_buckets * self.s2

    def as_tuple(self):
        return self.t, self.s1, self.s2

    def __eq__(self, other):
        return isinstance(other, BucketLayout) and (other.as_tuple() == self.as_tuple())

    def __repr__(self):
        return "BucketLayout(t={}, s1={}, s2={})".format(self.t, self.s1, self.s2)


def tag(token, tag_value, l):
    """ tag_value || token as an (l+2)-bit id. """
    return (tag_value << l) | token


def tag_real(tokens, l):
    return [tag(token, REAL_TAG, l) for token in tokens]


def _dummies(tag_value, count, l):
    if (count > (1 << l)):
        raise ProfileError(reason="{} dummies do not fit {} bits".format(count, l))
    return [tag(k, tag_value, l) for k in range(count)]


def pad_tokens(token_set, pad_to):
    """
    Alice's tagged ids padded to exactly pad_to elements with Alice
    dummies, which can never equal any real or Bob-dummy id.
    """
    count = len(token_set)
    if (count > pad_to):
        raise PaddingOverflowError(count=count, pad_to=pad_to)
    return tag_real(token_set, token_set.l) + _dummies(ALICE_DUMMY_TAG, pad_to - count, token_set.l)


def bucket_index(token, layout, params):
    """ Top t bits of a second public Carter-Wegman hash of an l-bit id. """
    if (layout.t > params.l):
        raise ProfileError(reason="t = {} exceeds l = {}".format(layout.t, params.l))
    h = ((BUCKET_HASH_A * token + BUCKET_HASH_B) % params.p) % (1 << params.l)
    return h >> (params.l - layout.t)


def _fill(tokens, layout, capacity, dummy_tag, owner, params):
    """ (2^t, capacity) array of tagged ids plus each token's flat slot. """
    buckets = [list() for _ in range(layout.n_buckets)]
    positions = list()
    for token in tokens:
        index = bucket_index(token, layout, params)
        bucket = buckets[index]
        positions.append(index * capacity + len(bucket))
        bucket.append(tag(token, REAL_TAG, params.l))
        if (len(bucket) > capacity):
            raise BucketOverflowError(bucket=index, owner=owner, count=len(bucket), capacity=capacity)
    dummies = iter(_dummies(dummy_tag, layout.n_buckets * capacity - len(positions), params.l))
    for bucket in buckets:
        bucket.extend(next(dummies) for _ in range(capacity - len(bucket)))
    return np.array(buckets, dtype=RING).reshape(layout.n_buckets, capacity), positions


def bucketize_alice(token_set, layout, params):
    """ Alice's buckets of shape (2^t, s2). """
    buckets, _ = _fill(token_set, layout, layout.s2, ALICE_DUMMY_TAG, PARTY_NAMES[ALICE], params)
    return buckets


def bucketize_bob(lexicon, layout, params):
    """
    Bob's buckets of shape (2^t, s1) and the index map sending feature i
    of the model to its position in the flattened buckets.
    """
    return _fill(lexicon.ids, layout, layout.s1, BOB_DUMMY_TAG, PARTY_NAMES[BOB], params)


def bucketize(token_set, lexicon, layout, params):
    """ Both halves at once, for a party simulating the pair. """
    alice = bucketize_alice(token_set, layout, params)
    bob, index_map = bucketize_bob(lexicon, layout, params)
    return alice, bob, index_map


def _share_elements(ctx, own_ids, peer_count, width):
    """ Z_2 shares of both parties' id bits, (own, peer). """
    own_bits = to_bits(np.asarray(list(own_ids), dtype=RING), width)
    own, peer = share_private_inputs(ctx, own_bits, (peer_count, width), Z2)
    return own, peer


def _pairwise_features(ctx, bob_bits, alice_bits):
    """
    bob_bits (..., n, width) against alice_bits (..., m, width): x_i is
    the mod-2 sum of the equality tests of Bob element i with every
    Alice element. Alice's elements are distinct, so at most one test
    per row succeeds.
    """
    n, m, width = bob_bits.shape[-2], alice_bits.shape[-2], bob_bits.shape[-1]
    batch = bob_bits.shape[:-2] + (n, m, width)
    x = BitVectorShare(np.broadcast_to(bob_bits.elements[..., :, None, :], batch), bob_bits.party)
    y = BitVectorShare(np.broadcast_to(alice_bits.elements[..., None, :, :], batch), alice_bits.party)
    matches = secure_equality(ctx, x, y).elements.reshape(batch[:-1])
    return Z2.sum(matches, axis=-1)


def secure_feature_extract(ctx, own_ids, n, m, width):
    """
    Shared indicator vector of Bob's n ids over Alice's m ids.

    own_ids  This party's ids: Alice's m distinct elements, or Bob's n
             lexicon ids in model order.
    Returns a Z_2 ShareVector of shape (n,) after n*m equality tests of
    width bits each.
    """
    if (ctx.party == ALICE):
        alice_bits, bob_bits = _share_elements(ctx, own_ids, n, width)
    else:
        bob_bits, alice_bits = _share_elements(ctx, own_ids, m, width)
    return ShareVector(_pairwise_features(ctx, bob_bits, alice_bits).reshape(n), Z2, ctx.party)


def secure_bucket_extract(ctx, own_buckets, layout, width):
    """
    Bucketized extraction: Bob's bucket k is only tested against Alice's
    bucket k. Returns shares of the expanded feature vector of length
    2^t * s1 in Bob's flattened bucket order.
    """
    own_buckets = np.asarray(own_buckets, dtype=RING)
    if (ctx.party == ALICE):
        alice_bits, bob_bits = _share_elements(ctx, own_buckets.reshape(-1), layout.bob_slots, width)
    else:
        bob_bits, alice_bits = _share_elements(ctx, own_buckets.reshape(-1), layout.alice_slots, width)
    bob_bits = bob_bits.reshape(layout.n_buckets, layout.s1, width)
    alice_bits = alice_bits.reshape(layout.n_buckets, layout.s2, width)
    features = _pairwise_features(ctx, bob_bits, alice_bits)
    return ShareVector(features.reshape(layout.bob_slots), Z2, ctx.party)


@njit
def _count_overflows(n_elements, n_buckets, capacity, trials, seed):
    np.random.seed(seed)
    loads = np.zeros(n_buckets, dtype=np.int64)
    overflows = 0
    for _ in range(trials):
        loads[:] = 0
        for _ in range(n_elements):
            loads[np.random.randint(0, n_buckets)] += 1
        if (loads.max() > capacity):
            overflows += 1
    return overflows


def simulate_bucket_overflow(n_elements, t, capacity, trials=DEFAULT_BUCKET_TRIALS, seed=0):
    """
    Monte Carlo estimate of the probability that n_elements uniformly
    hashed into 2^t buckets overflow a bucket of the given capacity.
    """
    if (n_elements <= capacity):
        return 0.0
    return _count_overflows(n_elements, 1 << t, capacity, trials, seed) / trials


def suggest_capacity(n_elements, t, target=DEFAULT_OVERFLOW_TARGET, trials=DEFAULT_BUCKET_TRIALS, seed=0):
    """ Smallest bucket capacity whose simulated overflow rate is at most target. """
    n_buckets = 1 << t
    capacity = max(1, -(-n_elements // n_buckets))
    while (simulate_bucket_overflow(n_elements, t, capacity, trials, seed) > target):
        capacity += 1
    return capacity
