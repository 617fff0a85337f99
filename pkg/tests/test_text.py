import numpy as np
import pytest

from securetext.params import ALICE, BOB, LR, TAG_BITS, ALICE_DUMMY_TAG, BOB_DUMMY_TAG
from securetext.errors import (
    HashParamsError,
    LexiconCollisionError,
    BucketOverflowError,
    PaddingOverflowError,
    ProfileError,
)
from securetext.ring.core import reconstruct
from securetext.dealer.demand import DemandProfile
from securetext.dealer.bundle import deal
from securetext.protocol.context import ProtocolContext
from securetext.protocol.costs import extraction_rounds
from securetext.text.hashing import (
    HashParams,
    is_prime,
    tokenize,
    hash_token,
    digest_integer,
    build_token_set,
    build_lexicon,
    collision_report,
    TokenSet,
)
from securetext.text.extraction import (
    BucketLayout,
    pad_tokens,
    tag_real,
    bucket_index,
    bucketize_alice,
    bucketize_bob,
    bucketize,
    secure_feature_extract,
    secure_bucket_extract,
    simulate_bucket_overflow,
    suggest_capacity,
)
from securetext.network.local import run_pair


FEATURES = ["good", "bad", "movie", "not good", "love"]


def get_params(l=17):
    return HashParams(l=l)


def run_extraction(features, text, params, pad_to=8, layout=None):
    """ Reconstructed shared feature vector plus Alice's context. """
    lexicon = build_lexicon(features, params)
    tokens = build_token_set(text, params)
    profile = DemandProfile(len(features), pad_to, params.l, LR, layout=layout, tag_bits=TAG_BITS)
    alice_bundle, bob_bundle = deal(profile)
    contexts = dict()
    if (layout is None):
        alice_input = pad_tokens(tokens, pad_to)
        bob_input = tag_real(lexicon.ids, params.l)

        def extract(ctx, own):
            return secure_feature_extract(ctx, own, len(features), pad_to, profile.width)
    else:
        alice_input = bucketize_alice(tokens, layout, params)
        bob_input, _ = bucketize_bob(lexicon, layout, params)

        def extract(ctx, own):
            return secure_bucket_extract(ctx, own, layout, profile.width)

    def party(role, bundle, own):
        def run(transport):
            contexts[role] = ProtocolContext(role, transport, bundle)
            return extract(contexts[role], own)
        return run

    a, b = run_pair(party(ALICE, alice_bundle, alice_input), party(BOB, bob_bundle, bob_input))
    return reconstruct(a, b), contexts[ALICE], profile


@pytest.mark.parametrize("n", [2, 7919, 1301081])
def test_primes(n):
    assert is_prime(n)


@pytest.mark.parametrize("n", [0, 1, 4, 561, 1301083 * 3])
def test_composites(n):
    assert not(is_prime(n))


@pytest.mark.parametrize("kwargs", [dict(p=1301080), dict(a=0), dict(b=1301081), dict(l=0), dict(l=63)])
def test_invalid_hash_params(kwargs):
    with pytest.raises(HashParamsError):
        HashParams(**kwargs)


def test_tokenize_unigrams_and_bigrams():
    assert tokenize("Go home GO") == {"go", "home", "go home", "home go"}
    assert tokenize("") == set()


def test_hash_range_and_determinism():
    """ Ids fall in [0, 2^l) and depend on the word alone. """
    for l in (13, 17):
        params = get_params(l)
        ids = [hash_token(word, params) for word in FEATURES]
        assert all(0 <= token < (1 << l) for token in ids)
        assert ids == [hash_token(word, params) for word in FEATURES]


def test_hash_of_a_known_word():
    """
    SHA-224("test") = 90a3ed9e...a809 and, with the default parameters,
    ((972 * N + 52097) mod 1301081) = 249144 for that digest N.
    """
    assert digest_integer("test") == int("90a3ed9e32b2aaf4c61c410eb925426119e1a9dc53d4286ade99a809", 16)
    assert hash_token("test", get_params(13)) == 249144 % (1 << 13) == 3384
    assert hash_token("test", get_params(17)) == 118072


def test_token_set_is_sorted_and_deduplicated():
    tokens = TokenSet([5, 3, 5], 4)
    assert list(tokens) == [3, 5]
    with pytest.raises(HashParamsError):
        TokenSet([16], 4)


def test_lexicon_collision():
    """ Three features cannot fit 1-bit ids without a collision. """
    with pytest.raises(LexiconCollisionError):
        build_lexicon(["a", "b", "c"], get_params(1))


def test_collision_report():
    groups = collision_report(["a", "b", "c", "a"], get_params(1))
    assert groups
    assert all(len(words) > 1 for words in groups.values())
    assert {word for words in groups.values() for word in words} <= {"a", "b", "c"}


def test_padding_tags():
    """ Real ids carry tag 00 and Alice dummies tag 01, so they never meet. """
    tokens = TokenSet([1, 2], 3)
    padded = pad_tokens(tokens, 5)
    assert padded[:2] == [1, 2]
    assert padded[2:] == [(ALICE_DUMMY_TAG << 3) | k for k in range(3)]
    assert len(set(padded)) == 5
    with pytest.raises(PaddingOverflowError):
        pad_tokens(tokens, 1)


@pytest.mark.parametrize("text", ["good movie", "not good", "nothing here", ""])
def test_secure_feature_extract(text):
    """ The shared vector is the plaintext indicator; rounds are 1 + ceil(log2 width). """
    params = get_params()
    x, alice, profile = run_extraction(FEATURES, text, params)
    expected = build_lexicon(FEATURES, params).indicator(build_token_set(text, params))
    assert list(x) == expected
    assert alice.rounds == extraction_rounds(profile.width) == 1 + 5
    assert alice.equality_tests == len(FEATURES) * 8


def test_bucket_index_range():
    params = get_params()
    layout = BucketLayout(3, 1, 1)
    assert all(0 <= bucket_index(token, layout, params) < 8 for token in range(0, 1 << 17, 977))
    with pytest.raises(ProfileError):
        bucket_index(1, BucketLayout(18, 1, 1), params)


def test_bucketize_bob_positions():
    """ Each feature lands in its hashed bucket; empty slots are Bob dummies. """
    params = get_params()
    layout = BucketLayout(2, 5, 5)
    lexicon = build_lexicon(FEATURES, params)
    buckets, positions = bucketize_bob(lexicon, layout, params)
    assert buckets.shape == (4, 5)
    flat = buckets.reshape(-1)
    for token, position in zip(lexicon.ids, positions):
        assert flat[position] == token
        assert position // 5 == bucket_index(token, layout, params)
    dummies = [int(v) for i, v in enumerate(flat) if i not in positions]
    assert all((v >> 17) == BOB_DUMMY_TAG for v in dummies)


def test_bucketize_pairs_matching_ids():
    """ A shared id lands in the same bucket on both sides. """
    params = get_params()
    layout = BucketLayout(2, 5, 6)
    lexicon = build_lexicon(FEATURES, params)
    tokens = build_token_set("good movie", params)
    alice, bob, index_map = bucketize(tokens, lexicon, layout, params)
    assert alice.shape == (4, 6)
    assert np.array_equal(bob, bucketize_bob(lexicon, layout, params)[0])
    for token in tokens:
        row = bucket_index(token, layout, params)
        assert token in alice[row]
        if token in lexicon.ids:
            assert token in bob[row]
    assert len(index_map) == len(FEATURES)


def test_bucket_overflow():
    with pytest.raises(BucketOverflowError):
        bucketize_bob(build_lexicon(["good", "bad", "movie"], get_params()), BucketLayout(1, 1, 1), get_params())


@pytest.mark.parametrize("text", ["good movie", "love it not good", ""])
def test_bucketized_extraction(text):
    """ Expanded indicator in bucket order, after exactly 2^t*s1*s2 tests. """
    params = get_params()
    layout = BucketLayout(2, 5, 7)
    x, alice, _ = run_extraction(FEATURES, text, params, pad_to=16, layout=layout)
    lexicon = build_lexicon(FEATURES, params)
    _, positions = bucketize_bob(lexicon, layout, params)
    expected = np.zeros(layout.bob_slots, dtype=np.uint8)
    expected[positions] = lexicon.indicator(build_token_set(text, params))
    assert np.array_equal(x, expected)
    assert alice.equality_tests == 4 * 5 * 7


def test_layout_parse():
    assert BucketLayout.parse("2,3,4").as_tuple() == (2, 3, 4)
    assert BucketLayout(2, 3, 4).bob_slots == 12
    with pytest.raises(ProfileError):
        BucketLayout(1, 0, 1)


def test_overflow_simulation():
    assert simulate_bucket_overflow(4, 2, 4) == 0.0
    assert simulate_bucket_overflow(10, 0, 9, trials=100) == 1.0
    # 1 - C(10, 5) / 2^10
    assert 0.72 < simulate_bucket_overflow(10, 1, 5, trials=20000) < 0.79


def test_suggest_capacity():
    assert suggest_capacity(10, 0, trials=100) == 10
    capacity = suggest_capacity(32, 2, target=0.01, trials=2000)
    assert capacity >= 8
    assert simulate_bucket_overflow(32, 2, capacity, trials=2000) <= 0.01
