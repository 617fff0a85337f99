from decimal import Decimal
from fractions import Fraction
import itertools
import json

import numpy as np
import pytest

from securetext.params import ALICE, BOB, LR, ADABOOST, TO_BOB, TO_ALICE, TO_BOTH, KEEP_SHARED
from securetext.errors import EncodingError, ModelError
from securetext.ring.core import ZQ, ShareVector, reconstruct
from securetext.dealer.demand import Demand, DemandProfile, count_demand, SCORING_STAGE
from securetext.dealer.bundle import deal_demand
from securetext.protocol.context import ProtocolContext
from securetext.protocol.costs import scoring_rounds, decompose_triples, DISCLOSE_ROUNDS
from securetext.scoring.fixedpoint import (
    encode_fp,
    decode_fp,
    to_signed,
    FixedPoint,
)
from securetext.scoring.models import (
    LRModel,
    StumpModel,
    model_from_dict,
    load_model,
    plaintext_classify,
)
from securetext.scoring.classify import (
    secure_lr_classify,
    secure_adaboost_classify,
    disclose,
    sign_class,
    expand_stump_inputs,
)
from securetext.network.local import run_pair


def get_lr(weights, intercept, f=16):
    return LRModel(["w{}".format(i) for i in range(len(weights))], weights, intercept, f)


def get_stumps(y, z, f=16):
    return StumpModel(["s{}".format(i) for i in range(len(y))], y, z, f)


def run_scoring(model, x, policy=TO_BOB, seed=0):
    """
    Secure classification of a public test vector x, shared at random.
    Returns (alice result, bob result, alice rounds).
    """
    rng = np.random.default_rng(seed)
    x = np.asarray(x, dtype=np.uint64)
    alice_part = rng.integers(0, np.iinfo(np.uint64).max, size=x.shape, dtype=np.uint64, endpoint=True)
    xa = ShareVector(alice_part, ZQ, ALICE)
    xb = ShareVector(x - alice_part, ZQ, BOB)
    profile = DemandProfile(len(x), 1, 13, model.kind)
    demand = count_demand(profile).stages[SCORING_STAGE]
    alice_bundle, bob_bundle = deal_demand(demand)
    secure = secure_lr_classify if (model.kind == LR) else secure_adaboost_classify
    contexts = dict()

    def party(role, bundle, own, scoring_model):
        def run(transport):
            contexts[role] = ProtocolContext(role, transport, bundle)
            return secure(contexts[role], own, scoring_model, policy)
        return run

    a, b = run_pair(party(ALICE, alice_bundle, xa, None), party(BOB, bob_bundle, xb, model))
    assert alice_bundle.remaining() == {"z2_triples":0, "zq_triples":0, "z2_masks":0, "zq_masks":0}
    assert bob_bundle.remaining() == {"z2_triples":0, "zq_triples":0, "z2_masks":0, "zq_masks":0}
    return a, b, contexts[ALICE].rounds


@pytest.mark.parametrize("value, raw", [
    (0, 0),
    (1, 1 << 16),
    ("0.5", 1 << 15),
    (-1, (1 << 64) - (1 << 16)),
    (Fraction(1, 3), 21845),
    (Fraction(1, 1 << 17), 1),
    (Fraction(-1, 1 << 17), 0),
])
def test_encode(value, raw):
    """ round(v * 2^16), halves rounded up. """
    assert encode_fp(value) == raw


def test_encode_headroom():
    with pytest.raises(EncodingError):
        encode_fp(1 << 47)
    assert to_signed(encode_fp(-(1 << 47) + 1)) == -((1 << 47) - 1) * (1 << 16)


def test_encode_rejects_non_numbers():
    with pytest.raises(EncodingError):
        encode_fp("abc")
    with pytest.raises(EncodingError):
        encode_fp(True)


def test_decode_and_fixed_point():
    assert decode_fp(encode_fp("-2.25")) == Fraction(-9, 4)
    assert float(FixedPoint.from_real("1.5")) == 1.5
    assert FixedPoint.from_real(-1).signed == -(1 << 16)


def test_lr_headroom():
    """ sum |w| + |b| below 2^63 raw keeps every score in range. """
    get_lr([1 << 45, 1 << 45], 0)
    with pytest.raises(ModelError):
        get_lr([1 << 46, 1 << 46], 0)


def test_stump_validation():
    with pytest.raises(ModelError):
        get_stumps([[0, 1]], [[0, -1]])
    with pytest.raises(ModelError):
        get_stumps([[0, 1, 2]], [[0, 1]])
    with pytest.raises(ModelError):
        get_stumps([[0, 1]], [])


def test_model_documents(tmp_path):
    """ Decimal literals survive exactly; unknown kinds are rejected. """
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"kind":"lr", "features":["go"], "weights":[0.1], "intercept":0}))
    model = load_model(path)
    assert model.weights == [Fraction(1, 10)]
    with pytest.raises(ModelError):
        model_from_dict({"kind":"svm", "features":[]})
    with pytest.raises(ModelError):
        model_from_dict({"kind":"lr", "features":["go"]})


def test_plaintext_lr():
    model = LRModel(["go"], [1.0], Decimal("-0.5"))
    assert plaintext_classify(model, "go home") == 1
    assert plaintext_classify(model, "stay") == 0
    assert plaintext_classify(model, [1], encoded=True) == 1


def test_plaintext_stumps():
    model = StumpModel(["go"], [[0.6, 0]], [[0.4, 1]])
    assert plaintext_classify(model, "") == 0
    assert plaintext_classify(model, "go") == 1


def test_zero_score_is_class_one():
    assert plaintext_classify(get_lr([1, -1], 0), [1, 1], encoded=True) == 1


@pytest.mark.parametrize("x, label", [([1, 0, 1], 1), ([0, 1, 0], 0), ([0, 0, 0], 0), ([1, 1, 1], 0)])
def test_secure_lr(x, label):
    model = get_lr(["1.5", "-2", "0.25"], "-0.5")
    a, b, rounds = run_scoring(model, x)
    assert a is None
    assert b == label == plaintext_classify(model, x, encoded=True)
    assert rounds == scoring_rounds(LR) + DISCLOSE_ROUNDS


def test_secure_lr_large_negative_score():
    """ A score of about -2^62 raw still classifies by its sign. """
    model = get_lr([-(1 << 45)], -(1 << 45) + 1)
    assert run_scoring(model, [1])[1] == 0


def test_secure_lr_random():
    rng = np.random.default_rng(42)
    for seed in range(20):
        n = int(rng.integers(1, 12))
        weights = [Fraction(int(w), 64) for w in rng.integers(-512, 512, size=n)]
        model = get_lr(weights, Fraction(int(rng.integers(-512, 512)), 64))
        x = [int(v) for v in rng.integers(0, 2, size=n)]
        assert run_scoring(model, x, seed=seed)[1] == plaintext_classify(model, x, encoded=True)


@pytest.mark.parametrize("x", [[0, 0], [0, 1], [1, 0], [1, 1]])
def test_secure_adaboost(x):
    model = get_stumps([["0.6", "0.1"], ["0.2", "0.3"]], [["0.4", "0.5"], ["0.1", "0.9"]])
    a, b, rounds = run_scoring(model, x)
    assert b == plaintext_classify(model, x, encoded=True)
    assert rounds == scoring_rounds(ADABOOST) + DISCLOSE_ROUNDS


def test_secure_adaboost_tie_goes_to_class_one():
    model = get_stumps([["0.5", "0.5"]], [["0.5", "0.5"]])
    assert run_scoring(model, [0])[1] == 1


def test_secure_adaboost_random():
    rng = np.random.default_rng(7)
    for seed in range(10):
        n = int(rng.integers(1, 10))
        y = [[Fraction(int(v), 128) for v in pair] for pair in rng.integers(0, 256, size=(n, 2))]
        z = [[Fraction(int(v), 128) for v in pair] for pair in rng.integers(0, 256, size=(n, 2))]
        model = get_stumps(y, z)
        x = [int(v) for v in rng.integers(0, 2, size=n)]
        assert run_scoring(model, x, seed=seed)[1] == plaintext_classify(model, x, encoded=True)


@pytest.mark.parametrize("policy, alice_learns, bob_learns", [
    (TO_BOB, False, True),
    (TO_ALICE, True, False),
    (TO_BOTH, True, True),
])
def test_disclosure_policies(policy, alice_learns, bob_learns):
    model = get_lr([1], "-0.5")
    a, b, _ = run_scoring(model, [1], policy=policy)
    assert (a == 1) if alice_learns else (a is None)
    assert (b == 1) if bob_learns else (b is None)


def test_keep_shared():
    """ No disclosure round; the shares reconstruct to the class bit. """
    model = get_lr([1], "-0.5")
    a, b, rounds = run_scoring(model, [1], policy=KEEP_SHARED)
    assert int(reconstruct(a, b)[0]) == 1
    assert rounds == scoring_rounds(LR)


def test_unknown_policy():
    with pytest.raises(ValueError):
        disclose(None, None, "to-carol")


def test_expanded_lr():
    """ Dummy positions weigh zero; the score is unchanged. """
    model = get_lr([1, -2], "0.5")
    expanded = model.expanded([3, 0], 5)
    assert expanded.weights == [-2, 0, 0, 1, 0]
    assert expanded.score([1, 0, 0, 1, 1]) == model.score([1, 1])


def test_sign_rule_on_a_16_bit_ring():
    """ NOT msb of every 16-bit value is its two's-complement sign test. """
    rng = np.random.default_rng(16)
    s = np.arange(1 << 16, dtype=np.uint64)
    alice_part = rng.integers(0, np.iinfo(np.uint64).max, size=s.shape, dtype=np.uint64, endpoint=True)
    alice_bundle, bob_bundle = deal_demand(Demand(z2_triples=len(s) * decompose_triples(16)))

    def party(role, bundle, own):
        def run(transport):
            return sign_class(ProtocolContext(role, transport, bundle), ShareVector(own, ZQ, role), 16)
        return run

    a, b = run_pair(party(ALICE, alice_bundle, alice_part), party(BOB, bob_bundle, s - alice_part))
    signed = s.astype(np.int64) - ((s >> np.uint64(15)).astype(np.int64) << 16)
    assert np.array_equal(reconstruct(a, b), (signed >= 0).astype(np.uint8))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_expand_stump_inputs_exhaustive(n):
    rng = np.random.default_rng(n)
    for x in itertools.product((0, 1), repeat=n):
        x = np.array(x, dtype=np.uint64)
        alice_part = rng.integers(0, np.iinfo(np.uint64).max, size=n, dtype=np.uint64, endpoint=True)
        w = reconstruct(expand_stump_inputs(ShareVector(alice_part, ZQ, ALICE)),
                        expand_stump_inputs(ShareVector(x - alice_part, ZQ, BOB)))
        assert list(w) == [bit for v in x for bit in (1 - int(v), int(v))]


def test_dead_zone_follows_the_encoded_weights():
    """
    w = 0.75 and b = -1 in units of 2^-16: the exact score is -0.25
    units, inside the n * 2^-17 rounding band, while the encoded one is
    0. The secure label is the encoded one.
    """
    model = get_lr([Fraction(3, 1 << 18)], Fraction(-1, 1 << 16))
    assert plaintext_classify(model, [1]) == 0
    assert run_scoring(model, [1])[1] == plaintext_classify(model, [1], encoded=True) == 1
    assert run_scoring(model, [0])[1] == plaintext_classify(model, [0]) == 0


def test_exact_labels_outside_the_dead_zone():
    """ Arbitrary real weights agree with exact scoring once |score| clears the rounding band. """
    rng = np.random.default_rng(1000)
    checked = 0
    for seed in range(40):
        n = int(rng.integers(1, 10))
        model = get_lr([Fraction(int(w), 1000) for w in rng.integers(-3000, 3000, size=n)],
                       Fraction(int(rng.integers(-3000, 3000)), 1000))
        x = [int(v) for v in rng.integers(0, 2, size=n)]
        if (abs(model.score(x)) <= Fraction(n + 1, 1 << 17)):
            continue
        assert run_scoring(model, x, seed=seed)[1] == plaintext_classify(model, x)
        checked += 1
    assert checked > 30
