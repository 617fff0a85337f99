import threading

import numpy as np
import pytest

from securetext.params import ALICE, BOB, LR, ADABOOST, BUNDLE_MAGIC, TAG_BITS
from securetext.errors import (
    ProfileError,
    RandomnessExhaustedError,
    BundleFormatError,
    MaskReuseError,
)
from securetext.ring.core import Z2, ZQ, reconstruct, ShareVector
from securetext.text.extraction import BucketLayout
from securetext.dealer.demand import (
    DemandProfile,
    Demand,
    count_demand,
    CONVERSION_STAGE,
    SCORING_STAGE,
)
from securetext.dealer.bundle import (
    RandomnessBundle,
    deal,
    deal_demand,
    persist_bundle,
    load_bundle,
)
from securetext.dealer.stream import serve_bundles, fetch_bundle
from securetext.network.transport import listen


SEED = bytes(range(32))


def get_profile(**kwargs):
    settings = dict(n=3, m=4, l=13, model_kind=LR, tag_bits=TAG_BITS)
    settings.update(kwargs)
    return DemandProfile(**settings)


def _validate_triples(alice, bob, ring):
    """ c = a * b after reconstruction, for every dealt triple. """
    a = reconstruct(ShareVector(alice.a, ring, ALICE), ShareVector(bob.a, ring, BOB))
    b = reconstruct(ShareVector(alice.b, ring, ALICE), ShareVector(bob.b, ring, BOB))
    c = reconstruct(ShareVector(alice.c, ring, ALICE), ShareVector(bob.c, ring, BOB))
    assert np.array_equal(ring.mul(a, b), c)


def test_lr_demand_counts():
    """ Hand-computed demand of a small unbucketized LR session. """
    demand = count_demand(get_profile())
    width = 13 + TAG_BITS
    assert demand.z2_triples == 3 * 4 * (width - 1) + (2 * 64 - 3)
    assert demand.zq_triples == 3 + 3
    assert demand.alice_z2_masks == 4 * width
    assert demand.bob_z2_masks == 3 * width
    assert demand.alice_zq_masks == 3
    assert demand.bob_zq_masks == 3 + (3 + 1)


def test_ada_demand_counts():
    demand = count_demand(get_profile(model_kind=ADABOOST))
    assert demand.stages[SCORING_STAGE].z2_triples == 2 * 125 + 385
    assert demand.stages[SCORING_STAGE].zq_triples == 4 * 3
    assert demand.stages[SCORING_STAGE].bob_zq_masks == 4 * 3
    assert demand.stages[CONVERSION_STAGE].zq_triples == 3


def test_bucketized_demand_counts():
    """ Bucketized extraction runs 2^t * s1 * s2 tests on expanded vectors. """
    profile = get_profile(n=5, m=6, layout=BucketLayout(2, 2, 3))
    demand = count_demand(profile)
    width = 13 + TAG_BITS
    assert profile.equality_tests == 4 * 2 * 3
    assert profile.n_features == 8
    assert demand.alice_z2_masks == 12 * width
    assert demand.bob_z2_masks == 8 * width
    assert demand.alice_zq_masks == 8


def test_stages_sum_to_total():
    demand = count_demand(get_profile(model_kind=ADABOOST, layout=BucketLayout(1, 3, 4)))
    total = Demand()
    for part in demand.stages.values():
        total = total + part
    assert total == demand


@pytest.mark.parametrize("kwargs", [
    dict(n=0),
    dict(model_kind="svm"),
    dict(tag_bits=1),
    dict(l=63),
    dict(n=9, layout=BucketLayout(1, 4, 4)),
])
def test_invalid_profiles(kwargs):
    with pytest.raises(ProfileError):
        get_profile(**kwargs)


def test_dealt_triples_are_correct():
    alice, bob = deal(get_profile(), seed=SEED)
    _validate_triples(alice.z2_triples, bob.z2_triples, Z2)
    _validate_triples(alice.zq_triples, bob.zq_triples, ZQ)


def test_bundle_sizes_match_demand():
    profile = get_profile(model_kind=ADABOOST)
    demand = count_demand(profile)
    alice, bob = deal(profile)
    assert alice.sizes() == {"z2_triples":demand.z2_triples, "zq_triples":demand.zq_triples,
                             "z2_masks":demand.alice_z2_masks, "zq_masks":demand.alice_zq_masks}
    assert bob.sizes()["z2_masks"] == demand.bob_z2_masks
    assert bob.sizes()["zq_masks"] == demand.bob_zq_masks


def test_seeded_dealing_is_deterministic():
    first = deal(get_profile(), seed=SEED)
    second = deal(get_profile(), seed=SEED)
    assert (first[0] == second[0]) and (first[1] == second[1])


def test_unseeded_dealing_differs():
    assert deal(get_profile())[0] != deal(get_profile())[0]


def test_exhaustion():
    alice, _ = deal_demand(Demand(z2_triples=2))
    alice.take_triples(Z2, 2)
    with pytest.raises(RandomnessExhaustedError):
        alice.take_triples(Z2, 1)


def test_masks_are_consumed_once():
    alice, _ = deal_demand(Demand(alice_zq_masks=4))
    mask = alice.take_masks(ZQ, 2)
    mask.consume()
    with pytest.raises(MaskReuseError):
        mask.consume()
    assert alice.consumed()["zq_masks"] == 2
    assert alice.remaining()["zq_masks"] == 2


def test_bundle_file(tmp_path):
    alice, bob = deal(get_profile(), seed=SEED)
    path = tmp_path / "bob.bundle"
    persist_bundle(bob, path)
    loaded = load_bundle(path)
    assert loaded == bob
    assert loaded.party == BOB


@pytest.mark.parametrize("mutate", [
    lambda data: b"XXBNDL01" + data[8:],
    lambda data: BUNDLE_MAGIC[:-2] + b"99" + data[8:],
    lambda data: data[:8] + bytes([7]) + data[9:],
    lambda data: data[:-1],
    lambda data: data + b"\0",
])
def test_malformed_bundles(mutate):
    alice, _ = deal(get_profile(), seed=SEED)
    with pytest.raises(BundleFormatError):
        RandomnessBundle.from_bytes(mutate(alice.to_bytes()))


def test_dealer_socket():
    """ Each party fetches exactly its own bundle from the dealer. """
    alice, bob = deal(get_profile(), seed=SEED)
    listener = listen(("127.0.0.1", 0))
    address = listener.getsockname()[:2]
    dealer = threading.Thread(target=serve_bundles, args=(None, [alice, bob], 10.0, listener))
    dealer.start()
    fetched_bob = fetch_bundle(address, BOB, timeout=10.0)
    fetched_alice = fetch_bundle(address, ALICE, timeout=10.0)
    dealer.join(timeout=10.0)
    assert (fetched_alice == alice) and (fetched_bob == bob)
