import hashlib
import struct

from securetext.params import (
    LR,
    ADABOOST,
    MODEL_KINDS,
    RING_EXPONENT,
    TAG_BITS,
    EXTRACTION_PHASE,
)
from securetext.errors import ProfileError
from securetext.protocol.costs import (
    equality_triples,
    scoring_z2_triples,
)


CONVERSION_STAGE = "conversion"

SCORING_STAGE = "scoring"

STAGES = (EXTRACTION_PHASE, CONVERSION_STAGE, SCORING_STAGE)


class DemandProfile:
    """
    Public parameters of one classification session, shared by both
    parties and the dealer.

    n           Bob's lexicon size.
    m           Alice's token-set size (the pad size when padding).
    l           Bit-length of hashed token ids.
    model_kind  LR or ADABOOST.
    layout      Optional BucketLayout.
    tag_bits    0, or 2 when dummy elements are tagged onto the ids.
    """
    __slots__ = ("n", "m", "l", "model_kind", "layout", "tag_bits", "exponent")
    def __init__(self, n, m, l, model_kind, layout=None, tag_bits=0, exponent=RING_EXPONENT):
        self.n = n
        self.m = m
        self.l = l
        self.model_kind = model_kind
        self.layout = layout
        self.tag_bits = tag_bits
        self.exponent = exponent
        self._validate()

    def _validate(self):
        if (min(self.n, self.m, self.l) < 1):
            raise ProfileError(reason="sizes must be positive, got n={}, m={}, l={}".format(
                self.n, self.m, self.l))
        if self.model_kind not in MODEL_KINDS:
            raise ProfileError(reason="unknown model kind {!r}".format(self.model_kind))
        if self.tag_bits not in (0, TAG_BITS):
            raise ProfileError(reason="tag bits must be 0 or {}".format(TAG_BITS))
        if (self.width > self.exponent):
            raise ProfileError(reason="tagged token width {} exceeds {} bits".format(
                self.width, self.exponent))
        if (self.exponent != RING_EXPONENT):
            raise ProfileError(reason="only Z_2^{} scoring is supported".format(RING_EXPONENT))
        if (self.layout is not None):
            if (self.layout.bob_slots < self.n):
                raise ProfileError(reason="2^t*s1 = {} cannot hold n = {}".format(
                    self.layout.bob_slots, self.n))
            if (self.layout.alice_slots < self.m):
                raise ProfileError(reason="2^t*s2 = {} cannot hold m = {}".format(
                    self.layout.alice_slots, self.m))

    @property
    def bucketized(self):
        return (self.layout is not None)

    @property
    def width(self):
        """ Bits compared by each equality test. """
        return self.l + self.tag_bits

    @property
    def n_features(self):
        """ Length of the (possibly expanded) feature vector. """
        return self.layout.bob_slots if self.bucketized else self.n

    @property
    def n_elements(self):
        """ Number of elements Alice feeds into extraction. """
        return self.layout.alice_slots if self.bucketized else self.m

    @property
    def equality_tests(self):
        if self.bucketized:
            return self.layout.n_buckets * self.layout.s1 * self.layout.s2
        return self.n * self.m

    def to_bytes(self):
        t, s1, s2 = self.layout.as_tuple() if self.bucketized else (0, 0, 0)
        return struct.pack("<IIIB2sBIII?", self.n, self.m, self.l, self.tag_bits,
                           self.model_kind.encode("ascii").ljust(2, b"\0"),
                           self.exponent, t, s1, s2, self.bucketized)

    def digest(self):
        return hashlib.sha256(self.to_bytes()).digest()

    def __eq__(self, other):
        return isinstance(other, DemandProfile) and (other.to_bytes() == self.to_bytes())

    def __hash__(self):
        return hash(self.to_bytes())

    def __repr__(self):
        return "DemandProfile(n={}, m={}, l={}, model_kind={!r}, layout={}, tag_bits={})".format(
            self.n, self.m, self.l, self.model_kind, self.layout, self.tag_bits)


class Demand:
    """ Counts of correlated randomness for one party pair. """
    __slots__ = ("z2_triples", "zq_triples", "alice_z2_masks", "alice_zq_masks",
                 "bob_z2_masks", "bob_zq_masks", "stages")
    def __init__(self, z2_triples=0, zq_triples=0, alice_z2_masks=0, alice_zq_masks=0,
                 bob_z2_masks=0, bob_zq_masks=0, stages=None):
        self.z2_triples = z2_triples
        self.zq_triples = zq_triples
        self.alice_z2_masks = alice_z2_masks
        self.alice_zq_masks = alice_zq_masks
        self.bob_z2_masks = bob_z2_masks
        self.bob_zq_masks = bob_zq_masks
        self.stages = dict() if (stages is None) else stages

    def counts(self):
        return {
            "z2_triples":self.z2_triples,
            "zq_triples":self.zq_triples,
            "alice_z2_masks":self.alice_z2_masks,
            "alice_zq_masks":self.alice_zq_masks,
            "bob_z2_masks":self.bob_z2_masks,
            "bob_zq_masks":self.bob_zq_masks,
        }

    def masks(self, party_name):
        """ {"z2":count, "zq":count} for one party. """
        counts = self.counts()
        return {ring:counts["{}_{}_masks".format(party_name, ring)] for ring in ("z2", "zq")}

    def __add__(self, other):
        mine, theirs = self.counts(), other.counts()
        return Demand(**{key:mine[key] + theirs[key] for key in mine})

    def __eq__(self, other):
        return isinstance(other, Demand) and (other.counts() == self.counts())

    def __repr__(self):
        return "Demand({})".format(", ".join("{}={}".format(k, v) for k, v in self.counts().items()))


def _extraction_demand(profile):
    width = profile.width
    return Demand(z2_triples=profile.equality_tests * equality_triples(width),
                  alice_z2_masks=profile.n_elements * width,
                  bob_z2_masks=profile.n_features * width)


def _conversion_demand(profile):
    n_features = profile.n_features
    return Demand(zq_triples=n_features,
                  alice_zq_masks=n_features,
                  bob_zq_masks=n_features)


def _scoring_demand(profile):
    n_features = profile.n_features
    if (profile.model_kind == LR):
        bob_masks = n_features + 1
        zq_triples = n_features
    else:
        bob_masks = 4 * n_features
        zq_triples = 4 * n_features
    return Demand(z2_triples=scoring_z2_triples(profile.model_kind, profile.exponent),
                  zq_triples=zq_triples,
                  bob_zq_masks=bob_masks)


def count_demand(profile):
    """
    Exact correlated randomness consumed by one classification session
    of this profile, broken down by stage.
    """
    stages = {
        EXTRACTION_PHASE:_extraction_demand(profile),
        CONVERSION_STAGE:_conversion_demand(profile),
        SCORING_STAGE:_scoring_demand(profile),
    }
    total = Demand()
    for stage in STAGES:
        total = total + stages[stage]
    total.stages = stages
    return total
