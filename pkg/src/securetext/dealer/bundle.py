import logging
import secrets
import struct

import numpy as np

from securetext.params import (
    ALICE,
    BOB,
    PARTY_NAMES,
    BUNDLE_MAGIC,
    SEED_SIZE,
)
from securetext.types import BIT, WIRE_RING
from securetext.errors import (
    RandomnessExhaustedError,
    BundleFormatError,
)
from securetext.ring.core import Z2, ZQ, InputMask
from securetext.dealer.demand import count_demand


logger = logging.getLogger(__name__)

_COUNT = struct.Struct("<I")

# Pool names in file order.
POOL_NAMES = ("z2_triples", "zq_triples", "z2_masks", "zq_masks")


class TriplePool:
    """ One party's shares of the dealt (a, b, c) triples of a ring. """
    __slots__ = ("ring", "a", "b", "c", "cursor")
    def __init__(self, ring, a, b, c):
        self.ring = ring
        self.a = ring.array(a)
        self.b = ring.array(b)
        self.c = ring.array(c)
        self.cursor = 0

    def __len__(self):
        return len(self.a)

    @property
    def remaining(self):
        return len(self) - self.cursor

    def take(self, count, name):
        if (count > self.remaining):
            raise RandomnessExhaustedError(pool=name, requested=count, remaining=self.remaining)
        start, self.cursor = self.cursor, self.cursor + count
        return self.a[start:self.cursor], self.b[start:self.cursor], self.c[start:self.cursor]


class MaskPool:
    """ Input masks dealt to one party in one ring. """
    __slots__ = ("ring", "values", "party", "cursor")
    def __init__(self, ring, values, party):
        self.ring = ring
        self.values = ring.array(values)
        self.party = party
        self.cursor = 0

    def __len__(self):
        return len(self.values)

    @property
    def remaining(self):
        return len(self) - self.cursor

    def take(self, count, name):
        if (count > self.remaining):
            raise RandomnessExhaustedError(pool=name, requested=count, remaining=self.remaining)
        start, self.cursor = self.cursor, self.cursor + count
        return InputMask(self.values[start:self.cursor], self.ring, self.party)


class RandomnessBundle:
    """
    Correlated randomness dealt to one party for a single session.
    Cursors only move forward; a bundle is never reused.
    """
    __slots__ = ("party", "z2_triples", "zq_triples", "z2_masks", "zq_masks")
    def __init__(self, party, z2_triples, zq_triples, z2_masks, zq_masks):
        self.party = party
        self.z2_triples = z2_triples
        self.zq_triples = zq_triples
        self.z2_masks = z2_masks
        self.zq_masks = zq_masks

    def _pools(self):
        return dict(zip(POOL_NAMES, (self.z2_triples, self.zq_triples, self.z2_masks, self.zq_masks)))

    def take_triples(self, ring, count):
        """ (a, b, c) share arrays of count fresh triples. """
        if ring.is_binary:
            return self.z2_triples.take(count, "z2_triples")
        return self.zq_triples.take(count, "zq_triples")

    def take_masks(self, ring, count):
        if ring.is_binary:
            return self.z2_masks.take(count, "z2_masks")
        return self.zq_masks.take(count, "zq_masks")

    def consumed(self):
        return {name:pool.cursor for name, pool in self._pools().items()}

    def remaining(self):
        return {name:pool.remaining for name, pool in self._pools().items()}

    def sizes(self):
        return {name:len(pool) for name, pool in self._pools().items()}

    def to_bytes(self):
        chunks = [BUNDLE_MAGIC, bytes([self.party])]
        for pool in (self.z2_triples, self.zq_triples):
            for values in (pool.a, pool.b, pool.c):
                chunks.append(_encode_pool(pool.ring, values))
        for pool in (self.z2_masks, self.zq_masks):
            chunks.append(_encode_pool(pool.ring, pool.values))
        return b"".join(chunks)

    @classmethod
    def from_bytes(cls, data):
        reader = _BundleReader(data)
        party = reader.header()
        z2 = [reader.pool(Z2) for _ in range(3)]
        zq = [reader.pool(ZQ) for _ in range(3)]
        z2_masks = reader.pool(Z2)
        zq_masks = reader.pool(ZQ)
        reader.finish()
        return cls(party=party,
                   z2_triples=TriplePool(Z2, *z2),
                   zq_triples=TriplePool(ZQ, *zq),
                   z2_masks=MaskPool(Z2, z2_masks, party),
                   zq_masks=MaskPool(ZQ, zq_masks, party))

    def __eq__(self, other):
        return isinstance(other, RandomnessBundle) and (other.to_bytes() == self.to_bytes())

    def __repr__(self):
        return "RandomnessBundle({}, {})".format(PARTY_NAMES[self.party], self.sizes())


def _encode_pool(ring, values):
    if ring.is_binary:
        data = np.packbits(ring.array(values), bitorder="little").tobytes()
    else:
        data = ring.array(values).astype(WIRE_RING).tobytes()
    return _COUNT.pack(len(values)) + data


class _BundleReader:
    __slots__ = ("data", "offset")
    def __init__(self, data):
        self.data = bytes(data)
        self.offset = 0

    def _read(self, size, what):
        if (self.offset + size > len(self.data)):
            raise BundleFormatError(reason="truncated while reading {}".format(what))
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def header(self):
        magic = self._read(len(BUNDLE_MAGIC), "magic")
        if (magic[:-2] != BUNDLE_MAGIC[:-2]):
            raise BundleFormatError(reason="bad magic {!r}".format(magic))
        if (magic != BUNDLE_MAGIC):
            raise BundleFormatError(reason="unsupported version {!r}".format(magic[-2:]))
        party = self._read(1, "party")[0]
        if party not in PARTY_NAMES:
            raise BundleFormatError(reason="unknown party byte {}".format(party))
        return party

    def pool(self, ring):
        count, = _COUNT.unpack(self._read(_COUNT.size, "pool count"))
        if ring.is_binary:
            packed = np.frombuffer(self._read((count + 7) // 8, "Z_2 pool"), dtype=BIT)
            return np.unpackbits(packed, count=count, bitorder="little")
        return np.frombuffer(self._read(8 * count, "Z_2^64 pool"), dtype=WIRE_RING).astype(ZQ.dtype)

    def finish(self):
        if (self.offset != len(self.data)):
            raise BundleFormatError(reason="{} trailing bytes".format(len(self.data) - self.offset))


class _RandomSource:
    """
    Seeded mode draws from a PCG64 generator and is only meant for
    reproducible tests. Without a seed every byte comes from the OS
    CSPRNG.
    """
    __slots__ = ("generator",)
    def __init__(self, seed=None):
        if (seed is None):
            self.generator = None
        else:
            if (len(seed) != SEED_SIZE):
                raise ValueError("Dealer seeds are {} bytes.".format(SEED_SIZE))
            self.generator = np.random.Generator(np.random.PCG64(int.from_bytes(seed, "little")))

    def __call__(self, size):
        if (self.generator is None):
            return secrets.token_bytes(size)
        return self.generator.bytes(size)


def _split(ring, values, source):
    """ Uniform additive shares (alice, bob) of values. """
    alice = ring.random(source, len(values))
    return alice, ring.sub(values, alice)


def _deal_triples(ring, count, source):
    a = ring.random(source, count)
    b = ring.random(source, count)
    c = ring.mul(a, b)
    alice, bob = list(), list()
    for values in (a, b, c):
        share_a, share_b = _split(ring, values, source)
        alice.append(share_a)
        bob.append(share_b)
    return TriplePool(ring, *alice), TriplePool(ring, *bob)


def deal_demand(demand, seed=None):
    """ Deal pools sized exactly by a Demand. """
    source = _RandomSource(seed)
    z2_alice, z2_bob = _deal_triples(Z2, demand.z2_triples, source)
    zq_alice, zq_bob = _deal_triples(ZQ, demand.zq_triples, source)
    alice = RandomnessBundle(party=ALICE,
                             z2_triples=z2_alice,
                             zq_triples=zq_alice,
                             z2_masks=MaskPool(Z2, Z2.random(source, demand.alice_z2_masks), ALICE),
                             zq_masks=MaskPool(ZQ, ZQ.random(source, demand.alice_zq_masks), ALICE))
    bob = RandomnessBundle(party=BOB,
                           z2_triples=z2_bob,
                           zq_triples=zq_bob,
                           z2_masks=MaskPool(Z2, Z2.random(source, demand.bob_z2_masks), BOB),
                           zq_masks=MaskPool(ZQ, ZQ.random(source, demand.bob_zq_masks), BOB))
    return alice, bob


def deal(profile, seed=None):
    """
    Deal one session's bundles for a demand profile. Passing a seed makes
    the output deterministic and is insecure outside of tests.
    """
    return deal_demand(count_demand(profile), seed=seed)


def persist_bundle(bundle, path):
    with open(path, "wb") as f:
        f.write(bundle.to_bytes())
    logger.info("Wrote %s bundle to %s.", PARTY_NAMES[bundle.party], path)


def load_bundle(path):
    with open(path, "rb") as f:
        data = f.read()
    return RandomnessBundle.from_bytes(data)
