import numpy as np

from securetext.params import (
    ALICE,
    BOB,
    PARTY_NAMES,
    BIT_EXPONENT,
    RING_EXPONENT,
    SUPPORTED_EXPONENTS,
)
from securetext.types import BIT, RING, WIRE_RING
from securetext.errors import (
    UnsupportedRingError,
    RingMismatchError,
    PartyMismatchError,
    RangeError,
    ShapeMismatchError,
    MaskReuseError,
    TransportError,
)


class RingTag:
    """
    Identifies one of the two supported rings, Z_2 (exponent 1) or
    Z_{2^64} (exponent 64), and implements its arithmetic on Python
    ints and on numpy arrays alike.

    Z_2 elements are stored as uint8 0/1 values, so addition is XOR and
    multiplication is AND. Z_{2^64} elements are stored as uint64, whose
    native wrap-around is the reduction mod 2^64.
    """
    __slots__ = ("exponent", "modulus", "mask", "dtype", "element_size")
    def __init__(self, exponent):
        if exponent not in SUPPORTED_EXPONENTS:
            raise UnsupportedRingError(exponent=exponent, supported=SUPPORTED_EXPONENTS)
        self.exponent = exponent
        self.modulus = 1 << exponent
        self.mask = self.modulus - 1
        self.dtype = BIT if (exponent == BIT_EXPONENT) else RING
        self.element_size = 1 if (exponent == BIT_EXPONENT) else 8

    @property
    def is_binary(self):
        return (self.exponent == BIT_EXPONENT)

    def element(self, value):
        """ Range-check a public constant. """
        value = int(value)
        if not(0 <= value < self.modulus):
            raise RangeError(value=value, exponent=self.exponent)
        return value

    def array(self, values):
        return np.asarray(values, dtype=self.dtype)

    def _coerce(self, x):
        if isinstance(x, np.ndarray):
            return x if (x.dtype == self.dtype) else x.astype(self.dtype)
        return np.asarray(x, dtype=self.dtype)

    def _is_scalar(self, *operands):
        return not(any(isinstance(x, np.ndarray) for x in operands))

    def add(self, x, y):
        if self.is_binary:
            if self._is_scalar(x, y):
                return (x ^ y) & 1
            return self._coerce(x) ^ self._coerce(y)
        if self._is_scalar(x, y):
            return (x + y) & self.mask
        return self._coerce(x) + self._coerce(y)

    def sub(self, x, y):
        if self.is_binary:
            return self.add(x, y)
        if self._is_scalar(x, y):
            return (x - y) & self.mask
        return self._coerce(x) - self._coerce(y)

    def mul(self, x, y):
        if self.is_binary:
            if self._is_scalar(x, y):
                return (x & y) & 1
            return self._coerce(x) & self._coerce(y)
        if self._is_scalar(x, y):
            return (x * y) & self.mask
        return self._coerce(x) * self._coerce(y)

    def neg(self, x):
        return self.sub(0, x)

    def sum(self, x, axis=-1, keepdims=False):
        """ Sum along an axis of an element array. """
        x = self._coerce(x)
        if self.is_binary:
            return np.bitwise_xor.reduce(x, axis=axis, keepdims=keepdims)
        return np.sum(x, axis=axis, dtype=self.dtype, keepdims=keepdims)

    def encode(self, values):
        """ Serialize elements: 1 byte per Z_2 element, 8 bytes LE per Z_{2^64} element. """
        values = self._coerce(values)
        if self.is_binary:
            return values.tobytes()
        return values.astype(WIRE_RING).tobytes()

    def decode(self, data, shape):
        count = int(np.prod(shape, dtype=np.int64))
        if (len(data) != count * self.element_size):
            raise TransportError(reason="expected {} bytes of {} elements, received {}".format(
                count * self.element_size, self, len(data)))
        if self.is_binary:
            values = np.frombuffer(data, dtype=BIT).copy()
            if np.any(values > 1):
                raise TransportError(reason="Z_2 element outside {0, 1}")
        else:
            values = np.frombuffer(data, dtype=WIRE_RING).astype(RING)
        return values.reshape(shape)

    def random(self, generator, count):
        """ Uniform elements from a callable returning n random bytes. """
        if self.is_binary:
            return np.frombuffer(generator(count), dtype=BIT) & BIT(1)
        return np.frombuffer(generator(8 * count), dtype=WIRE_RING).astype(RING)

    def __eq__(self, other):
        return isinstance(other, RingTag) and (other.exponent == self.exponent)

    def __hash__(self):
        return hash(self.exponent)

    def __repr__(self):
        return "Z_2" if self.is_binary else "Z_2^{}".format(self.exponent)


Z2 = RingTag(BIT_EXPONENT)

ZQ = RingTag(RING_EXPONENT)


def _validate_party(party):
    if party not in PARTY_NAMES:
        raise ValueError("Unknown party {}.".format(party))
    return party


class Share:
    """ One party's additive share of a single ring element. """
    __slots__ = ("value", "ring", "party")
    def __init__(self, value, ring, party):
        self.value = ring.element(value)
        self.ring = ring
        self.party = _validate_party(party)

    def __eq__(self, other):
        return (isinstance(other, Share) and (other.value == self.value)
                and (other.ring == self.ring) and (other.party == self.party))

    def __repr__(self):
        return "Share({}, {}, {})".format(self.value, self.ring, PARTY_NAMES[self.party])


class ShareVector:
    """
    One party's shares of an array of ring elements. The array may have
    any shape; protocol operations treat leading axes as a batch and
    broadcast across them. Every element carries the same ring and party.
    """
    __slots__ = ("elements", "ring", "party")
    def __init__(self, elements, ring, party):
        self.elements = ring.array(elements)
        self.ring = ring
        self.party = _validate_party(party)

    @property
    def shape(self):
        return self.elements.shape

    @property
    def size(self):
        return self.elements.size

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, key):
        return self.like(self.elements[key])

    def like(self, elements):
        """ A vector with the same ring and party holding other elements. """
        return ShareVector(elements, self.ring, self.party)

    def reshape(self, *shape):
        return self.like(self.elements.reshape(*shape))

    def __repr__(self):
        return "ShareVector({}, {}, {})".format(self.shape, self.ring, PARTY_NAMES[self.party])


class BitVectorShare(ShareVector):
    """
    Z_2 shares of bit strings; the last axis holds the bits LSB-first
    and has the declared length.
    """
    __slots__ = ()
    def __init__(self, elements, party, length=None):
        super().__init__(elements, Z2, party)
        if (self.elements.ndim == 0):
            raise ShapeMismatchError(operation="BitVectorShare", left=self.shape, right="(..., length)")
        if ((length is not None) and (self.elements.shape[-1] != length)):
            raise ShapeMismatchError(operation="BitVectorShare", left=self.shape, right=length)

    @property
    def length(self):
        return self.elements.shape[-1]

    def like(self, elements):
        """ Still bit strings while the bit axis survives, else plain shares. """
        elements = self.ring.array(elements)
        if ((elements.ndim > 0) and (elements.shape[-1] == self.length)):
            return BitVectorShare(elements, self.party, self.length)
        return ShareVector(elements, self.ring, self.party)


class InputMask:
    """
    Random ring elements dealt to a single party for sharing its private
    inputs. A mask is consumed exactly once.
    """
    __slots__ = ("values", "ring", "party", "consumed")
    def __init__(self, values, ring, party):
        self.values = values
        self.ring = ring
        self.party = _validate_party(party)
        self.consumed = False

    def consume(self):
        if self.consumed:
            raise MaskReuseError(party=PARTY_NAMES[self.party])
        self.consumed = True
        return self.values


def _values(x):
    return x.value if isinstance(x, Share) else x.elements


def _rebuild(template, values):
    if isinstance(template, Share):
        return Share(values, template.ring, template.party)
    return ShareVector(values, template.ring, template.party)


def _check_pair(operation, a, b):
    if (a.ring != b.ring):
        raise RingMismatchError(operation=operation, left=a.ring, right=b.ring)
    if (a.party != b.party):
        raise PartyMismatchError(operation=operation,
                                 left=PARTY_NAMES[a.party],
                                 right=PARTY_NAMES[b.party])


def _public(c, ring):
    """ Public constants are range-checked ints or ring-typed arrays. """
    if isinstance(c, np.ndarray):
        return ring.array(c)
    return ring.element(c)


def local_add(a, b):
    """ [[x + y]] from [[x]] and [[y]]; no communication. """
    _check_pair("local_add", a, b)
    return _rebuild(a, a.ring.add(_values(a), _values(b)))


def local_sub(a, b):
    """ [[x - y]] from [[x]] and [[y]]; no communication. """
    _check_pair("local_sub", a, b)
    return _rebuild(a, a.ring.sub(_values(a), _values(b)))


def local_scalar_mul(c, a):
    """ [[c * x]] for a public constant c. """
    return _rebuild(a, a.ring.mul(_public(c, a.ring), _values(a)))


def local_add_const(c, a):
    """ [[x + c]]: Alice adds the constant, Bob keeps his share. """
    if (a.party == ALICE):
        return _rebuild(a, a.ring.add(_values(a), _public(c, a.ring)))
    return a


def local_neg(a):
    return _rebuild(a, a.ring.neg(_values(a)))


def reconstruct(a, b):
    """ Combine Alice's and Bob's shares into the shared value. """
    if (a.ring != b.ring):
        raise RingMismatchError(operation="reconstruct", left=a.ring, right=b.ring)
    if ((a.party != ALICE) or (b.party != BOB)):
        raise PartyMismatchError(operation="reconstruct",
                                 left=PARTY_NAMES[a.party],
                                 right=PARTY_NAMES[b.party])
    return a.ring.add(_values(a), _values(b))


def share_with_mask(x, mask):
    """
    Share a private input x with an unused dealt mask r: the owner keeps
    r as its share and sends the counterpart message c = x - r.
    Returns (owner share, c).
    """
    r = mask.consume()
    ring = mask.ring
    if isinstance(x, np.ndarray):
        r = ring.array(r).reshape(x.shape)
        return ShareVector(r, ring, mask.party), ring.sub(ring.array(x), r)
    x = ring.element(x)
    r = int(r)
    return Share(r, ring, mask.party), ring.sub(x, r)


def to_bits(values, length):
    """ uint64 values -> uint8 array with a trailing LSB-first bit axis. """
    values = np.asarray(values, dtype=RING)
    shifts = np.arange(length, dtype=RING)
    return ((values[..., None] >> shifts) & RING(1)).astype(BIT)


def from_bits(bits):
    """ Inverse of to_bits. """
    bits = np.asarray(bits, dtype=RING)
    shifts = np.arange(bits.shape[-1], dtype=RING)
    return np.bitwise_or.reduce(bits << shifts, axis=-1)
