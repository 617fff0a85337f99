import math
from decimal import Decimal
from fractions import Fraction

from securetext.params import DEFAULT_FRACTION_BITS, RING_EXPONENT
from securetext.errors import EncodingError


_MODULUS = 1 << RING_EXPONENT

_SIGN_BIT = 1 << (RING_EXPONENT - 1)


def exact(value):
    """ Exact rational of an int, float, Decimal, Fraction or decimal string. """
    if isinstance(value, bool):
        raise TypeError(value)
    if isinstance(value, str):
        return Fraction(Decimal(value))
    return Fraction(value)


def to_signed(raw):
    return (raw - _MODULUS) if (raw & _SIGN_BIT) else raw


def from_signed(value):
    return value % _MODULUS


def encode_fp(value, fraction_bits=DEFAULT_FRACTION_BITS):
    """
    Two's-complement raw ring element of round(value * 2^f), rounding
    halves up. The scaled value must stay below 2^63 in magnitude.
    """
    try:
        v = exact(value)
    except (TypeError, ValueError, ArithmeticError) as e:
        raise EncodingError(value=value, fraction_bits=fraction_bits, reason=str(e) or "not a real number")
    scaled = math.floor(v * (1 << fraction_bits) + Fraction(1, 2))
    if (abs(scaled) >= _SIGN_BIT):
        raise EncodingError(value=value, fraction_bits=fraction_bits,
                            reason="magnitude must stay below 2^{}".format(RING_EXPONENT - 1 - fraction_bits))
    return from_signed(scaled)


def decode_fp(raw, fraction_bits=DEFAULT_FRACTION_BITS):
    """ Exact rational value of a raw two's-complement fixed-point element. """
    return Fraction(to_signed(raw), 1 << fraction_bits)


class FixedPoint:
    __slots__ = ("raw", "fraction_bits")
    def __init__(self, raw, fraction_bits=DEFAULT_FRACTION_BITS):
        self.raw = raw % _MODULUS
        self.fraction_bits = fraction_bits

    @classmethod
    def from_real(cls, value, fraction_bits=DEFAULT_FRACTION_BITS):
        return cls(encode_fp(value, fraction_bits), fraction_bits)

    @property
    def signed(self):
        return to_signed(self.raw)

    def value(self):
        return decode_fp(self.raw, self.fraction_bits)

    def __float__(self):
        return float(self.value())

    def __eq__(self, other):
        return (isinstance(other, FixedPoint) and (other.raw == self.raw)
                and (other.fraction_bits == self.fraction_bits))

    def __repr__(self):
        return "FixedPoint({}, f={})".format(float(self), self.fraction_bits)
