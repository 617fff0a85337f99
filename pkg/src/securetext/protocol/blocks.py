"""
Interactive building blocks over additively shared values. Every block
takes shares of matching shape, treats leading axes as a batch and
performs its multiplications level by level, so the number of rounds
depends only on bit-lengths and never on the batch size.
"""
import numpy as np

from securetext.params import ALICE, PARTY_NAMES, RING_EXPONENT
from securetext.errors import (
    RingMismatchError,
    PartyMismatchError,
    ShapeMismatchError,
)
from securetext.ring.core import (
    Z2,
    ZQ,
    Share,
    ShareVector,
    BitVectorShare,
    local_add,
    local_sub,
    local_add_const,
    local_scalar_mul,
    local_neg,
    to_bits,
)
from securetext.protocol.context import share_private_inputs


def _check_operands(operation, x, y):
    if (x.ring != y.ring):
        raise RingMismatchError(operation=operation, left=x.ring, right=y.ring)
    if (x.party != y.party):
        raise PartyMismatchError(operation=operation, left=PARTY_NAMES[x.party], right=PARTY_NAMES[y.party])
    if (x.shape != y.shape):
        raise ShapeMismatchError(operation=operation, left=x.shape, right=y.shape)


def _beaver(ctx, ring, x, y):
    """ Elementwise products of two equally shaped element arrays; one round. """
    shape = x.shape
    a, b, c = ctx.bundle.take_triples(ring, x.size)
    a, b, c = a.reshape(shape), b.reshape(shape), c.reshape(shape)
    d_share = ring.sub(x, a)
    e_share = ring.sub(y, b)
    opened = ctx.open(ring, np.stack([d_share, e_share]))
    d, e = opened[0], opened[1]
    ctx.record(ring, opened)
    z = ring.add(c, ring.add(ring.mul(d, b), ring.mul(e, a)))
    if (ctx.party == ALICE):
        z = ring.add(z, ring.mul(d, e))
    return z


def secure_mul(ctx, x, y):
    """
    [[x*y]] from [[x]] and [[y]] with one Beaver triple per element and
    a single round. Accepts a pair of Shares or a pair of ShareVectors.
    """
    _check_operands("secure_mul", x, y)
    if isinstance(x, Share):
        z = _beaver(ctx, x.ring, x.ring.array([x.value]), y.ring.array([y.value]))
        return Share(int(z[0]), x.ring, x.party)
    return x.like(_beaver(ctx, x.ring, x.elements, y.elements))


def secure_inner_product(ctx, u, v):
    """
    Batched inner products along the last axis; one round. The summed
    axis is kept with length 1.
    """
    _check_operands("secure_inner_product", u, v)
    if (u.elements.ndim == 0):
        raise ShapeMismatchError(operation="secure_inner_product", left=u.shape, right="(..., k)")
    products = _beaver(ctx, u.ring, u.elements, v.elements)
    return ShareVector(u.ring.sum(products, axis=-1, keepdims=True), u.ring, u.party)


def _drop_bit_axis(elements):
    return elements[..., 0] if (elements.ndim > 1) else elements


def secure_equality(ctx, x, y):
    """
    [[1]] in Z_2 where x == y bitwise, else [[0]]. The indicator is the
    product of r_i = x_i + y_i + 1 over all bits, computed as a binary
    tree: length-1 triples per test and ceil(log2 length) rounds.

    For inputs of shape (..., length) the result has shape (...), or
    (1,) for a single pair.
    """
    _check_operands("secure_equality", x, y)
    ctx.equality_tests += int(np.prod(x.shape[:-1], dtype=np.int64))
    r = local_add_const(1, local_add(x, y)).elements
    while (r.shape[-1] > 1):
        half = r.shape[-1] // 2
        product = _beaver(ctx, Z2, r[..., :half], r[..., half:2 * half])
        if (r.shape[-1] % 2):
            product = np.concatenate([product, r[..., -1:]], axis=-1)
        r = product
    return ShareVector(_drop_bit_axis(r), Z2, x.party)


def _or(ctx, left, right):
    return Z2.add(Z2.add(left, right), _beaver(ctx, Z2, left, right))


def secure_compare_geq(ctx, x, y):
    """
    [[1]] in Z_2 where x >= y as unsigned LSB-first bit strings.

    w_i = x_i + y_i marks differing bits. A Kogge-Stone prefix OR from
    the top bit down gives u_i = w_i v ... v w_{length-1}; d_i = u_i +
    u_{i+1} is 1 only at the most significant difference, and there x
    decides the result:

        c = (1 + u_0) + sum_i d_i * x_i  (mod 2)
    """
    _check_operands("secure_compare_geq", x, y)
    length = x.shape[-1]
    u = local_add(x, y).elements
    stride = 1
    while (stride < length):
        low, high = u[..., :length - stride], u[..., stride:]
        u = np.concatenate([_or(ctx, low, high), u[..., length - stride:]], axis=-1)
        stride <<= 1
    upper = np.concatenate([u[..., 1:], np.zeros_like(u[..., :1])], axis=-1)
    d = Z2.add(u, upper)
    selected = Z2.sum(_beaver(ctx, Z2, d, x.elements), axis=-1, keepdims=True)
    c = Z2.add(selected, u[..., :1])
    c = local_add_const(1, ShareVector(c, Z2, x.party)).elements
    return ShareVector(_drop_bit_axis(c), Z2, x.party)


def _own_bits(ctx, x, length):
    """ Trivial Z_2 sharings of the two parties' private share bits. """
    mine = to_bits(x.elements, length)
    nothing = np.zeros_like(mine)
    if (ctx.party == ALICE):
        return mine, nothing
    return nothing, mine


def secure_bit_decompose(ctx, x, length=RING_EXPONENT):
    """
    Z_2 shares of the low length bits of a Z_2^64-shared x.

    x = x_A + x_B mod 2^64, so each party decomposes its own share and
    the two private bit strings are added with a shared ripple-carry
    adder; the carry out of the top bit is dropped. Generate bits
    g_i = a_i*b_i take one round, then each carry

        c_{i+1} = g_i + c_i * (a_i + b_i)

    takes another: 2*length-3 triples and length-1 rounds.
    """
    if (x.ring != ZQ):
        raise RingMismatchError(operation="secure_bit_decompose", left=x.ring, right=ZQ)
    a, b = _own_bits(ctx, x, length)
    p = Z2.add(a, b)
    if (length == 1):
        return BitVectorShare(p, x.party, length)
    g = _beaver(ctx, Z2, a[..., :length - 1], b[..., :length - 1])
    carries = [np.zeros_like(p[..., :1]), g[..., :1]]
    for i in range(1, length - 1):
        propagated = _beaver(ctx, Z2, carries[i], p[..., i:i + 1])
        carries.append(Z2.add(g[..., i:i + 1], propagated))
    return BitVectorShare(Z2.add(p, np.concatenate(carries, axis=-1)), x.party, length)


def convert_2_to_q(ctx, x):
    """
    Lift Z_2-shared bits into Z_2^64: each party shares its own bit in
    Z_2^64 (one round), then

        [[x]]_q = [[x_A]]_q + [[x_B]]_q - 2 [[x_A x_B]]_q

    with one Z_2^64 multiplication per bit (one round).
    """
    if (x.ring != Z2):
        raise RingMismatchError(operation="convert_2_to_q", left=x.ring, right=Z2)
    own, peer = share_private_inputs(ctx, x.elements.astype(ZQ.dtype), x.shape, ZQ)
    if (ctx.party == ALICE):
        alice_bit, bob_bit = own, peer
    else:
        alice_bit, bob_bit = peer, own
    product = alice_bit.like(_beaver(ctx, ZQ, alice_bit.elements, bob_bit.elements))
    return local_sub(local_add(alice_bit, bob_bit), local_scalar_mul(2, product))


def one_minus(x):
    """ [[1 - x]] locally. """
    return local_add_const(1, local_neg(x))

