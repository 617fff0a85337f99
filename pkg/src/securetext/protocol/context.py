from securetext.params import ALICE
from securetext.ring.core import ShareVector, share_with_mask


class ProtocolContext:
    """
    Everything one party needs to run building blocks within a session:
    its party id, the transport to the peer and its randomness bundle.

    equality_tests counts secure equality tests performed. When trace is
    a list, every value opened by a Beaver multiplication is appended
    to it as (ring, array).
    """
    __slots__ = ("party", "transport", "bundle", "equality_tests", "trace")
    def __init__(self, party, transport, bundle, trace=False):
        self.party = party
        self.transport = transport
        self.bundle = bundle
        self.equality_tests = 0
        self.trace = list() if trace else None

    @property
    def is_alice(self):
        return (self.party == ALICE)

    @property
    def rounds(self):
        return self.transport.rounds

    def exchange(self, payload):
        return self.transport.exchange(payload)

    def open(self, ring, elements):
        """ Reveal shared elements to both parties in one round. """
        elements = ring.array(elements)
        peer = ring.decode(self.exchange(ring.encode(elements)), elements.shape)
        return ring.add(elements, peer)

    def record(self, ring, values):
        if (self.trace is not None):
            self.trace.append((ring, values))


def open_shares(ctx, vector):
    """ Public values of a shared vector; one round. """
    return ctx.open(vector.ring, vector.elements)


def share_private_inputs(ctx, values, peer_shape, ring):
    """
    Secret-share this party's private values and the peer's in a single
    round. Each side masks its own values with dealt input masks and
    sends the masked messages; a party keeps the mask as its share of
    its own input and uses the received message as its share of the
    peer's input.

    values      This party's inputs (any shape, possibly empty).
    peer_shape  Shape of the peer's inputs.
    Returns (share of own input, share of peer input).
    """
    values = ring.array(values)
    mask = ctx.bundle.take_masks(ring, values.size)
    own, message = share_with_mask(values, mask)
    received = ring.decode(ctx.exchange(ring.encode(message)), peer_shape)
    return own, ShareVector(received, ring, ctx.party)
