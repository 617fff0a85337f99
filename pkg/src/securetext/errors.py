from securetext.params import (
    RING_EXPONENT_HINT,
    RING_MISMATCH_HINT,
    PARTY_MISMATCH_HINT,
    RANGE_HINT,
    SHAPE_HINT,
    MASK_REUSE_HINT,
    EXHAUSTED_HINT,
    BUNDLE_FORMAT_HINT,
    PROFILE_HINT,
    HASH_PARAMS_HINT,
    COLLISION_HINT,
    OVERFLOW_HINT,
    PADDING_HINT,
    ENCODING_HINT,
    MODEL_HINT,
    TRANSPORT_HINT,
    SEQUENCE_HINT,
    TIMEOUT_HINT,
    CLOSED_HINT,
    VERSION_HINT,
    PROFILE_MISMATCH_HINT,
    SESSION_MISMATCH_HINT,
    HANDSHAKE_HINT,
    PHASE_HINT,
    CONFIG_HINT,
)


class SecureTextError(Exception):
    """
    Base class for every failure raised by securetext. Subclasses
    describe themselves with a template that get_message fills in
    from the keyword arguments given at construction; the arguments
    stay available as attributes of the error.
    """
    template = "{reason}"

    def __init__(self, **kwargs):
        self.details = kwargs
        super().__init__(self.get_message(**kwargs))

    def get_message(self, **kwargs):
        return self.template.format(**kwargs)


class RingUsageError(SecureTextError):
    """ Cross-ring, cross-party or out-of-range use of shares. """


class UnsupportedRingError(RingUsageError):
    template = RING_EXPONENT_HINT


class RingMismatchError(RingUsageError):
    template = RING_MISMATCH_HINT


class PartyMismatchError(RingUsageError):
    template = PARTY_MISMATCH_HINT


class RangeError(RingUsageError):
    template = RANGE_HINT


class ShapeMismatchError(RingUsageError):
    template = SHAPE_HINT


class MaskReuseError(SecureTextError):
    template = MASK_REUSE_HINT


class RandomnessExhaustedError(SecureTextError):
    template = EXHAUSTED_HINT


class BundleFormatError(SecureTextError):
    template = BUNDLE_FORMAT_HINT


class ProfileError(SecureTextError):
    template = PROFILE_HINT


class HashParamsError(SecureTextError):
    template = HASH_PARAMS_HINT


class LexiconCollisionError(SecureTextError):
    template = COLLISION_HINT


class BucketOverflowError(SecureTextError):
    template = OVERFLOW_HINT


class PaddingOverflowError(SecureTextError):
    template = PADDING_HINT


class EncodingError(SecureTextError):
    template = ENCODING_HINT


class ModelError(SecureTextError):
    template = MODEL_HINT


class ConfigError(SecureTextError):
    template = CONFIG_HINT


class TransportError(SecureTextError):
    template = TRANSPORT_HINT


class SequenceError(TransportError):
    template = SEQUENCE_HINT


class TransportTimeoutError(TransportError):
    template = TIMEOUT_HINT


class TransportClosedError(TransportError):
    template = CLOSED_HINT


class HandshakeError(TransportError):
    template = HANDSHAKE_HINT


class VersionMismatchError(HandshakeError):
    template = VERSION_HINT


class ProfileMismatchError(HandshakeError):
    template = PROFILE_MISMATCH_HINT


class SessionMismatchError(HandshakeError):
    template = SESSION_MISMATCH_HINT


class PhaseError(SecureTextError):
    """ Any failure inside a pipeline phase, tagged with the phase. """
    template = PHASE_HINT

    @property
    def cause(self):
        return self.details.get("cause")

    @property
    def phase(self):
        return self.details.get("phase")
