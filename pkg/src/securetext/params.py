#################
# I/O Constants #
#################
APPAUTHOR = "SecureText"

APPNAME = "securetext"

# Magic prefix of a randomness bundle file. The trailing two characters are
# the format version.
BUNDLE_MAGIC = b"TIBNDL01"

# Magic prefix of the handshake hello message.
HANDSHAKE_MAGIC = b"STXH"

# Wire protocol version exchanged at handshake.
PROTOCOL_VERSION = 1

# session-id (16) + sequence (8) + payload-length (4), little-endian.
FRAME_HEADER_FORMAT = "<16sQI"

SESSION_ID_SIZE = 16

# Default name of a saved benchmark report.
REPORT_FILENAME = "bench-{}.csv"

BENCH_CSV_HEADER = ["phase", "mean_s", "std_s", "rounds", "bytes"]

# Files shipped under securetext/data.
DATA_DIRNAME = "data"
BUNDLED_CORPUS = "synthetic_corpus.tsv"
BUNDLED_LR_MODEL = "toy_lr.json"
BUNDLED_ADA_MODEL = "toy_ada.json"


###########
# Parties #
###########
ALICE = 0

BOB = 1

PARTY_NAMES = {
    ALICE:"alice",
    BOB:"bob",
}


#######################
# Protocol Parameters #
#######################
# Exponent of the arithmetic ring Z_{2^64}.
RING_EXPONENT = 64

# Exponent of the boolean ring Z_2.
BIT_EXPONENT = 1

SUPPORTED_EXPONENTS = (BIT_EXPONENT, RING_EXPONENT)

# Fractional bits of the fixed-point encoding of model weights.
DEFAULT_FRACTION_BITS = 16

# Carter-Wegman constants for mapping a SHA-224 digest to a token id.
DEFAULT_HASH_P = 1301081
DEFAULT_HASH_A = 972
DEFAULT_HASH_B = 52097

# Token bit-length for unigram-only and unigram+bigram feature sets.
UNIGRAM_TOKEN_BITS = 13
BIGRAM_TOKEN_BITS = 17
DEFAULT_TOKEN_BITS = BIGRAM_TOKEN_BITS

# Public constants of the bucket-assignment hash.
BUCKET_HASH_A = 1117
BUCKET_HASH_B = 80021

# Width of the tag prepended to token ids whenever dummies are in play:
# 00 real token, 01 Alice dummy, 10 Bob dummy.
TAG_BITS = 2
REAL_TAG = 0
ALICE_DUMMY_TAG = 1
BOB_DUMMY_TAG = 2

# Alice's token set is padded to this size unless padding is disabled.
DEFAULT_PAD_TO = 64

# Seconds to wait for the peer before aborting a session.
DEFAULT_SESSION_TIMEOUT = 60.0

# Bytes in a deterministic dealer seed.
SEED_SIZE = 32

# Model kinds.
LR = "lr"
ADABOOST = "ada"
MODEL_KINDS = (LR, ADABOOST)

# Disclosure policies.
TO_BOB = "to-bob"
TO_ALICE = "to-alice"
TO_BOTH = "to-both"
KEEP_SHARED = "keep-shared"
DISCLOSURE_POLICIES = (TO_BOB, TO_ALICE, TO_BOTH, KEEP_SHARED)

# Phase names used for timing and diagnostics.
EXTRACTION_PHASE = "extraction"
CLASSIFICATION_PHASE = "classification"
DISCLOSURE_PHASE = "disclosure"
TOTAL = "total"

# Trials used by the bucket-load Monte Carlo simulation.
DEFAULT_BUCKET_TRIALS = 10000

# Acceptable simulated overflow rate when suggesting a bucket capacity.
DEFAULT_OVERFLOW_TARGET = 0.0001

# Worker threads used by batch classification.
DEFAULT_BATCH_WORKERS = 4

# Keys accepted in a JSON configuration file.
CONFIG_KEYS = frozenset([
    "hash_p",
    "hash_a",
    "hash_b",
    "token_bits",
    "pad_to",
    "session_timeout",
    "fraction_bits",
])


#########
# Hints #
#########
RING_EXPONENT_HINT = "Unsupported ring exponent {exponent}; only {supported} are constructible."

RING_MISMATCH_HINT = "Operation {operation} mixes shares of {left} and {right}."

PARTY_MISMATCH_HINT = "Operation {operation} mixes shares held by {left} and {right}."

RANGE_HINT = "Constant {value} is outside the ring Z_2^{exponent}."

SHAPE_HINT = "Operation {operation} expects matching shapes, got {left} and {right}."

MASK_REUSE_HINT = "Input mask of {party} was already consumed; masks must never be reused."

EXHAUSTED_HINT = "Randomness pool {pool} exhausted: requested {requested}, {remaining} remaining."

BUNDLE_FORMAT_HINT = "Malformed randomness bundle: {reason}."

PROFILE_HINT = "Invalid demand profile: {reason}."

HASH_PARAMS_HINT = "Invalid hash parameters: {reason}."

COLLISION_HINT = "Lexicon features {first!r} and {second!r} both hash to {token}; raise --token-bits or drop one."

OVERFLOW_HINT = "Bucket {bucket} of {owner} holds {count} elements but capacity is {capacity}."

PADDING_HINT = "Text has {count} tokens but the pad size is {pad_to}; raise --pad-to or pass --no-pad."

ENCODING_HINT = "Cannot encode {value} with {fraction_bits} fractional bits: {reason}."

MODEL_HINT = "Invalid model: {reason}."

TRANSPORT_HINT = "Transport failure: {reason}."

SEQUENCE_HINT = "Frame sequence violation: expected {expected}, received {received}."

TIMEOUT_HINT = "Peer did not respond within {timeout} seconds."

CLOSED_HINT = "Peer closed the session."

VERSION_HINT = "Protocol version mismatch: local {local}, peer {peer}."

PROFILE_MISMATCH_HINT = "Parties are configured differently (demand profile digest mismatch)."

SESSION_MISMATCH_HINT = "Session id mismatch: expected {expected}, peer sent {received}."

HANDSHAKE_HINT = "Handshake failed: {reason}."

PHASE_HINT = "Session aborted during {phase} phase: {cause}"

CONFIG_HINT = "Invalid configuration: {reason}."

INVALID_SEED = "--seed must be {} hexadecimal characters.".format(2 * SEED_SIZE)

INVALID_ADDRESS = "Addresses must have the form HOST:PORT."

INVALID_BUCKETS = "--buckets must have the form t,s1,s2 with integers t >= 0, s1 >= 1, s2 >= 1."

MISSING_BUNDLE = "Provide either --bundle or --dealer."

DEFAULT_VERBOSE_HELP = "Echo phase progress and diagnostics."

DEFAULT_TOKEN_BITS_HELP = "Bit-length l of hashed tokens. (Default:{})".format(DEFAULT_TOKEN_BITS)

DEFAULT_PAD_TO_HELP = "Pad Alice's token set to this size. (Default:{})".format(DEFAULT_PAD_TO)

DEFAULT_TIMEOUT_HELP = "Seconds to wait for the peer. (Default:{})".format(DEFAULT_SESSION_TIMEOUT)

DEFAULT_BUCKETS_HELP = "Bucketize feature extraction with layout t,s1,s2."

DEFAULT_DISCLOSURE_HELP = "Which party learns the class label. (Default:{})".format(TO_BOB)

INVALID_SESSION_ID = "--session-id must be {} hexadecimal characters.".format(2 * SESSION_ID_SIZE)

DEFAULT_RETRIES_HELP = "Retry connecting and the handshake this many times. (Default:0)"

DEFAULT_JOBS_HELP = "Number of sessions to run. (Default:3)"

DEFAULT_TARGET_HELP = "Acceptable overflow probability. (Default:{})".format(DEFAULT_OVERFLOW_TARGET)

DEFAULT_TRIALS_HELP = "Monte Carlo trials per capacity. (Default:{})".format(DEFAULT_BUCKET_TRIALS)
