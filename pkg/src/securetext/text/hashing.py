import hashlib
import struct

from securetext.params import (
    DEFAULT_HASH_P,
    DEFAULT_HASH_A,
    DEFAULT_HASH_B,
    DEFAULT_TOKEN_BITS,
)
from securetext.errors import (
    HashParamsError,
    LexiconCollisionError,
)


# Witnesses that make Miller-Rabin exact below 3.3 * 10^24.
_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n):
    if (n < 2):
        return False
    for q in _WITNESSES:
        if not(n % q):
            return (n == q)
    d, s = n - 1, 0
    while not(d & 1):
        d >>= 1
        s += 1
    for a in _WITNESSES:
        x = pow(a, d, n)
        if (x in (1, n - 1)):
            continue
        for _ in range(s - 1):
            x = pow(x, 2, n)
            if (x == n - 1):
                break
        else:
            return False
    return True


class HashParams:
    """
    Public Carter-Wegman parameters mapping words to l-bit ids:

        id = ((a * N + b) mod p) mod 2^l

    where N is the SHA-224 digest of the word's UTF-8 bytes read as a
    big-endian integer.
    """
    __slots__ = ("p", "a", "b", "l")
    def __init__(self, p=DEFAULT_HASH_P, a=DEFAULT_HASH_A, b=DEFAULT_HASH_B, l=DEFAULT_TOKEN_BITS):
        if not(is_prime(p)):
            raise HashParamsError(reason="p = {} is not prime".format(p))
        if not((0 < a < p) and (0 <= b < p)):
            raise HashParamsError(reason="a and b must satisfy 0 < a < p and 0 <= b < p")
        if not(1 <= l <= 62):
            raise HashParamsError(reason="l = {} must lie in [1, 62]".format(l))
        self.p = p
        self.a = a
        self.b = b
        self.l = l

    def with_bits(self, l):
        return HashParams(p=self.p, a=self.a, b=self.b, l=l)

    def to_bytes(self):
        return struct.pack("<QQQB", self.p, self.a, self.b, self.l)

    def __eq__(self, other):
        return isinstance(other, HashParams) and (other.to_bytes() == self.to_bytes())

    def __hash__(self):
        return hash(self.to_bytes())

    def __repr__(self):
        return "HashParams(p={}, a={}, b={}, l={})".format(self.p, self.a, self.b, self.l)


def tokenize(text):
    """ Lowercased whitespace-separated unigrams plus adjacent-pair bigrams. """
    words = text.lower().split()
    bigrams = ("{} {}".format(first, second) for first, second in zip(words, words[1:]))
    return set(words).union(bigrams)


def digest_integer(word):
    return int.from_bytes(hashlib.sha224(word.encode("utf-8")).digest(), "big")


def hash_token(word, params):
    return ((params.a * digest_integer(word) + params.b) % params.p) % (1 << params.l)


class TokenSet:
    """ Deduplicated l-bit token ids, kept sorted. """
    __slots__ = ("tokens", "l")
    def __init__(self, tokens, l):
        tokens = sorted(set(int(token) for token in tokens))
        if (tokens and not(0 <= tokens[0] and tokens[-1] < (1 << l))):
            raise HashParamsError(reason="token outside the {}-bit range".format(l))
        self.tokens = tokens
        self.l = l

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __contains__(self, token):
        return token in self.tokens

    def __eq__(self, other):
        return isinstance(other, TokenSet) and (other.l == self.l) and (other.tokens == self.tokens)

    def __repr__(self):
        return "TokenSet({} tokens, l={})".format(len(self), self.l)


class Lexicon:
    """
    Bob's model features hashed in model order. ids[i] is the token id of
    feature i; unlike a TokenSet it is ordered and may not contain
    duplicates.
    """
    __slots__ = ("features", "ids", "l")
    def __init__(self, features, ids, l):
        self.features = list(features)
        self.ids = list(ids)
        self.l = l

    def __len__(self):
        return len(self.ids)

    def indicator(self, token_set):
        """ Plaintext feature vector: x_i = 1 iff ids[i] is in token_set. """
        present = set(token_set)
        return [int(token in present) for token in self.ids]


def build_token_set(text, params):
    return TokenSet((hash_token(word, params) for word in tokenize(text)), params.l)


def build_lexicon(features, params):
    """
    Hash model features in order. Two features landing on the same id
    would share a weight, so that is an error.
    """
    seen = dict()
    ids = list()
    for feature in features:
        token = hash_token(feature, params)
        if (token in seen):
            raise LexiconCollisionError(first=seen[token], second=feature, token=token)
        seen[token] = feature
        ids.append(token)
    return Lexicon(features, ids, params.l)


def collision_report(words, params):
    """ Groups of distinct words sharing a hashed id, as {id: [words]}. """
    buckets = dict()
    for word in sorted(set(words)):
        buckets.setdefault(hash_token(word, params), list()).append(word)
    return {token:group for token, group in sorted(buckets.items()) if (len(group) > 1)}
