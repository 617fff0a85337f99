import json
from decimal import Decimal

import numpy as np

from securetext.params import (
    LR,
    ADABOOST,
    RING_EXPONENT,
    DEFAULT_FRACTION_BITS,
)
from securetext.types import RING
from securetext.errors import (
    ModelError,
    EncodingError,
)
from securetext.scoring.fixedpoint import (
    exact,
    encode_fp,
    to_signed,
    from_signed,
)
from securetext.text.hashing import (
    HashParams,
    TokenSet,
    build_lexicon,
    build_token_set,
)


_HEADROOM = 1 << (RING_EXPONENT - 1)


def _encode_all(values, fraction_bits):
    try:
        return [encode_fp(value, fraction_bits) for value in values]
    except EncodingError as e:
        raise ModelError(reason=str(e))


def _exact_all(values):
    try:
        return [exact(value) for value in values]
    except (TypeError, ValueError, ArithmeticError) as e:
        raise ModelError(reason="non-numeric parameter ({})".format(e))


class LRModel:
    """
    Logistic regression over binary features: class 1 iff
    <x, w> + b >= 0. Weights are kept both exactly and fixed-point
    encoded; the encoded score can never overflow for a binary x.
    """
    kind = LR
    __slots__ = ("features", "weights", "intercept", "fraction_bits", "weights_raw", "intercept_raw")
    def __init__(self, features, weights, intercept, fraction_bits=DEFAULT_FRACTION_BITS):
        if (len(features) != len(weights)):
            raise ModelError(reason="{} features but {} weights".format(len(features), len(weights)))
        if not(features):
            raise ModelError(reason="a model needs at least one feature")
        self.features = list(features)
        self.fraction_bits = fraction_bits
        self.weights = _exact_all(weights)
        self.intercept = _exact_all([intercept])[0]
        self.weights_raw = _encode_all(self.weights, fraction_bits)
        self.intercept_raw = _encode_all([self.intercept], fraction_bits)[0]
        self._check_headroom()

    def _check_headroom(self):
        bound = sum(abs(to_signed(raw)) for raw in self.weights_raw) + abs(to_signed(self.intercept_raw))
        if (bound >= _HEADROOM):
            raise ModelError(reason="score could overflow: sum|w| + |b| must stay below 2^{}".format(
                RING_EXPONENT - 1 - self.fraction_bits))

    def __len__(self):
        return len(self.features)

    def bob_inputs(self):
        """ Everything Bob secret-shares for scoring, in sharing order. """
        return np.array(self.weights_raw + [self.intercept_raw], dtype=RING)

    def expanded(self, index_map, n_slots):
        """ Same model laid out over n_slots positions; dummies weigh 0. """
        weights = [0] * n_slots
        features = [""] * n_slots
        for i, position in enumerate(index_map):
            weights[position] = self.weights[i]
            features[position] = self.features[i]
        return LRModel(features, weights, self.intercept, self.fraction_bits)

    def score(self, x):
        return sum(w for w, bit in zip(self.weights, x) if bit) + self.intercept

    def encoded_score(self, x):
        """ Raw ring element of the fixed-point score. """
        total = sum(to_signed(raw) for raw, bit in zip(self.weights_raw, x) if bit)
        return from_signed(total + to_signed(self.intercept_raw))

    def classify(self, x, encoded=False):
        if encoded:
            return 1 - (self.encoded_score(x) >> (RING_EXPONENT - 1))
        return int(self.score(x) >= 0)


class StumpModel:
    """
    AdaBoost over depth-1 stumps, one per binary feature. Stump i votes
    y[i][x_i] for class 0 and z[i][x_i] for class 1; class 1 wins ties.
    """
    kind = ADABOOST
    __slots__ = ("features", "y", "z", "fraction_bits", "y_raw", "z_raw")
    def __init__(self, features, y, z, fraction_bits=DEFAULT_FRACTION_BITS):
        if not(len(features) == len(y) == len(z)):
            raise ModelError(reason="{} features, {} y pairs, {} z pairs".format(len(features), len(y), len(z)))
        if not(features):
            raise ModelError(reason="a model needs at least one feature")
        if any(len(pair) != 2 for pair in list(y) + list(z)):
            raise ModelError(reason="y and z entries are [value at x=0, value at x=1] pairs")
        self.features = list(features)
        self.fraction_bits = fraction_bits
        self.y = [_exact_all(pair) for pair in y]
        self.z = [_exact_all(pair) for pair in z]
        if any(v < 0 for pair in self.y + self.z for v in pair):
            raise ModelError(reason="weighted probabilities must be non-negative")
        self.y_raw = [_encode_all(pair, fraction_bits) for pair in self.y]
        self.z_raw = [_encode_all(pair, fraction_bits) for pair in self.z]
        self._check_headroom()

    def _check_headroom(self):
        for pairs in (self.y_raw, self.z_raw):
            if (sum(max(pair) for pair in pairs) >= _HEADROOM):
                raise ModelError(reason="aggregated votes could overflow 2^{}".format(
                    RING_EXPONENT - 1 - self.fraction_bits))

    def __len__(self):
        return len(self.features)

    def bob_inputs(self):
        """ Flattened y followed by flattened z. """
        flat = [v for pair in self.y_raw for v in pair] + [v for pair in self.z_raw for v in pair]
        return np.array(flat, dtype=RING)

    def expanded(self, index_map, n_slots):
        """ Same model over n_slots positions; dummy stumps vote (0, 0). """
        y = [[0, 0] for _ in range(n_slots)]
        z = [[0, 0] for _ in range(n_slots)]
        features = [""] * n_slots
        for i, position in enumerate(index_map):
            y[position], z[position] = self.y[i], self.z[i]
            features[position] = self.features[i]
        return StumpModel(features, y, z, self.fraction_bits)

    def votes(self, x):
        p0 = sum(pair[bit] for pair, bit in zip(self.y, x))
        p1 = sum(pair[bit] for pair, bit in zip(self.z, x))
        return p0, p1

    def encoded_votes(self, x):
        p0 = sum(pair[bit] for pair, bit in zip(self.y_raw, x))
        p1 = sum(pair[bit] for pair, bit in zip(self.z_raw, x))
        return p0, p1

    def classify(self, x, encoded=False):
        p0, p1 = self.encoded_votes(x) if encoded else self.votes(x)
        return int(p1 >= p0)


def model_from_dict(document, fraction_bits=DEFAULT_FRACTION_BITS):
    try:
        kind = document["kind"]
        features = document["features"]
        fraction_bits = int(document.get("fraction_bits", fraction_bits))
        if not(0 <= fraction_bits < RING_EXPONENT - 1):
            raise ModelError(reason="fraction_bits = {} out of range".format(fraction_bits))
        if (kind == LR):
            return LRModel(features, document["weights"], document["intercept"], fraction_bits)
        if (kind == ADABOOST):
            return StumpModel(features, document["y"], document["z"], fraction_bits)
    except KeyError as e:
        raise ModelError(reason="missing key {}".format(e))
    except (TypeError, AttributeError) as e:
        raise ModelError(reason=str(e))
    raise ModelError(reason="unknown kind {!r}".format(kind))


def load_model(path, fraction_bits=DEFAULT_FRACTION_BITS):
    """ Decimal literals are parsed exactly, never through binary floats. """
    try:
        with open(path, encoding="utf-8") as f:
            document = json.load(f, parse_float=Decimal)
    except ValueError as e:
        raise ModelError(reason="{} is not valid JSON ({})".format(path, e))
    except OSError as e:
        raise ModelError(reason="cannot read {} ({})".format(path, e))
    return model_from_dict(document, fraction_bits)


def plaintext_classify(model, x, params=None, encoded=False):
    """
    Reference classification without any secret sharing.

    x        A binary feature vector in model order, a TokenSet (hashed
             with params), or raw text.
    encoded  Score with the fixed-point weights instead of exact ones;
             this is what the secure protocols must reproduce bit for bit.
    """
    params = HashParams() if (params is None) else params
    if isinstance(x, str):
        x = build_token_set(x, params)
    if isinstance(x, TokenSet):
        x = build_lexicon(model.features, params.with_bits(x.l)).indicator(x)
    return model.classify(list(x), encoded=encoded)
