import hashlib
import logging
import time
from multiprocessing.pool import ThreadPool

from securetext.params import (
    ALICE,
    BOB,
    LR,
    ADABOOST,
    PARTY_NAMES,
    TAG_BITS,
    TO_BOB,
    KEEP_SHARED,
    DISCLOSURE_POLICIES,
    DEFAULT_PAD_TO,
    DEFAULT_SESSION_TIMEOUT,
    EXTRACTION_PHASE,
    CLASSIFICATION_PHASE,
    DISCLOSURE_PHASE,
    TOTAL,
)
from securetext.errors import (
    SecureTextError,
    ProfileError,
    PhaseError,
    PaddingOverflowError,
    TransportError,
    TransportTimeoutError,
    HandshakeError,
)
from securetext.dealer.demand import DemandProfile
from securetext.dealer.bundle import deal
from securetext.protocol.context import ProtocolContext
from securetext.protocol.blocks import convert_2_to_q
from securetext.text.hashing import (
    HashParams,
    build_token_set,
    build_lexicon,
)
from securetext.text.extraction import (
    pad_tokens,
    tag_real,
    bucketize_alice,
    bucketize_bob,
    secure_feature_extract,
    secure_bucket_extract,
)
from securetext.scoring.classify import secure_classify, disclose
from securetext.network.transport import (
    SessionConfig,
    handshake,
    connect_handshake,
    open_connection,
    shake_or_close,
)
from securetext.network.local import run_pair


logger = logging.getLogger(__name__)

HANDSHAKE_PHASE = "handshake"


class ClassificationJob:
    """
    One party's input to one classification session.

    Public parameters (n, model_kind, m, hash params, layout, padding,
    disclosure) must agree at both parties or the handshake fails.
    Alice holds text, Bob holds model; both hold their own bundle.

    m is Alice's set size: the pad size when padding, otherwise her exact
    token count, which Bob must then be told.
    """
    __slots__ = ("role", "bundle", "n", "model_kind", "m", "params", "layout", "pad",
                 "disclosure", "text", "model", "session_id")
    def __init__(self, role, bundle, n, model_kind, m, params=None, layout=None, pad=True,
                 disclosure=TO_BOB, text=None, model=None, session_id=None):
        if disclosure not in DISCLOSURE_POLICIES:
            raise ProfileError(reason="unknown disclosure policy {!r}".format(disclosure))
        self.role = role
        self.bundle = bundle
        self.n = n
        self.model_kind = model_kind
        self.m = m
        self.params = HashParams() if (params is None) else params
        self.layout = layout
        self.pad = pad
        self.disclosure = disclosure
        self.text = text
        self.model = model
        self.session_id = session_id

    @property
    def tag_bits(self):
        return TAG_BITS if (self.pad or (self.layout is not None)) else 0

    @property
    def profile(self):
        return DemandProfile(self.n, self.m, self.params.l, self.model_kind,
                             layout=self.layout, tag_bits=self.tag_bits)

    def fingerprint(self):
        """ Digest of everything both parties must agree on. """
        return hashlib.sha256(self.profile.to_bytes()
                              + self.params.to_bytes()
                              + self.disclosure.encode("ascii")).digest()


def alice_job(text, bundle, n, model_kind, params=None, layout=None, pad_to=DEFAULT_PAD_TO,
              pad=True, disclosure=TO_BOB, session_id=None):
    params = HashParams() if (params is None) else params
    m = pad_to if (pad or (layout is not None)) else len(build_token_set(text, params))
    return ClassificationJob(ALICE, bundle, n, model_kind, m, params=params, layout=layout, pad=pad,
                             disclosure=disclosure, text=text, session_id=session_id)


def bob_job(model, bundle, m=DEFAULT_PAD_TO, params=None, layout=None, pad=True,
            disclosure=TO_BOB, session_id=None):
    return ClassificationJob(BOB, bundle, len(model), model.kind, m, params=params, layout=layout, pad=pad,
                             disclosure=disclosure, model=model, session_id=session_id)


def prepare_jobs(model, text, params=None, layout=None, pad_to=DEFAULT_PAD_TO, pad=True,
                 disclosure=TO_BOB, seed=None):
    """ Matching (alice, bob) jobs with freshly dealt bundles. """
    alice = alice_job(text, None, len(model), model.kind, params=params, layout=layout,
                      pad_to=pad_to, pad=pad, disclosure=disclosure)
    bob = bob_job(model, None, m=alice.m, params=alice.params, layout=layout, pad=pad, disclosure=disclosure)
    alice.bundle, bob.bundle = deal(alice.profile, seed=seed)
    return alice, bob


class SessionOutcome:
    """
    What one party takes away from a session.

    label   The class for a party that learned it, else None.
    share   This party's share of the class bit under KEEP_SHARED.
    phases  {phase: {"rounds", "bytes", "seconds"}} including TOTAL.
    """
    __slots__ = ("role", "label", "share", "phases", "equality_tests", "consumed",
                 "transcript", "sent_lengths")
    def __init__(self, role, label, share, phases, equality_tests, consumed, transcript, sent_lengths):
        self.role = role
        self.label = label
        self.share = share
        self.phases = phases
        self.equality_tests = equality_tests
        self.consumed = consumed
        self.transcript = transcript
        self.sent_lengths = sent_lengths

    @property
    def rounds(self):
        return self.phases[TOTAL]["rounds"]

    def __repr__(self):
        return "SessionOutcome({}, label={}, rounds={})".format(PARTY_NAMES[self.role], self.label, self.rounds)


class ClassificationSession:
    """
    Drive one party through a classification session: extraction (with
    the Z_2 to Z_2^64 conversion), classification, disclosure. Every
    phase is timed on the transport and any failure inside a phase is
    re-raised as a PhaseError naming it.
    """
    def __init__(self, job, transport):
        self.job = job
        self.transport = transport
        self.ctx = ProtocolContext(job.role, transport, job.bundle)
        self.scoring_model = job.model
        self.elements = None
        self.features = None
        self.class_share = None
        self.result = None

    @property
    def is_alice(self):
        return (self.job.role == ALICE)

    def run_phase(self, name, function):
        logger.info("%s: %s phase started.", PARTY_NAMES[self.job.role], name)
        try:
            with self.transport.phase(name):
                function()
        except SecureTextError as e:
            if isinstance(e, PhaseError):
                raise
            raise PhaseError(phase=name, cause=e) from e
        except Exception as e:
            raise PhaseError(phase=name, cause="{}: {}".format(type(e).__name__, e)) from e
        logger.info("%s: %s phase finished.", PARTY_NAMES[self.job.role], name)

    def prepare(self):
        """ Local preprocessing: hashing, padding, bucketing, model expansion. """
        job = self.job
        profile = job.profile
        if self.is_alice:
            tokens = build_token_set(job.text, job.params)
            if (job.layout is not None):
                if (len(tokens) > job.m):
                    raise PaddingOverflowError(count=len(tokens), pad_to=job.m)
                self.elements = bucketize_alice(tokens, job.layout, job.params)
            elif job.pad:
                self.elements = pad_tokens(tokens, job.m)
            else:
                if (len(tokens) != job.m):
                    raise ProfileError(reason="Alice has {} tokens but m = {}".format(len(tokens), job.m))
                self.elements = list(tokens)
        else:
            lexicon = build_lexicon(job.model.features, job.params)
            if (job.layout is not None):
                self.elements, index_map = bucketize_bob(lexicon, job.layout, job.params)
                self.scoring_model = job.model.expanded(index_map, job.layout.bob_slots)
            else:
                self.elements = tag_real(lexicon.ids, job.params.l)
        return profile

    def handshake(self):
        handshake(self.transport, self.job.fingerprint(), expected_session_id=self.job.session_id)

    def extraction_phase(self):
        job = self.job
        width = job.profile.width
        if (job.layout is not None):
            features = secure_bucket_extract(self.ctx, self.elements, job.layout, width)
        else:
            features = secure_feature_extract(self.ctx, self.elements, job.n, job.m, width)
        self.features = convert_2_to_q(self.ctx, features)

    def classification_phase(self):
        model = None if self.is_alice else self.scoring_model
        self.class_share = secure_classify(self.ctx, self.features, self.job.model_kind, model, KEEP_SHARED)

    def disclosure_phase(self):
        self.result = disclose(self.ctx, self.class_share, self.job.disclosure)

    def outcome(self):
        phases = {name:dict(self.transport.phases[name])
                  for name in (EXTRACTION_PHASE, CLASSIFICATION_PHASE, DISCLOSURE_PHASE)}
        phases[TOTAL] = {key:sum(phase[key] for phase in phases.values()) for key in ("rounds", "bytes", "seconds")}
        if (self.job.disclosure == KEEP_SHARED):
            label, share = None, int(self.class_share.elements.reshape(-1)[0])
        else:
            label, share = self.result, None
        return SessionOutcome(role=self.job.role,
                              label=label,
                              share=share,
                              phases=phases,
                              equality_tests=self.ctx.equality_tests,
                              consumed=self.job.bundle.consumed(),
                              transcript=self.transport.transcript_digest(),
                              sent_lengths=self.transport.sent_lengths())

    def play(self, shake=True):
        """ Run the whole session and return this party's SessionOutcome. """
        try:
            self.prepare()
        except SecureTextError as e:
            self.transport.close()
            raise PhaseError(phase="preparation", cause=e) from e
        if shake:
            self.run_phase(HANDSHAKE_PHASE, self.handshake)
        self.run_phase(EXTRACTION_PHASE, self.extraction_phase)
        self.run_phase(CLASSIFICATION_PHASE, self.classification_phase)
        self.run_phase(DISCLOSURE_PHASE, self.disclosure_phase)
        return self.outcome()


def _check_kind(job, kind):
    if (job.model_kind != kind):
        raise ProfileError(reason="expected a {} job, got {}".format(kind, job.model_kind))


def run_tc_lr(job, transport, session_class=ClassificationSession, shake=True):
    """ Text classification with logistic regression, one party's half. """
    _check_kind(job, LR)
    return session_class(job, transport).play(shake=shake)


def run_tc_ab(job, transport, session_class=ClassificationSession, shake=True):
    """ Text classification with decision stumps, one party's half. """
    _check_kind(job, ADABOOST)
    return session_class(job, transport).play(shake=shake)


_RUNNERS = {LR:run_tc_lr, ADABOOST:run_tc_ab}


def run_job(job, transport, session_class=ClassificationSession, shake=True):
    return _RUNNERS[job.model_kind](job, transport, session_class=session_class, shake=shake)


def run_local(alice, bob, session_class=ClassificationSession, timeout=DEFAULT_SESSION_TIMEOUT):
    """ Both parties over the in-memory duplex, handshake included. """
    return run_pair(lambda transport: run_job(alice, transport, session_class),
                    lambda transport: run_job(bob, transport, session_class),
                    timeout=timeout,
                    session_id=alice.session_id)


def classify(job, address, timeout=DEFAULT_SESSION_TIMEOUT, retries=0, session_class=ClassificationSession):
    """
    Alice's TCP entry point. Only dialing and the handshake are retried;
    once the online phase starts a failure is final, since the bundle
    must not be used twice.
    """
    config = SessionConfig(ALICE, address=address, session_id=job.session_id, timeout=timeout)
    attempt = 0
    while True:
        try:
            transport = connect_handshake(config, job.fingerprint())
            break
        except HandshakeError:
            raise
        except TransportError as e:
            if (attempt >= retries):
                raise
            attempt += 1
            logger.warning("Connection attempt %d failed (%s); retrying.", attempt, e)
            time.sleep(min(2 ** attempt * 0.1, timeout))
    try:
        return run_job(job, transport, session_class, shake=False)
    finally:
        transport.close()


def _serve_one(job, transport, session_class):
    try:
        return run_job(job, transport, session_class, shake=False)
    finally:
        transport.close()


def _accept(job, listener, timeout):
    """
    Bob's next connection that completes the handshake for job. Stray or
    failing clients are dropped; only a listener that stays idle for
    timeout seconds raises.
    """
    config = SessionConfig(BOB, session_id=job.session_id, timeout=timeout)
    while True:
        transport = open_connection(config, listener)
        try:
            return shake_or_close(transport, config, job.fingerprint())
        except TransportError as e:
            logger.warning("Dropped a connection: %s", e)


def serve(jobs, listener, timeout=DEFAULT_SESSION_TIMEOUT, session_class=ClassificationSession):
    """
    Bob's TCP entry point: one session per job, each on its own thread.
    A connection that fails before or during the handshake is dropped
    and the job waits for the next one. Returns outcomes in job order; a
    failed session yields its exception instead of an outcome, and once
    the listener times out every job not yet started yields that
    timeout.
    """
    pending = list()
    with ThreadPool(processes=max(1, len(jobs))) as pool:
        for index, job in enumerate(jobs):
            try:
                transport = _accept(job, listener, timeout)
            except TransportTimeoutError as e:
                logger.error("No connection for %d remaining jobs: %s", len(jobs) - index, e)
                pending.extend(e for _ in range(len(jobs) - index))
                break
            pending.append(pool.apply_async(_serve_one, (job, transport, session_class)))
        outcomes = list()
        for result in pending:
            if isinstance(result, TransportTimeoutError):
                outcomes.append(result)
                continue
            try:
                outcomes.append(result.get())
            except SecureTextError as e:
                logger.error("Session failed: %s", e)
                outcomes.append(e)
    return outcomes
