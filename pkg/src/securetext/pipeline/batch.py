import csv
import io
import logging
from multiprocessing.pool import ThreadPool

import numpy as np

from securetext.params import (
    TO_BOB,
    DEFAULT_PAD_TO,
    DEFAULT_SESSION_TIMEOUT,
    DEFAULT_BATCH_WORKERS,
    EXTRACTION_PHASE,
    CLASSIFICATION_PHASE,
    DISCLOSURE_PHASE,
    TOTAL,
    BENCH_CSV_HEADER,
)
from securetext.errors import SecureTextError, ConfigError
from securetext.text.hashing import HashParams
from securetext.scoring.models import plaintext_classify
from securetext.network.transport import listen
from securetext.pipeline.session import (
    ClassificationSession,
    prepare_jobs,
    run_local,
    classify,
    serve,
)


logger = logging.getLogger(__name__)

REPORT_PHASES = (EXTRACTION_PHASE, CLASSIFICATION_PHASE, DISCLOSURE_PHASE, TOTAL)

LOOPBACK = ("127.0.0.1", 0)


class BatchReport:
    """
    Per-phase aggregate of a batch: mean and standard deviation of the
    wall time plus the mean rounds and bytes, over successful jobs only.
    Timings are Alice's; rounds and bytes agree at both parties.
    """
    def __init__(self, outcomes):
        self.jobs = len(outcomes)
        self.failures = sum(1 for outcome in outcomes if isinstance(outcome, Exception))
        self.rows = list()
        succeeded = [outcome[0] for outcome in outcomes if not(isinstance(outcome, Exception))]
        if not(succeeded):
            return
        for phase in REPORT_PHASES:
            seconds = np.array([outcome.phases[phase]["seconds"] for outcome in succeeded])
            self.rows.append({
                "phase":phase,
                "mean_s":float(seconds.mean()),
                "std_s":float(seconds.std()),
                "rounds":float(np.mean([outcome.phases[phase]["rounds"] for outcome in succeeded])),
                "bytes":float(np.mean([outcome.phases[phase]["bytes"] for outcome in succeeded])),
            })

    @property
    def succeeded(self):
        return self.jobs - self.failures

    def row(self, phase):
        for row in self.rows:
            if (row["phase"] == phase):
                return row
        raise KeyError(phase)

    def to_csv(self):
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=BENCH_CSV_HEADER, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({
                "phase":row["phase"],
                "mean_s":"{:.6f}".format(row["mean_s"]),
                "std_s":"{:.6f}".format(row["std_s"]),
                "rounds":"{:g}".format(row["rounds"]),
                "bytes":"{:g}".format(row["bytes"]),
            })
        return buffer.getvalue()


def _isolated(session_class, timeout):
    def run(pair):
        alice, bob = pair
        try:
            return run_local(alice, bob, session_class=session_class, timeout=timeout)
        except SecureTextError as e:
            logger.error("Batch job failed: %s", e)
            return e
    return run


def batch_classify(pairs, workers=DEFAULT_BATCH_WORKERS, session_class=ClassificationSession,
                   timeout=DEFAULT_SESSION_TIMEOUT):
    """
    Run (alice job, bob job) pairs over in-memory duplexes, several at a
    time. A failing job yields its exception in place of the
    (alice outcome, bob outcome) pair and the batch carries on.

    Returns (outcomes in job order, BatchReport).
    """
    pairs = list(pairs)
    if not(pairs):
        return [], BatchReport([])
    with ThreadPool(processes=max(1, min(workers, len(pairs)))) as pool:
        outcomes = list(pool.imap(_isolated(session_class, timeout), pairs))
    return outcomes, BatchReport(outcomes)


def _address(listener):
    host, port = listener.getsockname()[:2]
    return "{}:{}".format(host, port)


def _tcp_classify(pairs, session_class, timeout):
    """ Sessions one after another over loopback TCP. """
    listener = listen(LOOPBACK)
    address = _address(listener)
    try:
        with ThreadPool(processes=1) as pool:
            bob_side = pool.apply_async(serve, ([bob for _, bob in pairs], listener, timeout, session_class))
            alice_side = list()
            for alice, _ in pairs:
                try:
                    alice_side.append(classify(alice, address, timeout=timeout, retries=3,
                                               session_class=session_class))
                except SecureTextError as e:
                    logger.error("Batch job failed: %s", e)
                    alice_side.append(e)
            try:
                bob_side = bob_side.get()
            except SecureTextError as e:
                logger.error("Serving stopped: %s", e)
                bob_side = [e] * len(pairs)
    finally:
        listener.close()
    outcomes = list()
    for alice, bob in zip(alice_side, bob_side):
        failure = alice if isinstance(alice, Exception) else bob
        outcomes.append(failure if isinstance(failure, Exception) else (alice, bob))
    return outcomes


def bench(model, text, n_jobs, tcp=False, params=None, layout=None, pad_to=DEFAULT_PAD_TO, pad=True,
          disclosure=TO_BOB, timeout=DEFAULT_SESSION_TIMEOUT, session_class=ClassificationSession):
    """
    n_jobs sequential sessions classifying text with model, each with
    freshly dealt randomness, in memory or over TCP loopback.

    Returns (outcomes, BatchReport).
    """
    pairs = [prepare_jobs(model, text, params=params, layout=layout, pad_to=pad_to, pad=pad,
                          disclosure=disclosure) for _ in range(n_jobs)]
    if tcp:
        outcomes = _tcp_classify(pairs, session_class, timeout) if pairs else list()
        return outcomes, BatchReport(outcomes)
    return batch_classify(pairs, workers=1, session_class=session_class, timeout=timeout)


def load_corpus(path):
    """ Labelled messages from a "label<TAB>text" file; '#' starts a comment. """
    corpus = list()
    with open(path, encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not(line.strip()) or line.startswith("#"):
                continue
            label, sep, text = line.partition("\t")
            if not(sep) or (label not in ("0", "1")):
                raise ConfigError(reason="{} line {}: expected 'label<TAB>text' with label 0 or 1".format(path, number))
            corpus.append((int(label), text))
    return corpus


class AccuracyReport:
    """
    Secure against plaintext accuracy on a labelled corpus. The plaintext
    side uses the same fixed-point weights, so agreement must be total.
    """
    __slots__ = ("total", "secure_correct", "plaintext_correct", "agreements", "failures")
    def __init__(self, total, secure_correct, plaintext_correct, agreements, failures):
        self.total = total
        self.secure_correct = secure_correct
        self.plaintext_correct = plaintext_correct
        self.agreements = agreements
        self.failures = failures

    @staticmethod
    def _ratio(count, total):
        return (count / total) if total else 0.0

    @property
    def secure_accuracy(self):
        return self._ratio(self.secure_correct, self.total)

    @property
    def plaintext_accuracy(self):
        return self._ratio(self.plaintext_correct, self.total)

    @property
    def agreement(self):
        return self._ratio(self.agreements, self.total)

    def __repr__(self):
        return "AccuracyReport(secure={:.3f}, plaintext={:.3f}, agreement={:.3f}, failures={})".format(
            self.secure_accuracy, self.plaintext_accuracy, self.agreement, self.failures)


def evaluate_accuracy(model, labelled, params=None, layout=None, pad_to=DEFAULT_PAD_TO, pad=True,
                      workers=DEFAULT_BATCH_WORKERS, session_class=ClassificationSession,
                      timeout=DEFAULT_SESSION_TIMEOUT):
    """
    Classify every (label, text) of labelled both securely and in the
    clear. A failed secure session counts as wrong and as a disagreement.
    """
    params = HashParams() if (params is None) else params
    labelled = list(labelled)
    pairs = [prepare_jobs(model, text, params=params, layout=layout, pad_to=pad_to, pad=pad, disclosure=TO_BOB)
             for _, text in labelled]
    outcomes, _ = batch_classify(pairs, workers=workers, session_class=session_class, timeout=timeout)
    secure_correct = plaintext_correct = agreements = failures = 0
    for (label, text), outcome in zip(labelled, outcomes):
        expected = plaintext_classify(model, text, params, encoded=True)
        plaintext_correct += int(expected == label)
        if isinstance(outcome, Exception):
            failures += 1
            continue
        secure = outcome[1].label
        secure_correct += int(secure == label)
        agreements += int(secure == expected)
    return AccuracyReport(len(labelled), secure_correct, plaintext_correct, agreements, failures)
