from multiprocessing.pool import ThreadPool

from securetext.params import DEFAULT_SESSION_TIMEOUT
from securetext.errors import TransportClosedError
from securetext.network.transport import memory_pair


def _closing(function, transport):
    """ Close the duplex when a party fails so its peer stops waiting. """
    def run():
        try:
            return function(transport)
        except BaseException:
            transport.close()
            raise
    return run


def run_pair(alice_function, bob_function, timeout=DEFAULT_SESSION_TIMEOUT, session_id=None, transports=None):
    """
    Run both parties of a two-party protocol on threads connected by an
    in-memory duplex. Each function receives its own transport.

    Returns (alice result, bob result). If either party raises, the
    original failure is re-raised rather than the peer's resulting
    TransportClosedError.
    """
    alice, bob = memory_pair(session_id=session_id, timeout=timeout) if (transports is None) else transports
    with ThreadPool(processes=2) as pool:
        pending = [pool.apply_async(_closing(alice_function, alice)),
                   pool.apply_async(_closing(bob_function, bob))]
        results, failures = list(), list()
        for job in pending:
            try:
                results.append(job.get())
            except Exception as e:
                results.append(None)
                failures.append(e)
    if failures:
        primary = [e for e in failures if not(isinstance(e, TransportClosedError))]
        raise (primary or failures)[0]
    return results[0], results[1]
