"""
Optional online delivery of dealt bundles. The dealer answers exactly
one request per party and shuts down before any session starts, so a
fetched bundle is an ordinary in-memory object.
"""
import logging
import socket
import struct

from securetext.params import (
    PARTY_NAMES,
    DEFAULT_SESSION_TIMEOUT,
)
from securetext.errors import (
    BundleFormatError,
    TransportError,
    TransportTimeoutError,
)
from securetext.dealer.bundle import RandomnessBundle
from securetext.network.transport import (
    listen,
    parse_address,
    recv_exact,
)


logger = logging.getLogger(__name__)

_LENGTH = struct.Struct("<I")


def serve_bundles(address, bundles, timeout=DEFAULT_SESSION_TIMEOUT, listener=None):
    """
    Hand each party its bundle over one connection: the client sends its
    party byte, the dealer answers with a u32 length prefix and the
    bundle file bytes. Returns once every bundle was delivered.
    """
    pending = {bundle.party:bundle for bundle in bundles}
    listener = listen(address) if (listener is None) else listener
    listener.settimeout(timeout)
    try:
        while pending:
            try:
                sock, peer = listener.accept()
            except socket.timeout:
                raise TransportTimeoutError(timeout=timeout)
            with sock:
                sock.settimeout(timeout)
                party = recv_exact(sock, 1, timeout)[0]
                if party not in pending:
                    logger.warning("Refused bundle request for party %s from %s.", party, peer[0])
                    continue
                data = pending.pop(party).to_bytes()
                sock.sendall(_LENGTH.pack(len(data)) + data)
                logger.info("Delivered %s bundle (%d bytes) to %s.", PARTY_NAMES[party], len(data), peer[0])
    finally:
        listener.close()


def fetch_bundle(address, party, timeout=DEFAULT_SESSION_TIMEOUT):
    host, port = parse_address(address) if isinstance(address, str) else address
    try:
        with socket.create_connection((host, port), timeout=timeout) as sock:
            sock.sendall(bytes([party]))
            length, = _LENGTH.unpack(recv_exact(sock, _LENGTH.size, timeout))
            data = recv_exact(sock, length, timeout)
    except socket.timeout:
        raise TransportTimeoutError(timeout=timeout)
    except OSError as e:
        raise TransportError(reason=str(e))
    bundle = RandomnessBundle.from_bytes(data)
    if (bundle.party != party):
        raise BundleFormatError(reason="dealer sent the bundle of {}".format(PARTY_NAMES[bundle.party]))
    return bundle
