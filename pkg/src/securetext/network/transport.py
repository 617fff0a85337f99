import contextlib
import hashlib
import logging
import os
import socket
import struct
import threading
import time

from securetext.params import (
    ALICE,
    BOB,
    PARTY_NAMES,
    FRAME_HEADER_FORMAT,
    SESSION_ID_SIZE,
    HANDSHAKE_MAGIC,
    PROTOCOL_VERSION,
    DEFAULT_SESSION_TIMEOUT,
)
from securetext.errors import (
    TransportError,
    SequenceError,
    TransportTimeoutError,
    TransportClosedError,
    HandshakeError,
    VersionMismatchError,
    ProfileMismatchError,
    SessionMismatchError,
)


logger = logging.getLogger(__name__)

_HEADER = struct.Struct(FRAME_HEADER_FORMAT)

_MAX_PAYLOAD = (1 << 32) - 1

_FINGERPRINT_SIZE = 32

_HELLO_SIZE = len(HANDSHAKE_MAGIC) + 1 + SESSION_ID_SIZE + _FINGERPRINT_SIZE

# Handshake reply codes.
ACCEPT = 0
REJECT_VERSION = 1
REJECT_PROFILE = 2
REJECT_SESSION = 3
REJECT_MALFORMED = 4


def new_session_id():
    return os.urandom(SESSION_ID_SIZE)


class Frame:
    """ session-id (16) | sequence (u64) | payload-length (u32) | payload """
    __slots__ = ("session_id", "sequence", "payload")
    def __init__(self, session_id, sequence, payload):
        self.session_id = session_id
        self.sequence = sequence
        self.payload = payload

    def encode(self):
        if (len(self.payload) > _MAX_PAYLOAD):
            raise TransportError(reason="payload of {} bytes does not fit a frame".format(len(self.payload)))
        return _HEADER.pack(self.session_id, self.sequence, len(self.payload)) + self.payload

    @staticmethod
    def decode_header(header):
        return _HEADER.unpack(header)


class FramedTransport:
    """
    Sequenced frame exchange with one peer. Subclasses supply raw byte
    I/O through _write and _read; everything else (sequence checks,
    counters, phase accounting, transcript digests) lives here.

    Sequence numbers start at 0 and increase by one per frame in each
    direction. Any gap, repeat or foreign session id aborts.
    """
    header_size = _HEADER.size

    def __init__(self, party, session_id=None, timeout=DEFAULT_SESSION_TIMEOUT):
        self.party = party
        self.session_id = session_id
        self.timeout = timeout
        self.send_sequence = 0
        self.recv_sequence = 0
        self.rounds = 0
        self.bytes_sent = 0
        self.bytes_received = 0
        self.started = time.perf_counter()
        self.phases = dict()
        self.frame_log = list()
        self._sent_digest = hashlib.sha256()
        self._received_digest = hashlib.sha256()
        self.closed = False

    def _write(self, data):
        raise NotImplementedError

    def _read(self, size):
        raise NotImplementedError

    def close(self):
        self.closed = True

    def send_round(self, payload):
        if (self.session_id is None):
            raise TransportError(reason="no session id before the first send")
        data = Frame(self.session_id, self.send_sequence, bytes(payload)).encode()
        self._write(data)
        self.frame_log.append(("sent", self.send_sequence, len(payload)))
        self._sent_digest.update(data)
        self.send_sequence += 1
        self.rounds += 1
        self.bytes_sent += len(data)

    def recv_round(self):
        header = self._read(self.header_size)
        session_id, sequence, length = Frame.decode_header(header)
        if (self.session_id is None):
            self.session_id = session_id
        elif (session_id != self.session_id):
            raise SessionMismatchError(expected=self.session_id.hex(), received=session_id.hex())
        if (sequence != self.recv_sequence):
            raise SequenceError(expected=self.recv_sequence, received=sequence)
        payload = self._read(length)
        self.frame_log.append(("received", sequence, length))
        self._received_digest.update(header + payload)
        self.recv_sequence += 1
        self.bytes_received += self.header_size + length
        return payload

    def exchange(self, payload):
        """
        Send payload and return the peer's payload of the same round.
        Alice writes first and Bob reads first, so two large frames can
        never block each other on a socket.
        """
        if (self.party == ALICE):
            self.send_round(payload)
            return self.recv_round()
        received = self.recv_round()
        self.send_round(payload)
        return received

    def counters(self):
        return {
            "rounds":self.rounds,
            "bytes_sent":self.bytes_sent,
            "bytes_received":self.bytes_received,
            "wall_time":time.perf_counter() - self.started,
        }

    @contextlib.contextmanager
    def phase(self, name):
        """ Record the counter deltas of the enclosed block under name. """
        before = self.counters()
        try:
            yield
        finally:
            after = self.counters()
            self.phases[name] = {
                "rounds":after["rounds"] - before["rounds"],
                "bytes":(after["bytes_sent"] + after["bytes_received"]
                         - before["bytes_sent"] - before["bytes_received"]),
                "seconds":after["wall_time"] - before["wall_time"],
            }

    def transcript_digest(self):
        """ sha256 over every frame sent, then every frame received. """
        return hashlib.sha256(self._sent_digest.digest() + self._received_digest.digest()).hexdigest()

    def sent_lengths(self):
        return [length for direction, _, length in self.frame_log if (direction == "sent")]


class _Pipe:
    """ One direction of an in-memory duplex. """
    __slots__ = ("buffer", "condition", "closed")
    def __init__(self):
        self.buffer = bytearray()
        self.condition = threading.Condition()
        self.closed = False

    def write(self, data):
        with self.condition:
            if self.closed:
                raise TransportClosedError()
            self.buffer.extend(data)
            self.condition.notify_all()

    def read(self, size, timeout):
        with self.condition:
            ready = self.condition.wait_for(lambda: (len(self.buffer) >= size) or self.closed,
                                            timeout=timeout)
            if (len(self.buffer) < size):
                if self.closed:
                    raise TransportClosedError()
                if not(ready):
                    raise TransportTimeoutError(timeout=timeout)
            data = bytes(self.buffer[:size])
            del self.buffer[:size]
            return data

    def close(self):
        with self.condition:
            self.closed = True
            self.condition.notify_all()


class MemoryTransport(FramedTransport):
    """ Thread-safe in-memory endpoint; build connected endpoints with memory_pair. """
    def __init__(self, party, outgoing, incoming, session_id=None, timeout=DEFAULT_SESSION_TIMEOUT):
        super().__init__(party, session_id=session_id, timeout=timeout)
        self.outgoing = outgoing
        self.incoming = incoming

    def _write(self, data):
        self.outgoing.write(data)

    def _read(self, size):
        return self.incoming.read(size, self.timeout)

    def close(self):
        super().close()
        self.outgoing.close()
        self.incoming.close()


def memory_pair(session_id=None, timeout=DEFAULT_SESSION_TIMEOUT):
    """ (alice, bob) endpoints of one in-memory duplex. """
    to_bob, to_alice = _Pipe(), _Pipe()
    session_id = new_session_id() if (session_id is None) else session_id
    alice = MemoryTransport(ALICE, to_bob, to_alice, session_id=session_id, timeout=timeout)
    bob = MemoryTransport(BOB, to_alice, to_bob, session_id=session_id, timeout=timeout)
    return alice, bob


class TcpTransport(FramedTransport):
    def __init__(self, party, sock, session_id=None, timeout=DEFAULT_SESSION_TIMEOUT):
        super().__init__(party, session_id=session_id, timeout=timeout)
        self.sock = sock
        self.sock.settimeout(timeout)
        self.sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)

    def _write(self, data):
        try:
            self.sock.sendall(data)
        except socket.timeout:
            raise TransportTimeoutError(timeout=self.timeout)
        except OSError as e:
            raise TransportError(reason=str(e))

    def _read(self, size):
        return recv_exact(self.sock, size, self.timeout)

    def close(self):
        super().close()
        try:
            self.sock.close()
        except OSError:
            pass


def recv_exact(sock, size, timeout):
    buffer = bytearray(size)
    view = memoryview(buffer)
    received = 0
    while (received < size):
        try:
            n = sock.recv_into(view[received:], size - received)
        except socket.timeout:
            raise TransportTimeoutError(timeout=timeout)
        except OSError as e:
            raise TransportError(reason=str(e))
        if not(n):
            raise TransportClosedError()
        received += n
    return bytes(buffer)


def parse_address(address):
    """ "HOST:PORT" -> (host, port) """
    host, sep, port = address.rpartition(":")
    if not(sep) or not(host) or not(port.isdigit()):
        raise ValueError(address)
    return host, int(port)


class SessionConfig:
    """
    Connection settings of one party. Bob listens and Alice dials.
    Bob without a configured session id adopts the one Alice proposes.
    """
    __slots__ = ("role", "address", "session_id", "timeout", "bundle_path")
    def __init__(self, role, address=None, session_id=None, timeout=DEFAULT_SESSION_TIMEOUT, bundle_path=None):
        if role not in PARTY_NAMES:
            raise HandshakeError(reason="unknown role {!r}".format(role))
        if ((session_id is not None) and (len(session_id) != SESSION_ID_SIZE)):
            raise HandshakeError(reason="session ids are {} bytes".format(SESSION_ID_SIZE))
        if (timeout <= 0):
            raise HandshakeError(reason="timeout must be positive")
        self.role = role
        self.address = address
        self.session_id = session_id
        self.timeout = timeout
        self.bundle_path = bundle_path


def hello_message(session_id, fingerprint, version=PROTOCOL_VERSION):
    return HANDSHAKE_MAGIC + bytes([version]) + session_id + fingerprint


def _parse_hello(message):
    if ((len(message) != _HELLO_SIZE) or not(message.startswith(HANDSHAKE_MAGIC))):
        return None
    offset = len(HANDSHAKE_MAGIC)
    version = message[offset]
    session_id = message[offset + 1:offset + 1 + SESSION_ID_SIZE]
    fingerprint = message[offset + 1 + SESSION_ID_SIZE:]
    return version, session_id, fingerprint


def propose_handshake(transport, fingerprint, version=PROTOCOL_VERSION):
    """ Alice's half: send hello, wait for Bob's verdict. """
    transport.send_round(hello_message(transport.session_id, fingerprint, version))
    reply = transport.recv_round()
    if (len(reply) < 1):
        raise HandshakeError(reason="empty reply")
    code = reply[0]
    if (code == ACCEPT):
        return transport
    if (code == REJECT_VERSION):
        raise VersionMismatchError(local=version, peer=reply[1] if (len(reply) > 1) else "?")
    if (code == REJECT_PROFILE):
        raise ProfileMismatchError()
    if (code == REJECT_SESSION):
        raise SessionMismatchError(expected=transport.session_id.hex(), received=reply[1:].hex())
    raise HandshakeError(reason="peer rejected the hello message")


def accept_handshake(transport, fingerprint, expected_session_id=None):
    """ Bob's half: validate Alice's hello and reply with a verdict code. """
    message = transport.recv_round()
    hello = _parse_hello(message)
    if (hello is None):
        transport.send_round(bytes([REJECT_MALFORMED]))
        raise HandshakeError(reason="malformed hello message")
    version, session_id, peer_fingerprint = hello
    if (version != PROTOCOL_VERSION):
        transport.send_round(bytes([REJECT_VERSION, PROTOCOL_VERSION]))
        raise VersionMismatchError(local=PROTOCOL_VERSION, peer=version)
    if ((expected_session_id is not None) and (session_id != expected_session_id)):
        transport.send_round(bytes([REJECT_SESSION]) + expected_session_id)
        raise SessionMismatchError(expected=expected_session_id.hex(), received=session_id.hex())
    if (peer_fingerprint != fingerprint):
        transport.send_round(bytes([REJECT_PROFILE]))
        raise ProfileMismatchError()
    transport.send_round(bytes([ACCEPT]))
    logger.info("Accepted session %s.", session_id.hex())
    return transport


def handshake(transport, fingerprint, expected_session_id=None, version=PROTOCOL_VERSION):
    if (transport.party == ALICE):
        return propose_handshake(transport, fingerprint, version=version)
    return accept_handshake(transport, fingerprint, expected_session_id=expected_session_id)


def listen(address, backlog=8):
    host, port = parse_address(address) if isinstance(address, str) else address
    listener = socket.create_server((host, port), backlog=backlog)
    logger.info("Listening on %s:%s.", *listener.getsockname()[:2])
    return listener


def open_connection(config, listener=None):
    """
    A TcpTransport before the handshake. Alice dials config.address; Bob
    accepts one connection on listener. A listener that sees no
    connection within config.timeout raises TransportTimeoutError.
    """
    try:
        if (config.role == ALICE):
            host, port = parse_address(config.address) if isinstance(config.address, str) else config.address
            sock = socket.create_connection((host, port), timeout=config.timeout)
            session_id = new_session_id() if (config.session_id is None) else config.session_id
        else:
            listener.settimeout(config.timeout)
            sock, peer = listener.accept()
            logger.info("Connection from %s:%s.", *peer[:2])
            session_id = None
    except socket.timeout:
        raise TransportTimeoutError(timeout=config.timeout)
    except OSError as e:
        raise TransportError(reason=str(e))
    return TcpTransport(config.role, sock, session_id=session_id, timeout=config.timeout)


def shake_or_close(transport, config, fingerprint, version=PROTOCOL_VERSION):
    """ Handshake over a fresh connection, closing it on any failure. """
    try:
        return handshake(transport, fingerprint, expected_session_id=config.session_id, version=version)
    except Exception:
        transport.close()
        raise


def connect_handshake(config, fingerprint, listener=None, version=PROTOCOL_VERSION):
    """ Establish a handshaken TcpTransport; see open_connection. """
    return shake_or_close(open_connection(config, listener), config, fingerprint, version=version)
