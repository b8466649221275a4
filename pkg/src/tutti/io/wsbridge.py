"""Small WebSocket (RFC 6455) server for the browser control surface.

Implements just what a browser client needs: the HTTP upgrade handshake,
masked client frames, text/close/ping handling, and unmasked server pushes.
Messages in both directions are single JSON objects; a malformed inbound
message gets an error reply and the connection stays up.
"""

from __future__ import annotations

import base64
import hashlib
import json
import os
import socket
import struct
import threading

WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
MAX_PAYLOAD = 1 << 20

OP_CONT = 0x0
OP_TEXT = 0x1
OP_BINARY = 0x2
OP_CLOSE = 0x8
OP_PING = 0x9
OP_PONG = 0xA


class ConnectionClosed(Exception):
    pass


def accept_key(client_key: str) -> str:
    digest = hashlib.sha1((client_key + WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def encode_frame(opcode: int, payload: bytes, mask: bool = False) -> bytes:
    head = bytearray([0x80 | opcode])
    n = len(payload)
    mask_bit = 0x80 if mask else 0
    if n < 126:
        head.append(mask_bit | n)
    elif n < (1 << 16):
        head.append(mask_bit | 126)
        head += struct.pack(">H", n)
    else:
        head.append(mask_bit | 127)
        head += struct.pack(">Q", n)
    if mask:
        key = os.urandom(4)
        head += key
        payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
    return bytes(head) + payload


def encode_text(text: str, mask: bool = False) -> bytes:
    return encode_frame(OP_TEXT, text.encode("utf-8"), mask)


def _read_exact(sock: socket.socket, n: int) -> bytes:
    buf = b""
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ConnectionClosed
        buf += chunk
    return buf


def read_frame(sock: socket.socket) -> tuple[int, bool, bytes]:
    """Returns (opcode, fin, unmasked payload)."""
    b0, b1 = _read_exact(sock, 2)
    fin = bool(b0 & 0x80)
    opcode = b0 & 0x0F
    masked = bool(b1 & 0x80)
    length = b1 & 0x7F
    if length == 126:
        length = struct.unpack(">H", _read_exact(sock, 2))[0]
    elif length == 127:
        length = struct.unpack(">Q", _read_exact(sock, 8))[0]
    if length > MAX_PAYLOAD:
        raise ConnectionClosed
    key = _read_exact(sock, 4) if masked else None
    payload = _read_exact(sock, length) if length else b""
    if key:
        payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
    return opcode, fin, payload


class WebSocketServer:
    """Accepts browser connections and trades JSON objects with them.

    on_message(obj, send) runs on the connection's reader thread; `send`
    replies to that one client, broadcast() reaches everyone.  Use port=0
    to bind an ephemeral port (the `port` attribute holds the real one).
    """

    def __init__(self, on_message, host: str = "127.0.0.1", port: int = 8765):
        self.on_message = on_message
        self.host = host
        self._listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._listener.bind((host, port))
        self.port = self._listener.getsockname()[1]
        self._clients: list[socket.socket] = []
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)

    def start(self) -> None:
        self._listener.listen(8)
        self._listener.settimeout(0.25)
        self._accept_thread.start()

    def _accept_loop(self) -> None:
        while not self._stop.is_set():
            try:
                conn, _ = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            threading.Thread(target=self._serve_client, args=(conn,),
                             daemon=True).start()

    def _serve_client(self, conn: socket.socket) -> None:
        try:
            if not self._handshake(conn):
                conn.close()
                return
            with self._lock:
                self._clients.append(conn)
            self._client_loop(conn)
        except (ConnectionClosed, OSError):
            pass
        finally:
            with self._lock:
                if conn in self._clients:
                    self._clients.remove(conn)
            conn.close()

    def _handshake(self, conn: socket.socket) -> bool:
        conn.settimeout(5.0)
        request = b""
        while b"\r\n\r\n" not in request:
            chunk = conn.recv(4096)
            if not chunk or len(request) > 16384:
                return False
            request += chunk
        headers = {}
        for line in request.split(b"\r\n")[1:]:
            if b":" in line:
                name, _, value = line.partition(b":")
                headers[name.strip().lower()] = value.strip()
        key = headers.get(b"sec-websocket-key")
        if key is None or b"websocket" not in headers.get(b"upgrade", b"").lower():
            conn.sendall(b"HTTP/1.1 400 Bad Request\r\n\r\n")
            return False
        response = (
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            f"Sec-WebSocket-Accept: {accept_key(key.decode('ascii'))}\r\n\r\n"
        )
        conn.sendall(response.encode("ascii"))
        conn.settimeout(None)
        return True

    def _client_loop(self, conn: socket.socket) -> None:
        fragments: list[bytes] = []
        while not self._stop.is_set():
            opcode, fin, payload = read_frame(conn)
            if opcode == OP_CLOSE:
                try:
                    conn.sendall(encode_frame(OP_CLOSE, payload))
                except OSError:
                    pass
                return
            if opcode == OP_PING:
                conn.sendall(encode_frame(OP_PONG, payload))
                continue
            if opcode == OP_PONG:
                continue
            if opcode in (OP_TEXT, OP_BINARY):
                fragments = [payload]
            elif opcode == OP_CONT:
                fragments.append(payload)
            if not fin:
                continue
            data, fragments = b"".join(fragments), []
            if opcode == OP_BINARY:
                self._send(conn, {"type": "error", "error": "binary frames unsupported"})
                continue
            try:
                obj = json.loads(data.decode("utf-8"))
                if not isinstance(obj, dict):
                    raise ValueError("message must be a JSON object")
            except (ValueError, UnicodeDecodeError) as exc:
                self._send(conn, {"type": "error", "error": str(exc)})
                continue
            self.on_message(obj, lambda o, c=conn: self._send(c, o))

    def _send(self, conn: socket.socket, obj: dict) -> None:
        try:
            conn.sendall(encode_text(json.dumps(obj)))
        except OSError:
            pass

    def broadcast(self, obj: dict) -> None:
        frame = encode_text(json.dumps(obj))
        with self._lock:
            clients = list(self._clients)
        for conn in clients:
            try:
                conn.sendall(frame)
            except OSError:
                with self._lock:
                    if conn in self._clients:
                        self._clients.remove(conn)

    @property
    def client_count(self) -> int:
        with self._lock:
            return len(self._clients)

    def stop(self) -> None:
        self._stop.set()
        with self._lock:
            clients = list(self._clients)
            self._clients.clear()
        for conn in clients:
            try:
                conn.sendall(encode_frame(OP_CLOSE, b""))
            except OSError:
                pass
            conn.close()
        self._listener.close()
        self._accept_thread.join(timeout=2.0)
