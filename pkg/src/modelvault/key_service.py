"""Minimal key-delivery service: one JWT-gated endpoint returning the key.

``GET /v1/model-key`` with a valid ``Authorization: Bearer <jwt>`` header
answers ``{"key": "<16-character passphrase>"}``. Tokens are HS256 JWTs
signed with a shared secret; only the ``exp`` claim is required, and any
``alg`` other than HS256 is rejected outright (no algorithm negotiation).
Every authentication failure gets the same 401 body, so the response does
not reveal which check failed.

This is the development/test half of the key flow. It speaks plain HTTP;
a production deployment must sit behind TLS termination.
"""

from __future__ import annotations

import base64
import binascii
import hashlib
import hmac
import json
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import urlparse

from .crypto import derive_key

KEY_PATH = "/v1/model-key"

_UNAUTHORIZED = (401, {"error": "unauthorized"})


def _b64url_encode(raw: bytes) -> str:
    return base64.urlsafe_b64encode(raw).rstrip(b"=").decode("ascii")


def _b64url_decode(part: str) -> bytes:
    padded = part + "=" * (-len(part) % 4)
    return base64.urlsafe_b64decode(padded.encode("ascii"))


def _sign(jwt_secret: bytes, signing_input: bytes) -> bytes:
    return hmac.new(jwt_secret, signing_input, hashlib.sha256).digest()


def issue_token(jwt_secret: bytes, ttl: float, now: float | None = None) -> str:
    """Mint an HS256 JWT with a single ``exp`` claim, ``ttl`` seconds out.

    Development and test helper; real deployments bring their own issuer.
    """
    if ttl <= 0:
        raise ValueError(f"ttl must be positive, got {ttl}")
    if now is None:
        now = time.time()
    header = _b64url_encode(json.dumps({"alg": "HS256", "typ": "JWT"},
                                       separators=(",", ":")).encode())
    payload = _b64url_encode(json.dumps({"exp": int(now + ttl)},
                                        separators=(",", ":")).encode())
    signing_input = f"{header}.{payload}".encode("ascii")
    return f"{header}.{payload}.{_b64url_encode(_sign(jwt_secret, signing_input))}"


def verify_token(jwt_secret: bytes, token: str, now: float | None = None,
                 clock_skew: float = 0.0) -> bool:
    """True only for a well-formed HS256 token with a live ``exp`` claim."""
    if now is None:
        now = time.time()
    parts = token.split(".")
    if len(parts) != 3:
        return False
    header_part, payload_part, signature_part = parts
    try:
        header = json.loads(_b64url_decode(header_part))
        signature = _b64url_decode(signature_part)
    except (ValueError, binascii.Error):
        return False
    if not isinstance(header, dict) or header.get("alg") != "HS256":
        return False
    expected = _sign(jwt_secret, f"{header_part}.{payload_part}".encode("ascii"))
    if not hmac.compare_digest(expected, signature):
        return False
    try:
        payload = json.loads(_b64url_decode(payload_part))
    except (ValueError, binascii.Error):
        return False
    if not isinstance(payload, dict):
        return False
    exp = payload.get("exp")
    if not isinstance(exp, (int, float)) or isinstance(exp, bool):
        return False
    return now <= exp + clock_skew


@dataclass(frozen=True)
class ServiceConfig:
    """Immutable service settings, validated on construction."""

    listen_port: int
    jwt_secret: bytes = field(repr=False)
    passphrase: str = field(repr=False)
    token_clock_skew: float = 0.0

    def __post_init__(self):
        if not self.jwt_secret:
            raise ValueError("jwt_secret must be non-empty")
        derive_key(self.passphrase)  # surfaces LengthError/EncodingError early


def handle_key_request(config: ServiceConfig, method: str, path: str,
                       authorization: str | None,
                       now: float | None = None) -> tuple[int, dict]:
    """Route one request. Returns (HTTP status, JSON-ready body).

    Pure apart from the clock, which tests can pin via ``now``.
    """
    if urlparse(path).path != KEY_PATH:
        return 404, {"error": "not found"}
    if method != "GET":
        return 405, {"error": "method not allowed"}
    if not authorization:
        return _UNAUTHORIZED
    scheme, _, token = authorization.partition(" ")
    token = token.strip()
    if scheme.lower() != "bearer" or not token:
        return _UNAUTHORIZED
    if not verify_token(config.jwt_secret, token, now=now,
                        clock_skew=config.token_clock_skew):
        return _UNAUTHORIZED
    return 200, {"key": config.passphrase}


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def _respond(self):
        config: ServiceConfig = self.server.config  # type: ignore[attr-defined]
        status, body = handle_key_request(
            config, self.command, self.path, self.headers.get("Authorization"))
        encoded = json.dumps(body).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(encoded)))
        self.end_headers()
        if self.command != "HEAD":
            self.wfile.write(encoded)

    do_GET = do_POST = do_PUT = do_DELETE = do_PATCH = do_HEAD = _respond

    def log_message(self, format, *args):
        # Path and status only; never headers or bodies.
        pass


class KeyService:
    """The HTTP server wrapper: start in a daemon thread, or serve inline."""

    def __init__(self, config: ServiceConfig, host: str = "127.0.0.1"):
        self.config = config
        self._server = ThreadingHTTPServer((host, config.listen_port), _Handler)
        self._server.config = config  # type: ignore[attr-defined]
        self._thread: threading.Thread | None = None

    @property
    def port(self) -> int:
        """Actual bound port (useful with listen_port=0)."""
        return self._server.server_address[1]

    @property
    def url(self) -> str:
        host = self._server.server_address[0]
        return f"http://{host}:{self.port}{KEY_PATH}"

    def start(self) -> "KeyService":
        self._thread = threading.Thread(target=self._server.serve_forever,
                                        name="mvc-key-service", daemon=True)
        self._thread.start()
        return self

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def __enter__(self) -> "KeyService":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()
