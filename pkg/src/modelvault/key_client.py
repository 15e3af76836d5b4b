"""Client side of the key flow: fetch the passphrase, derive the key.

``fetch_key(url, token)`` performs one authenticated GET and hands back
:class:`~modelvault.crypto.KeyMaterial`. The passphrase only ever lives in
process memory; neither it nor the bearer token is written to disk or
included in any raised error message.

Redirects are refused rather than followed, so the Authorization header
cannot leak to a host other than the one in the configured URL.
"""

from __future__ import annotations

import json
import urllib.error
import urllib.request

from .crypto import KeyMaterial, derive_key
from .errors import AuthError, FormatError, ModelVaultError, TransportError

DEFAULT_TIMEOUT = 10.0

_MAX_BODY_BYTES = 4096  # honest responses are ~40 bytes


class _NoRedirect(urllib.request.HTTPRedirectHandler):
    def redirect_request(self, req, fp, code, msg, headers, newurl):
        return None


_opener = urllib.request.build_opener(_NoRedirect)


def fetch_key(url: str, token: str, timeout: float = DEFAULT_TIMEOUT) -> KeyMaterial:
    """GET the key endpoint with a bearer token and derive the AES-256 key.

    Raises AuthError on 401/403, TransportError on connection trouble or
    any other unexpected status, FormatError when the response body is not
    the expected ``{"key": "<16 chars>"}`` shape.
    """
    if not url.startswith(("http://", "https://")):
        raise TransportError("key URL must be http or https")
    request = urllib.request.Request(
        url,
        headers={"Authorization": f"Bearer {token}", "Accept": "application/json"},
        method="GET",
    )
    try:
        with _opener.open(request, timeout=timeout) as response:
            status = response.status
            raw = response.read(_MAX_BODY_BYTES + 1)
    except urllib.error.HTTPError as exc:
        status = exc.code
        exc.close()
        if status in (401, 403):
            raise AuthError("key request rejected", status=status) from None
        raise TransportError(f"key service returned status {status}",
                             status=status) from None
    except urllib.error.URLError as exc:
        raise TransportError(f"cannot reach key service: {exc.reason}") from None
    except (TimeoutError, OSError) as exc:
        raise TransportError(f"cannot reach key service: {exc}") from None

    if status != 200:
        # 3xx with no Location lands here; anything non-200 is unexpected.
        raise TransportError(f"key service returned status {status}", status=status)
    if len(raw) > _MAX_BODY_BYTES:
        raise FormatError("key response too large")
    try:
        body = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise FormatError("key response is not valid JSON") from None
    if not isinstance(body, dict) or not isinstance(body.get("key"), str):
        raise FormatError('key response must be an object with a string "key"')
    try:
        return derive_key(body["key"])
    except ModelVaultError as exc:
        # Re-shape derivation failures as response-format problems, without
        # echoing the received value.
        raise FormatError(f"key field unusable: {exc}") from exc
