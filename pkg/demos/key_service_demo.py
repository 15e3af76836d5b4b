"""Deliver the model key over localhost HTTP, gated by a bearer token.

Starts the key service in-process, mints an HS256 token, fetches the
key with it, seals and unseals a model under the fetched key, and then
shows a tampered token being refused. Run directly:

    python3 demos/key_service_demo.py
"""

import random

from modelvault import (KeyService, ServiceConfig, derive_key, fetch_key,
                        issue_token, seal, unseal_parallel)
from modelvault.errors import AuthError

PASSPHRASE = "pvxq81gur0m4hawj"
JWT_SECRET = b"demo-signing-secret"

model = random.Random(11).randbytes(512 * 1024)

# ---------------------------------------------------------------------
# The service holds the passphrase and a signing secret. Port 0 lets
# the OS pick a free port; the context manager stops the server on exit.
config = ServiceConfig(listen_port=0, jwt_secret=JWT_SECRET,
                       passphrase=PASSPHRASE)
with KeyService(config) as service:
    print("key service at", service.url)

    # Mint a short-lived token with the shared signing secret. In a real
    # deployment the token issuer and the model host are different
    # parties; the service itself never mints tokens for callers.
    token = issue_token(JWT_SECRET, ttl=60)
    print("bearer token:", token[:25], "...")

    # The client returns KeyMaterial, never the raw passphrase.
    key = fetch_key(service.url, token)
    print("fetched key fingerprint:", key.fingerprint.hex())
    print("matches local derivation:",
          key.fingerprint == derive_key(PASSPHRASE).fingerprint)

    # Use the delivered key exactly like a local one.
    sealed, _report = seal(model, key)
    blob = unseal_parallel(sealed, key)
    print("sealed and unsealed under the fetched key:",
          bytes(blob.data) == model)
    blob.release()

    # -----------------------------------------------------------------
    # Tamper with the token signature: the service answers 401 and the
    # client raises AuthError. No key material leaves the service.
    bad = token[:-4] + ("AAAA" if not token.endswith("AAAA") else "BBBB")
    try:
        fetch_key(service.url, bad)
    except AuthError as exc:
        print("tampered token refused:", exc)

print("service stopped")
