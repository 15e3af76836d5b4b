"""Stateless AES-256 primitives.

Two cipher modes are offered. RAW_ECB_PKCS7 reproduces the classic
"encrypt the whole file in one doFinal" pipeline bit for bit: AES-256-ECB
with PKCS#7 padding and no framing. CHUNKED_CTR is the mode the sealed
container uses; every chunk gets its own counter stream so chunks decrypt
independently and in parallel.

ECB leaks equal-block patterns and should only be used where byte-level
compatibility with the raw ``.dat`` layout matters; see the README's
security notes.

All functions are pure: no hidden randomness, no shared state, safe to
call concurrently.
"""

from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass, field
from enum import Enum

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import EncodingError, HexError, LengthError, PaddingError, RangeError

BLOCK_SIZE = 16
KEY_BYTES = 32
FINGERPRINT_BYTES = 4
NONCE_BYTES = 8
PASSPHRASE_CHARS = 16

_MAX_CHUNK_INDEX = 1 << 32
_MAX_CTR_LEN = 1 << 36  # 2^32 blocks of 16 bytes; the block counter is 32-bit


def sha256(data) -> bytes:
    """SHA-256 digest (32 bytes) of a bytes-like object."""
    return hashlib.sha256(data).digest()


class CipherMode(Enum):
    """How a model was sealed. Serialized as one byte in the container."""

    RAW_ECB_PKCS7 = 0
    CHUNKED_CTR = 1

    @property
    def token(self) -> str:
        """Short name used by the CLI and seal manifests."""
        return "raw" if self is CipherMode.RAW_ECB_PKCS7 else "ctr"

    @classmethod
    def from_token(cls, token: str) -> "CipherMode":
        for mode in cls:
            if mode.token == token:
                return mode
        raise ValueError(f"unknown cipher mode {token!r}")

    @classmethod
    def from_wire(cls, byte: int) -> "CipherMode":
        for mode in cls:
            if mode.value == byte:
                return mode
        raise ValueError(f"unknown cipher mode byte {byte}")


@dataclass(frozen=True)
class KeyMaterial:
    """A 256-bit symmetric key plus its 4-byte fingerprint.

    The fingerprint (first 4 bytes of SHA-256 of the key) identifies a key
    without revealing it; repr and str never expose the secret bytes.
    """

    secret: bytes = field(repr=False)

    def __post_init__(self):
        if len(self.secret) != KEY_BYTES:
            raise LengthError(f"key must be {KEY_BYTES} bytes, got {len(self.secret)}")
        object.__setattr__(self, "secret", bytes(self.secret))

    @property
    def fingerprint(self) -> bytes:
        return sha256(self.secret)[:FINGERPRINT_BYTES]

    def __repr__(self) -> str:
        return f"KeyMaterial(fingerprint={self.fingerprint.hex()})"

    __str__ = __repr__

    @classmethod
    def generate(cls) -> "KeyMaterial":
        """Fresh random key from the OS CSPRNG."""
        return cls(secrets.token_bytes(KEY_BYTES))


def derive_key(passphrase: str) -> KeyMaterial:
    """Turn a 16-character passphrase into 32 key bytes.

    Each character is encoded as exactly two bytes (UTF-16 big-endian), so
    16 characters yield a full 256-bit key. Characters outside the Basic
    Multilingual Plane would need four bytes and are rejected.
    """
    if len(passphrase) != PASSPHRASE_CHARS:
        raise LengthError(
            f"passphrase must be exactly {PASSPHRASE_CHARS} characters, got {len(passphrase)}"
        )
    if any(ord(ch) > 0xFFFF for ch in passphrase):
        raise EncodingError("passphrase contains a character outside the Basic Multilingual Plane")
    try:
        encoded = passphrase.encode("utf-16-be")
    except UnicodeEncodeError as exc:  # lone surrogates
        raise EncodingError("passphrase contains an unencodable character") from exc
    return KeyMaterial(encoded)


def load_key_hex(hex_string: str) -> KeyMaterial:
    """Load a raw 32-byte key from its 64-character hex form."""
    cleaned = hex_string.strip()
    if len(cleaned) != 2 * KEY_BYTES:
        raise LengthError(f"key hex must be {2 * KEY_BYTES} characters, got {len(cleaned)}")
    try:
        raw = bytes.fromhex(cleaned)
    except ValueError as exc:
        raise HexError("key hex contains non-hexadecimal characters") from exc
    if len(raw) != KEY_BYTES:
        raise LengthError(f"key hex must decode to {KEY_BYTES} bytes, got {len(raw)}")
    return KeyMaterial(raw)


def _aes(key: KeyMaterial) -> algorithms.AES:
    return algorithms.AES(key.secret)


def encrypt_block(key: KeyMaterial, block: bytes) -> bytes:
    """Raw AES-256 forward transform of exactly one 16-byte block."""
    if len(block) != BLOCK_SIZE:
        raise LengthError(f"block must be {BLOCK_SIZE} bytes, got {len(block)}")
    enc = Cipher(_aes(key), modes.ECB()).encryptor()
    return enc.update(block) + enc.finalize()


def decrypt_block(key: KeyMaterial, block: bytes) -> bytes:
    """Raw AES-256 inverse transform of exactly one 16-byte block."""
    if len(block) != BLOCK_SIZE:
        raise LengthError(f"block must be {BLOCK_SIZE} bytes, got {len(block)}")
    dec = Cipher(_aes(key), modes.ECB()).decryptor()
    return dec.update(block) + dec.finalize()


def _pkcs7_pad(data: bytes) -> bytes:
    n = BLOCK_SIZE - (len(data) % BLOCK_SIZE)
    return data + bytes([n]) * n


def _pkcs7_unpad(data: bytes) -> bytes:
    # One uniform error for every failure shape; no padding-oracle detail.
    if data:
        n = data[-1]
        if 1 <= n <= BLOCK_SIZE and data[-n:] == bytes([n]) * n:
            return data[:-n]
    raise PaddingError("invalid padding")


def ecb_encrypt(plaintext: bytes, key: KeyMaterial) -> bytes:
    """AES-256-ECB with PKCS#7 padding.

    Output length is always ((len(plaintext) // 16) + 1) * 16: a full
    padding block is appended when the input is already block-aligned.
    """
    enc = Cipher(_aes(key), modes.ECB()).encryptor()
    return enc.update(_pkcs7_pad(plaintext)) + enc.finalize()


def ecb_decrypt(ciphertext: bytes, key: KeyMaterial) -> bytes:
    """Invert ecb_encrypt, stripping and verifying the PKCS#7 padding."""
    if len(ciphertext) == 0 or len(ciphertext) % BLOCK_SIZE:
        raise LengthError(
            f"ciphertext length must be a positive multiple of {BLOCK_SIZE}, got {len(ciphertext)}"
        )
    dec = Cipher(_aes(key), modes.ECB()).decryptor()
    return _pkcs7_unpad(dec.update(ciphertext) + dec.finalize())


def ctr_crypt(data: bytes, key: KeyMaterial, file_nonce: bytes, chunk_index: int) -> bytes:
    """XOR ``data`` with the AES-256 counter stream for one chunk.

    The counter block is ``file_nonce || chunk_index (4 bytes BE) ||
    block_counter (4 bytes BE, from 0)``, so each (nonce, index) pair names
    an independent keystream and the function is its own inverse.
    """
    if len(file_nonce) != NONCE_BYTES:
        raise LengthError(f"file nonce must be {NONCE_BYTES} bytes, got {len(file_nonce)}")
    if not 0 <= chunk_index < _MAX_CHUNK_INDEX:
        raise RangeError(f"chunk index must be below 2**32, got {chunk_index}")
    if len(data) >= _MAX_CTR_LEN:
        raise RangeError("chunk data must be below 2**36 bytes")
    counter0 = file_nonce + chunk_index.to_bytes(4, "big") + bytes(4)
    enc = Cipher(_aes(key), modes.CTR(counter0)).encryptor()
    return enc.update(data) + enc.finalize()
