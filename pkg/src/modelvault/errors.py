"""Exception taxonomy for modelvault.

Every error raised by this package derives from ModelVaultError, so callers
can catch one type at an API boundary. Messages never contain key bytes,
passphrases, or bearer tokens.
"""


class ModelVaultError(Exception):
    """Base class for all modelvault errors."""


# -- key and cipher errors ---------------------------------------------------

class LengthError(ModelVaultError):
    """An input has the wrong length (passphrase, key, block, ciphertext)."""


class EncodingError(ModelVaultError):
    """A passphrase character cannot be encoded as a 2-byte UTF-16 unit."""


class HexError(ModelVaultError):
    """A hex-encoded key string is not valid hexadecimal."""


class PaddingError(ModelVaultError):
    """Block padding did not verify. Signals a wrong key or corrupt data.

    Deliberately uniform: carries no position or byte detail.
    """


class RangeError(ModelVaultError):
    """A numeric argument is outside its allowed range."""


# -- container format errors -------------------------------------------------

class ContainerError(ModelVaultError):
    """Base class for sealed-container parse and validation failures."""


class MagicError(ContainerError):
    """The file does not start with the container magic."""


class VersionError(ContainerError):
    """The container declares an unsupported format version."""


class CrcError(ContainerError):
    """The header checksum does not validate (corrupt header)."""


class TruncationError(ContainerError):
    """The byte sequence ends before a declared region is complete."""


class InvariantError(ContainerError):
    """A structural invariant of the container does not hold."""


# -- unseal errors -----------------------------------------------------------

class KeyMismatchError(ModelVaultError):
    """The container was sealed under a different key (fingerprint check)."""


class DigestError(ModelVaultError):
    """Decryption finished but the plaintext digest does not match."""


class ModeError(ModelVaultError):
    """The requested operation does not apply to this sealing mode."""


class CancelledError(ModelVaultError):
    """A background unseal was cancelled before completion."""


# -- file and network errors -------------------------------------------------

class IoError(ModelVaultError):
    """A file operation failed. Carries the offending path."""

    def __init__(self, message: str, path=None):
        super().__init__(message)
        self.path = path


class AuthError(ModelVaultError):
    """The key endpoint rejected the bearer token (HTTP 401/403)."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class TransportError(ModelVaultError):
    """The key endpoint could not be reached or answered abnormally."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class FormatError(ModelVaultError):
    """The key endpoint's response body has the wrong shape."""


# -- bench errors ------------------------------------------------------------

class DegenerateError(ModelVaultError):
    """A regression fit was requested on degenerate data."""
