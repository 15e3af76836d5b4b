import pytest

from modelvault.crypto import KeyMaterial, derive_key

# FIPS-197 appendix C.3 example key: 000102...1f.
FIPS_KEY_BYTES = bytes(range(32))


@pytest.fixture
def fips_key() -> KeyMaterial:
    return KeyMaterial(FIPS_KEY_BYTES)


@pytest.fixture
def passkey() -> KeyMaterial:
    return derive_key("0123456789abcdef")


@pytest.fixture
def other_key() -> KeyMaterial:
    return derive_key("fedcba9876543210")
