"""Unsealing: decrypt a sealed model entirely in memory.

Nothing in this module writes to storage; the decrypted model only ever
exists as an in-process buffer that the caller can hand to an ML runtime
and explicitly wipe afterwards. Three entry points share one pipeline:

* unseal            - synchronous, single-threaded
* unseal_parallel   - synchronous, chunks fan out over a worker pool
* unseal_background - returns at once; workers decrypt while progress and
                      completion callbacks fire, and a handle can cancel

Container payloads are checked twice: the key fingerprint before any
ciphertext is touched (wrong key fails fast, without decrypting), and the
plaintext digest after assembly (corruption fails loud). The raw ``.dat``
layout has no metadata, so there a wrong key only surfaces as a padding
failure, exactly like the pipeline it is byte-compatible with.

Zeroization caveat: release() wipes the blob's own buffer. CPython may
hold other transient copies (e.g. immutable bytes from slicing); treat the
wipe as hygiene, not as a hard memory guarantee.
"""

from __future__ import annotations

import os
import threading
from concurrent.futures import FIRST_COMPLETED, Future, ThreadPoolExecutor, wait
from dataclasses import dataclass
from typing import Callable, Optional

from .container import MAGIC, SealedContainer, SealedFormat, decode
from .crypto import CipherMode, KeyMaterial, ctr_crypt, ecb_decrypt, sha256
from .errors import (
    CancelledError,
    DigestError,
    KeyMismatchError,
    ModeError,
    RangeError,
)


class ModelBlob:
    """Decrypted model bytes held in memory, plus their SHA-256 digest.

    The digest check stands in for "the model loads": feed ``data`` to
    your interpreter, then call release() to zero the buffer.
    """

    def __init__(self, buf: bytearray, source_mode: CipherMode):
        self._buf = buf
        self.digest = sha256(buf)
        self.source_mode = source_mode
        self._released = False

    @property
    def data(self) -> memoryview:
        """Read-only view of the plaintext. Zeroed once released."""
        return memoryview(self._buf).toreadonly()

    def __len__(self) -> int:
        return len(self._buf)

    @property
    def released(self) -> bool:
        return self._released

    def to_bytes(self) -> bytes:
        """Copy out the plaintext (the copy is the caller's to manage)."""
        return bytes(self._buf)

    def release(self) -> None:
        """Overwrite the buffer with zeros. Safe to call twice."""
        _wipe(self._buf)
        self._released = True

    def __repr__(self) -> str:
        state = "released" if self._released else f"{len(self._buf)} bytes"
        return f"ModelBlob({state}, sha256={self.digest.hex()[:16]}…)"


@dataclass(frozen=True)
class UnsealProgress:
    """One progress event: how many chunks and bytes are decrypted so far."""

    chunks_done: int
    chunks_total: int
    bytes_done: int


ProgressSink = Callable[[UnsealProgress], None]
DoneSink = Callable[[Optional[ModelBlob], Optional[Exception]], None]


def _wipe(buf: bytearray) -> None:
    buf[:] = bytes(len(buf))


def _decrypt_chunk(key: KeyMaterial, nonce: bytes, index: int, ciphertext: bytes) -> bytes:
    # Module-level indirection so tests can count or slow chunk decryption.
    return ctr_crypt(ciphertext, key, nonce, index)


def _open_container(sealed: bytes, key: KeyMaterial) -> SealedContainer:
    """Decode and fingerprint-check; no payload bytes are decrypted here.

    Inputs that do not even start with the container magic get ModeError
    (a raw .dat handed to the chunked path). Anything magic-prefixed is
    treated as a container, so corruption surfaces as the precise
    CrcError/VersionError/TruncationError instead of being misread as a
    format mix-up.
    """
    if sealed[:4] != MAGIC:
        raise ModeError("not a sealed container; raw .dat payloads cannot be chunk-parallelized")
    parsed = decode(sealed)
    if parsed.header.key_fingerprint != key.fingerprint:
        raise KeyMismatchError(
            f"container was sealed under key {parsed.header.key_fingerprint.hex()}, "
            f"got {key.fingerprint.hex()}"
        )
    return parsed


def _finish_container(buf: bytearray, parsed: SealedContainer) -> ModelBlob:
    if sha256(buf) != parsed.header.plaintext_digest:
        _wipe(buf)
        raise DigestError("decrypted plaintext does not match the container digest")
    return ModelBlob(buf, CipherMode.CHUNKED_CTR)


def unseal(sealed: bytes, key: KeyMaterial, declared_format: SealedFormat) -> ModelBlob:
    """Decrypt a sealed artifact of a known format, in memory.

    Raw artifacts rely on padding validity alone; containers verify the
    key fingerprint first and the plaintext digest afterwards.
    """
    if declared_format is SealedFormat.RAW_DAT:
        return ModelBlob(bytearray(ecb_decrypt(sealed, key)), CipherMode.RAW_ECB_PKCS7)
    parsed = _open_container(sealed, key)
    nonce = parsed.header.file_nonce
    payload = memoryview(parsed.payload)
    buf = bytearray(parsed.header.plaintext_len)
    for index, entry in enumerate(parsed.chunk_table):
        start = entry.ciphertext_offset
        chunk = bytes(payload[start : start + entry.plaintext_len])
        buf[start : start + entry.plaintext_len] = _decrypt_chunk(key, nonce, index, chunk)
    return _finish_container(buf, parsed)


def default_workers(chunk_count: int) -> int:
    """Worker-count default: available processors, capped at chunk count."""
    return max(1, min(os.cpu_count() or 1, chunk_count))


def unseal_parallel(sealed: bytes, key: KeyMaterial, workers: int | None = None) -> ModelBlob:
    """Decrypt a container with chunks spread over a thread pool.

    Output is byte-identical to unseal() for any worker count; surplus
    workers simply idle. Raw artifacts are rejected with ModeError (the
    padding chain cannot be split safely).
    """
    parsed = _open_container(sealed, key)
    if workers is None:
        workers = default_workers(parsed.header.chunk_count)
    if workers < 1:
        raise RangeError(f"workers must be at least 1, got {workers}")
    nonce = parsed.header.file_nonce
    payload = memoryview(parsed.payload)
    buf = bytearray(parsed.header.plaintext_len)

    def work(index: int) -> None:
        entry = parsed.chunk_table[index]
        start = entry.ciphertext_offset
        chunk = bytes(payload[start : start + entry.plaintext_len])
        buf[start : start + entry.plaintext_len] = _decrypt_chunk(key, nonce, index, chunk)

    pool_size = min(workers, parsed.header.chunk_count)
    with ThreadPoolExecutor(max_workers=pool_size) as pool:
        for future in [pool.submit(work, i) for i in range(parsed.header.chunk_count)]:
            future.result()
    return _finish_container(buf, parsed)


class UnsealHandle:
    """Owner's view of a background unseal: observe state, wait, cancel."""

    def __init__(self):
        self._done_event = threading.Event()
        self._lock = threading.Lock()
        self._state = "running"
        self._cancel_requested = threading.Event()

    def state(self) -> str:
        """One of "running", "done", "failed", "cancelled"."""
        with self._lock:
            return self._state

    def cancel(self) -> None:
        """Request cancellation; returns immediately.

        Chunks not yet started are dropped, in-flight chunks finish but
        their output is discarded, every produced plaintext buffer is
        wiped, and on_done fires once with CancelledError.
        """
        self._cancel_requested.set()

    def wait(self, timeout: float | None = None) -> bool:
        """Block until the job reaches a terminal state. True if it did."""
        return self._done_event.wait(timeout)

    def _settle(self, state: str) -> bool:
        with self._lock:
            if self._state != "running":
                return False
            self._state = state
        return True


def unseal_background(
    sealed: bytes,
    key: KeyMaterial,
    workers: int | None = None,
    on_progress: ProgressSink | None = None,
    on_done: DoneSink | None = None,
) -> UnsealHandle:
    """Start decrypting on background workers and return immediately.

    The scheduling call does no decoding or decryption itself. Progress
    events (one per finished chunk, monotone, ending at chunks_total) and
    the final outcome arrive on the sinks, which are invoked from worker
    threads. Every failure, including bad input, is delivered through
    on_done as ``on_done(None, error)``; nothing is raised here. On
    success on_done receives ``(blob, None)``.
    """
    handle = UnsealHandle()
    runner = threading.Thread(
        target=_run_background,
        args=(sealed, key, workers, on_progress, on_done, handle),
        name="mvc-unseal",
        daemon=True,
    )
    runner.start()
    return handle


def _run_background(
    sealed: bytes,
    key: KeyMaterial,
    workers: int | None,
    on_progress: ProgressSink | None,
    on_done: DoneSink | None,
    handle: UnsealHandle,
) -> None:
    buf: bytearray | None = None

    def deliver(state: str, blob: ModelBlob | None, error: Exception | None) -> None:
        if not handle._settle(state):
            return
        handle._done_event.set()
        if on_done is not None:
            try:
                on_done(blob, error)
            except Exception:
                pass  # a completion sink that throws has nowhere better to go

    try:
        if handle._cancel_requested.is_set():
            raise CancelledError("cancelled before decryption started")
        parsed = _open_container(sealed, key)
        if workers is None:
            workers = default_workers(parsed.header.chunk_count)
        if workers < 1:
            raise RangeError(f"workers must be at least 1, got {workers}")

        nonce = parsed.header.file_nonce
        payload = memoryview(parsed.payload)
        total = parsed.header.chunk_count
        buf = bytearray(parsed.header.plaintext_len)

        def work(index: int) -> int:
            entry = parsed.chunk_table[index]
            start = entry.ciphertext_offset
            chunk = bytes(payload[start : start + entry.plaintext_len])
            buf[start : start + entry.plaintext_len] = _decrypt_chunk(key, nonce, index, chunk)
            return entry.plaintext_len

        chunks_done = 0
        bytes_done = 0
        pool = ThreadPoolExecutor(max_workers=min(workers, total), thread_name_prefix="mvc-chunk")
        try:
            pending: set[Future] = {pool.submit(work, i) for i in range(total)}
            while pending:
                finished, pending = wait(pending, return_when=FIRST_COMPLETED)
                if handle._cancel_requested.is_set():
                    raise CancelledError("cancelled while decrypting")
                for future in finished:
                    bytes_done += future.result()
                    chunks_done += 1
                    if on_progress is not None:
                        on_progress(UnsealProgress(chunks_done, total, bytes_done))
        finally:
            pool.shutdown(wait=True, cancel_futures=True)

        if handle._cancel_requested.is_set():
            raise CancelledError("cancelled while decrypting")
        blob = _finish_container(buf, parsed)
        deliver("done", blob, None)
    except CancelledError as exc:
        if buf is not None:
            _wipe(buf)
        deliver("cancelled", None, exc)
    except Exception as exc:
        if buf is not None:
            _wipe(buf)
        deliver("failed", None, exc)
