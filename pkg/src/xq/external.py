"""Line-protocol client for external (subprocess) prediction models.

Protocol over the child's standard streams, UTF-8, newline-delimited:

1. engine sends ``XQP/1 <m> <col1,...,colm>`` once; model replies ``OK``
2. per batch: engine sends ``PREDICT <n>`` followed by n CSV rows; model
   replies with exactly n lines, each one finite decimal number
3. engine sends ``QUIT`` at teardown

Responses are cached per unique row batch. The first time a batch is seen it
is sent twice and the two responses must agree bit-for-bit; a disagreement is
a purity violation (the model is not a pure function of its input).
"""

from __future__ import annotations

import csv
import io
import selectors
import subprocess
import threading

import numpy as np

from .errors import ProtocolError, PurityViolationError
from .predictor import Predictor
from .tabular import CATEGORICAL, ColumnMeta

_DEFAULT_TIMEOUT = 30.0


class _LineChannel:
    """Deadline-guarded line reader over an unbuffered pipe."""

    def __init__(self, pipe, timeout: float) -> None:
        self._pipe = pipe
        self._timeout = timeout
        self._buffer = bytearray()
        self._selector = selectors.DefaultSelector()
        self._selector.register(pipe, selectors.EVENT_READ)

    def readline(self, context: str) -> str:
        while True:
            newline = self._buffer.find(b"\n")
            if newline >= 0:
                line = self._buffer[:newline]
                del self._buffer[: newline + 1]
                return line.decode("utf-8").rstrip("\r")
            if not self._selector.select(self._timeout):
                raise ProtocolError(f"{context}: timed out after {self._timeout}s")
            chunk = self._pipe.read(65536)
            if not chunk:
                raise ProtocolError(f"{context}: model closed its output stream")
            self._buffer.extend(chunk)

    def close(self) -> None:
        self._selector.close()


class ExternalModel(Predictor):
    """Predictor backed by a child process speaking the XQP/1 line protocol."""

    def __init__(
        self,
        command: list[str],
        signature: tuple[ColumnMeta, ...],
        timeout: float = _DEFAULT_TIMEOUT,
        verify_purity: bool = True,
    ) -> None:
        self.feature_signature = tuple(signature)
        self.command = list(command)
        self._verify_purity = verify_purity
        self._cache: dict[bytes, np.ndarray] = {}
        self._lock = threading.Lock()
        self._closed = False
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                bufsize=0,
            )
        except OSError as exc:
            raise ProtocolError(f"cannot spawn external model {self.command}: {exc}") from exc
        self._reader = _LineChannel(self._proc.stdout, timeout)
        names = ",".join(meta.name for meta in self.feature_signature)
        self._send(f"XQP/1 {len(self.feature_signature)} {names}\n")
        reply = self._reader.readline("handshake")
        if reply != "OK":
            self._shutdown()
            raise ProtocolError(f"handshake: expected 'OK', got {reply!r}")

    # -- plumbing ------------------------------------------------------------

    def _send(self, text: str) -> None:
        try:
            self._proc.stdin.write(text.encode("utf-8"))
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolError(f"external model exited mid-session: {exc}") from exc

    def _serialize(self, rows: np.ndarray) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        sig = self.feature_signature
        for row in rows:
            writer.writerow(
                [
                    sig[j].levels[int(v)] if sig[j].kind == CATEGORICAL else repr(float(v))
                    for j, v in enumerate(row)
                ]
            )
        return out.getvalue()

    def _roundtrip(self, payload: str, n: int) -> np.ndarray:
        self._send(f"PREDICT {n}\n")
        self._send(payload)
        scores = np.empty(n, dtype=np.float64)
        for i in range(n):
            line = self._reader.readline(f"batch response line {i + 1} of {n}")
            try:
                value = float(line)
            except ValueError:
                raise ProtocolError(
                    f"batch response line {i + 1} of {n}: {line!r} is not a decimal number"
                ) from None
            if not np.isfinite(value):
                raise ProtocolError(
                    f"batch response line {i + 1} of {n}: non-finite score {line!r}"
                )
            scores[i] = value
        return scores

    # -- Predictor interface ---------------------------------------------------

    def _predict_valid(self, rows: np.ndarray) -> np.ndarray:
        with self._lock:
            if self._closed:
                raise ProtocolError("external model session already closed")
            payload = self._serialize(rows)
            key = payload.encode("utf-8")
            cached = self._cache.get(key)
            if cached is not None:
                return cached.copy()
            n = rows.shape[0]
            scores = self._roundtrip(payload, n)
            if self._verify_purity:
                again = self._roundtrip(payload, n)
                if not np.array_equal(scores, again):
                    bad = int(np.argmax(scores != again))
                    raise PurityViolationError(
                        "external model is not pure: identical batch sent twice, "
                        f"line {bad + 1} differs ({scores[bad]} vs {again[bad]})"
                    )
            self._cache[key] = scores
            return scores.copy()

    # -- lifecycle ---------------------------------------------------------------

    def _shutdown(self) -> None:
        if self._closed:
            return
        self._closed = True
        try:
            if self._proc.poll() is None:
                try:
                    self._proc.stdin.write(b"QUIT\n")
                    self._proc.stdin.flush()
                except OSError:
                    pass
            self._proc.stdin.close()
            try:
                self._proc.wait(timeout=5.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        finally:
            self._reader.close()
            self._proc.stdout.close()

    def close(self) -> None:
        with self._lock:
            self._shutdown()

    def __enter__(self) -> "ExternalModel":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def __del__(self) -> None:
        try:
            self._shutdown()
        except Exception:
            pass


def connect_external(
    command: list[str],
    signature: tuple[ColumnMeta, ...],
    timeout: float = _DEFAULT_TIMEOUT,
    verify_purity: bool = True,
) -> ExternalModel:
    """Spawn ``command`` and complete the XQP/1 handshake."""
    return ExternalModel(command, signature, timeout=timeout, verify_purity=verify_purity)
