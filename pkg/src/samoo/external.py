"""Driving an external evaluator process over a line protocol.

The evaluator is any executable speaking newline-delimited UTF-8 on its
standard streams:

    parent: HELLO 1
    child:  READY <m> <d>
    parent: EVAL <fe_index> <x1> ... <xD>
    child:  OBJ <fe_index> <f1> ... <fM>
    parent: BYE

Decimal fields are formatted with ``repr`` so values round-trip exactly.
Objectives declared as maximized are negated on receipt; the rest of the
toolkit minimizes everything.
"""

from __future__ import annotations

import queue
import subprocess
import threading
from dataclasses import dataclass, field

import numpy as np

from .core import Bounds

__all__ = [
    "EvalTimeout",
    "ProtocolError",
    "EvalFailure",
    "ExternalEvaluatorSpec",
    "ExternalEvaluator",
    "ExternalProblem",
]


class EvalTimeout(RuntimeError):
    def __init__(self, message: str, fe_index: int | None = None):
        super().__init__(message)
        self.fe_index = fe_index


class ProtocolError(RuntimeError):
    def __init__(self, message: str, fe_index: int | None = None):
        super().__init__(message)
        self.fe_index = fe_index


class EvalFailure(RuntimeError):
    def __init__(self, message: str, fe_index: int | None = None):
        super().__init__(message)
        self.fe_index = fe_index


@dataclass(frozen=True)
class ExternalEvaluatorSpec:
    """How to launch and talk to one evaluator process."""

    command: tuple[str, ...]
    m: int
    d: int
    bounds: Bounds
    timeout: float = 30.0
    senses: tuple[str, ...] = ()  # "min" or "max" per objective; empty = all min

    def __post_init__(self):
        if self.senses and len(self.senses) != self.m:
            raise ValueError("senses must name every objective")
        for s in self.senses:
            if s not in ("min", "max"):
                raise ValueError("objective sense must be 'min' or 'max'")


class _LineReader(threading.Thread):
    """Pumps child stdout lines into a queue so reads can time out."""

    _EOF = object()

    def __init__(self, stream):
        super().__init__(daemon=True)
        self.stream = stream
        self.lines: queue.Queue = queue.Queue()
        self.start()

    def run(self):
        for line in self.stream:
            self.lines.put(line.rstrip("\n"))
        self.lines.put(self._EOF)

    def get(self, timeout: float):
        return self.lines.get(timeout=timeout)


class ExternalEvaluator:
    """One evaluator process, handshaken on start, one request in flight."""

    def __init__(self, spec: ExternalEvaluatorSpec):
        self.spec = spec
        self._proc: subprocess.Popen | None = None
        self._reader: _LineReader | None = None

    def __enter__(self) -> "ExternalEvaluator":
        self.start()
        return self

    def __exit__(self, *exc):
        self.close()

    def start(self):
        if self._proc is not None:
            return
        self._proc = subprocess.Popen(
            list(self.spec.command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._reader = _LineReader(self._proc.stdout)
        self._send("HELLO 1")
        reply = self._read(fe_index=None)
        parts = reply.split()
        if len(parts) != 3 or parts[0] != "READY":
            raise ProtocolError(f"bad handshake reply: {reply!r}")
        try:
            m, d = int(parts[1]), int(parts[2])
        except ValueError:
            raise ProtocolError(f"non-integer handshake sizes: {reply!r}") from None
        if (m, d) != (self.spec.m, self.spec.d):
            raise ProtocolError(
                f"evaluator reports m={m}, d={d}; expected m={self.spec.m}, d={self.spec.d}"
            )

    def evaluate(self, fe_index: int, x) -> np.ndarray:
        if self._proc is None:
            self.start()
        x = np.asarray(x, dtype=float)
        self._send("EVAL " + str(fe_index) + " " + " ".join(repr(float(v)) for v in x), fe_index)
        reply = self._read(fe_index)
        parts = reply.split()
        if len(parts) != 2 + self.spec.m or parts[0] != "OBJ":
            raise ProtocolError(f"bad evaluation reply: {reply!r}", fe_index)
        if parts[1] != str(fe_index):
            raise ProtocolError(f"reply for evaluation {parts[1]}, expected {fe_index}", fe_index)
        try:
            f = np.array([float(v) for v in parts[2:]], dtype=float)
        except ValueError:
            raise ProtocolError(f"non-numeric objectives: {reply!r}", fe_index) from None
        if self.spec.senses:
            sign = np.array([-1.0 if s == "max" else 1.0 for s in self.spec.senses])
            f = f * sign
        return f

    def close(self):
        if self._proc is None:
            return
        try:
            if self._proc.poll() is None:
                self._send_quiet("BYE")
                self._proc.wait(timeout=2.0)
        except Exception:
            pass
        finally:
            if self._proc.poll() is None:
                self._proc.kill()
                self._proc.wait()
            self._proc = None
            self._reader = None

    def _send(self, line: str, fe_index: int | None = None):
        try:
            self._proc.stdin.write(line + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError):
            code = self._proc.poll()
            raise EvalFailure(f"evaluator process is gone (exit code {code})", fe_index) from None

    def _send_quiet(self, line: str):
        try:
            self._proc.stdin.write(line + "\n")
            self._proc.stdin.flush()
        except Exception:
            pass

    def _read(self, fe_index: int | None) -> str:
        try:
            line = self._reader.get(self.spec.timeout)
        except queue.Empty:
            self._proc.kill()
            raise EvalTimeout(
                f"no reply within {self.spec.timeout} s", fe_index
            ) from None
        if line is _LineReader._EOF:
            code = self._proc.wait()
            raise EvalFailure(f"evaluator exited with code {code}", fe_index)
        return line


class ExternalProblem:
    """Problem adapter over one evaluator process; usable as a context manager."""

    def __init__(self, spec: ExternalEvaluatorSpec, name: str = "external"):
        self.spec = spec
        self.name = name
        self.m = spec.m
        self.d = spec.d
        self.bounds = spec.bounds
        self._evaluator = ExternalEvaluator(spec)
        self._fe = 0

    def __enter__(self) -> "ExternalProblem":
        self._evaluator.start()
        return self

    def __exit__(self, *exc):
        self.close()

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise ValueError(f"expected {self.d} variables, got shape {x.shape}")
        if not self.bounds.contains(x):
            raise ValueError("decision vector outside bounds")
        self._fe += 1
        return self._evaluator.evaluate(self._fe, x)

    def reference_front(self, count: int | None = None):
        from .problems import UnsupportedProblem

        raise UnsupportedProblem(f"{self.name}: true Pareto front unknown")

    def close(self):
        self._evaluator.close()
