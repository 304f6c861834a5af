"""Hyperplane scoring: uniform baseline and the remote scoring client.

The wire protocol is newline-delimited JSON over a local stream socket
(host:port, or a filesystem path for a unix socket):

    SCORE_REQ  {"type": "SCORE_REQ", "id", "d", "topVertices", "bottomVertices",
                "planes": [{"normal": [...], "offset": x, "deck": "top"|"bottom"}]}
    SCORE_RESP {"type": "SCORE_RESP", "id", "likelihoods": [...]}
    TRAIN      {"type": "TRAIN", "samples": [...]}   -> ACK {"count": N}

Vertex matrices are row-major; floats are decimal-serialized by json. Any
endpoint fault (connection, timeout, malformed or invalid response) degrades
the call to the uniform distribution; scoring never raises.
"""

from __future__ import annotations

import json
import logging
import socket
import threading

import numpy as np

from .repository import LABEL_GEOM_REJECTED, LABEL_NO_SUCCESS, LABEL_SUCCESS

logger = logging.getLogger(__name__)


class ScoreClient:
    """Batched scoring requests over a persistent NDJSON socket connection."""

    def __init__(self, address, timeout=1.0, batch_size=256):
        self.address = address
        self.timeout = timeout
        self.batch_size = max(1, batch_size)
        self._sock = None
        self._file = None
        self._next_id = 0
        self._lock = threading.Lock()

    def _connect(self):
        if self._sock is not None:
            return
        if "/" in str(self.address):
            sock = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
            sock.settimeout(self.timeout)
            sock.connect(str(self.address))
        else:
            host, port = str(self.address).rsplit(":", 1)
            sock = socket.create_connection((host or "127.0.0.1", int(port)), timeout=self.timeout)
            sock.settimeout(self.timeout)
        self._sock = sock
        self._file = sock.makefile("rwb")

    def _close(self):
        for closer in (self._file, self._sock):
            try:
                if closer is not None:
                    closer.close()
            except OSError:
                pass
        self._sock = None
        self._file = None

    def _roundtrip(self, message: dict):
        """One request/response exchange; None on any fault."""
        with self._lock:
            try:
                self._connect()
                blob = (json.dumps(message, separators=(",", ":")) + "\n").encode("utf-8")
                self._file.write(blob)
                self._file.flush()
                line = self._file.readline()
                if not line:
                    raise ConnectionError("service closed the stream")
                return json.loads(line.decode("utf-8"))
            except (OSError, ValueError, ConnectionError) as exc:
                logger.warning("scoring endpoint fault (%s); degrading to uniform", exc)
                self._close()
                return None

    def score(self, d, top_vertices, bottom_vertices, planes):
        """Likelihood list for the given planes, or None on any fault."""
        out = []
        for start in range(0, len(planes), self.batch_size):
            chunk = planes[start : start + self.batch_size]
            with self._lock:
                self._next_id += 1
                rid = self._next_id
            resp = self._roundtrip(
                {
                    "type": "SCORE_REQ",
                    "id": rid,
                    "d": d,
                    "topVertices": top_vertices,
                    "bottomVertices": bottom_vertices,
                    "planes": chunk,
                }
            )
            if resp is None or resp.get("type") != "SCORE_RESP" or resp.get("id") != rid:
                return None
            likelihoods = resp.get("likelihoods")
            if not isinstance(likelihoods, list) or len(likelihoods) != len(chunk):
                return None
            out.extend(likelihoods)
        return out

    def train(self, samples):
        """Push labeled samples to the service; count acknowledged, or None."""
        resp = self._roundtrip({"type": "TRAIN", "samples": [s.to_json() for s in samples]})
        if resp is None or resp.get("type") != "ACK":
            return None
        return resp.get("count")

    def close(self):
        with self._lock:
            self._close()


def score_hyperplanes(P, planes, deck_token, client: ScoreClient | None = None,
                      top=None, bottom=None) -> np.ndarray:
    """Probability distribution over the given planes.

    Uniform without a client (or on any endpoint fault); otherwise the
    endpoint's likelihoods normalized by their sum. NaN, negative or zero-sum
    responses are replaced by uniform, so the result is always a valid
    distribution.
    """
    m = len(planes)
    if m == 0:
        raise ValueError("no planes to score")
    uniform = np.full(m, 1.0 / m)
    if client is None:
        return uniform
    pts = P.float_vertices()
    if top is not None and bottom is not None:
        top_rows = pts[sorted(top)].tolist()
        bottom_rows = pts[sorted(bottom)].tolist()
    else:
        top_rows = pts.tolist()
        bottom_rows = []
    payload = [
        {
            "normal": [float(x) for x in h.normal],
            "offset": float(h.offset),
            "deck": deck_token or "top",
        }
        for h in planes
    ]
    likelihoods = client.score(P.d, top_rows, bottom_rows, payload)
    if likelihoods is None:
        return uniform
    arr = np.asarray(likelihoods, dtype=float)
    if arr.shape != (m,) or not np.all(np.isfinite(arr)) or np.any(arr < 0):
        logger.warning("invalid likelihoods from endpoint; using uniform")
        return uniform
    total = arr.sum()
    if total <= 0:
        return uniform
    return arr / total


def label_hop(outcome: str) -> str:
    """Map a proposal outcome to the three-class sample label."""
    mapping = {
        "improved": LABEL_SUCCESS,
        "guard_rejected": LABEL_GEOM_REJECTED,
        "no_improvement": LABEL_NO_SUCCESS,
    }
    if outcome not in mapping:
        raise ValueError(f"unknown outcome {outcome!r}")
    return mapping[outcome]
