"""Counter-based random streams.

A stream is addressed by a ``(seed, stream_id)`` pair: the same pair always
reproduces the same sample sequence, and distinct stream ids give
statistically independent streams. This lets ensembles index one stream per
realization with no sequential handoff between workers.

Backed by the Philox counter-based bit generator; normal deviates are
produced by an explicit Box-Muller transform on uniforms so the sequence is
pinned by this module rather than by library internals.
"""

from __future__ import annotations

import numpy as np

_TWO_PI = 2.0 * np.pi
_MASK64 = (1 << 64) - 1


class RngStream:
    """Deterministic random stream addressed by (seed, stream_id)."""

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = (self.seed & _MASK64) | ((self.stream_id & _MASK64) << 64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def spawn(self, stream_id: int) -> "RngStream":
        """Independent stream with the same seed and a new stream id."""
        return RngStream(self.seed, stream_id)

    def uniform(self, size=None):
        """Uniform doubles in [0, 1)."""
        return self._gen.random(size)

    def normals(self, n: int) -> np.ndarray:
        """n standard normal deviates via Box-Muller."""
        m = (int(n) + 1) // 2
        u1 = self._gen.random(m)
        u2 = self._gen.random(m)
        # 1 - u1 lies in (0, 1], keeping the log finite.
        r = np.sqrt(-2.0 * np.log1p(-u1))
        ang = _TWO_PI * u2
        out = np.empty(2 * m)
        out[:m] = r * np.cos(ang)
        out[m:] = r * np.sin(ang)
        return out[:n]

    def normal(self) -> float:
        return float(self.normals(1)[0])

    def circle_component(self, size=None):
        """Second coordinate of a uniform point on the unit circle."""
        return np.sin(_TWO_PI * self._gen.random(size))

    def choice_index(self, probabilities: np.ndarray) -> int:
        """Sample an index from a normalized probability vector."""
        u = float(self._gen.random())
        cum = np.cumsum(probabilities)
        return int(np.searchsorted(cum, u, side="right").clip(0, len(probabilities) - 1))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"
