"""Savitzky-Golay filters and the windowed index of pupillary activity.

The index runs two least-squares derivative filters with different
pass-bands over each non-overlapping window of the pupil-diameter signal,
forms the ratio of low- to high-frequency response magnitudes, and counts
the strict local maxima of that ratio exceeding a threshold.  The count,
normalized by the number of interior ratio samples, lands in [0, 1] and
tracks pupil oscillation strength, a proxy for cognitive load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .measures import GazeSample

#: Ratio orientation: low-frequency magnitude over high-frequency magnitude.
#: Flip to False to invert the ratio without touching the pipeline.
LOW_OVER_HIGH = True


class KernelParameterError(ValueError):
    """Kernel parameters outside the solvable regime."""


class SignalLengthError(ValueError):
    """A signal shorter than the operation requires."""


@dataclass(frozen=True)
class SGKernel:
    """Least-squares polynomial convolution kernel.

    ``weights`` are in offset order (index 0 maps to offset -m); their dot
    product with a raw window of 2m+1 samples equals the fitted polynomial
    (r=0) or its first derivative (r=1) evaluated at the window center.
    """

    m: int
    n: int
    r: int
    dt: float
    weights: tuple[float, ...]

    @property
    def size(self) -> int:
        return 2 * self.m + 1


def sg_kernel(m: int, n: int, r: int, dt: float = 1.0) -> SGKernel:
    """Build the smoothing (r=0) or first-derivative (r=1) kernel.

    Solves the least-squares fit of an order-n polynomial over the 2m+1
    integer offsets via the normal equations, then rescales for the sample
    spacing.  Requires n <= 2m (n = 2m interpolates) and r <= n.
    """
    if m < 1:
        raise KernelParameterError("half-width m must be >= 1")
    if n < 0 or n > 2 * m:
        raise KernelParameterError(f"polynomial order n={n} must satisfy 0 <= n <= 2m={2 * m}")
    if r < 0 or r > n:
        raise KernelParameterError(f"derivative order r={r} must satisfy 0 <= r <= n={n}")
    if dt <= 0:
        raise KernelParameterError("sample spacing dt must be positive")

    tau = np.arange(-m, m + 1, dtype=float)
    design = np.vander(tau, n + 1, increasing=True)  # design[j, k] = tau_j**k
    normal = design.T @ design
    rhs = np.zeros(n + 1)
    rhs[r] = 1.0
    try:
        coef = np.linalg.solve(normal, rhs)
    except np.linalg.LinAlgError as exc:  # unreachable for valid m, n; guard anyway
        raise KernelParameterError(f"singular system for m={m}, n={n}") from exc
    weights = design @ coef * math.factorial(r) / dt**r
    return SGKernel(m=m, n=n, r=r, dt=dt, weights=tuple(float(w) for w in weights))


def apply_kernel(signal: Sequence[float], kernel: SGKernel) -> np.ndarray:
    """Valid-region convolution: output j is the response centered at j+m.

    No edge padding; the output is shorter than the input by 2m samples.
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    if x.size < kernel.size:
        raise SignalLengthError(
            f"signal of length {x.size} shorter than kernel window {kernel.size}"
        )
    return np.correlate(x, np.asarray(kernel.weights), mode="valid")


@dataclass(frozen=True)
class RipaConfig:
    """Pipeline knobs for the pupillary-activity index.

    The defaults target a 30 Hz pupil stream: a wide quadratic derivative
    filter for the low band, a narrow one for the high band, threshold 1.0
    on the magnitude ratio.  All of these are configuration, not behavior.
    """

    low_filter: tuple[int, int] = (7, 2)  # (m, n) for the low-frequency response
    high_filter: tuple[int, int] = (2, 2)  # (m, n) for the high-frequency response
    lam: float = 1.0  # ratio threshold
    window_samples: int = 30  # window size f = nominal sampling frequency
    epsilon: float = 1e-9  # denominator guard
    confidence_min: float = 0.5
    max_interp_gap: int = 6  # samples; longer invalid runs split the signal

    def __post_init__(self) -> None:
        if self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0.0 <= self.confidence_min <= 1.0:
            raise ValueError("confidence_min must be in [0, 1]")
        if self.max_interp_gap < 0:
            raise ValueError("max_interp_gap must be >= 0")
        m_max = max(self.low_filter[0], self.high_filter[0])
        if self.window_samples < 2 * m_max + 1:
            raise ValueError(
                f"window_samples={self.window_samples} below filter support {2 * m_max + 1}"
            )
        for m, n in (self.low_filter, self.high_filter):
            if m < 1 or n < 1 or n > 2 * m:
                raise ValueError(f"invalid filter configuration (m={m}, n={n})")


@dataclass(frozen=True)
class RipaValue:
    """One pupillary-activity value, scoped to a user or the group."""

    t_window_end: float
    value: float
    user_id: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"value {self.value} outside [0, 1]")


@dataclass(frozen=True)
class PupilSegment:
    """A contiguous run of usable pupil diameters.

    ``start`` indexes the first covered sample of the input sequence, so
    callers can map segment positions back onto sample timestamps.
    """

    start: int
    values: np.ndarray = field(compare=False)

    @property
    def stop(self) -> int:
        return self.start + len(self.values)

    def covers(self, lo: int, hi: int) -> bool:
        return self.start <= lo and hi <= self.stop


def preprocess_pupil(
    samples: Sequence[GazeSample], cfg: RipaConfig
) -> list[PupilSegment]:
    """Clean one user's pupil track into analyzable segments.

    Samples with confidence below the floor or a non-positive diameter are
    invalid.  Interior invalid runs of at most ``max_interp_gap`` samples are
    linearly interpolated; longer runs split the signal; leading and trailing
    invalid samples are dropped.
    """
    diam = np.array([s.pupil_diameter for s in samples], dtype=float)
    conf = np.array([s.confidence for s in samples], dtype=float)
    ok = np.isfinite(diam) & (diam > 0.0) & (conf >= cfg.confidence_min)
    idx = np.flatnonzero(ok)
    if idx.size == 0:
        return []

    bounds: list[tuple[int, int]] = []  # inclusive (first, last) valid anchors
    seg_start = int(idx[0])
    last = int(idx[0])
    for j in idx[1:]:
        j = int(j)
        if j - last - 1 > cfg.max_interp_gap:
            bounds.append((seg_start, last))
            seg_start = j
        last = j
    bounds.append((seg_start, last))

    segments: list[PupilSegment] = []
    for lo, hi in bounds:
        chunk = diam[lo : hi + 1].copy()
        good = ok[lo : hi + 1]
        if not good.all():
            pos = np.arange(chunk.size)
            chunk[~good] = np.interp(pos[~good], pos[good], chunk[good])
        segments.append(PupilSegment(start=lo, values=chunk))
    return segments


def ripa_window(pupil: Sequence[float], cfg: RipaConfig) -> float:
    """Pupillary-activity value for one full window of pupil diameters.

    Steps: run both derivative filters, align the outputs on their common
    valid region, take the |low| / (|high| + epsilon) ratio, find strict
    local maxima of the ratio, count those above the threshold, and
    normalize by the interior sample count.  The result is clamped to [0, 1].
    """
    x = np.asarray(pupil, dtype=float)
    if x.size != cfg.window_samples:
        raise SignalLengthError(
            f"window of {x.size} samples, expected {cfg.window_samples}"
        )
    dt = 1.0 / cfg.window_samples  # ratio of two derivatives is dt-invariant
    low_k = sg_kernel(cfg.low_filter[0], cfg.low_filter[1], 1, dt)
    high_k = sg_kernel(cfg.high_filter[0], cfg.high_filter[1], 1, dt)
    low = apply_kernel(x, low_k)
    high = apply_kernel(x, high_k)

    m_max = max(low_k.m, high_k.m)
    trim_low = m_max - low_k.m
    trim_high = m_max - high_k.m
    low = low[trim_low : low.size - trim_low]
    high = high[trim_high : high.size - trim_high]

    num, den = np.abs(low), np.abs(high)
    if not LOW_OVER_HIGH:
        num, den = den, num
    ratio = num / (den + cfg.epsilon)

    count = 0
    for j in range(1, ratio.size - 1):
        if ratio[j] > ratio[j - 1] and ratio[j] > ratio[j + 1] and ratio[j] > cfg.lam:
            count += 1
    interior = max(1, ratio.size - 2)
    return min(1.0, max(0.0, count / interior))


def group_ripa(user_values: Sequence[RipaValue]) -> RipaValue | None:
    """Group index: unweighted mean across users, one value apiece."""
    if not user_values:
        return None
    seen: set[str] = set()
    for v in user_values:
        if v.user_id is None:
            raise ValueError("group_ripa inputs must carry a user_id")
        if v.user_id in seen:
            raise ValueError(f"duplicate user_id {v.user_id!r}")
        seen.add(v.user_id)
    value = sum(v.value for v in user_values) / len(user_values)
    return RipaValue(
        t_window_end=max(v.t_window_end for v in user_values),
        value=value,
        user_id=None,
    )
