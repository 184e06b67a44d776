"""Instance transformations and the pullback of their solutions.

Each transform returns a :class:`ReductionRecord` holding the reduced
instance and whatever :func:`pullback` needs to turn an assignment of the
reduced instance back into offsets for the original messages.  For the
buffering kinds those offsets are collision free once message ``i`` waits
``added_latency[i]`` slots between the two contention points; the instance
they are valid for is :meth:`ReductionRecord.effective`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import Instance, is_valid
from .greedy import GreedyOutcome
from .compact import compact_pairs_of_class


@dataclass(frozen=True)
class ReductionRecord:
    kind: str
    original: Instance
    reduced: Instance
    added_latency: tuple[int, ...]
    params: dict = field(default_factory=dict)
    inner: Optional["ReductionRecord"] = None

    def effective(self) -> Instance:
        """The original instance with buffering applied (the original itself for unbuffered kinds)."""
        return self.original.with_delays(d + b for d, b in zip(self.original.delays, self.added_latency))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "original": self.original.to_dict(),
            "reduced": self.reduced.to_dict(),
            "added_latency": list(self.added_latency),
            "params": self.params,
            "inner": self.inner.to_dict() if self.inner else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReductionRecord":
        inner = data.get("inner")
        return cls(
            data["kind"],
            Instance.from_dict(data["original"]),
            Instance.from_dict(data["reduced"]),
            tuple(data["added_latency"]),
            dict(data.get("params", {})),
            cls.from_dict(inner) if inner else None,
        )


# --- scaling (period normalization) -------------------------------------------


def _scale(instance: Instance, factor: int, tau: int) -> Instance:
    return Instance(instance.period * factor, tau, tuple(factor * d for d in instance.delays))


def normalize_period(instance: Instance) -> ReductionRecord:
    """Equivalent-or-harder instance whose message size divides its period.

    With ``P = m tau + r`` the new instance has period ``m P``, size ``m tau +
    r`` (so ``m`` meta-offsets) and delays ``m d``.
    """
    P, tau = instance.period, instance.tau
    m, r = divmod(P, tau)
    reduced = _scale(instance, m, m * tau + r)
    return ReductionRecord("normalize", instance, reduced, (0,) * instance.n, {"factor": m})


def compact_scaled(original: Instance, factor: int, offsets: Sequence[int]) -> tuple[int, ...]:
    """Map an assignment of a ``factor``-scaled instance back to ``original``.

    The scaled assignment is read with message size ``factor * tau``.  Starting
    from message 0 moved to offset 0, all messages not yet aligned are slid
    left together until one touches an aligned message; its positions are then
    multiples of ``factor``.  Once every message is aligned, offsets are
    divided by ``factor``.
    """
    n = original.n
    if n == 0:
        return ()
    Ps = original.period * factor
    length = original.tau * factor
    delays = [factor * d for d in original.delays]
    pos = [(o - offsets[0]) % Ps for o in offsets]
    anchored = [False] * n
    anchored[0] = True
    loose = set(range(1, n))
    while loose:
        shift = Ps
        for g in loose:
            s1, s2 = pos[g], (pos[g] + delays[g]) % Ps
            for a in range(n):
                if not anchored[a]:
                    continue
                e1 = pos[a] + length
                e2 = pos[a] + delays[a] + length
                shift = min(shift, (s1 - e1) % Ps, (s2 - e2) % Ps)
        for g in loose:
            pos[g] = (pos[g] - shift) % Ps
        touched = set()
        for g in loose:
            s1, s2 = pos[g], (pos[g] + delays[g]) % Ps
            for a in range(n):
                if anchored[a] and ((s1 - pos[a] - length) % Ps == 0 or (s2 - pos[a] - delays[a] - length) % Ps == 0):
                    touched.add(g)
                    break
        if not touched:  # pragma: no cover - a slide always ends on contact
            raise RuntimeError("compaction made no progress")
        for g in touched:
            anchored[g] = True
        loose -= touched
    if any(p % factor for p in pos):  # pragma: no cover - guaranteed by the alignment argument
        raise RuntimeError("compaction left an unaligned message")
    return tuple(p // factor for p in pos)


# --- size one by doubling the load ------------------------------------------


def _unit_direct(instance: Instance) -> ReductionRecord:
    P, tau = instance.period, instance.tau
    block = 2 * tau
    upper = tuple(int(d % block >= tau) for d in instance.delays)
    reduced = Instance(P // block, 1, tuple(d // block for d in instance.delays))
    return ReductionRecord("unit_size", instance, reduced, (0,) * instance.n, {"upper": list(upper)})


def to_unit_size(instance: Instance) -> ReductionRecord:
    """Reduce to messages of size 1 at (about) twice the load.

    Delays are rounded down to multiples of ``2 tau`` and the instance divided
    by ``2 tau``.  When ``2 tau`` does not divide the period, the instance is
    first scaled by ``2M`` (``M = P // 2tau``) with message size ``P``, which
    has ``M`` blocks of size ``2P``; the unit instance then has period ``M``.
    """
    P, tau = instance.period, instance.tau
    if P % (2 * tau) == 0:
        return _unit_direct(instance)
    M = P // (2 * tau)
    if M == 0:
        raise ValueError(f"period {P} shorter than twice the message size {tau}")
    scaled = _scale(instance, 2 * M, P)
    inner = _unit_direct(scaled)
    return ReductionRecord(
        "unit_size", instance, inner.reduced, (0,) * instance.n, {"factor": 2 * M}, inner
    )


# --- buffering ---------------------------------------------------------------


def _round_up(d: int, step: int, ref: int = 0) -> int:
    return d + (ref - d) % step


def buffer_to_multiple(instance: Instance, k: int) -> ReductionRecord:
    """Buffer every delay up to a multiple of ``tau / k``; the result has size ``k``.

    When ``tau / k`` does not divide the period, the reduced instance keeps the
    original scale (size ``tau``, buffered delays).
    """
    tau = instance.tau
    if k < 1 or tau % k:
        raise ValueError(f"k={k} must be a positive divisor of tau={tau}")
    step = tau // k
    buffered = tuple(_round_up(d, step) for d in instance.delays)
    latency = tuple(b - d for b, d in zip(buffered, instance.delays))
    return _rescaled("buffer", instance, buffered, latency, step, {"k": k})


def latency_profile(instance: Instance) -> list[int]:
    """Total buffering ``L(t)`` needed to bring every delay to remainder ``t`` mod ``tau``."""
    tau = instance.tau
    return [sum((t - d) % tau for d in instance.delays) for t in range(tau)]


def best_reference_remainder(instance: Instance) -> tuple[int, int]:
    """Reference remainder minimizing total added latency, and that latency."""
    profile = latency_profile(instance)
    t0 = min(range(len(profile)), key=lambda t: (profile[t], t))
    return t0, profile[t0]


def buffer_to_reference(instance: Instance, t0: Optional[int] = None) -> ReductionRecord:
    """Buffer all delays to remainder ``t0`` mod ``tau`` and reduce to size 1.

    ``t0`` defaults to the latency-optimal reference.  The reduced instance has
    period ``P / tau`` and delays ``(d + b - t0) / tau``; when ``tau`` does not
    divide the period it keeps the original scale.
    """
    tau = instance.tau
    if t0 is None:
        t0, _ = best_reference_remainder(instance)
    if not 0 <= t0 < tau:
        raise ValueError(f"reference remainder {t0} outside [0, {tau})")
    buffered = tuple(_round_up(d, tau, t0) for d in instance.delays)
    latency = tuple(b - d for b, d in zip(buffered, instance.delays))
    return _rescaled("reference_remainder", instance, buffered, latency, tau, {"t0": t0})


def _rescaled(kind, instance, buffered, latency, step, params) -> ReductionRecord:
    P, tau = instance.period, instance.tau
    shift = params.get("t0", 0)
    if P % step == 0:
        reduced = Instance(P // step, tau // step, tuple((b - shift) // step for b in buffered))
        params = {**params, "step": step}
    else:
        reduced = Instance(P, tau, buffered)
        params = {**params, "step": 1}
    return ReductionRecord(kind, instance, reduced, latency, params)


def pullback(record: ReductionRecord, offsets: Sequence[int]) -> tuple[int, ...]:
    """Offsets for the original messages from an assignment of ``record.reduced``."""
    if len(offsets) != record.original.n:
        raise ValueError(f"expected {record.original.n} offsets, got {len(offsets)}")
    kind = record.kind
    if kind == "normalize":
        return compact_scaled(record.original, record.params["factor"], offsets)
    if kind == "unit_size":
        if record.inner is not None:
            scaled = pullback(record.inner, offsets)
            return compact_scaled(record.original, record.params["factor"], scaled)
        tau, P = record.original.tau, record.original.period
        upper = record.params["upper"]
        return tuple((2 * tau * o - tau * u) % P for o, u in zip(offsets, upper))
    if kind in ("buffer", "reference_remainder"):
        step = record.params["step"]
        return tuple(step * o for o in offsets)
    raise ValueError(f"unknown reduction kind {kind!r}")


# --- Compact Pair for tau = 2 -----------------------------------------------


def compact_pair_tau2_solve(instance: Instance) -> GreedyOutcome:
    """Compact pairs within the smaller delay-parity class, then everything else singly."""
    if instance.tau != 2:
        raise ValueError(f"compact_pair_tau2_solve needs tau=2, got {instance.tau}")
    even = [i for i, d in enumerate(instance.delays) if d % 2 == 0]
    odd = [i for i, d in enumerate(instance.delays) if d % 2 == 1]
    return compact_pairs_of_class(instance, even if len(even) <= len(odd) else odd)


def check_pullback(record: ReductionRecord, offsets: Sequence[int]) -> bool:
    """Pull back and validate against the effective original instance."""
    return is_valid(record.effective(), pullback(record, offsets))
