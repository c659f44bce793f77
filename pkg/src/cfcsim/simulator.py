"""Event-driven simulation of converter channels.

One channel cycles through three phases:

    Integrating     the effective current discharges the selected
                    capacitor from v_ref_h toward v_ref_l
    RequestPending  the threshold crossing raised a request; the channel
                    waits for the receiver's acknowledge (latency from
                    the :class:`AckModel`)
    ResetPulse      the extended reset (t_rst) clamps the integrator and
                    restores BOTH capacitors to v_ref_h

Input charge arriving during RequestPending or ResetPulse is discarded,
which is exactly the dead-time mechanism that makes uncompensated decode
read low at high rates.  A range switch mid-integration freezes the
deselected capacitor at its held voltage; it resumes from there when
reselected.

Threshold crossings are solved in closed form.  The stimulus is reduced
to linear pieces of *effective* current (rectified, leak floor applied,
split wherever the range selection can change), and within one piece the
charge balance

    integral i_eff dt  =  C_equiv * (v_active - v_ref_l)

is a quadratic in the crossing time.  No fixed time step exists in this
path; :func:`oracle_simulate` is the deliberately different brute-force
integrator used to cross-check it in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .core import CfcConfig, ConfigError, Polarity, RangeSelect, ideal_rate, rectify, select_range
from .stimulus import CurrentSignal

DEFAULT_EVENT_CAP = 100_000_000


class Phase(Enum):
    INTEGRATING = "integrating"
    REQUEST_PENDING = "request_pending"
    RESET_PULSE = "reset_pulse"


@dataclass
class ChannelState:
    """Live state of one channel (what the trace samples)."""

    v_low: float           # V, held on the small capacitor
    v_high: float          # V, held on the large capacitor
    selected: RangeSelect
    phase: Phase
    t_phase_start: float   # s, when the current phase began


@dataclass(frozen=True)
class AerEvent:
    """One emitted address-event."""

    t_req: float        # s, request timestamp
    channel: int
    sf: RangeSelect     # active range at emission


class EventStream:
    """Columnar, immutable-by-convention batch of events.

    Keeps a million events in three flat arrays instead of a million
    objects; iteration and indexing still hand out :class:`AerEvent`.
    """

    __slots__ = ("t_req", "channel", "sf")

    def __init__(self, t_req: np.ndarray, channel: np.ndarray, sf: np.ndarray):
        self.t_req = np.asarray(t_req, dtype=np.float64)
        self.channel = np.asarray(channel, dtype=np.int64)
        self.sf = np.asarray(sf, dtype=np.uint8)
        if not (self.t_req.shape == self.channel.shape == self.sf.shape):
            raise ValueError("event columns must have matching shapes")

    @classmethod
    def empty(cls) -> "EventStream":
        return cls(np.empty(0), np.empty(0, dtype=np.int64), np.empty(0, dtype=np.uint8))

    @classmethod
    def from_events(cls, events: Iterable[AerEvent]) -> "EventStream":
        evs = list(events)
        return cls(
            np.asarray([e.t_req for e in evs]),
            np.asarray([e.channel for e in evs], dtype=np.int64),
            np.asarray([int(e.sf) for e in evs], dtype=np.uint8),
        )

    @classmethod
    def merge(cls, streams: Sequence["EventStream"]) -> "EventStream":
        """Merge per-channel streams into one, ordered by (time, channel)."""
        if not streams:
            return cls.empty()
        t = np.concatenate([s.t_req for s in streams])
        ch = np.concatenate([s.channel for s in streams])
        sf = np.concatenate([s.sf for s in streams])
        order = np.lexsort((ch, t))
        return cls(t[order], ch[order], sf[order])

    def __len__(self) -> int:
        return int(self.t_req.size)

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return EventStream(self.t_req[idx], self.channel[idx], self.sf[idx])
        return AerEvent(float(self.t_req[idx]), int(self.channel[idx]), RangeSelect(int(self.sf[idx])))

    def isis(self) -> np.ndarray:
        return np.diff(self.t_req)


def as_stream(events: Union[EventStream, Iterable[AerEvent]]) -> EventStream:
    if isinstance(events, EventStream):
        return events
    return EventStream.from_events(events)


@dataclass(frozen=True)
class AckModel:
    """Acknowledge latency of the off-chip receiver.

    ``latency`` is the fixed part; a positive ``jitter`` adds a uniform
    draw in [0, jitter) per event from a generator seeded with
    ``(seed, channel_address)``, so the sequence is reproducible and
    independent per channel.
    """

    latency: float = 0.0
    jitter: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.latency < 0:
            raise ConfigError(f"ack latency must be non-negative, got {self.latency}")
        if self.jitter < 0:
            raise ConfigError(f"ack jitter must be non-negative, got {self.jitter}")

    def rng_for(self, channel_address: int) -> Optional[np.random.Generator]:
        if self.jitter > 0.0:
            return np.random.default_rng([self.seed, channel_address])
        return None


@dataclass(frozen=True)
class TraceOptions:
    """State-trace sampling: all phase boundaries, plus extra samples so
    that no gap exceeds ``sample_dt`` (when set)."""

    sample_dt: Optional[float] = None

    def __post_init__(self) -> None:
        if self.sample_dt is not None and self.sample_dt <= 0:
            raise ConfigError(f"sample_dt must be positive, got {self.sample_dt}")


class StateTrace:
    """Recorded (t, v_low, v_high, phase, selected) rows."""

    def __init__(self):
        self.t: list[float] = []
        self.v_low: list[float] = []
        self.v_high: list[float] = []
        self.phase: list[Phase] = []
        self.selected: list[RangeSelect] = []

    def add(self, t: float, v_low: float, v_high: float, phase: Phase, selected: RangeSelect) -> None:
        self.t.append(t)
        self.v_low.append(v_low)
        self.v_high.append(v_high)
        self.phase.append(phase)
        self.selected.append(selected)

    def __len__(self) -> int:
        return len(self.t)

    def rows(self):
        return zip(self.t, self.v_low, self.v_high, self.phase, self.selected)

    def states(self):
        """Yield ``(t, ChannelState)`` pairs; each state's phase-start
        time is recovered from the recorded phase boundaries."""
        t_phase = 0.0
        prev_phase: Optional[Phase] = None
        for t, v_low, v_high, phase, selected in self.rows():
            if phase is not prev_phase:
                t_phase = t
                prev_phase = phase
            yield t, ChannelState(v_low, v_high, selected, phase, t_phase)


@dataclass
class SimResult:
    events: EventStream
    trace: Optional[StateTrace] = None


class EventCapError(RuntimeError):
    """The event-count safety cap was hit; partial results are attached."""

    def __init__(self, cap: int, events: EventStream, trace: Optional[StateTrace]):
        super().__init__(
            f"event cap of {cap} exceeded; simulation truncated (partial results attached)"
        )
        self.cap = cap
        self.events = events
        self.trace = trace


def nonideal(config: CfcConfig, i_rect: float) -> float:
    """Mirror-leakage floor: currents at or below it vanish entirely.

    Modelled as a hard cutoff rather than a subtracted leak: a
    subtractive leak would skew readings just above the floor by tens of
    percent, while measured behaviour there is accurate.
    """
    if i_rect < 0:
        raise ValueError(f"rectified current must be non-negative, got {i_rect}")
    return 0.0 if i_rect <= config.i_leak_floor else i_rect


def power_estimate(
    events: Union[EventStream, Iterable[AerEvent]],
    duration: float,
    energy_per_event: float = 0.36e-12,
    static_power: float = 0.0,
) -> float:
    """Average power of a run: static part plus energy per emitted event.

    The default 0.36 pJ/event reproduces 36 nW at a sustained 100 kHz
    output, the worst-case operating point of the reference channel.
    """
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    n = len(as_stream(events))
    return static_power + energy_per_event * n / duration


# ---------------------------------------------------------------------------
# stimulus preprocessing: signed piecewise-linear current -> effective pieces
# ---------------------------------------------------------------------------


def _split_linear(a, b, ya, yb, targets):
    """Split the line (a,ya)-(b,yb) at strict interior crossings of targets."""
    cuts = []
    if yb != ya:
        inv = (b - a) / (yb - ya)
        for tg in targets:
            if (ya - tg) * (yb - tg) < 0.0:
                cuts.append((a + (tg - ya) * inv, tg))
    if not cuts:
        return [(a, b, ya, yb)]
    cuts.sort()
    pieces = []
    t0, y0 = a, ya
    for tc, tg in cuts:
        if tc > t0:
            pieces.append((t0, tc, y0, tg))
            t0, y0 = tc, tg
    if b > t0:
        pieces.append((t0, b, y0, yb))
    return pieces


def _effective_segments(config: CfcConfig, stimulus: CurrentSignal, duration: float):
    """Linear pieces of effective (rectified + floored) current covering
    [0, duration], split so no piece straddles the leak floor, the range
    threshold or its hysteresis band edge."""
    accept_positive = config.polarity is Polarity.SINK_N
    thresholds = [config.i_leak_floor, config.i_sw]
    if config.hysteresis > 0:
        thresholds.append(config.i_sw * (1.0 - config.hysteresis))
    out = []
    for a, b, ia, ib in stimulus.iter_segments(0.0, duration):
        for pa, pb, pia, pib in _split_linear(a, b, ia, ib, [0.0]):
            mid = 0.5 * (pia + pib)
            accepted = (mid > 0.0) if accept_positive else (mid < 0.0)
            if not accepted:
                out.append((pa, pb, 0.0, 0.0))
                continue
            ra, rb = abs(pia), abs(pib)
            for qa, qb, qra, qrb in _split_linear(pa, pb, ra, rb, thresholds):
                if 0.5 * (qra + qrb) <= config.i_leak_floor:
                    out.append((qa, qb, 0.0, 0.0))
                else:
                    out.append((qa, qb, qra, qrb))
    return out


def _segment_selection(config: CfcConfig, segments) -> list[RangeSelect]:
    """Range selection per effective piece (constant within each by
    construction); hysteresis makes it a stateful fold over midpoints."""
    sels: list[RangeSelect] = []
    prev: Optional[RangeSelect] = None
    for _, _, ia, ib in segments:
        prev = select_range(config, 0.5 * (ia + ib), previous=prev)
        sels.append(prev)
    return sels


# ---------------------------------------------------------------------------
# production simulation: closed-form crossings, no fixed time step
# ---------------------------------------------------------------------------


class _Recorder:
    """Trace bookkeeping kept out of the hot loop."""

    def __init__(self, opts: TraceOptions):
        self.trace = StateTrace()
        self.sample_dt = opts.sample_dt

    def add(self, t, v_low, v_high, phase, sel):
        self.trace.add(t, v_low, v_high, phase, sel)

    def integration(self, t0, t1, v_low, v_high, sel, c_eq, i0, slope):
        """Densify an integration stretch; voltages follow the exact
        quadratic charge integral."""
        if self.sample_dt is None or t1 - t0 <= self.sample_dt:
            return
        n = int(math.floor((t1 - t0) / self.sample_dt))
        for k in range(1, n + 1):
            tau = t0 + k * self.sample_dt
            if tau >= t1:
                break
            dtau = tau - t0
            drop = (i0 * dtau + 0.5 * slope * dtau * dtau) / c_eq
            if sel is RangeSelect.LOW:
                self.add(tau, v_low - drop, v_high, Phase.INTEGRATING, sel)
            else:
                self.add(tau, v_low, v_high - drop, Phase.INTEGRATING, sel)


def simulate(
    config: CfcConfig,
    stimulus: CurrentSignal,
    duration: float,
    ack: Optional[AckModel] = None,
    trace: Optional[TraceOptions] = None,
    max_events: int = DEFAULT_EVENT_CAP,
) -> SimResult:
    """Run one channel against a stimulus and collect its event stream.

    Deterministic: the same config, stimulus and ack seed produce
    bit-identical event lists on every run.  Raises
    :class:`EventCapError` (with partial results attached) if more than
    ``max_events`` crossings occur.
    """
    if duration <= 0:
        raise ConfigError(f"duration must be positive, got {duration}")
    if stimulus.end < duration:
        raise ConfigError(
            f"stimulus is defined up to {stimulus.end} s but the run lasts {duration} s"
        )
    if max_events < 1:
        raise ConfigError("max_events must be at least 1")
    ack = AckModel() if ack is None else ack
    rng = ack.rng_for(config.channel_address)

    segments = _effective_segments(config, stimulus, duration)
    selections = _segment_selection(config, segments)

    v_ref_h, v_ref_l, t_rst = config.v_ref_h, config.v_ref_l, config.t_rst
    c_low = config.c1
    c_high = config.alpha * config.beta * config.c1

    rec = _Recorder(trace) if trace is not None else None
    ev_t: list[float] = []
    ev_sf: list[int] = []

    v_low = v_high = v_ref_h
    dead_until = 0.0
    ack_boundary = 0.0  # request-pending ends, reset pulse begins
    in_dead = False
    last_sel = selections[0] if selections else RangeSelect.LOW
    if rec:
        rec.add(0.0, v_low, v_high, Phase.INTEGRATING, last_sel)

    def _partial(trace_obj):
        events = EventStream(
            np.asarray(ev_t),
            np.full(len(ev_t), config.channel_address, dtype=np.int64),
            np.asarray(ev_sf, dtype=np.uint8),
        )
        return events, trace_obj

    for (a, b, ia, ib), sel in zip(segments, selections):
        slope = (ib - ia) / (b - a)
        c_eq = c_low if sel is RangeSelect.LOW else c_high
        if rec and sel is not last_sel:
            if in_dead and a < dead_until:
                phase_now = Phase.REQUEST_PENDING if a < ack_boundary else Phase.RESET_PULSE
            else:
                phase_now = Phase.INTEGRATING
            rec.add(a, v_low, v_high, phase_now, sel)
        last_sel = sel
        t = a
        if in_dead:
            if dead_until >= b:
                continue
            t = dead_until
            v_low = v_high = v_ref_h
            in_dead = False
            if rec:
                rec.add(t, v_low, v_high, Phase.INTEGRATING, sel)
        while t < b:
            v_active = v_low if sel is RangeSelect.LOW else v_high
            q_need = c_eq * (v_active - v_ref_l)
            i_t = ia + slope * (t - a)

            # batched steady-state cycles on flat stretches
            if (
                slope == 0.0
                and rng is None
                and rec is None
                and i_t > 0.0
                and v_low == v_ref_h
                and v_high == v_ref_h
            ):
                isi_int = q_need / i_t
                first = t + isi_int
                if first > b:
                    drop = (b - t) * i_t / c_eq
                    if sel is RangeSelect.LOW:
                        v_low = v_active - drop
                    else:
                        v_high = v_active - drop
                    t = b
                    break
                period = isi_int + ack.latency + t_rst
                n = int(math.floor((b - first) / period + 1e-9)) + 1
                room = max_events - len(ev_t)
                clipped = n > room
                n = min(n, room)
                times = first + period * np.arange(n, dtype=np.float64)
                ev_t.extend(times.tolist())
                ev_sf.extend([int(sel)] * n)
                if clipped:
                    events, tr = _partial(None)
                    raise EventCapError(max_events, events, tr)
                dead_until = float(times[-1]) + ack.latency + t_rst
                if dead_until >= b:
                    in_dead = True
                    t = b
                    break
                t = dead_until
                v_low = v_high = v_ref_h
                continue

            q_avail = 0.5 * (i_t + ib) * (b - t)
            if q_need > 0.0 and q_avail < q_need:
                if rec:
                    rec.integration(t, b, v_low, v_high, sel, c_eq, i_t, slope)
                drop = q_avail / c_eq
                if sel is RangeSelect.LOW:
                    v_low = v_active - drop
                else:
                    v_high = v_active - drop
                t = b
                break

            if q_need <= 0.0:
                if i_t <= 0.0 and slope == 0.0:
                    # rounding dust left the voltage a hair past threshold
                    # at a boundary, but no current flows here: hold rather
                    # than emit a zero-current event that exact arithmetic
                    # would never produce
                    t = b
                    break
                t_ev = t
            else:
                disc = i_t * i_t + 2.0 * slope * q_need
                t_ev = t + 2.0 * q_need / (i_t + math.sqrt(disc))
                if t_ev > b:
                    t_ev = b
            if len(ev_t) >= max_events:
                events, tr = _partial(rec.trace if rec else None)
                raise EventCapError(max_events, events, tr)
            if rec:
                rec.integration(t, t_ev, v_low, v_high, sel, c_eq, i_t, slope)
            ev_t.append(t_ev)
            ev_sf.append(int(sel))
            latency = ack.latency + (rng.uniform(0.0, ack.jitter) if rng is not None else 0.0)
            if sel is RangeSelect.LOW:
                v_low = v_ref_l
            else:
                v_high = v_ref_l
            ack_boundary = t_ev + latency
            if rec:
                rec.add(t_ev, v_low, v_high, Phase.REQUEST_PENDING, sel)
                if ack_boundary <= duration:
                    rec.add(ack_boundary, v_low, v_high, Phase.RESET_PULSE, sel)
            dead_until = t_ev + latency + t_rst
            if dead_until >= b:
                in_dead = True
                t = b
                break
            t = dead_until
            v_low = v_high = v_ref_h
            if rec:
                rec.add(t, v_low, v_high, Phase.INTEGRATING, sel)

    if rec:
        end_phase = Phase.INTEGRATING
        if in_dead and dead_until > duration:
            end_phase = Phase.REQUEST_PENDING if duration < ack_boundary else Phase.RESET_PULSE
        rec.add(duration, v_low, v_high, end_phase, last_sel)

    events, _ = _partial(None)
    return SimResult(events=events, trace=rec.trace if rec else None)


def simulate_many(
    channels: Sequence[tuple[CfcConfig, CurrentSignal]],
    duration: float,
    ack: Optional[AckModel] = None,
    parallel: int = 1,
) -> EventStream:
    """Simulate independent channels and merge their events by timestamp.

    Channels share no mutable state, so the merge is identical whatever
    the execution order; ``parallel`` > 1 runs them on a thread pool.
    """
    addresses = [cfg.channel_address for cfg, _ in channels]
    if len(set(addresses)) != len(addresses):
        raise ConfigError("channel addresses must be unique")

    def one(pair):
        cfg, stim = pair
        return simulate(cfg, stim, duration, ack=ack).events

    if parallel > 1 and len(channels) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=parallel) as pool:
            streams = list(pool.map(one, channels))
    else:
        streams = [one(pair) for pair in channels]
    return EventStream.merge(streams)


# ---------------------------------------------------------------------------
# brute-force oracle: fixed-step accumulation, used only for verification
# ---------------------------------------------------------------------------


def _raw_crossings(stimulus: CurrentSignal, duration: float, targets) -> list[float]:
    """Times where the raw signed stimulus crosses any target level."""
    times = []
    for a, b, ia, ib in stimulus.iter_segments(0.0, duration):
        if ib == ia:
            continue
        inv = (b - a) / (ib - ia)
        for tg in targets:
            if (ia - tg) * (ib - tg) < 0.0:
                times.append(a + (tg - ia) * inv)
    return times


def _fastest_ideal_isi(config: CfcConfig, stimulus: CurrentSignal, duration: float) -> Optional[float]:
    """Shortest ideal inter-event interval the stimulus can provoke."""
    max_rate = 0.0
    for _, _, ia, ib in stimulus.iter_segments(0.0, duration):
        ra = rectify(ia, config.polarity)
        rb = rectify(ib, config.polarity)
        lo, hi = min(ra, rb), max(ra, rb)
        # the rectified range of this piece also covers zero when the
        # signed piece changes sign
        if (ia < 0 < ib) or (ib < 0 < ia):
            lo = 0.0
        if hi <= config.i_leak_floor:
            continue
        # rate is increasing on each branch; its supremum over [lo, hi]
        # sits at the top of whichever branches the interval touches
        if lo < config.i_sw:
            max_rate = max(max_rate, ideal_rate(config, min(hi, config.i_sw), RangeSelect.LOW))
        if hi >= config.i_sw:
            max_rate = max(max_rate, ideal_rate(config, hi, RangeSelect.HIGH))
    if max_rate == 0.0:
        return None
    return 1.0 / max_rate


def oracle_simulate(
    config: CfcConfig,
    stimulus: CurrentSignal,
    duration: float,
    dt: float,
    ack: Optional[AckModel] = None,
    max_events: int = DEFAULT_EVENT_CAP,
) -> EventStream:
    """Fixed-step reference integrator for verifying :func:`simulate`.

    Accumulates trapezoidal charge on a time grid of pitch ``dt`` (the
    grid additionally lands on stimulus breakpoints and threshold
    crossings so every step sees a single linear piece and one range),
    then places each event by linear interpolation inside the step that
    crossed.  Event times agree with the closed-form path within 2 * dt.

    Refuses to run when ``dt`` is coarser than 1/1000 of the fastest
    ideal inter-event interval the stimulus can provoke.  Supports zero
    comparator hysteresis only.  Test machinery: not meant for
    production use.
    """
    if dt <= 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    if duration <= 0:
        raise ConfigError(f"duration must be positive, got {duration}")
    if stimulus.end < duration:
        raise ConfigError("stimulus ends before the requested duration")
    if config.hysteresis != 0.0:
        raise ConfigError("the oracle supports zero comparator hysteresis only")
    fastest = _fastest_ideal_isi(config, stimulus, duration)
    if fastest is not None and dt > fastest / 1000.0:
        raise ConfigError(
            f"dt = {dt} too coarse for the fastest expected interval "
            f"{fastest}; need dt <= {fastest / 1000.0}"
        )
    ack = AckModel() if ack is None else ack
    rng = ack.rng_for(config.channel_address)

    accept_positive = config.polarity is Polarity.SINK_N
    floor = config.i_leak_floor
    i_sw = config.i_sw
    v_ref_h, v_ref_l, t_rst = config.v_ref_h, config.v_ref_l, config.t_rst
    c_low = config.c1
    c_high = config.alpha * config.beta * config.c1

    sign_targets = [0.0]
    sign_targets += [floor, i_sw] if accept_positive else [-floor, -i_sw]
    specials = np.asarray(sorted(set(
        list(stimulus.times[(stimulus.times > 0) & (stimulus.times < duration)])
        + [x for x in _raw_crossings(stimulus, duration, sign_targets) if 0.0 < x < duration]
    )))

    def eff_values(ts: np.ndarray, side: str = "right") -> np.ndarray:
        raw = stimulus.values(ts, side=side)
        r = np.maximum(raw, 0.0) if accept_positive else np.maximum(-raw, 0.0)
        return np.where(r > floor, r, 0.0)

    ev_t: list[float] = []
    ev_sf: list[int] = []
    t = 0.0
    v_low = v_high = v_ref_h
    chunk = 1 << 16

    while t < duration:
        if len(ev_t) >= max_events:
            raise EventCapError(
                max_events,
                EventStream(
                    np.asarray(ev_t),
                    np.full(len(ev_t), config.channel_address, dtype=np.int64),
                    np.asarray(ev_sf, dtype=np.uint8),
                ),
                None,
            )
        t_hi = min(duration, t + chunk * dt)
        n = max(1, int(math.ceil((t_hi - t) / dt - 1e-12)))
        ts = t + dt * np.arange(n + 1)
        ts[-1] = t_hi
        lo_idx, hi_idx = np.searchsorted(specials, [t, t_hi], side="right")
        inside = specials[lo_idx:hi_idx]
        if inside.size:
            ts = np.unique(np.concatenate([ts, inside]))
        # step starts take right limits, step ends take left limits, so a
        # stimulus jump sitting exactly on a grid point charges each side
        # of the discontinuity with its own segment's current
        ie = eff_values(ts)
        ie_end = eff_values(ts, side="left")
        steps = np.diff(ts)
        mids = 0.5 * (ie[:-1] + ie_end[1:])
        sel_high = mids >= i_sw
        dq = mids * steps
        dv_low = np.where(sel_high, 0.0, dq / c_low)
        dv_high = np.where(sel_high, dq / c_high, 0.0)
        cum_low = v_low - np.cumsum(dv_low)
        cum_high = v_high - np.cumsum(dv_high)
        active_end = np.where(sel_high, cum_high, cum_low)
        hit = active_end <= v_ref_l
        if not hit.any():
            v_low = float(cum_low[-1])
            v_high = float(cum_high[-1])
            t = float(ts[-1])
            continue
        k = int(np.argmax(hit))
        vl_k = float(cum_low[k - 1]) if k else v_low
        vh_k = float(cum_high[k - 1]) if k else v_high
        start_active = vh_k if sel_high[k] else vl_k
        step_drop = float(dv_high[k] if sel_high[k] else dv_low[k])
        need = start_active - v_ref_l
        frac = 0.0 if step_drop <= 0.0 else min(max(need / step_drop, 0.0), 1.0)
        t_ev = float(ts[k]) + frac * float(steps[k])
        ev_t.append(t_ev)
        ev_sf.append(1 if sel_high[k] else 0)
        latency = ack.latency + (rng.uniform(0.0, ack.jitter) if rng is not None else 0.0)
        t = t_ev + latency + t_rst
        v_low = v_high = v_ref_h

    return EventStream(
        np.asarray(ev_t),
        np.full(len(ev_t), config.channel_address, dtype=np.int64),
        np.asarray(ev_sf, dtype=np.uint8),
    )
