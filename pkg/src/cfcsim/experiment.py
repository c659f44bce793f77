"""Experiment descriptions: JSON loading, validation and execution.

An experiment file is a flat JSON object mirroring the field names of
the runtime types; unknown keys anywhere are configuration errors so
typos fail fast::

    {
      "name": "constant-demo",
      "duration": 1.0,
      "seed": 0,
      "trace": false,
      "config": {"i_sw": 1e-8},
      "ack": {"latency": 0.0, "jitter": 0.0},
      "stimulus": {"kind": "constant", "i": 1e-9}
    }

Every experiment resolves to fully concrete objects (or fails) before
any simulation starts, and all randomness derives from the single seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import formats
from .core import CfcConfig, ConfigError
from .decoder import Placement, reconstruct
from .simulator import AckModel, SimResult, TraceOptions, simulate, power_estimate
from .stimulus import (
    CurrentSignal,
    SpikeTrain,
    SweepSchedule,
    constant,
    dpi_synapse,
    pfet_gate_sweep,
    poisson_train,
    regular_train,
    staircase_sweep,
)

DEFAULT_SEED = 0


@dataclass(frozen=True)
class ExperimentSpec:
    """A fully resolved run description."""

    name: str
    config: CfcConfig
    stimulus: CurrentSignal
    duration: float
    ack: AckModel
    seed: int
    trace: bool = False
    schedule: Optional[SweepSchedule] = None


def _reject_unknown(d: dict, allowed: set[str], context: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {context}: {', '.join(sorted(unknown))}")


def _require(d: dict, key: str, context: str):
    if key not in d:
        raise ConfigError(f"missing required key {key!r} in {context}")
    return d[key]


def _build_train(desc: dict, duration: float, seed: int) -> SpikeTrain:
    _reject_unknown(desc, {"kind", "rate", "seed", "times"}, "spike train")
    kind = _require(desc, "kind", "spike train")
    if kind == "regular":
        return regular_train(float(_require(desc, "rate", "spike train")), duration)
    if kind == "poisson":
        train_seed = desc.get("seed", seed)
        return poisson_train(float(_require(desc, "rate", "spike train")), duration, int(train_seed))
    if kind == "explicit":
        return SpikeTrain(np.asarray(_require(desc, "times", "spike train"), dtype=float))
    raise ConfigError(f"unknown spike train kind {kind!r}")


def build_stimulus(
    desc: dict,
    duration: Optional[float],
    seed: int,
) -> tuple[CurrentSignal, Optional[SweepSchedule], float]:
    """Build the stimulus named by a description dict.

    Returns the signal, an optional sweep schedule, and the resolved run
    duration (staircases define their own span).
    """
    if not isinstance(desc, dict):
        raise ConfigError("stimulus must be an object with a 'kind' key")
    kind = _require(desc, "kind", "stimulus")

    if kind == "constant":
        _reject_unknown(desc, {"kind", "i"}, "constant stimulus")
        if duration is None:
            raise ConfigError("constant stimulus needs an explicit duration")
        return constant(float(_require(desc, "i", "constant stimulus")), duration), None, duration

    if kind == "staircase":
        _reject_unknown(desc, {"kind", "start", "stop", "steps", "dwell"}, "staircase stimulus")
        signal, schedule = staircase_sweep(
            float(_require(desc, "start", "staircase")),
            float(_require(desc, "stop", "staircase")),
            int(_require(desc, "steps", "staircase")),
            float(_require(desc, "dwell", "staircase")),
        )
        span = schedule.span[1]
        if duration is not None and duration > span:
            raise ConfigError(
                f"duration {duration} exceeds the staircase span {span}"
            )
        return signal, schedule, duration if duration is not None else span

    if kind == "pfet_sweep":
        _reject_unknown(
            desc,
            {"kind", "vg_start", "vg_stop", "i0", "slope_per_decade", "i_sat", "vg_ref", "points_per_decade"},
            "pfet_sweep stimulus",
        )
        if duration is None:
            raise ConfigError("pfet_sweep stimulus needs an explicit duration")
        signal = pfet_gate_sweep(
            float(_require(desc, "vg_start", "pfet_sweep")),
            float(_require(desc, "vg_stop", "pfet_sweep")),
            duration,
            i0=float(_require(desc, "i0", "pfet_sweep")),
            slope_per_decade=float(_require(desc, "slope_per_decade", "pfet_sweep")),
            i_sat=float(_require(desc, "i_sat", "pfet_sweep")),
            vg_ref=desc.get("vg_ref"),
            points_per_decade=int(desc.get("points_per_decade", 100)),
        )
        return signal, None, duration

    if kind == "dpi_synapse":
        _reject_unknown(
            desc, {"kind", "tau", "weight_jump", "i_base", "resolution", "train"}, "dpi_synapse stimulus"
        )
        if duration is None:
            raise ConfigError("dpi_synapse stimulus needs an explicit duration")
        train = _build_train(_require(desc, "train", "dpi_synapse"), duration, seed)
        signal = dpi_synapse(
            train,
            tau=float(_require(desc, "tau", "dpi_synapse")),
            weight_jump=float(_require(desc, "weight_jump", "dpi_synapse")),
            i_base=float(_require(desc, "i_base", "dpi_synapse")),
            duration=duration,
            resolution=desc.get("resolution"),
        )
        return signal, None, duration

    raise ConfigError(f"unknown stimulus kind {kind!r}")


def load_spec(
    source: Union[str, Path, dict],
    seed_override: Optional[int] = None,
    duration_override: Optional[float] = None,
) -> ExperimentSpec:
    """Parse an experiment description from a JSON file or a dict."""
    if isinstance(source, (str, Path)):
        try:
            raw = json.loads(Path(source).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}: not valid JSON: {exc}") from None
        context = str(source)
    else:
        raw = source
        context = "experiment spec"
    if not isinstance(raw, dict):
        raise ConfigError(f"{context}: top level must be a JSON object")
    _reject_unknown(
        raw, {"name", "config", "stimulus", "duration", "ack", "seed", "trace"}, context
    )
    seed = int(seed_override if seed_override is not None else raw.get("seed", DEFAULT_SEED))
    duration = duration_override if duration_override is not None else raw.get("duration")
    duration = float(duration) if duration is not None else None

    cfg_overrides = raw.get("config", {})
    if not isinstance(cfg_overrides, dict):
        raise ConfigError(f"{context}: 'config' must be an object")
    config = CfcConfig.from_dict(cfg_overrides)

    ack_desc = raw.get("ack", {})
    if not isinstance(ack_desc, dict):
        raise ConfigError(f"{context}: 'ack' must be an object")
    _reject_unknown(ack_desc, {"latency", "jitter"}, "ack model")
    ack = AckModel(
        latency=float(ack_desc.get("latency", 0.0)),
        jitter=float(ack_desc.get("jitter", 0.0)),
        seed=seed,
    )

    stimulus_desc = _require(raw, "stimulus", context)
    signal, schedule, duration = build_stimulus(stimulus_desc, duration, seed)
    return ExperimentSpec(
        name=str(raw.get("name", "run")),
        config=config,
        stimulus=signal,
        duration=duration,
        ack=ack,
        seed=seed,
        trace=bool(raw.get("trace", False)),
        schedule=schedule,
    )


def summarize(spec: ExperimentSpec, result: SimResult) -> dict:
    events = result.events
    n = len(events)
    isi_rate = None
    if n >= 2:
        span = float(events.t_req[-1] - events.t_req[0])
        if span > 0:
            isi_rate = (n - 1) / span
    return {
        "name": spec.name,
        "seed": spec.seed,
        "duration_s": spec.duration,
        "event_count": n,
        "mean_rate_hz": n / spec.duration,
        "isi_mean_rate_hz": isi_rate,
        "power_w": power_estimate(events, spec.duration),
        "config": spec.config.to_dict(),
        "ack": {"latency": spec.ack.latency, "jitter": spec.ack.jitter},
    }


def run_simulate(spec: ExperimentSpec, out_dir: Union[str, Path]) -> dict:
    """Execute an experiment and emit its files into ``out_dir``.

    Writes ``events.csv``, ``truth.csv``, ``summary.json`` and, when the
    spec asks for it, ``trace.csv``.  Deterministic for a fixed seed.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    trace_opts = TraceOptions() if spec.trace else None
    result = simulate(spec.config, spec.stimulus, spec.duration, ack=spec.ack, trace=trace_opts)
    formats.write_events_csv(out / "events.csv", result.events)
    formats.write_signal_csv(out / "truth.csv", spec.stimulus)
    if result.trace is not None:
        formats.write_trace_csv(out / "trace.csv", result.trace)
    summary = summarize(spec, result)
    formats.write_summary_json(out / "summary.json", summary)
    return summary


def run_decode(
    events_path: Union[str, Path],
    config: CfcConfig,
    out_dir: Union[str, Path],
    compensation: float = 0.0,
    placement: Placement = Placement.MIDPOINT,
) -> Path:
    """Decode an events file into ``recon.csv`` inside ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    events = formats.read_events_csv(events_path)
    recon = reconstruct(events, config, compensation=compensation, placement=placement)
    return formats.write_recon_csv(out / "recon.csv", recon)
