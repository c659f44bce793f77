"""Command-line front end.

    cfcsim simulate --config spec.json --out run/
    cfcsim decode events.csv --out run/ [--config spec.json] [--compensate]
    cfcsim preset fig4 --out results/fig4 [--seed 1] [--parallel 4]
    cfcsim sweep --start 1e-9 --stop 1e-8 --steps 10 --dwell 0.1 --out run/

Exit codes: 0 success, 2 configuration/usage error, 3 runtime error.
Omitting ``--seed`` uses the fixed default 0; nothing ever draws from
wall-clock entropy, so identical invocations produce identical files.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import formats
from .core import CfcConfig, ConfigError
from .decoder import reconstruct, sweep_analysis
from .experiment import DEFAULT_SEED, load_spec, run_decode, run_simulate
from .presets import PRESETS, run_preset
from .simulator import AckModel, simulate
from .stimulus import staircase_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _add_common(p: argparse.ArgumentParser, config_help: str) -> None:
    p.add_argument("--config", type=Path, default=None, help=config_help)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help=f"random seed (default {DEFAULT_SEED})")
    p.add_argument("--parallel", type=int, default=1, help="worker threads for independent sub-runs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cfcsim",
        description="Simulate an auto-ranging current-to-frequency monitor and decode its event streams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one experiment description")
    _add_common(p_sim, "experiment description JSON (required)")
    p_sim.add_argument("--duration", type=float, default=None, help="override the run duration in seconds")
    p_sim.add_argument("--trace", action="store_true", help="also write the state trace CSV")

    p_dec = sub.add_parser("decode", help="reconstruct currents from an events CSV")
    p_dec.add_argument("events", type=Path, help="events CSV (schema: t_req_s,channel,sf)")
    _add_common(p_dec, "experiment JSON or flat converter-config JSON")
    p_dec.add_argument(
        "--compensate",
        action="store_true",
        help="subtract the dead time (reset pulse + ack latency) from every interval",
    )

    p_pre = sub.add_parser("preset", help="run a canned end-to-end experiment")
    p_pre.add_argument("name", choices=sorted(PRESETS), help="preset name")
    _add_common(p_pre, "unused; presets are self-contained")
    p_pre.add_argument("--compensate", action="store_true", help="decode with dead-time compensation")

    p_swp = sub.add_parser("sweep", help="staircase sweep with per-step decode")
    _add_common(p_swp, "converter-config overrides JSON")
    p_swp.add_argument("--start", type=float, required=True, help="first step current in A")
    p_swp.add_argument("--stop", type=float, required=True, help="last step current in A")
    p_swp.add_argument("--steps", type=int, required=True, help="number of steps")
    p_swp.add_argument("--dwell", type=float, required=True, help="dwell per step in s")
    p_swp.add_argument("--compensate", action="store_true", help="decode with dead-time compensation")

    return parser


def _load_decode_config(path: Optional[Path], seed: int) -> tuple[CfcConfig, AckModel]:
    """Decode accepts either a full experiment spec or flat config overrides."""
    if path is None:
        return CfcConfig(), AckModel(seed=seed)
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    if "config" in raw or "stimulus" in raw:
        spec = load_spec(raw, seed_override=seed)
        return spec.config, spec.ack
    return CfcConfig.from_dict(raw), AckModel(seed=seed)


def _cmd_simulate(args) -> int:
    if args.config is None:
        raise ConfigError("simulate requires --config with an experiment description")
    spec = load_spec(args.config, seed_override=args.seed, duration_override=args.duration)
    if args.trace and not spec.trace:
        spec = dataclasses.replace(spec, trace=True)
    summary = run_simulate(spec, args.out)
    print(f"{spec.name}: {summary['event_count']} events -> {args.out}")
    return EXIT_OK


def _cmd_decode(args) -> int:
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    config, ack = _load_decode_config(args.config, seed)
    compensation = config.t_rst + ack.latency if args.compensate else 0.0
    out_path = run_decode(args.events, config, args.out, compensation=compensation)
    print(f"decoded {args.events} -> {out_path}")
    return EXIT_OK


def _cmd_preset(args) -> int:
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    result = run_preset(args.name, args.out, seed=seed, compensate=args.compensate, parallel=args.parallel)
    print(f"preset {result.name}: {len(result.files)} files -> {result.out_dir}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    seed = args.seed if args.seed is not None else DEFAULT_SEED
    overrides = {}
    if args.config is not None:
        try:
            overrides = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: not valid JSON: {exc}") from None
        if not isinstance(overrides, dict):
            raise ConfigError(f"{args.config}: top level must be a JSON object")
    config = CfcConfig.from_dict(overrides)
    ack = AckModel(seed=seed)
    compensation = config.t_rst + ack.latency if args.compensate else 0.0
    signal, schedule = staircase_sweep(args.start, args.stop, args.steps, args.dwell)
    duration = schedule.span[1]
    result = simulate(config, signal, duration, ack=ack)
    points = sweep_analysis(result.events, schedule, config, compensation=compensation)
    recon = reconstruct(result.events, config, compensation=compensation)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    formats.write_signal_csv(out / "truth.csv", signal)
    formats.write_events_csv(out / "events.csv", result.events)
    formats.write_recon_csv(out / "recon.csv", recon)
    from .presets import _write_sweep_csv

    _write_sweep_csv(out / "sweep.csv", points)
    measured = sum(1 for p in points if p.decoded is not None)
    formats.write_summary_json(out / "summary.json", {
        "name": "sweep",
        "seed": seed,
        "start_A": args.start,
        "stop_A": args.stop,
        "steps": args.steps,
        "dwell_s": args.dwell,
        "compensation_s": compensation,
        "event_count": len(result.events),
        "steps_measured": measured,
        "steps_no_measurement": len(points) - measured,
        "config": config.to_dict(),
    })
    print(f"sweep: {len(result.events)} events, {measured}/{len(points)} steps measured -> {out}")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "decode": _cmd_decode,
    "preset": _cmd_preset,
    "sweep": _cmd_sweep,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except formats.CsvFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
