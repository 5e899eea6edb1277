"""Command-line entry point.

Subcommands: `region`, `curves`, `slopes` (CSV/JSON writers driven by a
scenario config file) and `validate` (the oracle suite).  Exit codes:
0 success, 2 config error, 3 numerical failure; the failure message names
the operation.  Output CSVs are deterministic per config, regardless of
the ISAC_MI_THREADS worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__, curves, downlink, uplink, validate
from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateNoiseError,
    InfeasibleFrameError,
    UnreliableRegimeError,
)
from .model import ScenarioConfig, scenario_from_dict, scenario_to_dict

_NUMERIC_ERRORS = (
    ConvergenceError,
    DegenerateNoiseError,
    InfeasibleFrameError,
    UnreliableRegimeError,
    np.linalg.LinAlgError,
    FloatingPointError,
)


def _load_scenario(config_path: str) -> ScenarioConfig:
    try:
        with open(config_path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {config_path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(data)


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_atomic(path: str, text: str):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_csv(path: str, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def _write_manifest(out_dir: str, command: str, scenario: ScenarioConfig,
                    outputs, started: float):
    manifest = {
        "tool_version": __version__,
        "command": command,
        "scenario": scenario_to_dict(scenario),
        "seed": scenario.seed,
        "duration_s": time.monotonic() - started,
        "outputs": sorted(outputs),
    }
    path = os.path.join(out_dir, f"manifest_{command}_{scenario.kind}.json")
    _write_atomic(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _region_rows(scenario: ScenarioConfig, mode: str):
    if scenario.kind == "uplink":
        return uplink.uplink_region_rows(scenario, mode)
    return downlink.downlink_region_rows(scenario, mode)


def cmd_region(config_path: str, mode: str, out_dir: str) -> int:
    scenario = _load_scenario(config_path)
    if mode not in ("isac", "fdsac", "both"):
        raise ConfigError(f"mode must be isac, fdsac, or both, got {mode!r}")
    os.makedirs(out_dir, exist_ok=True)
    started = time.monotonic()
    outputs = []
    modes = ("isac", "fdsac") if mode == "both" else (mode,)
    for one_mode in modes:
        _, rows = _region_rows(scenario, one_mode)
        path = os.path.join(out_dir, f"region_{scenario.kind}_{one_mode}.csv")
        _write_csv(
            path,
            ("cr_bits_hz", "sr_bits_hz", "sweep_param", "stderr_cr", "stderr_sr"),
            [
                (row.point.cr, row.point.sr, row.sweep_param, row.stderr_cr, row.stderr_sr)
                for row in rows
            ],
        )
        outputs.append(os.path.basename(path))
        print(f"wrote {path} ({len(rows)} frontier points)")
    _write_manifest(out_dir, "region", scenario, outputs, started)
    return 0


def cmd_curves(config_path: str, out_dir: str) -> int:
    scenario = _load_scenario(config_path)
    if not scenario.snr_sweep:
        raise ConfigError("curves need a nonempty snr_sweep in the config")
    os.makedirs(out_dir, exist_ok=True)
    started = time.monotonic()
    table = curves.rate_curves(scenario)
    path = os.path.join(out_dir, f"curves_{scenario.kind}.csv")
    _write_csv(
        path,
        ("power_db", "cr_isac", "sr_isac", "cr_fdsac", "sr_fdsac"),
        list(zip(
            table["power_db"], table["cr_isac"], table["sr_isac"],
            table["cr_fdsac"], table["sr_fdsac"],
        )),
    )
    print(f"wrote {path} ({table['power_db'].size} powers)")
    _write_manifest(out_dir, "curves", scenario, [os.path.basename(path)], started)
    return 0


def cmd_slopes(config_path: str, out_dir: str) -> int:
    scenario = _load_scenario(config_path)
    os.makedirs(out_dir, exist_ok=True)
    started = time.monotonic()
    pairs = curves.slope_run(scenario)
    payload = {
        "cr": {
            mode: curves.slope_estimate_dict(pairs[mode].cr_slope) for mode in ("isac", "fdsac")
        },
        "sr": {
            mode: curves.slope_estimate_dict(pairs[mode].sr_slope) for mode in ("isac", "fdsac")
        },
        "slope_powers": list(curves.SLOPE_POWERS),
        "fdsac_alpha": curves.fdsac_curve_alpha(scenario),
    }
    path = os.path.join(out_dir, f"slopes_{scenario.kind}.json")
    _write_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")
    _write_manifest(out_dir, "slopes", scenario, [os.path.basename(path)], started)
    return 0


def cmd_validate() -> int:
    return validate.run_all(report=print)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="isac-mi",
        description="Mutual-information rate regions, curves, and slopes for ISAC scenarios.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_region = sub.add_parser("region", help="trace a sensing-communication rate region")
    p_region.add_argument("--config", required=True, help="scenario config JSON")
    p_region.add_argument("--out", required=True, help="output directory")
    p_region.add_argument("--mode", default="both", choices=("isac", "fdsac", "both"))

    p_curves = sub.add_parser("curves", help="rate-versus-power curves over snr_sweep")
    p_curves.add_argument("--config", required=True)
    p_curves.add_argument("--out", required=True)

    p_slopes = sub.add_parser("slopes", help="high-SNR slopes with analytic references")
    p_slopes.add_argument("--config", required=True)
    p_slopes.add_argument("--out", required=True)

    sub.add_parser("validate", help="run the oracle and property suite")

    args = parser.parse_args(argv)
    try:
        if args.command == "region":
            return cmd_region(args.config, args.mode, args.out)
        if args.command == "curves":
            return cmd_curves(args.config, args.out)
        if args.command == "slopes":
            return cmd_slopes(args.config, args.out)
        return cmd_validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
