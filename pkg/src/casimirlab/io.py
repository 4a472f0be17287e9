"""On-disk formats: sweep CSVs, the run manifest and the analysis/report files.

Every CSV carries a header row with a fixed column order; floating-point
values are serialized with 17 significant digits so they round-trip
exactly. All metadata needed to regroup sweeps into triplets lives in the
manifest, not in filenames (the filenames merely encode it readably).
"""

from __future__ import annotations

import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import config_from_dict, config_to_dict
from .errors import DataError, IncompleteTriplet
from .simulate import CampaignConfig, SweepTrace, TripletRecord

MANIFEST_NAME = "manifest.json"
SWEEP_DIR = "sweeps"

SWEEP_COLUMNS = ("tau_s", "T_meas_K", "R_meas_ohm")


def fmt(x: float) -> str:
    """17-significant-digit decimal form; round-trips float64 exactly."""
    return format(float(x), ".17g")


def sweep_filename(trace: SweepTrace, field_mT: float, replication: int, position: str) -> str:
    """<sample>_<kind>_<sign><field uT>uT_rep<NNN>_<pos>.csv

    The field is the triplet's nominal field in uT (rounded, sign encoded
    as p/m), so the zero-field pre/post sweeps of different triplets get
    distinct names.
    """
    ut = int(round(field_mT * 1000.0))
    sign = "m" if ut < 0 else "p"
    return (
        f"{trace.sample_id}_{trace.kind}_{sign}{abs(ut):07d}uT_"
        f"rep{replication:03d}_{position}.csv"
    )


def write_sweep_csv(path, trace: SweepTrace) -> None:
    lines = [",".join(SWEEP_COLUMNS)]
    for tau, t, r in zip(trace.tau_s, trace.t_meas_K, trace.r_meas_ohm):
        lines.append(f"{fmt(tau)},{fmt(t)},{fmt(r)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_sweep_csv(path, sample_id: str, kind: str, field_mT: float, t_start_s: float) -> SweepTrace:
    rows = Path(path).read_text().splitlines()
    if not rows or rows[0] != ",".join(SWEEP_COLUMNS):
        raise DataError(f"{path}: missing or wrong sweep header")
    data = np.array([[float(v) for v in row.split(",")] for row in rows[1:]])
    if data.ndim != 2 or data.shape[1] != 3:
        raise DataError(f"{path}: malformed sweep data")
    return SweepTrace(
        sample_id=sample_id,
        kind=kind,
        field_mT=field_mT,
        t_start_s=t_start_s,
        tau_s=data[:, 0],
        t_meas_K=data[:, 1],
        r_meas_ohm=data[:, 2],
    )


def write_csv(path, columns, rows) -> None:
    """Generic CSV writer; floats go through fmt(), everything else via str."""
    out = [",".join(columns)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, bool):
                cells.append(str(int(v)))
            elif isinstance(v, (float, np.floating)):
                cells.append(fmt(v))
            else:
                cells.append(str(v))
        out.append(",".join(cells))
    Path(path).write_text("\n".join(out) + "\n")


def write_dataset(out_dir, config: CampaignConfig, triplets, quiet: bool = False) -> Path:
    """Write one CSV per sweep plus the run manifest; returns the manifest path."""
    out_dir = Path(out_dir)
    sweep_dir = out_dir / SWEEP_DIR
    sweep_dir.mkdir(parents=True, exist_ok=True)

    files = []
    for trip in triplets:
        for position, trace in trip.sweeps():
            name = sweep_filename(trace, trip.field_mT, trip.replication, position)
            write_sweep_csv(sweep_dir / name, trace)
            files.append(
                {
                    "path": f"{SWEEP_DIR}/{name}",
                    "role": "sweep",
                    "sample_id": trace.sample_id,
                    "kind": trace.kind,
                    "field_mT": trip.field_mT,
                    "applied_field_mT": trace.field_mT,
                    "replication": trip.replication,
                    "position": position,
                    "t_start_s": trace.t_start_s,
                }
            )

    manifest = {
        "tool": "casimirlab",
        "tool_version": __version__,
        "master_seed": config.noise.seed,
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "config": config_to_dict(config),
        "files": files,
    }
    if config.thermal is not None:
        manifest["thermal_enhancement"] = config.enhancement
    path = out_dir / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def read_manifest(run_dir) -> dict:
    path = Path(run_dir) / MANIFEST_NAME
    if not path.exists():
        raise DataError(f"no {MANIFEST_NAME} found in {run_dir}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc


def load_dataset(run_dir):
    """Read a simulated dataset back from disk.

    Returns (config, triplets). Raises IncompleteTriplet naming the
    offending (sample, field, replication) combinations if any trio is
    missing members.
    """
    run_dir = Path(run_dir)
    manifest = read_manifest(run_dir)
    config = config_from_dict(manifest["config"])

    groups = {}
    for entry in manifest["files"]:
        if entry.get("role") != "sweep":
            continue
        path = run_dir / entry["path"]
        if not path.exists():
            raise DataError(f"manifest lists missing file {path}")
        trace = read_sweep_csv(
            path,
            entry["sample_id"],
            entry["kind"],
            entry["applied_field_mT"],
            entry["t_start_s"],
        )
        key = (entry["sample_id"], entry["field_mT"], entry["replication"])
        groups.setdefault(key, {})[entry["position"]] = trace

    incomplete = sorted(
        key for key, sweeps in groups.items() if set(sweeps) != {"pre", "mid", "post"}
    )
    if incomplete:
        listing = ", ".join(f"{s} at {f} mT rep {r}" for s, f, r in incomplete)
        raise IncompleteTriplet(f"incomplete triplets: {listing}")

    triplets = [
        TripletRecord(
            pre=sweeps["pre"],
            mid=sweeps["mid"],
            post=sweeps["post"],
            field_mT=field,
            replication=rep,
        )
        for (sample, field, rep), sweeps in sorted(groups.items())
    ]
    if not triplets:
        raise DataError(f"no sweeps found in {run_dir}")
    return config, triplets


def normalized_manifest_bytes(run_dir) -> bytes:
    """Manifest content with the wall-clock field removed, for comparing runs."""
    manifest = read_manifest(run_dir)
    manifest.pop("created_utc", None)
    return json.dumps(manifest, indent=2, sort_keys=True).encode()
