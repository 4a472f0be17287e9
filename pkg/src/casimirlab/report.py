"""Writers for the analysis outputs and the plot-ready report CSVs.

`write_analysis` emits shifts.csv, fits.csv, differential.csv and a
plain-text summary into <run>/analysis/. `write_report` emits
fig_parabola.csv, fig_triplet.csv and (for thermal campaigns)
fig_thermal.csv into <run>/report/. Column schemas are documented in the
README format reference.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DataError
from .io import fmt, load_dataset, read_manifest, write_csv
from .pipeline import AnalysisResult

ANALYSIS_DIR = "analysis"
REPORT_DIR = "report"

SHIFTS_COLUMNS = (
    "sample_id",
    "kind",
    "field_mT",
    "replication",
    "delta_t",
    "sigma_delta_t",
    "shift_uK",
    "sigma_uK",
    "n_levels",
)
FITS_COLUMNS = (
    "sample_id",
    "a_per_mT2",
    "b_per_mT",
    "var_a",
    "cov_ab",
    "var_b",
    "rms_residual",
    "n_points",
    "field_threshold_mT",
    "include_linear",
)
DIFFERENTIAL_COLUMNS = ("field_mT", "gap_uK", "sigma_uK")


def write_analysis(run_dir, result: AnalysisResult, out_dir=None) -> Path:
    """Write the analysis products; returns the output directory."""
    run_dir = Path(run_dir)
    out = Path(out_dir) if out_dir is not None else run_dir / ANALYSIS_DIR
    out.mkdir(parents=True, exist_ok=True)

    rows = [
        (
            e.sample_id,
            e.kind,
            e.field_mT,
            e.replication,
            e.delta_t,
            e.sigma_delta_t,
            e.shift_uK(result.tc0_K[e.sample_id]),
            e.sigma_uK(result.tc0_K[e.sample_id]),
            e.n_levels,
        )
        for e in result.estimates
    ]
    write_csv(out / "shifts.csv", SHIFTS_COLUMNS, rows)

    fit = result.film_fit
    film_sample = result.film_estimates()[0].sample_id
    write_csv(
        out / "fits.csv",
        FITS_COLUMNS,
        [
            (
                film_sample,
                fit.a,
                fit.b,
                fit.covariance[0, 0],
                fit.covariance[0, 1],
                fit.covariance[1, 1],
                fit.rms_residual,
                fit.n_points,
                fit.field_threshold_mT,
                fit.include_linear,
            )
        ],
    )

    diff = result.differential
    write_csv(
        out / "differential.csv",
        DIFFERENTIAL_COLUMNS,
        zip(diff.field_mT, diff.gap_uK, diff.sigma_uK),
    )

    sens = "n/a" if result.sensitivity_uK is None else f"{result.sensitivity_uK:.3f} uK"
    summary = [
        f"triplets analyzed: {len(result.estimates)}",
        *(f"Tc0[{sid}] = {fmt(tc)} K" for sid, tc in sorted(result.tc0_K.items())),
        f"film fit: a = {fmt(fit.a)} /mT^2, b = {fmt(fit.b)} /mT "
        f"(|H| >= {fit.field_threshold_mT:.3f} mT, n = {fit.n_points})",
        f"sensitivity: {sens}",
        f"max gap: {diff.max_gap_uK:.3f} +- {diff.sigma_at_max_uK:.3f} uK "
        f"at {diff.field_at_max_mT:.3f} mT",
    ]
    (out / "summary.txt").write_text("\n".join(summary) + "\n")
    return out


def _read_csv(path):
    rows = Path(path).read_text().splitlines()
    if not rows:
        raise DataError(f"{path} is empty")
    header = rows[0].split(",")
    return header, [dict(zip(header, row.split(","))) for row in rows[1:]]


def write_report(run_dir, out_dir=None, n_curve: int = 101) -> Path:
    """Build the plot-ready CSVs from a run's analysis outputs."""
    run_dir = Path(run_dir)
    analysis = run_dir / ANALYSIS_DIR
    for name in ("shifts.csv", "fits.csv"):
        if not (analysis / name).exists():
            raise DataError(f"missing analysis output {analysis / name}; run analyze first")
    out = Path(out_dir) if out_dir is not None else run_dir / REPORT_DIR
    out.mkdir(parents=True, exist_ok=True)

    _, shifts = _read_csv(analysis / "shifts.csv")
    _, fits = _read_csv(analysis / "fits.csv")
    fit = fits[0]
    a, b = float(fit["a_per_mT2"]), float(fit["b_per_mT"])

    # Fig 6 style: film delta_t vs H data points plus fitted parabola samples
    film_rows = [r for r in shifts if r["kind"] == "film"]
    rows = [
        ("data", float(r["field_mT"]), float(r["delta_t"]),
         float(r["sigma_delta_t"]), float(r["shift_uK"]), float(r["sigma_uK"]))
        for r in film_rows
    ]
    h_data = [float(r["field_mT"]) for r in film_rows]
    tc0_ratio = (
        float(film_rows[0]["shift_uK"]) / float(film_rows[0]["delta_t"]) / 1e6
        if float(film_rows[0]["delta_t"]) != 0
        else 1.0
    )
    for h in np.linspace(min(h_data), max(h_data), n_curve):
        dt = a * h * h + b * h
        rows.append(("fit", float(h), float(dt), 0.0, dt * tc0_ratio * 1e6, 0.0))
    write_csv(
        out / "fig_parabola.csv",
        ("series", "field_mT", "delta_t", "sigma_delta_t", "shift_uK", "sigma_uK"),
        rows,
    )

    # Fig 5 style: R vs T for one film triplet, at the field closest to 7.2 mT
    config, triplets = load_dataset(run_dir)
    film_trips = [t for t in triplets if t.kind == "film" and t.field_mT != 0]
    if not film_trips:
        raise DataError("no in-field film triplets available for fig_triplet")
    pick = min(film_trips, key=lambda t: (abs(abs(t.field_mT) - 7.2), t.replication))
    rows = []
    for position, trace in pick.sweeps():
        rows.extend(
            (position, trace.field_mT, tau, t, r)
            for tau, t, r in zip(trace.tau_s, trace.t_meas_K, trace.r_meas_ohm)
        )
    write_csv(
        out / "fig_triplet.csv",
        ("position", "field_mT", "tau_s", "T_meas_K", "R_meas_ohm"),
        rows,
    )

    # Fig 4 style: per-kind recovered shift curves, thermal campaigns only
    manifest = read_manifest(run_dir)
    if "thermal" in manifest.get("config", {}):
        rows = []
        for kind in ("film", "cavity"):
            per_field = {}
            for r in shifts:
                if r["kind"] != kind:
                    continue
                per_field.setdefault(float(r["field_mT"]), []).append(
                    (float(r["shift_uK"]), float(r["sigma_uK"]))
                )
            for h in sorted(per_field):
                vals = np.array(per_field[h])
                mean = float(np.mean(vals[:, 0]))
                sigma = float(np.sqrt(np.sum(vals[:, 1] ** 2)) / len(vals))
                rows.append((kind, h, mean, sigma))
        write_csv(out / "fig_thermal.csv", ("kind", "field_mT", "shift_uK", "sigma_uK"), rows)
    return out
