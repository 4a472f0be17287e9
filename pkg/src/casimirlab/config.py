"""Campaign configuration: INI-style file format, defaults and round-tripping.

The config file has one section per parameter record ([film], [cavity],
[noise], [campaign] and an optional [thermal]); every default quoted in the
documentation lives here or in the generated example config, never inside
the physics operations.

The default film parameters are calibrated, not measured: thickness and gap
come from the AFM values (14 nm and 6 nm); Tc0 = 1.5 K, H0 = 10 mT and
lambda0 = 280 nm are chosen so that the forward model gives an 80 uK shift
at mu0*H = 7.2 mT. The default fast-noise sigma is calibrated by Monte
Carlo so that repeated drift-corrected triplet estimates scatter by about
6 uK.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .errors import ConfigError
from .physics import CavityParams, FilmParams, ThermalEnvironment
from .simulate import CampaignConfig, NoiseModel

DEFAULT_SIGMA_FAST_UK = 40.0
DEFAULT_DRIFT_UK_PER_HR = -50.0
DEFAULT_SEED = 20260828

DEFAULT_FIELDS_MT = (0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.2, 8.0, 9.0, 10.0)


def default_film() -> FilmParams:
    return FilmParams(
        thickness_nm=14.0,
        lambda0_nm=280.0,
        h0_mT=10.0,
        tc0_K=1.5,
        rn_ohm=300.0,
        width_mK=1.0,
        theta_rad=0.0,
    )


def default_config(**overrides) -> CampaignConfig:
    film = overrides.pop("film", default_film())
    cavity = overrides.pop("cavity", CavityParams(film=film))
    noise = overrides.pop(
        "noise",
        NoiseModel(
            sigma_fast_uK=DEFAULT_SIGMA_FAST_UK,
            drift_uK_per_hr=DEFAULT_DRIFT_UK_PER_HR,
            seed=DEFAULT_SEED,
        ),
    )
    fields = overrides.pop("fields_mT", DEFAULT_FIELDS_MT)
    return CampaignConfig(
        film=film, cavity=cavity, noise=noise, fields_mT=tuple(fields), **overrides
    )


def _parse_fields(text: str):
    try:
        values = tuple(float(tok) for tok in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"cannot parse field list {text!r}") from exc
    if not values:
        raise ConfigError("field list is empty")
    return values


def _get(cp, section, key, conv, default=None):
    if not cp.has_option(section, key):
        if default is not None:
            return default
        raise ConfigError(f"missing option {key!r} in section [{section}]")
    raw = cp.get(section, key)
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value {raw!r} for [{section}] {key}") from exc


def load_config(path) -> CampaignConfig:
    """Parse a campaign config file, validating every section."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    for section in ("film", "cavity", "noise", "campaign"):
        if not cp.has_section(section):
            raise ConfigError(f"missing section [{section}] in {path}")

    try:
        film = FilmParams(
            thickness_nm=_get(cp, "film", "thickness_nm", float),
            lambda0_nm=_get(cp, "film", "lambda0_nm", float),
            h0_mT=_get(cp, "film", "h0_mT", float),
            tc0_K=_get(cp, "film", "tc0_K", float),
            rn_ohm=_get(cp, "film", "rn_ohm", float),
            width_mK=_get(cp, "film", "width_mK", float),
            theta_rad=_get(cp, "film", "theta_rad", float, 0.0),
        )
        cavity = CavityParams(
            film=film,
            gap_nm=_get(cp, "cavity", "gap_nm", float),
            gap_crossover_nm=_get(cp, "cavity", "gap_crossover_nm", float, 10.0),
            gap_exponent=_get(cp, "cavity", "gap_exponent", float, 1.15),
            shift_max_uK=_get(cp, "cavity", "shift_max_uK", float),
            h_rise_mT=_get(cp, "cavity", "h_rise_mT", float),
            h_merge_mT=_get(cp, "cavity", "h_merge_mT", float),
        )
        noise = NoiseModel(
            sigma_fast_uK=_get(cp, "noise", "sigma_fast_uK", float),
            drift_uK_per_hr=_get(cp, "noise", "drift_uK_per_hr", float),
            seed=_get(cp, "noise", "seed", int),
            sigma_r_ohm=_get(cp, "noise", "sigma_r_ohm", float, 0.0),
        )
        thermal = None
        if cp.has_section("thermal"):
            thermal = ThermalEnvironment(
                t_env_K=_get(cp, "thermal", "t_env_K", float, 300.0),
                x_eff=_get(cp, "thermal", "x_eff", float, 10.0),
            )
        return CampaignConfig(
            film=film,
            cavity=cavity,
            noise=noise,
            fields_mT=_parse_fields(_get(cp, "campaign", "fields_mT", str)),
            sweep_duration_s=_get(cp, "campaign", "sweep_duration_s", float, 1200.0),
            points_per_sweep=_get(cp, "campaign", "points_per_sweep", int, 1200),
            replications=_get(cp, "campaign", "replications", int, 1),
            thermal=thermal,
            homogeneity=_get(cp, "campaign", "homogeneity", float, 1e-4),
            settle_s=_get(cp, "campaign", "settle_s", float, 0.0),
            film_sample_id=_get(cp, "campaign", "film_sample_id", str, "film01"),
            cavity_sample_id=_get(cp, "campaign", "cavity_sample_id", str, "cav01"),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid configuration in {path}: {exc}") from exc


def config_to_dict(config: CampaignConfig) -> dict:
    """Serializable snapshot of a campaign config (manifest payload)."""
    d = {
        "film": {
            "thickness_nm": config.film.thickness_nm,
            "lambda0_nm": config.film.lambda0_nm,
            "h0_mT": config.film.h0_mT,
            "tc0_K": config.film.tc0_K,
            "rn_ohm": config.film.rn_ohm,
            "width_mK": config.film.width_mK,
            "theta_rad": config.film.theta_rad,
        },
        "cavity": {
            "gap_nm": config.cavity.gap_nm,
            "gap_crossover_nm": config.cavity.gap_crossover_nm,
            "gap_exponent": config.cavity.gap_exponent,
            "shift_max_uK": config.cavity.shift_max_uK,
            "h_rise_mT": config.cavity.h_rise_mT,
            "h_merge_mT": config.cavity.h_merge_mT,
        },
        "noise": {
            "sigma_fast_uK": config.noise.sigma_fast_uK,
            "drift_uK_per_hr": config.noise.drift_uK_per_hr,
            "seed": config.noise.seed,
            "sigma_r_ohm": config.noise.sigma_r_ohm,
        },
        "campaign": {
            "fields_mT": list(config.fields_mT),
            "sweep_duration_s": config.sweep_duration_s,
            "points_per_sweep": config.points_per_sweep,
            "replications": config.replications,
            "homogeneity": config.homogeneity,
            "settle_s": config.settle_s,
            "film_sample_id": config.film_sample_id,
            "cavity_sample_id": config.cavity_sample_id,
        },
    }
    if config.thermal is not None:
        d["thermal"] = {"t_env_K": config.thermal.t_env_K, "x_eff": config.thermal.x_eff}
    return d


def config_from_dict(d: dict) -> CampaignConfig:
    """Rebuild a campaign config from a manifest snapshot."""
    try:
        film = FilmParams(**d["film"])
        cavity = CavityParams(film=film, **d["cavity"])
        noise = NoiseModel(**d["noise"])
        thermal = ThermalEnvironment(**d["thermal"]) if "thermal" in d else None
        camp = dict(d["campaign"])
        camp["fields_mT"] = tuple(camp["fields_mT"])
        return CampaignConfig(film=film, cavity=cavity, noise=noise, thermal=thermal, **camp)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config snapshot: {exc}") from exc


EXAMPLE_CONFIG = f"""\
# casimirlab campaign configuration
# Units: nm, mT, K, mK, uK, Ohm, s, rad.

[film]
thickness_nm = 14          # AFM value
lambda0_nm = 280           # calibrated, not measured
h0_mT = 10                 # calibrated, not measured
tc0_K = 1.5                # calibrated, not measured
rn_ohm = 300
width_mK = 1.0
theta_rad = 0.0

[cavity]
gap_nm = 6                 # AFM value
gap_crossover_nm = 10
gap_exponent = 1.15
shift_max_uK = 7.0
h_rise_mT = 1.0
h_merge_mT = 20.0

[noise]
sigma_fast_uK = {DEFAULT_SIGMA_FAST_UK}       # calibrated for ~6 uK per-triplet scatter
drift_uK_per_hr = {DEFAULT_DRIFT_UK_PER_HR}
seed = {DEFAULT_SEED}
sigma_r_ohm = 0

[campaign]
fields_mT = {" ".join(str(f) for f in DEFAULT_FIELDS_MT)}
sweep_duration_s = 1200
points_per_sweep = 1200
replications = 3
homogeneity = 1e-4
settle_s = 0
film_sample_id = film01
cavity_sample_id = cav01

# Uncomment to enable the room-temperature thermal-photon scenario:
# [thermal]
# t_env_K = 300
# x_eff = 10
"""


def write_example_config(path) -> Path:
    path = Path(path)
    path.write_text(EXAMPLE_CONFIG)
    return path
