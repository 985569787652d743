"""Laboratory-unit run configuration: flat key=value files, strict schema.

Every quantity on this surface is quoted the way device papers quote them
(omega/2pi in GHz, rates Gamma/2pi in MHz, temperatures in mK, currents in
nA, flux offsets in mPhi0); each lab key has a raw-SI twin (rad/s, K, A, Wb)
for programmatic use.  Unknown keys are rejected with the offending name.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import (
    from_ghz, from_mhz, from_mk, from_mphi0, from_na, from_ns,
)
from .dynamics import BathChannel, DriveSpec, SteadyStateCriteria
from .models import SystemParams
from .spectroscopy import SweepConfig, TransductionMap

__all__ = ["ConfigError", "RunConfig", "DEFAULTS"]


class ConfigError(ValueError):
    """Malformed, unknown, or inconsistent configuration input."""


def _identity(x):
    return x


def _float_list(text):
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(part) for part in str(text).split(",") if part.strip()]


# key -> (python type or parser, one-line description)
_SCHEMA = {
    # system, lab units
    "omega_r_ghz": (float, "resonator frequency omega_r/2pi (GHz)"),
    "delta_ghz": (float, "qubit tunnel splitting Delta/2pi (GHz)"),
    "i_p_na": (float, "persistent current (nA)"),
    "g_ghz": (float, "bare coupling g/2pi (GHz)"),
    "flux_offset_mphi0": (float, "flux bias Phi - Phi0/2 (mPhi0)"),
    # system, raw SI twins
    "omega_r_rad_s": (float, "resonator frequency (rad/s)"),
    "delta_rad_s": (float, "qubit tunnel splitting (rad/s)"),
    "i_p_a": (float, "persistent current (A)"),
    "g_rad_s": (float, "bare coupling (rad/s)"),
    "flux_offset_wb": (float, "flux bias (Wb)"),
    # truncation / labeling
    "n_fock": (int, "retained Fock states (>= 2)"),
    "n_labeled": (int, "highest dressed doublet to label"),
    "mixing_variant": (str, "dressed mixing angle: consistent | verbatim"),
    # baths
    "temperature_mk": (float, "bath temperature (mK)"),
    "temperature_k": (float, "bath temperature (K)"),
    "gamma_r_mhz": (float, "resonator channel rate Gamma_r/2pi (MHz)"),
    "gamma_qb_mhz": (float, "qubit sigma_x channel rate Gamma_1/2pi (MHz)"),
    "gamma_z_mhz": (float, "qubit sigma_z channel rate/2pi (MHz)"),
    "gamma_r_rad_s": (float, "resonator channel rate (rad/s)"),
    "gamma_qb_rad_s": (float, "qubit sigma_x channel rate (rad/s)"),
    "gamma_z_rad_s": (float, "qubit sigma_z channel rate (rad/s)"),
    "bath_spectrum": (str, "bath spectral shape: flat | ohmic"),
    "ohmic_reference_ghz": (float, "frequency where an ohmic rate equals its nominal value (GHz)"),
    # drive
    "a_qb_mhz": (float, "qubit drive amplitude A_qb/2pi (MHz)"),
    "a_r_mhz": (float, "resonator drive amplitude A_r/2pi (MHz)"),
    "a_z_mhz": (float, "longitudinal drive amplitude A_z/2pi (MHz)"),
    "a_qb_rad_s": (float, "qubit drive amplitude (rad/s)"),
    "a_r_rad_s": (float, "resonator drive amplitude (rad/s)"),
    "a_z_rad_s": (float, "longitudinal drive amplitude (rad/s)"),
    "drive_ghz": (float, "drive frequency omega_d/2pi (GHz), single-point commands"),
    "drive_rad_s": (float, "drive frequency (rad/s)"),
    # axes
    "drive_start_ghz": (float, "trace/sweep drive axis start (GHz)"),
    "drive_stop_ghz": (float, "trace/sweep drive axis stop (GHz)"),
    "drive_points": (int, "trace/sweep drive axis point count"),
    "flux_start_mphi0": (float, "sweep/levels flux axis start (mPhi0)"),
    "flux_stop_mphi0": (float, "sweep/levels flux axis stop (mPhi0)"),
    "flux_points": (int, "sweep/levels flux axis point count"),
    # steady-state detection
    "window_periods": (int, "drive periods per averaging window"),
    "rel_tol": (float, "window-average convergence tolerance (trace distance)"),
    "max_time_ns": (float, "steady-state search limit, simulated time (ns)"),
    # time evolution
    "t_end_ns": (float, "trajectory length (ns)"),
    "dt_ps": (float, "integrator step (ps); default from the resolution rule"),
    "samples": (int, "trajectory sample count"),
    "initial_state": (str, "thermal | ground | a dressed label like 1-"),
    # transduction
    "p_switch_scale": (float, "switching-probability scale (% per unit observable)"),
    "p_switch_offset": (float, "switching-probability offset (%)"),
    # matrix-element commands
    "max_level": (int, "levels/table depth (number of eigenstates)"),
    "model": (str, "rabi | jc | bs"),
    "g_over_wr": (_float_list, "comma list of g/omega_r values for ratio curves"),
    # calibration grids
    "cal_gamma_r_mhz": (_float_list, "calibration grid for Gamma_r/2pi (MHz)"),
    "cal_gamma_qb_mhz": (_float_list, "calibration grid for Gamma_1/2pi (MHz)"),
    "cal_a_mhz": (_float_list, "calibration grid for drive amplitude (MHz)"),
    "cal_temperature_mk": (_float_list, "calibration grid for temperature (mK)"),
    "cal_scale": (_float_list, "calibration grid for transduction scale"),
    "cal_offset": (_float_list, "calibration grid for transduction offset"),
    # execution
    "threads": (int, "worker threads for grid evaluation"),
}

# lab-unit key -> (SI twin, converter lab->SI)
_TWINS = {
    "omega_r_ghz": ("omega_r_rad_s", from_ghz),
    "delta_ghz": ("delta_rad_s", from_ghz),
    "i_p_na": ("i_p_a", from_na),
    "g_ghz": ("g_rad_s", from_ghz),
    "flux_offset_mphi0": ("flux_offset_wb", from_mphi0),
    "temperature_mk": ("temperature_k", from_mk),
    "gamma_r_mhz": ("gamma_r_rad_s", from_mhz),
    "gamma_qb_mhz": ("gamma_qb_rad_s", from_mhz),
    "gamma_z_mhz": ("gamma_z_rad_s", from_mhz),
    "a_qb_mhz": ("a_qb_rad_s", from_mhz),
    "a_r_mhz": ("a_r_rad_s", from_mhz),
    "a_z_mhz": ("a_z_rad_s", from_mhz),
    "drive_ghz": ("drive_rad_s", from_ghz),
}
_SI_KEYS = {si: lab for lab, (si, _) in _TWINS.items()}

DEFAULTS = {
    "omega_r_ghz": 8.13,
    "delta_ghz": 4.2,
    "i_p_na": 500.0,
    "g_ghz": 0.82,
    "flux_offset_mphi0": 0.0,
    "n_fock": 6,
    "mixing_variant": "consistent",
    "temperature_mk": 90.0,
    "gamma_r_mhz": 1.0,
    "gamma_qb_mhz": 15.0,
    "gamma_z_mhz": 0.0,
    "bath_spectrum": "flat",
    "a_qb_mhz": 12.0,
    "a_r_mhz": 12.0,
    "a_z_mhz": 0.0,
    "window_periods": 50,
    "rel_tol": 1e-4,
    "max_time_ns": 50000.0,
    "t_end_ns": 150.0,
    "samples": 400,
    "initial_state": "thermal",
    "p_switch_scale": -100.0,
    "p_switch_offset": 50.0,
    "max_level": 6,
    "model": "rabi",
    "threads": 1,
}


@dataclass
class RunConfig:
    """Validated raw configuration plus builders for the simulation objects."""

    raw: dict = field(default_factory=dict)

    # -- construction ----------------------------------------------------
    @classmethod
    def from_dict(cls, values: dict) -> "RunConfig":
        cfg = cls()
        cfg.update(values)
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        values = {}
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                text = line.split("#", 1)[0].strip()
                if not text:
                    continue
                if "=" not in text:
                    raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {text!r}")
                key, _, value = text.partition("=")
                key, value = key.strip(), value.strip()
                if key in values:
                    raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
                values[key] = value
        return cls.from_dict(values)

    def update(self, values: dict) -> "RunConfig":
        for key, value in values.items():
            if key not in _SCHEMA:
                raise ConfigError(f"unknown config key {key!r}")
            parser = _SCHEMA[key][0]
            try:
                parsed = parser(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config key {key!r}: cannot parse {value!r} "
                                  f"({exc})") from None
            if isinstance(parsed, float) and not math.isfinite(parsed):
                raise ConfigError(f"config key {key!r} must be finite, got {parsed}")
            self.raw[key] = parsed
        self._check_twins()
        return self

    def _check_twins(self) -> None:
        for lab, (si, _) in _TWINS.items():
            if lab in self.raw and si in self.raw:
                raise ConfigError(f"config keys {lab!r} and {si!r} both set; "
                                  "use one unit system per quantity")

    # -- access ----------------------------------------------------------
    def get(self, key, default=None):
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        return self.raw.get(key, DEFAULTS.get(key, default))

    def si(self, lab_key: str):
        """Resolved SI value for a quantity with a lab/SI key pair."""
        si_key, convert = _TWINS[lab_key]
        if si_key in self.raw:
            return self.raw[si_key]
        value = self.get(lab_key)
        if value is None:
            return None
        return convert(value)

    def require(self, key: str):
        value = self.si(key) if key in _TWINS else self.get(key)
        if value is None:
            raise ConfigError(f"config key {key!r} (or its unit twin) is required "
                              "for this command")
        return value

    # -- builders --------------------------------------------------------
    def system_params(self) -> SystemParams:
        return SystemParams(
            omega_r=self.si("omega_r_ghz"),
            delta_gap=self.si("delta_ghz"),
            i_p=self.si("i_p_na"),
            flux_offset=self.si("flux_offset_mphi0"),
            g=self.si("g_ghz"),
        )

    def n_fock(self) -> int:
        n = int(self.get("n_fock"))
        if n < 2:
            raise ConfigError(f"n_fock must be >= 2, got {n}")
        return n

    def n_labeled(self) -> int:
        n = self.raw.get("n_labeled")
        if n is None:
            n = min(3, self.n_fock() - 2)
        if n > self.n_fock() - 2:
            raise ConfigError(f"n_labeled = {n} needs n_fock >= {n + 2}")
        return int(n)

    def channels(self) -> tuple:
        temperature = self.si("temperature_mk")
        shape = self.get("bath_spectrum")
        reference = 0.0
        if shape == "ohmic":
            ref_ghz = self.get("ohmic_reference_ghz")
            if ref_ghz is None:
                raise ConfigError("bath_spectrum = ohmic needs ohmic_reference_ghz")
            reference = from_ghz(float(ref_ghz))
        return tuple(
            BathChannel(kind, rate, temperature, spectral_shape=shape,
                        ohmic_reference=reference)
            for kind, rate in (("resonator_x", self.si("gamma_r_mhz")),
                               ("qubit_x", self.si("gamma_qb_mhz")),
                               ("qubit_z", self.si("gamma_z_mhz"))))

    def drive(self, omega_d: float | None = None) -> DriveSpec:
        if omega_d is None:
            omega_d = self.require("drive_ghz")
        return DriveSpec(omega_d=omega_d, a_qb=self.si("a_qb_mhz"),
                         a_r=self.si("a_r_mhz"), a_z=self.si("a_z_mhz"))

    def criteria(self) -> SteadyStateCriteria:
        return SteadyStateCriteria(
            window=int(self.get("window_periods")),
            rel_tol=float(self.get("rel_tol")),
            max_time=from_ns(float(self.get("max_time_ns"))),
        )

    def transduction(self) -> TransductionMap:
        return TransductionMap(scale=float(self.get("p_switch_scale")),
                               offset=float(self.get("p_switch_offset")))

    def drive_axis(self) -> np.ndarray:
        if "drive_start_ghz" in self.raw or "drive_stop_ghz" in self.raw:
            start = self.require("drive_start_ghz")
            stop = self.require("drive_stop_ghz")
            points = int(self.require("drive_points"))
            if points < 1:
                raise ConfigError("drive_points must be >= 1")
            return from_ghz(np.linspace(float(start), float(stop), points))
        return np.array([self.require("drive_ghz")])

    def flux_axis(self) -> np.ndarray:
        if "flux_start_mphi0" in self.raw or "flux_stop_mphi0" in self.raw:
            start = self.require("flux_start_mphi0")
            stop = self.require("flux_stop_mphi0")
            points = int(self.require("flux_points"))
            if points < 1:
                raise ConfigError("flux_points must be >= 1")
            return from_mphi0(np.linspace(float(start), float(stop), points))
        return np.array([self.si("flux_offset_mphi0")])

    def sweep_config(self, flux_axis=None, drive_axis=None) -> SweepConfig:
        flux = tuple(self.flux_axis() if flux_axis is None else flux_axis)
        freqs = tuple(self.drive_axis() if drive_axis is None else drive_axis)
        drive = self.drive(omega_d=freqs[0])
        return SweepConfig(
            params=self.system_params(), n_fock=self.n_fock(),
            flux_offsets=flux, drive_freqs=freqs, channels=self.channels(),
            drive=drive, criteria=self.criteria(),
            transduction=self.transduction(), n_labeled=self.n_labeled(),
        )

    def calibration_grids(self) -> dict:
        grids = {}
        mapping = (
            ("cal_gamma_r_mhz", "gamma_r", from_mhz),
            ("cal_gamma_qb_mhz", "gamma_qb", from_mhz),
            ("cal_a_mhz", "a", from_mhz),
            ("cal_temperature_mk", "temperature", from_mk),
            ("cal_scale", "scale", _identity),
            ("cal_offset", "offset", _identity),
        )
        for key, name, convert in mapping:
            if key in self.raw:
                grids[name] = [convert(v) for v in self.raw[key]]
        if not grids:
            raise ConfigError("calibrate needs at least one cal_* grid key")
        return grids

    # -- round trip (metadata sidecars embed the raw mapping) -------------
    def to_dict(self) -> dict:
        return dict(self.raw)

    def to_json(self) -> str:
        return json.dumps(self.raw, indent=2, sort_keys=True)

    @staticmethod
    def describe_keys() -> str:
        lines = [f"{key:22s} {desc}" for key, (_, desc) in _SCHEMA.items()]
        return "\n".join(lines)
