"""
Contains Constants, configuration keys and file schemas for the nanowire control laboratory
"""
# pylint: disable=too-few-public-methods

import os
from enum import Enum
from typing import Any, Dict, Optional


class Constants:
    """
    Constants used by the nanowire control laboratory
    """

    UNIT_NORM_TOL = 1e-9
    DEGENERATE_NORM = 1e-14
    BLOWUP_NORM_DEVIATION = 0.1
    HYPERBOLIC_CLAMP = 30.0
    CFL_MAX = 0.3
    MIN_GRID_POINTS = 8
    MAX_DENSE_POINTS = 4097

    # Mobile frame chart and the a priori regime of the reduced system
    CHART_RADIUS = 0.5
    CHART_DEGENERACY = 1e-10
    REGIME_R_SQUARED = 0.5
    REGIME_DELTA = 1.0

    NEWTON_TOL = 1e-12
    NEWTON_MAX_ITERS = 50
    NEWTON_FD_STEP = 1e-6
    ORTHOGONALITY_WARNING = 1e-6

    MIN_DECAY_SAMPLES = 10
    LIMIT_TRANSIENT = 1.0
    OUT_DIR_ENV = "LLG_OUT_DIR"
    DEFAULT_OUT_DIR = "llg_out"


class Severity(Enum):
    """
    Severity states of a logged message
    """

    MAJOR = "MAJOR"
    MINOR = "MINOR"
    INFO = "INFO"
    INVALID = "INVALID"


class Frame(Enum):
    """
    Frame in which the dynamics are integrated
    """

    LAB = "lab"
    MOVING = "moving"


class ConfigError(Exception):
    """
    Raised for an unreadable config file, an unknown key or an unconvertible value
    """


def _optional_float(value: str) -> Optional[float]:
    """
    Converts a config value to float, keeping "none" (any case) as None
    @param value (str): The raw value
    @return (Optional[float]): The converted value
    """
    return None if value.strip().lower() in ("", "none") else float(value)


class ConfigKey(Enum):
    """
    Keys recognised in a flat key=value config file
    """

    GRID_N = {"key": "grid.n", "default": 1025, "convert": int}
    GRID_HALF_WIDTH = {"key": "grid.half_width", "default": 20.0, "convert": float}
    SIM_DT_CFL = {"key": "sim.dt_cfl", "default": 0.25, "convert": float}
    SIM_RENORMALIZE_EVERY = {"key": "sim.renormalize_every", "default": 1, "convert": int}
    SIM_OUTPUT_INTERVAL = {"key": "sim.output_interval", "default": 0.25, "convert": float}
    SIM_T_END = {"key": "sim.t_end", "default": 50.0, "convert": float}
    SIM_DELTA = {"key": "sim.delta", "default": 0.0, "convert": float}
    CTRL_SIGMA1 = {"key": "ctrl.sigma1", "default": 0.0, "convert": float}
    CTRL_SIGMA2 = {"key": "ctrl.sigma2", "default": 5.0, "convert": float}
    CTRL_DELTA1 = {"key": "ctrl.delta1", "default": 0.02, "convert": float}
    CTRL_DELTA2 = {"key": "ctrl.delta2", "default": 0.03, "convert": float}
    CTRL_THETA1 = {"key": "ctrl.theta1", "default": 0.0, "convert": float}
    CTRL_EPSILON = {"key": "ctrl.epsilon", "default": 0.05, "convert": float}
    CTRL_EPSILON0 = {"key": "ctrl.epsilon0", "default": 0.05, "convert": float}
    CTRL_DELTA0 = {"key": "ctrl.delta0", "default": 0.1, "convert": float}
    CTRL_T = {"key": "ctrl.T", "default": None, "convert": _optional_float}
    CTRL_POST_HORIZON = {"key": "ctrl.post_horizon", "default": 100.0, "convert": float}
    CTRL_PERTURBATION = {"key": "ctrl.perturbation", "default": 1e-3, "convert": float}
    CTRL_SAFETY_FACTOR = {"key": "ctrl.safety_factor", "default": 2.0, "convert": float}
    CTRL_DECAY_SKIP = {"key": "ctrl.decay_skip", "default": 3.0, "convert": float}
    CTRL_DECAY_STOP = {"key": "ctrl.decay_stop", "default": 12.0, "convert": float}
    OUT_DIR = {"key": "out.dir", "default": None, "convert": str}
    SEED = {"key": "seed", "default": 42, "convert": int}

    @property
    def key(self) -> str:
        """
        The spelling of this key in a config file
        """
        return self.value["key"]

    @property
    def default(self) -> Any:
        """
        The value used when the key is absent
        """
        return self.value["default"]

    def convert(self, raw: str) -> Any:
        """
        Convert a raw string from a config file to this key's type
        @param raw (str): The raw value
        @return (Any): The converted value
        """
        try:
            return self.value["convert"](raw.strip())
        except ValueError as value_error:
            raise ConfigError(f"Invalid value {raw!r} for {self.key}") from value_error

    @classmethod
    def from_key(cls, key: str) -> "ConfigKey":
        """
        Look up a member by its config file spelling
        @param key (str): The key as written in the file
        @return (ConfigKey): The matching member
        """
        for member in cls:
            if member.key == key:
                return member
        raise ConfigError(f"Unknown config key {key!r}")


class Defaults:
    """
    Default values for every config key
    """

    defaults = {member: member.default for member in ConfigKey}


class Schema:
    """
    File schemas for the nanowire control laboratory
    """

    SPIN_SNAPSHOT_HEADER = "x,u1,u2,u3"
    SCALAR_SNAPSHOT_HEADER = "x,f"
    DIAGNOSTICS_HEADER = "t,delta,norm_drift,sigma_est,theta_est,w_h2,lyapunov"
    REPORT_HEADER = "criterion,measured,threshold,pass"
    SPECTRUM_HEADER = "index,eigenvalue,overlap_sech"
    REDUCE_CHECK_HEADER = "x,lhs1,lhs2,rhs1,rhs2,abs_err"
    RESIDUAL_SWEEP_HEADER = "delta,n_points,residual"
    SUMMARY_HEADER = "quantity,value"
    FLOAT_FORMAT = "%.17g"
    SNAPSHOT_FILE_NAME = "snap_{t:.6f}.csv"
    DIAGNOSTICS_FILE_NAME = "diagnostics.csv"
    REPORT_FILE_NAME = "report.csv"
    SPECTRUM_FILE_NAME = "spectrum.csv"
    REDUCE_CHECK_FILE_NAME = "reduce_check.csv"
    RESIDUAL_SWEEP_FILE_NAME = "wall_residuals.csv"
    KERNEL_MODE_FILE_NAME = "kernel_mode.csv"
    SUMMARY_FILE_NAME = "summary.csv"


def load_config(path: str) -> Dict[ConfigKey, Any]:
    """
    Reads a flat key=value config file. Blank lines and lines starting with # are ignored.
    @param path (str): The path of the config file
    @return (Dict[ConfigKey, Any]): Defaults overridden by the values found in the file
    """
    if not os.path.isfile(path):
        raise ConfigError(f"Config file not found: {path}")

    settings = dict(Defaults.defaults)
    with open(path, mode="r", encoding="utf-8") as config_file:
        for line_number, line in enumerate(config_file, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_number}: expected key=value, got {line!r}")
            key, raw = line.split("=", 1)
            member = ConfigKey.from_key(key.strip())
            settings[member] = member.convert(raw)
    return settings


def resolve_out_dir(flag_value: Optional[str], settings: Dict[ConfigKey, Any]) -> str:
    """
    Output directory with precedence flag > config file > LLG_OUT_DIR > built-in default
    @param flag_value (Optional[str]): The --out-dir flag, if given
    @param settings (Dict[ConfigKey, Any]): The loaded settings
    @return (str): The directory to write outputs to
    """
    if flag_value:
        return flag_value
    if settings.get(ConfigKey.OUT_DIR):
        return settings[ConfigKey.OUT_DIR]
    return os.getenv(Constants.OUT_DIR_ENV, Constants.DEFAULT_OUT_DIR)


def validate_settings(settings: Dict[ConfigKey, Any]) -> Dict[ConfigKey, Any]:
    """
    Rejects grid and integration settings that cannot describe a run
    @param settings (Dict[ConfigKey, Any]): The loaded settings
    @return (Dict[ConfigKey, Any]): The same settings
    """
    checks = (
        (
            ConfigKey.GRID_N,
            lambda n: n >= Constants.MIN_GRID_POINTS,
            f">= {Constants.MIN_GRID_POINTS}",
        ),
        (ConfigKey.GRID_HALF_WIDTH, lambda width: width > 0, "> 0"),
        (
            ConfigKey.SIM_DT_CFL,
            lambda cfl: 0 < cfl <= Constants.CFL_MAX,
            f"in (0, {Constants.CFL_MAX}]",
        ),
        (ConfigKey.SIM_RENORMALIZE_EVERY, lambda every: every >= 1, ">= 1"),
        (ConfigKey.SIM_OUTPUT_INTERVAL, lambda interval: interval > 0, "> 0"),
        (ConfigKey.SIM_T_END, lambda t_end: t_end > 0, "> 0"),
        (ConfigKey.CTRL_POST_HORIZON, lambda horizon: horizon > 0, "> 0"),
        (ConfigKey.CTRL_T, lambda switch: switch is None or switch > 0, "> 0 or none"),
    )
    for member, accept, expected in checks:
        value = settings.get(member, member.default)
        if not accept(value):
            raise ConfigError(f"{member.key} = {value} must be {expected}")
    return settings
