from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from .logging_utils import log_with_context, parse_env_bool

PROJECT_ROOT = Path(__file__).resolve().parent.parent
ENV_FILE = PROJECT_ROOT / ".env"

DEFAULT_NORMALIZATION_TOL = 1e-9
DEFAULT_CMI_CLAMP_TOL = 1e-9
DEFAULT_DEGRADED_TOL = 1e-9
DEFAULT_MAX_GRID_POINTS = 250_000
DEFAULT_BRUTE_FORCE_LIMIT = 10**7
DEFAULT_SIM_BLOCK_SIZE = 1 << 16


def load_app_environment(
    env_file: Path = ENV_FILE,
    *,
    override: bool = True,
) -> bool:
    return load_dotenv(dotenv_path=env_file, override=override)


load_app_environment()


def get_env_int(name: str) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError:
        return None


def get_env_positive_int(name: str, default: int) -> int:
    value = get_env_int(name)
    if value is None or value <= 0:
        return default
    return value


def get_env_positive_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = float(raw)
    except ValueError:
        return default
    if not value > 0 or value != value:
        return default
    return value


def resolve_output_directory(configured_dir: Optional[str] = None) -> str:
    default_dir = os.path.abspath(os.getcwd())
    raw = configured_dir if configured_dir is not None else os.getenv("CDT_OUTPUT_DIR")
    candidate = raw.strip() if raw and raw.strip() else default_dir
    output_dir = os.path.abspath(os.path.expanduser(candidate))
    try:
        os.makedirs(output_dir, exist_ok=True)
        return output_dir
    except OSError as exc:
        if output_dir != default_dir:
            log_with_context(
                logging.WARNING,
                "Failed to create configured output dir; falling back to working directory",
                output_dir=output_dir,
                default_dir=default_dir,
                error=repr(exc),
            )
        os.makedirs(default_dir, exist_ok=True)
        return default_dir


def normalize_optional_path(path: Optional[str]) -> Optional[str]:
    if path is None or path.strip() == "":
        return None
    return os.path.abspath(os.path.expanduser(path.strip()))


@dataclass(frozen=True)
class AppConfig:
    output_dir: str
    log_level: str
    log_file: str
    user_debug_ids_enabled: bool
    include_traceback_for_warning: bool
    normalization_tol: float = DEFAULT_NORMALIZATION_TOL
    cmi_clamp_tol: float = DEFAULT_CMI_CLAMP_TOL
    degraded_tol: float = DEFAULT_DEGRADED_TOL
    max_grid_points: int = DEFAULT_MAX_GRID_POINTS
    brute_force_limit: int = DEFAULT_BRUTE_FORCE_LIMIT
    threads: int = 1
    sim_block_size: int = DEFAULT_SIM_BLOCK_SIZE

    @classmethod
    def from_env(cls) -> "AppConfig":
        log_file = normalize_optional_path(os.getenv("LOG_FILE"))
        return cls(
            output_dir=resolve_output_directory(),
            log_level=os.getenv("LOG_LEVEL", "INFO"),
            log_file=log_file or "",
            user_debug_ids_enabled=parse_env_bool(
                os.getenv("USER_DEBUG_IDS_ENABLED"),
                default=True,
            ),
            include_traceback_for_warning=parse_env_bool(
                os.getenv("INCLUDE_TRACEBACK_FOR_WARNING"),
                default=False,
            ),
            normalization_tol=get_env_positive_float("CDT_NORMALIZATION_TOL", DEFAULT_NORMALIZATION_TOL),
            cmi_clamp_tol=get_env_positive_float("CDT_CMI_CLAMP_TOL", DEFAULT_CMI_CLAMP_TOL),
            degraded_tol=get_env_positive_float("CDT_DEGRADED_TOL", DEFAULT_DEGRADED_TOL),
            max_grid_points=get_env_positive_int("CDT_MAX_GRID_POINTS", DEFAULT_MAX_GRID_POINTS),
            brute_force_limit=get_env_positive_int("CDT_BRUTE_FORCE_LIMIT", DEFAULT_BRUTE_FORCE_LIMIT),
            threads=get_env_positive_int("CDT_THREADS", 1),
            sim_block_size=get_env_positive_int("CDT_SIM_BLOCK_SIZE", DEFAULT_SIM_BLOCK_SIZE),
        )

