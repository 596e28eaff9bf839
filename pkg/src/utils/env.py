import os
from pathlib import Path
from typing import Optional

THREADS_ENV = "ANOSCOPE_THREADS"
THYROID_ENV = "ANOSCOPE_THYROID_CSV"


def read_thread_cap(default: int = 1) -> int:
    # fetch thread cap from env variable, never below one
    raw = os.getenv(THREADS_ENV)
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        return default
    return max(1, value)


def read_path(env_name: str) -> Optional[Path]:
    value = os.getenv(env_name)
    if not value:
        return None
    path = Path(value).expanduser()
    if not path.exists():
        return None
    return path
