"""
This file is part of decolab.
Copyright 2024-present decolab contributors.

decolab is free software: you can redistribute it and/or modify it under the terms of the
Affero GNU General Public License as published by the Free Software Foundation, either
version 3 of the License, or (at your option) any later version.

decolab is distributed in the hope that it will be useful, but WITHOUT ANY WARRANTY;
without even the implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.
See the Affero GNU General Public License for more details.

You should have received a copy of the Affero GNU General Public License along with decolab.
If not, see <https://www.gnu.org/licenses/>.
"""

from __future__ import annotations

import gzip
import logging
import os
import shutil
import sys
from dataclasses import dataclass
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

import coloredlogs
from dotenv import dotenv_values

__all__ = (
    "RollingFileHandler",
    "RuntimeSettings",
    "setup_logger",
    "get_env_config",
    "get_runtime_settings",
    "get_logger",
)
ROOT_DIR = Path(__file__).absolute().parent
CONSOLE_FORMAT = "[%(asctime)s %(hostname)s][%(levelname)s] (%(name)s[%(process)d]): %(funcName)s: %(message)s"
FILE_FORMAT = "[%(asctime)s] - (%(name)s)[%(levelname)s](%(funcName)s): %(message)s"
logger = logging.getLogger("Decolab.Tooling")


class RollingFileHandler(RotatingFileHandler):
    """
    Size-rotating log handler that keeps counting up instead of shifting old files,
    and gzips every file it rolls over.

    The counter resumes from the highest suffix already present next to the log file.
    """

    def __init__(
        self,
        filename: os.PathLike | str,
        maxBytes: int = 0,  # noqa: N803
        encoding: Optional[str] = None,
        gunzip: bool = True,
    ) -> None:
        super().__init__(filename, mode="a", maxBytes=maxBytes, backupCount=0, encoding=encoding, delay=False)
        self.gunzip = gunzip
        self._counter = self._last_suffix()

    def _last_suffix(self) -> int:
        base = Path(self.baseFilename)
        highest = 0
        for path in base.parent.glob(base.name + ".*"):
            suffix = path.name[len(base.name) + 1 :].removesuffix(".gz")
            if suffix.isdigit():
                highest = max(highest, int(suffix))
        return highest

    def doRollover(self) -> None:  # noqa: N802
        if self.stream and not self.stream.closed:
            self.stream.close()
        self._counter += 1
        self.rotate(self.baseFilename, f"{self.baseFilename}.{self._counter}")
        self.stream = self._open()

    def rotator(self, source: str, dest: str) -> None:
        src = Path(source)
        if not src.exists():
            return
        if not self.gunzip:
            src.rename(dest)
            return
        try:
            with src.open("rb") as sf, gzip.open(dest + ".gz", "wb") as df:
                shutil.copyfileobj(sf, df)
            src.unlink(missing_ok=True)
        except OSError as exc:
            logger.error("Failed to gzip %s, renaming instead: %s", source, str(exc), exc_info=exc)
            src.rename(dest)


def setup_logger(log_path: Path | None = None, *, level: int | str = logging.INFO):
    """
    Install the console (coloredlogs) and, optionally, the rolling file handler on the root logger.

    Parameters
    ----------
    log_path : Path | None
        Where the DEBUG-level log file goes, ``None`` disables the file handler.
    level : int | str
        Console level.
    """
    handlers: list[logging.Handler] = []
    if log_path is not None:
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(RollingFileHandler(log_path, maxBytes=5_242_880, encoding="utf-8"))
    logging.basicConfig(level=logging.DEBUG, handlers=handlers, format=FILE_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")
    root = logging.getLogger()
    coloredlogs.install(fmt=CONSOLE_FORMAT, level=level, logger=root, stream=sys.stderr)

    # joblib workers are chatty on DEBUG
    logging.getLogger("joblib").setLevel(logging.WARNING)
    return root


def get_env_config(is_production: bool = True, *, include_all: bool = False, include_environ: bool = False):
    """Merge the layered ``.env`` files found at the repository root."""
    root_dir = ROOT_DIR.parent

    is_prod = os.getenv("APP_MODE", "development") == "production" or is_production

    env_root = dotenv_values(root_dir / ".env")
    env_root_local = dotenv_values(root_dir / ".env.local")
    env_root_prod = dotenv_values(root_dir / ".env.production") if (is_prod or include_all) else {}
    env_root_dev = dotenv_values(root_dir / ".env.development") if (not is_prod or include_all) else {}

    # priority: .env.local > .env.production > .env.development > .env
    env_merged = {**env_root, **env_root_dev, **env_root_prod, **env_root_local}
    if include_environ:
        env_merged.update(os.environ)
    return env_merged


@dataclass(frozen=True)
class RuntimeSettings:
    log_dir: Path
    n_jobs: int
    log_level: str


def get_runtime_settings() -> RuntimeSettings:
    env = get_env_config(include_environ=True)
    log_dir = Path(env.get("DECOLAB_LOG_DIR") or (ROOT_DIR.parent / "logs"))
    try:
        n_jobs = int(env.get("DECOLAB_N_JOBS") or 1)
    except ValueError:
        logger.warning("DECOLAB_N_JOBS=%r is not an integer, using 1", env.get("DECOLAB_N_JOBS"))
        n_jobs = 1
    log_level = (env.get("DECOLAB_LOG_LEVEL") or "INFO").upper()
    return RuntimeSettings(log_dir=log_dir, n_jobs=n_jobs, log_level=log_level)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)
