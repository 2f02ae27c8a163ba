from __future__ import annotations

import logging
import os
import re
from configparser import ConfigParser, Error as ConfigParserError
from functools import cached_property
from pathlib import Path
from typing import Any

from xdg import BaseDirectory

from . import cli
from .suites import ConfigValueError, TrialConfig

log = logging.getLogger(__name__)

# Name of the implicit section wrapping suite configuration files
TRIAL_SECTION = "trial"


class ConfigError(cli.Fail):
    """
    Invalid configuration, pointing to the offending key and line
    """

    def __init__(self, message: str, key: str | None = None, path: Path | None = None, line: int | None = None):
        self.message = message
        self.key = key
        self.path = path
        self.line = line
        super().__init__(str(self))

    def __str__(self) -> str:
        location = []
        if self.path is not None:
            location.append(self.path.as_posix())
        if self.line is not None:
            location.append(str(self.line))
        prefix = ":".join(location)
        if self.key is not None:
            prefix = f"{prefix}: {self.key}" if prefix else self.key
        return f"{prefix}: {self.message}" if prefix else self.message


class Config:
    """
    hds configuration
    """

    def __init__(self, load: bool = False):
        self.config = ConfigParser(interpolation=None)
        self.config["config"] = {
            "output-dir": ".",
            "threads": "1",
            "fixtures": os.path.join(BaseDirectory.xdg_data_home, "hds", "baselines.json"),
        }
        if load:
            self.load()

    def load(self) -> None:
        """
        Load configuration from the user's XDG config directory
        """
        path = os.path.join(BaseDirectory.xdg_config_home, "hds")
        if os.path.isfile(path):
            log.debug("loading configuration from %s", path)
        self.config.read([path])

    @cached_property
    def output_dir(self) -> Path:
        """
        Default directory for reports
        """
        return Path(self.config.get("config", "output-dir")).expanduser()

    @cached_property
    def threads(self) -> int:
        """
        Default number of worker threads for suites
        """
        return self.config.getint("config", "threads")

    @cached_property
    def fixtures(self) -> Path:
        """
        File with the frozen baselines of bound-free suites
        """
        return Path(self.config.get("config", "fixtures")).expanduser()


def _line_of(lines: list[str], key: str) -> int | None:
    pattern = re.compile(rf"^\s*{re.escape(key)}\s*[=:]")
    for lineno, line in enumerate(lines, start=1):
        if pattern.match(line):
            return lineno
    return None


def read_trial_config(path: Path) -> dict[str, Any]:
    """
    Read a flat ``key = value`` suite configuration file.

    Returns the typed values of the keys present in the file. Unknown keys and
    invalid values raise ConfigError with the line they come from.
    """
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read configuration: {e.strerror}", path=path) from e
    lines = text.splitlines()

    parser = ConfigParser(interpolation=None)
    # Keep key case as written
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read_string(f"[{TRIAL_SECTION}]\n" + text, source=path.as_posix())
    except ConfigParserError as e:
        raise ConfigError(f"cannot parse configuration: {e}", path=path) from e

    res: dict[str, Any] = {}
    for key, value in parser[TRIAL_SECTION].items():
        try:
            res[key] = TrialConfig.parse_value(key, value)
        except ConfigValueError as e:
            raise ConfigError(e.message, key=key, path=path, line=_line_of(lines, key)) from e
    return res


def build_trial_config(
    values: dict[str, Any], overrides: dict[str, Any], path: Path | None = None
) -> TrialConfig:
    """
    Merge file values with command line overrides into a TrialConfig
    """
    merged = dict(values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return TrialConfig.from_dict(merged)
    except ConfigValueError as e:
        line = None
        if path is not None and e.key in values and e.key not in overrides:
            line = _line_of(path.read_text().splitlines(), e.key)
        raise ConfigError(e.message, key=e.key, path=path if line else None, line=line) from e
