#!/usr/bin/env python3
"""
Activation parameter manager - defaults, user config, parameter files
"""

import json
import logging
from pathlib import Path

from activation import ActivationParams
from errors import ConfigError

logger = logging.getLogger(__name__)


class ParamsManager:
    """Parameter management

    Precedence: defaults < ~/.dcxg/config.json < --params file < CLI flags.
    """

    # parameter info (CLI help)
    PARAM_INFO = {
        'mas': {'flag': '--mas', 'help': 'maximal associative strength (MAS)'},
        'default_cue_weight': {'flag': None, 'help': 'W for cues declared without a weight'},
        'hard_cue_weight': {'flag': None, 'help': 'W for hard cues'},
        'soft_cue_weight': {'flag': None, 'help': 'W for soft cues'},
        'recognition_threshold': {'flag': '--threshold', 'help': 'activation needed for direct recognition'},
        'base_decay': {'flag': None, 'help': 'decay d of base activation'},
        'soft_penalty': {'flag': None, 'help': 'relaxation penalty per soft violation'},
        'sim_threshold': {'flag': '--sim-threshold', 'help': 'cosine gate of loose unification'},
    }

    DEFAULTS = ActivationParams().as_dict()

    def __init__(self, app_dir=None):
        # user config folder
        self.app_dir = Path(app_dir) if app_dir else Path.home() / '.dcxg'
        self.config_file = self.app_dir / 'config.json'
        self.sources = ['defaults']
        self.load_config()

    def load_config(self):
        """Load the user config file"""
        self.config = dict(self.DEFAULTS)
        if self.config_file.exists():
            self.config.update(self._read(self.config_file))
            self.sources.append(str(self.config_file))

    def save_config(self):
        """Save the user config"""
        try:
            self.app_dir.mkdir(parents=True, exist_ok=True)
            with open(self.config_file, 'w', encoding='utf-8') as f:
                json.dump(self.config, f, indent=2)
        except OSError as e:
            raise ConfigError(f"{self.config_file}: {e.strerror or e}")
        logger.info("Saved parameters to %s", self.config_file)

    def load_params_file(self, path):
        """Apply a parameter file"""
        self.config.update(self._read(Path(path)))
        self.sources.append(str(path))

    def apply_overrides(self, overrides):
        """Apply CLI flags (None is ignored)"""
        given = {name: value for name, value in (overrides or {}).items() if value is not None}
        self._check_names(given, 'command line')
        self.config.update(given)

    def resolve(self, overrides=None):
        """Validated ActivationParams"""
        self.apply_overrides(overrides)
        return ActivationParams(**self.config)

    def _check_names(self, values, origin):
        unknown = sorted(set(values) - set(self.DEFAULTS))
        if unknown:
            raise ConfigError(f"{origin}: unknown parameter(s) {', '.join(unknown)}")
        for name, value in values.items():
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{origin}: parameter {name} must be a number, got {value!r}")

    def _read(self, path):
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"{path}: file not found")
        except UnicodeDecodeError:
            raise ConfigError(f"{path}: not UTF-8 text")
        except OSError as e:
            raise ConfigError(f"{path}: {e.strerror or e}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}")
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a JSON object of parameters")
        self._check_names(data, str(path))
        return data


# usage example
if __name__ == "__main__":
    manager = ParamsManager()
    params = manager.resolve()
    for name, value in params.as_dict().items():
        print(f"{name:24s} {value}")
