'''
Configuration of a verification run: the SuiteConfig, its JSON file format and the precedence
of flags, file, environment and defaults
'''

# BSD 3-Clause License
# Copyright (c) 2023, engageLively
# All rights reserved.
# Redistribution and use in source and binary forms, with or without
# modification, are permitted provided that the following conditions are met:
# 1. Redistributions of source code must retain the above copyright notice, this
#    list of conditions and the following disclaimer.
# 2. Redistributions in binary form must reproduce the above copyright notice,
#    this list of conditions and the following disclaimer in the documentation
#    and/or other materials provided with the distribution.
# 3. Neither the name of the copyright holder nor the names of its
#    contributors may be used to endorse or promote products derived from
#    this software without specific prior written permission.
# THIS SOFTWARE IS PROVIDED BY THE COPYRIGHT HOLDERS AND CONTRIBUTORS "AS IS"
# AND ANY EXPRESS OR IMPLIED WARRANTIES, INCLUDING, BUT NOT LIMITED TO, THE
# IMPLIED WARRANTIES OF MERCHANTABILITY AND FITNESS FOR A PARTICULAR PURPOSE ARE
# DISCLAIMED. IN NO EVENT SHALL THE COPYRIGHT HOLDER OR CONTRIBUTORS BE LIABLE
# FOR ANY DIRECT, INDIRECT, INCIDENTAL, SPECIAL, EXEMPLARY, OR CONSEQUENTIAL
# DAMAGES (INCLUDING, BUT NOT LIMITED TO, PROCUREMENT OF SUBSTITUTE GOODS OR
# SERVICES; LOSS OF USE, DATA, OR PROFITS; OR BUSINESS INTERRUPTION) HOWEVER
# CAUSED AND ON ANY THEORY OF LIABILITY, WHETHER IN CONTRACT, STRICT LIABILITY,
# OR TORT (INCLUDING NEGLIGENCE OR OTHERWISE) ARISING IN ANY WAY OUT OF THE USE
# OF THIS SOFTWARE, EVEN IF ADVISED OF THE POSSIBILITY OF SUCH DAMAGE.

import logging
import os
from json import JSONDecodeError, load

from qkgeometry.qk_utils import QK_FD_STEP, QK_FD_STEP_MAX, QK_FD_STEP_MIN, QK_MIN_N

SUITES = ['algebra', 'geometry', 'ckforms', 'twistor']
REPORT_FORMATS = ['json', 'markdown']
SEED_ENVIRONMENT_VARIABLE = 'QKVERIFY_SEED'
SEED_LIMIT = 2 ** 64

DEFAULT_CONFIG = {
    'n': 2,
    'samples': 5,
    'seed': 20240101,
    'fd_step': QK_FD_STEP,
    'richardson': True,
    'suites': SUITES,
    'tolerances': {},
}

CONFIG_KEYS = set(DEFAULT_CONFIG.keys())


class InvalidConfigException(Exception):
    '''
    An exception that is thrown when a configuration value, a tolerance override or a report format is
    invalid
    '''
    def __init__(self, message):
        super().__init__(message)
        self.message = message


def _check_integer(value, name, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidConfigException(f'{name} must be an integer, not {type(value).__name__}')
    if value < minimum:
        raise InvalidConfigException(f'{name} must be at least {minimum}, not {value}')
    return value


def _check_real(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidConfigException(f'{name} must be a number, not {type(value).__name__}')
    return float(value)


def _check_suites(suites):
    if isinstance(suites, str) or not isinstance(suites, (list, tuple, set)):
        raise InvalidConfigException(f'suites must be a list of suite names, not {type(suites).__name__}')
    unknown = [suite for suite in suites if suite not in SUITES]
    if len(unknown) > 0:
        raise InvalidConfigException(f'Unknown suites {unknown}, expected a subset of {SUITES}')
    if len(suites) == 0:
        raise InvalidConfigException('At least one suite must be selected')
    # canonical order, no duplicates
    return [suite for suite in SUITES if suite in suites]


def _check_tolerances(tolerances):
    if not isinstance(tolerances, dict):
        raise InvalidConfigException(f'tolerances must be a dictionary, not {type(tolerances).__name__}')
    result = {}
    for name, value in tolerances.items():
        if not isinstance(name, str):
            raise InvalidConfigException(f'Tolerance names must be strings, not {type(name).__name__}')
        value = _check_real(value, f'Tolerance for {name}')
        if not value >= 0.0:
            raise InvalidConfigException(f'Tolerance for {name} must be nonnegative, not {value}')
        result[name] = value
    return result


class SuiteConfig:
    '''
    The parameters of a verification run.  Raises an InvalidConfigException if:
    (1) n is not an integer >= 2
    (2) samples is not an integer >= 1
    (3) seed is not an integer in [0, 2^64)
    (4) fd_step is not in (1e-6, 1e-1)
    (5) suites is empty or names an unknown suite
    (6) a tolerance is negative or not a number
    Arguments:
        n: quaternionic dimension of the base ℍPⁿ
        samples: the number of sample points (or sample tuples) per check
        seed: the root seed every check's random stream is derived from
        fd_step: the finite-difference step
        richardson: whether second-derivative quantities get a Richardson refinement
        suites: the selected suites
        tolerances: per-check tolerance overrides {check_name: tolerance}
    '''
    def __init__(self, n=DEFAULT_CONFIG['n'], samples=DEFAULT_CONFIG['samples'], seed=DEFAULT_CONFIG['seed'],
                 fd_step=DEFAULT_CONFIG['fd_step'], richardson=DEFAULT_CONFIG['richardson'],
                 suites=None, tolerances=None):
        self.n = _check_integer(n, 'n', QK_MIN_N)
        self.samples = _check_integer(samples, 'samples', 1)
        self.seed = _check_integer(seed, 'seed', 0)
        if self.seed >= SEED_LIMIT:
            raise InvalidConfigException(f'seed must be a 64-bit integer, not {seed}')
        self.fd_step = _check_real(fd_step, 'fd_step')
        if not QK_FD_STEP_MIN < self.fd_step < QK_FD_STEP_MAX:
            raise InvalidConfigException(f'fd_step must lie in ({QK_FD_STEP_MIN}, {QK_FD_STEP_MAX}), not {fd_step}')
        if not isinstance(richardson, bool):
            raise InvalidConfigException(f'richardson must be a boolean, not {type(richardson).__name__}')
        self.richardson = richardson
        self.suites = _check_suites(SUITES if suites is None else suites)
        self.tolerances = _check_tolerances({} if tolerances is None else tolerances)

    def to_dict(self):
        '''
        The configuration as a JSON-ready dictionary, as it appears in the report
        '''
        return {
            'n': self.n,
            'samples': self.samples,
            'seed': self.seed,
            'fd_step': self.fd_step,
            'richardson': self.richardson,
            'suites': list(self.suites),
            'tolerances': dict(sorted(self.tolerances.items())),
        }

    def overridden(self, **overrides):
        '''
        A new SuiteConfig with the non-None overrides applied.  Tolerance overrides are merged into
        the existing tolerances rather than replacing them.
        '''
        values = self.to_dict()
        for key, value in overrides.items():
            if key not in CONFIG_KEYS:
                raise InvalidConfigException(f'Unknown configuration key {key}')
            if value is None:
                continue
            if key == 'tolerances':
                values['tolerances'] = {**values['tolerances'], **value}
            else:
                values[key] = value
        return SuiteConfig(**values)

    def tolerance(self, name, default):
        return self.tolerances.get(name, default)

    def __repr__(self):
        return f'SuiteConfig(n={self.n}, samples={self.samples}, seed={self.seed}, suites={self.suites})'


def parse_tolerance(text):
    '''
    Parse a command-line tolerance override of the form NAME=VALUE.
    Returns:
        the pair (name, value)
    Raises:
        InvalidConfigException if the text isn't of that form or the value isn't a nonnegative number
    '''
    name, separator, value = text.partition('=')
    name = name.strip()
    if separator != '=' or len(name) == 0:
        raise InvalidConfigException(f'Tolerance override {text} must have the form NAME=VALUE')
    try:
        tolerance = float(value)
    except ValueError:
        raise InvalidConfigException(f'Tolerance override {text} does not give a number')
    if not tolerance >= 0.0:
        raise InvalidConfigException(f'Tolerance override {text} must be nonnegative')
    return name, tolerance


def environment_seed(environ=None):
    '''
    The seed from QKVERIFY_SEED, or None if it isn't set.
    Raises:
        InvalidConfigException if the variable isn't an integer
    '''
    environ = os.environ if environ is None else environ
    text = environ.get(SEED_ENVIRONMENT_VARIABLE)
    if text is None or text.strip() == '':
        return None
    try:
        return int(text.strip())
    except ValueError:
        raise InvalidConfigException(f'{SEED_ENVIRONMENT_VARIABLE} must be an integer, not {text}')


def build_suite_config(filename):
    '''
    Read a suite configuration from a JSON file.  The file should be a JSON dictionary with any of
    the keys
    {
        "n": <quaternionic dimension>,
        "samples": <samples per check>,
        "seed": <root seed>,
        "fd_step": <finite-difference step>,
        "richardson": <true | false>,
        "suites": <list of suite names>,
        "tolerances": {<check name>: <tolerance>}
    }
    Arguments:
        filename: name of the json file
    Returns:
        the dictionary of values the file sets; validation happens when they become a SuiteConfig
    Raises:
        InvalidConfigException if the file can't be read, isn't JSON, isn't a dictionary or has an
        unknown key
    '''
    try:
        with open(filename, 'r') as file:
            values = load(file)
    except OSError as error:
        raise InvalidConfigException(f'Cannot read configuration file {filename}: {error}')
    except JSONDecodeError as error:
        raise InvalidConfigException(f'Configuration file {filename} is not valid JSON: {error}')
    if not isinstance(values, dict):
        raise InvalidConfigException(f'Configuration file {filename} must hold a dictionary, not {type(values).__name__}')
    unknown = set(values.keys()) - CONFIG_KEYS
    if len(unknown) > 0:
        raise InvalidConfigException(f'Configuration file {filename} has unknown keys {sorted(unknown)}')
    return values


def resolve_suite_config(filename=None, environ=None, **overrides):
    '''
    Build the SuiteConfig of a run.  Precedence, highest first: the overrides (command-line flags,
    None meaning unset), the configuration file, QKVERIFY_SEED for the seed, the defaults.
    Arguments:
        filename: optional JSON configuration file
        environ: the environment to read QKVERIFY_SEED from, os.environ if None
        overrides: n, samples, seed, fd_step, richardson, suites, tolerances
    Returns:
        a validated SuiteConfig
    Raises:
        InvalidConfigException for any invalid value
    '''
    config = SuiteConfig()
    seed = environment_seed(environ)
    if seed is not None:
        config = config.overridden(seed=seed)
    if filename is not None:
        config = config.overridden(**build_suite_config(filename))
        logging.info(f'Read configuration file {filename}')
    config = config.overridden(**overrides)
    logging.debug(f'Resolved {config}')
    return config
