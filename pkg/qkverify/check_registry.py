'''
The registry of verification checks: the Check record, the outcome a check function returns, the
context it runs in, and the CheckRegistry that maps check names to checks
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

import zlib
from functools import lru_cache

import numpy as np

from qkgeometry.hpn_geometry import MetricField, sample_points, sample_unit_vectors
from qkgeometry.twistor import TwistorSpace
from qkverify.suite_config import SUITES, InvalidConfigException


class CheckNotFoundException(Exception):
    '''
    An exception that is thrown when a check name is not found in the CheckRegistry
    '''
    def __init__(self, message):
        super().__init__(message)
        self.message = message


class CheckOutcome:
    '''
    What a check function returns: the worst residual over its samples, how many samples it used,
    and optionally a measured value to report alongside (a rank, a fitted constant, ...)
    '''
    def __init__(self, max_residual, samples_used, value=None):
        self.max_residual = float(max_residual)
        self.samples_used = int(samples_used)
        self.value = None if value is None else float(value)

    @classmethod
    def from_residuals(cls, residuals, value=None):
        '''
        The outcome of a list of per-sample residuals.
        Raises:
            FloatingPointError if there are no residuals or one of them isn't finite
        '''
        residuals = np.asarray(residuals, dtype=float).ravel()
        if residuals.size == 0:
            raise FloatingPointError('A check produced no residuals')
        if not np.all(np.isfinite(residuals)):
            raise FloatingPointError('A check produced a non-finite residual')
        return cls(np.max(np.abs(residuals)), residuals.size, value)

    @classmethod
    def lower_bound(cls, threshold, measured, samples_used, value=None):
        '''
        The outcome of a check that asserts measured > threshold: the residual is threshold / measured,
        so it passes against tolerance 1 exactly when the bound holds
        '''
        measured = float(measured)
        if not np.isfinite(measured):
            raise FloatingPointError('A lower-bound check measured a non-finite value')
        residual = threshold / measured if measured > 0.0 else np.finfo(float).max
        return cls(residual, samples_used, measured if value is None else value)


class Check:
    '''
    A registered check.
    Arguments:
        name: the unique check name
        suite: one of the SUITES
        reference: a short label of the identity the check verifies
        tolerance: the default tolerance
        function: callable, CheckContext -> CheckOutcome
    Raises:
        InvalidConfigException if the suite is unknown or the tolerance is negative
    '''
    def __init__(self, name, suite, reference, tolerance, function):
        if suite not in SUITES:
            raise InvalidConfigException(f'Check {name} names unknown suite {suite}')
        if not tolerance >= 0.0:
            raise InvalidConfigException(f'Check {name} has a negative default tolerance {tolerance}')
        self.name = name
        self.suite = suite
        self.reference = reference
        self.tolerance = float(tolerance)
        self.function = function

    def __call__(self, context):
        return self.function(context)

    def __repr__(self):
        return f'Check({self.name}, suite={self.suite})'


def check_rng(seed, name):
    '''
    The random stream of one check, a function of the root seed and the check name only, so that
    results don't depend on which checks run or in what order
    '''
    return np.random.default_rng(np.random.SeedSequence([seed, zlib.crc32(name.encode('utf-8'))]))


@lru_cache(maxsize=8)
def _metric_field(n, fd_step, richardson):
    # calibration is deterministic
    return MetricField(n, fd_step, richardson)


class CheckContext:
    '''
    Everything a check function needs: the configuration, its own random stream and the geometry
    built from the configuration
    Arguments:
        config: the SuiteConfig
        name: the check name, which seeds the random stream
    '''
    def __init__(self, config, name):
        self.config = config
        self.name = name
        self.n = config.n
        self.samples = config.samples
        self.rng = check_rng(config.seed, name)

    @property
    def metric_field(self):
        return _metric_field(self.config.n, self.config.fd_step, self.config.richardson)

    @property
    def twistor(self):
        return TwistorSpace(self.metric_field)

    def points(self, count=None):
        '''
        count chart points in the unit ball, config.samples if count is None
        '''
        return sample_points(self.n, self.samples if count is None else count, self.rng)

    def unit_vectors(self, points):
        return sample_unit_vectors(self.metric_field, points, self.rng)

    def twistor_points(self, count=None):
        return self.twistor.sample_points(self.samples if count is None else count, self.rng)


class CheckRegistry:
    '''
    The correspondence between check names and checks, in registration order
    '''
    def __init__(self):
        self.checks = {}

    def add_check(self, check):
        '''
        Register a check.
        Raises:
            InvalidConfigException if a check with the same name is already registered
        '''
        if not isinstance(check, Check):
            raise InvalidConfigException(f'Only a Check can be registered, not {type(check)}')
        if check.name in self.checks:
            raise InvalidConfigException(f'Check {check.name} is already registered')
        self.checks[check.name] = check

    def register(self, name, suite, reference, tolerance):
        '''
        Decorator form of add_check for a check function
        '''
        def decorator(function):
            self.add_check(Check(name, suite, reference, tolerance, function))
            return function
        return decorator

    def get_check(self, name):
        '''
        Get the check called name.
        Raises:
            CheckNotFoundException if there is no such check
        '''
        try:
            return self.checks[name]
        except KeyError:
            raise CheckNotFoundException(f'Check {name} not found')

    def get_suite(self, suite):
        '''
        The checks of one suite, in registration order.
        Raises:
            InvalidConfigException for an unknown suite
        '''
        if suite not in SUITES:
            raise InvalidConfigException(f'Unknown suite {suite}, expected one of {SUITES}')
        return [check for check in self.checks.values() if check.suite == suite]

    def names(self):
        return list(self.checks.keys())

    def selected(self, config):
        '''
        The checks of the suites config selects, in suite order.
        Raises:
            CheckNotFoundException if config carries a tolerance for a check that isn't registered
        '''
        for name in config.tolerances:
            self.get_check(name)
        return [check for suite in config.suites for check in self.get_suite(suite)]
