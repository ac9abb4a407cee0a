'''
Run the selected suites of a SuiteConfig and collect one CheckResult per check.
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
from time import perf_counter

import numpy as np
from numpy.linalg import LinAlgError
from tqdm import tqdm

from qkgeometry.qk_utils import ChartEvaluationException, InvalidStructureException
from qkverify.check_registry import CheckContext
from qkverify.checks import check_registry
from qkverify.report import CheckResult

# faults inside a check that become a failed result rather than a crash
CHECK_FAULTS = (ChartEvaluationException, InvalidStructureException, FloatingPointError, LinAlgError)


def _log_and_fail(check, config, message, elapsed):
    '''
    Log the fault of a check and return the failed CheckResult for it.  Utility, internal use only
    '''
    logging.error(f'Check {check.name} faulted: {message}')
    return CheckResult(check.name, check.reference, config.n, 0, None,
                       config.tolerance(check.name, check.tolerance), elapsed, error=message)


def run_check(check, config):
    '''
    Run one check under config.
    Arguments:
        check: a registered Check
        config: the SuiteConfig
    Returns:
        its CheckResult
    '''
    tolerance = config.tolerance(check.name, check.tolerance)
    logging.debug(f'Starting check {check.name}')
    start = perf_counter()
    try:
        context = CheckContext(config, check.name)
        with np.errstate(divide='raise', invalid='raise', over='raise'):
            outcome = check(context)
    except CHECK_FAULTS as error:
        message = error.message if hasattr(error, 'message') else str(error)
        return _log_and_fail(check, config, message, perf_counter() - start)
    elapsed = perf_counter() - start
    result = CheckResult(check.name, check.reference, config.n, outcome.samples_used, outcome.max_residual,
                         tolerance, elapsed, outcome.value)
    logging.info(f'Check {check.name}: residual {result.max_residual:.3e}, tolerance {tolerance:.1e}, '
                 f'{"pass" if result.passed else "FAIL"} in {elapsed:.2f}s')
    return result


def run_suite(config, registry=check_registry, progress=False):
    '''
    Run every check of the selected suites, in registry order within each suite.  Each check draws
    its samples from its own stream seeded by (seed, name), so the results don't depend on
    execution order.
    Arguments:
        config: the SuiteConfig
        registry: the CheckRegistry to draw checks from
        progress: if True, show a tqdm progress bar on stderr
    Returns:
        a list of CheckResults
    Raises:
        CheckNotFoundException if a tolerance override names an unknown check
    '''
    checks = registry.selected(config)
    logging.info(f'Running {len(checks)} checks with {config}')
    return [run_check(check, config) for check in tqdm(checks, disable=not progress, desc='qkverify', unit='check')]
