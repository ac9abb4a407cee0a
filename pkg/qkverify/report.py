'''
Results of verification checks and the report built from them.  A report is a total function of
the configuration and the results: it carries no clock time beyond the per-check elapsed field.
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

from json import dumps

import pandas as pd

from qkverify.suite_config import REPORT_FORMATS, InvalidConfigException

RESULT_FIELDS = ['name', 'reference', 'n', 'samples_used', 'max_residual', 'tolerance', 'pass', 'elapsed',
                 'value', 'error']


def _optional_float(value):
    return None if value is None else float(value)


class CheckResult:
    '''
    The outcome of one check in a run.  passed is true iff max_residual <= tolerance; a check that
    faulted has max_residual None, passed False and the fault message in error.
    Arguments:
        name: the check name
        reference: the short label of the identity the check verifies
        n: the quaternionic dimension the check ran at
        samples_used: the number of samples behind max_residual
        max_residual: the worst residual, or None if the check faulted
        tolerance: the tolerance in force
        elapsed: wall-clock seconds the check took
        value: the measured quantity, for checks that report one
        error: the fault message, for a check that faulted
    '''
    def __init__(self, name, reference, n, samples_used, max_residual, tolerance, elapsed, value=None, error=None):
        self.name = name
        self.reference = reference
        self.n = int(n)
        self.samples_used = int(samples_used)
        self.max_residual = _optional_float(max_residual)
        self.tolerance = float(tolerance)
        self.elapsed = float(elapsed)
        self.value = _optional_float(value)
        self.error = error
        self.passed = self.max_residual is not None and self.max_residual <= self.tolerance

    def to_dict(self):
        return {
            'name': self.name,
            'reference': self.reference,
            'n': self.n,
            'samples_used': self.samples_used,
            'max_residual': self.max_residual,
            'tolerance': self.tolerance,
            'pass': self.passed,
            'elapsed': self.elapsed,
            'value': self.value,
            'error': self.error,
        }

    def __repr__(self):
        return f'CheckResult({self.name}, pass={self.passed}, max_residual={self.max_residual})'


def results_frame(results):
    '''
    The results as a pandas DataFrame, one row per check, columns RESULT_FIELDS
    '''
    return pd.DataFrame([result.to_dict() for result in results], columns=RESULT_FIELDS)


def summarize(results):
    '''
    Returns:
        {'pass_count': ..., 'fail_count': ...}
    '''
    frame = results_frame(results)
    passes = int(frame['pass'].sum())
    return {'pass_count': passes, 'fail_count': len(frame) - passes}


def _markdown_cell(value):
    if value is None or (isinstance(value, float) and pd.isna(value)):
        return ''
    if isinstance(value, bool):
        return 'PASS' if value else 'FAIL'
    if isinstance(value, float):
        return f'{value:.3e}'
    return str(value).replace('|', '\\|')


def _markdown(results, config):
    frame = results_frame(results).drop(columns=['elapsed'])
    summary = summarize(results)
    settings = ', '.join(f'{key}={value}' for key, value in config.to_dict().items() if key != 'tolerances')
    lines = [
        '# qkverify report',
        '',
        settings,
        '',
        '| ' + ' | '.join(frame.columns) + ' |',
        '|' + '---|' * len(frame.columns),
    ]
    for row in frame.astype(object).itertuples(index=False):
        lines.append('| ' + ' | '.join(_markdown_cell(cell) for cell in row) + ' |')
    lines += ['', f'{summary["pass_count"]} passed, {summary["fail_count"]} failed', '']
    return '\n'.join(lines)


def emit_report(results, config, format='json'):
    '''
    Render a run as text.
    Arguments:
        results: a nonempty list of CheckResults
        config: the SuiteConfig of the run
        format: 'json' for a single object {config, results, summary}, 'markdown' for a table
    Returns:
        the report text
    Raises:
        InvalidConfigException for an empty result list or an unknown format
    '''
    if format not in REPORT_FORMATS:
        raise InvalidConfigException(f'Unknown report format {format}, expected one of {REPORT_FORMATS}')
    if len(results) == 0:
        raise InvalidConfigException('A report needs at least one check result')
    if format == 'markdown':
        return _markdown(results, config)
    report = {
        'config': config.to_dict(),
        'results': [result.to_dict() for result in results],
        'summary': summarize(results),
    }
    return dumps(report, indent=2, allow_nan=False) + '\n'
