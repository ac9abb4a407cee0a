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
'''
Tests for CheckResult, the results frame and the JSON and markdown reports
'''
import json

import pytest

from qkverify.report import CheckResult, RESULT_FIELDS, emit_report, results_frame, summarize
from qkverify.suite_config import SuiteConfig, InvalidConfigException

config = SuiteConfig(suites=['algebra'])
results = [
    CheckResult('structure_relations', 'quaternion relations', 2, 100, 3.1e-16, 1e-10, 0.01),
    CheckResult('ck_dimension', 'dimension count', 2, 10, 0.0, 0.5, 1.5, value=21),
    CheckResult('ck_equation', 'conformal-Killing equation', 2, 105, 2.5e-4, 1e-5, 3.25),
    CheckResult('riemann_model', 'model | curvature', 2, 0, None, 1e-6, 0.2, error='chart fault'),
]


def test_pass_iff_residual_within_tolerance():
    assert [result.passed for result in results] == [True, True, False, False]
    assert CheckResult('edge', 'edge', 2, 1, 1e-3, 1e-3, 0.0).passed
    assert not CheckResult('forced', 'forced', 2, 1, 1e-17, 0.0, 0.0).passed


def test_frame_and_summary():
    frame = results_frame(results)
    assert list(frame.columns) == RESULT_FIELDS
    assert len(frame) == 4
    assert summarize(results) == {'pass_count': 2, 'fail_count': 2}
    assert summarize(results[:2]) == {'pass_count': 2, 'fail_count': 0}


def test_json_report():
    '''
    The JSON report is one object with the config, the results and the summary, and parsing it
    gives back every numeric field exactly
    '''
    report = json.loads(emit_report(results, config, 'json'))
    assert set(report.keys()) == {'config', 'results', 'summary'}
    assert report['config'] == config.to_dict()
    assert report['summary'] == {'pass_count': 2, 'fail_count': 2}
    for parsed, result in zip(report['results'], results):
        assert list(parsed.keys()) == RESULT_FIELDS
        assert parsed == result.to_dict()
    assert report['results'][1]['value'] == 21.0
    assert report['results'][3]['max_residual'] is None
    assert report['results'][3]['pass'] is False


def test_json_report_is_deterministic():
    assert emit_report(results, config) == emit_report(results, config)


def test_markdown_report():
    report = emit_report(results, config, 'markdown')
    lines = report.splitlines()
    rows = [line for line in lines if line.startswith('| ') and not line.startswith('| name')]
    assert len(rows) == 4
    assert 'ck_dimension' in rows[1] and 'PASS' in rows[1]
    assert 'FAIL' in rows[2]
    assert 'model \\| curvature' in rows[3]
    assert '2 passed, 2 failed' in report


def test_report_errors():
    with pytest.raises(InvalidConfigException):
        emit_report(results, config, 'xml')
    with pytest.raises(InvalidConfigException):
        emit_report([], config, 'json')
