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
Tests for the qkverify command line, run through click's CliRunner.  Reports are written with
--out so that log lines on stderr never mix with them.
'''
import json

import pytest
from click.testing import CliRunner

from qkverify.cli import main
from qkverify.checks import check_registry


def _run(tmp_path, *args, env=None, name='report.json'):
    out = tmp_path / name
    result = CliRunner().invoke(main, ['run', '--suite', 'algebra', '--out', str(out), *args], env=env)
    return result, out


def _bodies(report):
    # the report minus the timing of each check
    return [{key: value for key, value in result.items() if key != 'elapsed'} for result in report['results']]


def test_algebra_suite_passes(tmp_path):
    '''
    The algebra suite passes at n = 2 with the default tolerances, and exits 0
    '''
    result, out = _run(tmp_path)
    assert result.exit_code == 0
    report = json.loads(out.read_text())
    assert report['summary'] == {'pass_count': 9, 'fail_count': 0}
    assert report['config']['suites'] == ['algebra']
    assert all(entry['pass'] for entry in report['results'])
    scalar = [entry for entry in report['results'] if entry['name'] == 'model_einstein'][0]
    assert scalar['value'] == pytest.approx(32.0)


def test_forced_failure(tmp_path):
    # a zero tolerance on a check with round-off residuals fails it, and the run exits 1
    result, out = _run(tmp_path, '--tolerance', 'q_curvature_rest=0')
    assert result.exit_code == 1
    report = json.loads(out.read_text())
    assert report['summary']['fail_count'] == 1
    failed = [entry for entry in report['results'] if not entry['pass']]
    assert [entry['name'] for entry in failed] == ['q_curvature_rest']
    assert failed[0]['tolerance'] == 0.0


def test_reports_are_reproducible(tmp_path):
    first, first_out = _run(tmp_path, '--seed', '99', name='first.json')
    second, second_out = _run(tmp_path, '--seed', '99', name='second.json')
    assert first.exit_code == second.exit_code == 0
    assert _bodies(json.loads(first_out.read_text())) == _bodies(json.loads(second_out.read_text()))


def test_seed_from_environment(tmp_path):
    result, out = _run(tmp_path, env={'QKVERIFY_SEED': '1234'})
    assert result.exit_code == 0
    assert json.loads(out.read_text())['config']['seed'] == 1234
    result, out = _run(tmp_path, '--seed', '5', env={'QKVERIFY_SEED': '1234'}, name='flag.json')
    assert json.loads(out.read_text())['config']['seed'] == 5


def test_config_file_and_flags(tmp_path):
    config = tmp_path / 'config.json'
    config.write_text(json.dumps({'n': 3, 'samples': 2, 'suites': ['geometry']}))
    result, out = _run(tmp_path, '--config', str(config), '--samples', '3')
    assert result.exit_code == 0
    report = json.loads(out.read_text())
    assert report['config']['n'] == 3
    assert report['config']['samples'] == 3
    assert report['config']['suites'] == ['algebra']


def test_markdown_format(tmp_path):
    result, out = _run(tmp_path, '--format', 'markdown', name='report.md')
    assert result.exit_code == 0
    text = out.read_text()
    assert text.startswith('# qkverify report')
    assert '9 passed, 0 failed' in text


def test_usage_errors(tmp_path):
    '''
    Invalid configuration values, malformed or unknown tolerance overrides and unknown suites
    exit with 2
    '''
    for args in [['--n', '1'], ['--samples', '0'], ['--fd-step', '0.5'], ['--tolerance', 'ck_equation'],
                 ['--tolerance', 'no_such_check=1e-3'], ['--suite', 'topology'], ['--format', 'xml']]:
        result, _ = _run(tmp_path, *args)
        assert result.exit_code == 2
    missing = CliRunner().invoke(main, ['run', '--config', str(tmp_path / 'missing.json')])
    assert missing.exit_code == 2


def test_list_checks():
    result = CliRunner().invoke(main, ['list-checks'])
    assert result.exit_code == 0
    rows = [line.split('\t') for line in result.output.splitlines() if line.count('\t') == 3]
    assert len(rows) == len(check_registry.names())
    assert ['ckforms', 'ck_dimension'] == rows[[row[1] for row in rows].index('ck_dimension')][:2]
    twistor = CliRunner().invoke(main, ['list-checks', '--suite', 'twistor'])
    assert len([line for line in twistor.output.splitlines() if line.count('\t') == 3]) == 15
