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
Tests for SuiteConfig, the JSON configuration file and the precedence of configuration sources
'''
import json

import pytest

from qkverify.suite_config import SuiteConfig, InvalidConfigException, DEFAULT_CONFIG, SUITES
from qkverify.suite_config import build_suite_config, environment_seed, parse_tolerance, resolve_suite_config


def _write(tmp_path, values, name='config.json'):
    path = tmp_path / name
    path.write_text(values if isinstance(values, str) else json.dumps(values))
    return str(path)


def test_defaults():
    config = SuiteConfig()
    assert config.to_dict() == DEFAULT_CONFIG
    assert config.suites == SUITES
    assert config.tolerance('ck_equation', 1e-5) == 1e-5


def test_invalid_values():
    '''
    n below 2, no samples, out-of-range seeds and steps, unknown suites and negative tolerances
    are all rejected
    '''
    bad = [
        {'n': 1}, {'n': 2.5}, {'n': True}, {'samples': 0}, {'seed': -1}, {'seed': 2 ** 64},
        {'fd_step': 1e-6}, {'fd_step': 0.1}, {'fd_step': 'small'}, {'richardson': 'yes'},
        {'suites': []}, {'suites': ['topology']}, {'suites': 'algebra'},
        {'tolerances': {'ck_equation': -1.0}}, {'tolerances': ['ck_equation']}, {'tolerances': {1: 0.1}},
    ]
    for values in bad:
        with pytest.raises(InvalidConfigException):
            SuiteConfig(**values)


def test_suites_are_canonical():
    config = SuiteConfig(suites=['twistor', 'algebra', 'twistor'])
    assert config.suites == ['algebra', 'twistor']


def test_zero_tolerance_allowed():
    # a zero tolerance forces a failure but is a valid configuration
    assert SuiteConfig(tolerances={'model_einstein': 0}).tolerance('model_einstein', 1e-10) == 0.0


def test_overridden():
    config = SuiteConfig(tolerances={'ck_equation': 1e-4})
    changed = config.overridden(n=3, samples=None, tolerances={'d_squared': 1e-4})
    assert changed.n == 3
    assert changed.samples == config.samples
    assert changed.tolerances == {'ck_equation': 1e-4, 'd_squared': 1e-4}
    with pytest.raises(InvalidConfigException):
        config.overridden(colour='blue')


def test_parse_tolerance():
    assert parse_tolerance('ck_equation=1e-4') == ('ck_equation', 1e-4)
    assert parse_tolerance(' model_einstein = 0 ') == ('model_einstein', 0.0)
    for text in ['ck_equation', '=1e-4', 'ck_equation=small', 'ck_equation=-1', 'ck_equation=nan']:
        with pytest.raises(InvalidConfigException):
            parse_tolerance(text)


def test_environment_seed():
    assert environment_seed({}) is None
    assert environment_seed({'QKVERIFY_SEED': ' 42 '}) == 42
    assert environment_seed({'QKVERIFY_SEED': ''}) is None
    with pytest.raises(InvalidConfigException):
        environment_seed({'QKVERIFY_SEED': 'forty-two'})


def test_build_suite_config(tmp_path):
    filename = _write(tmp_path, {'n': 3, 'samples': 2, 'suites': ['algebra']})
    assert build_suite_config(filename) == {'n': 3, 'samples': 2, 'suites': ['algebra']}
    with pytest.raises(InvalidConfigException):
        build_suite_config(str(tmp_path / 'missing.json'))
    with pytest.raises(InvalidConfigException):
        build_suite_config(_write(tmp_path, '{"n": ', 'broken.json'))
    with pytest.raises(InvalidConfigException):
        build_suite_config(_write(tmp_path, [1, 2], 'list.json'))
    with pytest.raises(InvalidConfigException):
        build_suite_config(_write(tmp_path, {'n': 2, 'colour': 'blue'}, 'unknown.json'))


def test_precedence(tmp_path):
    '''
    flags > file > QKVERIFY_SEED > defaults
    '''
    environ = {'QKVERIFY_SEED': '7'}
    assert resolve_suite_config(environ=environ).seed == 7
    assert resolve_suite_config(environ={}).seed == DEFAULT_CONFIG['seed']
    filename = _write(tmp_path, {'seed': 11, 'n': 3, 'tolerances': {'ck_equation': 1e-4}})
    config = resolve_suite_config(filename, environ=environ)
    assert (config.seed, config.n) == (11, 3)
    config = resolve_suite_config(filename, environ=environ, seed=13, n=None, tolerances={'d_squared': 1e-3})
    assert (config.seed, config.n) == (13, 3)
    assert config.tolerances == {'ck_equation': 1e-4, 'd_squared': 1e-3}


def test_shipped_configurations():
    for name in ['default', 'acceptance', 'spot_n3']:
        config = resolve_suite_config(f'./configs/{name}.json', environ={})
        assert config.samples >= 1
    assert resolve_suite_config('./configs/default.json', environ={}).to_dict() == DEFAULT_CONFIG
