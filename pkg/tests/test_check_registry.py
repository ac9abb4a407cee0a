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
Tests for the check registry, check outcomes, the per-check random streams and the registered
check catalogue
'''
import numpy as np
import pytest

from qkverify.check_registry import Check, CheckContext, CheckOutcome, CheckRegistry, CheckNotFoundException
from qkverify.check_registry import check_rng
from qkverify.checks import check_registry
from qkverify.suite_config import SuiteConfig, InvalidConfigException, SUITES

EXPECTED_COUNTS = {'algebra': 9, 'geometry': 20, 'ckforms': 18, 'twistor': 15}


def _constant_check(context):
    return CheckOutcome(0.5, 1)


def test_outcomes():
    outcome = CheckOutcome.from_residuals([1e-3, -2e-3, 0.0], value=21)
    assert outcome.max_residual == 2e-3
    assert outcome.samples_used == 3
    assert outcome.value == 21.0
    with pytest.raises(FloatingPointError):
        CheckOutcome.from_residuals([])
    with pytest.raises(FloatingPointError):
        CheckOutcome.from_residuals([1.0, np.nan])


def test_lower_bound():
    # passes against tolerance 1 exactly when measured > threshold
    assert CheckOutcome.lower_bound(1e-2, 0.5, 4).max_residual == pytest.approx(0.02)
    assert CheckOutcome.lower_bound(1e-2, 0.5, 4).value == 0.5
    assert CheckOutcome.lower_bound(1e-2, 1e-3, 4).max_residual == pytest.approx(10.0)
    assert CheckOutcome.lower_bound(1e-2, 0.0, 4).max_residual > 1e300
    with pytest.raises(FloatingPointError):
        CheckOutcome.lower_bound(1e-2, np.inf, 4)


def test_registry():
    registry = CheckRegistry()
    check = Check('constant', 'algebra', 'a constant', 1.0, _constant_check)
    registry.add_check(check)
    assert registry.get_check('constant') is check
    assert registry.names() == ['constant']
    assert registry.get_suite('algebra') == [check]
    assert registry.get_suite('twistor') == []
    with pytest.raises(CheckNotFoundException):
        registry.get_check('missing')
    with pytest.raises(InvalidConfigException):
        registry.add_check(check)
    with pytest.raises(InvalidConfigException):
        registry.add_check(_constant_check)
    with pytest.raises(InvalidConfigException):
        registry.get_suite('topology')


def test_register_decorator():
    registry = CheckRegistry()

    @registry.register('decorated', 'geometry', 'decorated check', 1e-3)
    def decorated(context):
        return CheckOutcome(0.0, 1)
    assert registry.get_check('decorated').function is decorated
    assert registry.get_check('decorated').tolerance == 1e-3


def test_bad_checks():
    with pytest.raises(InvalidConfigException):
        Check('bad', 'topology', 'unknown suite', 1.0, _constant_check)
    with pytest.raises(InvalidConfigException):
        Check('bad', 'algebra', 'negative tolerance', -1.0, _constant_check)


def test_selected():
    config = SuiteConfig(suites=['twistor', 'algebra'])
    selected = check_registry.selected(config)
    assert [check.suite for check in selected] == ['algebra'] * 9 + ['twistor'] * 15
    with pytest.raises(CheckNotFoundException):
        check_registry.selected(SuiteConfig(tolerances={'no_such_check': 1.0}))


def test_catalogue():
    '''
    Every suite carries its checks, names are unique and every check has a reference label
    '''
    for suite, count in EXPECTED_COUNTS.items():
        assert len(check_registry.get_suite(suite)) == count
    assert len(check_registry.names()) == sum(EXPECTED_COUNTS.values())
    for name in ['ck_dimension', 'obata_equation', 'killing_count', 'q_curvature_s2h', 'weitzenboeck']:
        assert check_registry.get_check(name).reference
    assert set(check.suite for check in check_registry.checks.values()) == set(SUITES)


def test_streams_are_independent():
    '''
    A check's stream depends only on the seed and the check name
    '''
    first = check_rng(5, 'ck_equation').normal(size=4)
    assert np.array_equal(first, check_rng(5, 'ck_equation').normal(size=4))
    assert not np.array_equal(first, check_rng(5, 'dpsi_formula').normal(size=4))
    assert not np.array_equal(first, check_rng(6, 'ck_equation').normal(size=4))


def test_context():
    config = SuiteConfig(samples=3)
    context = CheckContext(config, 'kostant_formula')
    points = context.points()
    assert points.shape == (3, 8)
    assert context.points(5).shape == (5, 8)
    assert context.metric_field is CheckContext(config, 'other').metric_field
    assert context.unit_vectors(points).shape == (3, 8)
    assert context.twistor_points().shape == (3, 10)


def test_algebra_checks_pass():
    config = SuiteConfig(suites=['algebra'])
    for check in check_registry.selected(config):
        outcome = check(CheckContext(config, check.name))
        assert outcome.max_residual <= check.tolerance


def test_negative_controls_fail_their_identities():
    config = SuiteConfig(samples=2)
    for name in ['killing_negative_control', 'integrated_negative_control', 'ck_negative_control']:
        check = check_registry.get_check(name)
        outcome = check(CheckContext(config, name))
        assert outcome.max_residual <= check.tolerance
        assert outcome.value > 1e-2


def test_lifted_fields_cross_every_point():
    # every basis field is evaluated at every sampled twistor point
    config = SuiteConfig(samples=2)
    check = check_registry.get_check('hamiltonian_gradient')
    outcome = check(CheckContext(config, check.name))
    assert outcome.samples_used == 21 * 2
    assert outcome.max_residual <= check.tolerance
