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
Tests for the chart geometry of ℍPⁿ: metric, curvature, frames, Killing fields and the
covariant calculus
'''
import copy

import numpy as np
import pytest

from qkgeometry.hpn_geometry import MetricField, FrameField, KillingField, PolynomialField, check_frame
from qkgeometry.hpn_geometry import sample_points, sample_unit_vectors, killing_basis, random_killing_field
from qkgeometry.hpn_geometry import killing_value, killing_flow, killing_residual, kostant_residual
from qkgeometry.hpn_geometry import curvature_projection_residual, metric_compatibility_residual
from qkgeometry.hpn_geometry import q_parallelism_residual, isotropy_pullback_residual, model_riemann_components
from qkgeometry.hpn_geometry import random_vector_field, random_one_form_field
from qkgeometry.quat_algebra import model_curvature, standard_structure, three_form_norm
from qkgeometry.qk_utils import ChartEvaluationException, InvalidStructureException

# One metric field for the whole module; calibration is the expensive part
metric_field = MetricField(2)
rng = np.random.default_rng(20240101)
points = sample_points(2, 4, rng)


def test_calibration():
    '''
    The chart metric normalised to ν = 1 is 4 times the Fubini-Study expression, and is 4 Id
    at the origin
    '''
    assert metric_field.scale == pytest.approx(4.0, rel=1e-6)
    assert np.allclose(metric_field.metric_at(np.zeros(8)), metric_field.scale * np.eye(8))


def test_bad_metric_fields():
    with pytest.raises(InvalidStructureException):
        MetricField(1)
    with pytest.raises(ChartEvaluationException):
        MetricField(2, fd_step=0.5)
    with pytest.raises(InvalidStructureException):
        MetricField(2, metric_jacobian='symbolic')


def test_chart_validation():
    with pytest.raises(ChartEvaluationException):
        metric_field.metric_at(np.full(8, 1e3))
    with pytest.raises(ChartEvaluationException):
        metric_field.metric_at(np.array([np.nan] + [0.0] * 7))
    with pytest.raises(ChartEvaluationException):
        metric_field.metric_at(np.zeros(7))
    assert metric_field.validate_points(points).shape == (4, 8)


def test_metric_jacobian_modes():
    # the closed-form Jacobian agrees with differencing the metric
    differenced = MetricField(2, metric_jacobian='finite_difference')
    assert np.allclose(metric_field.metric_jacobian(points), differenced.metric_jacobian(points), atol=1e-8)


def test_sampling():
    assert np.all(np.linalg.norm(points, axis=-1) <= 1.0)
    vectors = sample_unit_vectors(metric_field, points, rng)
    lengths = np.einsum('pa,pab,pb->p', vectors, metric_field.metric(points), vectors)
    assert np.allclose(lengths, 1.0)


def test_curvature_matches_model():
    '''
    The finite-difference curvature in the admissible frame is the model curvature with ν = 1
    '''
    frames = metric_field.frames
    for point in points:
        model = model_curvature(frames.structure_at(point))
        assert metric_field.riemann_at(point).relative_deviation(model) <= 1e-5


def test_einstein_and_scalar():
    for point in points[:2]:
        ricci = metric_field.ricci_at(point)
        assert np.allclose(ricci, 4.0 * metric_field.metric(point), atol=1e-5)
        assert float(metric_field.scalar_curvature_at(point)) == pytest.approx(32.0, rel=1e-5)


def test_frames():
    frames = FrameField(metric_field)
    for point in points:
        frame = frames.frame_at(point)
        gram = frame.T @ metric_field.metric(point) @ frame
        assert np.allclose(gram, np.eye(8), atol=1e-12)
        assert np.allclose(frames.structure_at(point).structures, standard_structure(2).structures, atol=1e-10)
        form = np.triu(np.ones((8, 8)), 1)
        form = form - form.T
        assert np.allclose(frames.from_frame(frames.to_frame(form, point), point), form)
    with pytest.raises(InvalidStructureException):
        check_frame(2.0 * np.eye(8), np.eye(8))


def test_identities_of_the_connection():
    point = points[0]
    direction = sample_unit_vectors(metric_field, point, rng)
    x, v = sample_unit_vectors(metric_field, points[:2], rng)
    assert metric_compatibility_residual(metric_field, point) <= 1e-7
    assert q_parallelism_residual(metric_field, point, direction) <= 1e-5
    assert curvature_projection_residual(metric_field, point, x, v) <= 1e-5


def test_d_squared():
    field = random_one_form_field(2, rng)
    point = points[1]
    second = metric_field.exterior_derivative(lambda y: metric_field.exterior_derivative(field, y), point)
    assert three_form_norm(second, np.linalg.inv(metric_field.metric(point))) <= 1e-5


@pytest.mark.parametrize('n, count', [(2, 21), (3, 36)])
def test_killing_basis_size(n, count):
    assert len(killing_basis(n)) == count == (n + 1) * (2 * n + 3)


def test_killing_fields():
    basis = killing_basis(2)
    for field in basis[::4]:
        for point in points[:2]:
            assert killing_residual(metric_field, field, point) <= 1e-6
    assert basis[0].is_isotropy()
    assert not basis[-1].is_isotropy()
    with pytest.raises(InvalidStructureException):
        KillingField(np.ones((3, 3, 4)))
    with pytest.raises(InvalidStructureException):
        KillingField(np.zeros((2, 2, 4)))


def test_killing_flow():
    '''
    The Killing value is the derivative of the flow exp(tξ), and the flow of an isotropy field
    fixes the origin
    '''
    field = random_killing_field(2, rng)
    point = points[2]
    step = 1e-4
    derivative = (killing_flow(field, point, step) - killing_flow(field, point, -step)) / (2 * step)
    assert np.allclose(derivative, killing_value(field, point), atol=1e-6)
    assert np.allclose(killing_flow(killing_basis(2)[1], np.zeros(8), 0.8), 0.0, atol=1e-12)
    assert isotropy_pullback_residual(metric_field, killing_basis(2)[1], point, 0.8) <= 1e-8


def test_killing_linearity():
    first, second = random_killing_field(2, rng), random_killing_field(2, rng)
    point = points[3]
    combined = first + 2.0 * second
    assert np.allclose(combined(point), first(point) + 2.0 * second(point))
    assert np.allclose(metric_field.vector_jacobian(combined, point),
                       metric_field.vector_jacobian(first, point) + 2.0 * metric_field.vector_jacobian(second, point))


def test_covariant_derivative():
    '''
    ∇_Y X vanishes for X = 0, is skew for a Killing field and is linear in ξ
    '''
    point = points[1]
    direction = sample_unit_vectors(metric_field, point, rng)
    zero = KillingField(np.zeros((3, 3, 4)))
    assert np.allclose(metric_field.covariant_derivative(zero, point, direction, kind='vector'), 0.0)
    metric = metric_field.metric(point)
    for field in killing_basis(2)[::5]:
        moved = metric_field.covariant_derivative(field, point, direction, kind='vector')
        assert abs(direction @ metric @ moved) <= 1e-6
    first, second = random_killing_field(2, rng), random_killing_field(2, rng)
    combined = metric_field.covariant_derivative(first + 2.0 * second, point, direction, kind='vector')
    separate = (metric_field.covariant_derivative(first, point, direction, kind='vector')
                + 2.0 * metric_field.covariant_derivative(second, point, direction, kind='vector'))
    assert np.allclose(combined, separate, atol=1e-10)
    # for forms, ∇g = 0
    assert np.allclose(metric_field.covariant_derivative(metric_field.metric, point, direction), 0.0, atol=1e-7)
    with pytest.raises(InvalidStructureException):
        metric_field.covariant_derivative(zero, point, direction, kind='spinor')


def test_christoffel_symbols():
    assert np.allclose(metric_field.christoffel_at(np.zeros(8)), 0.0, atol=1e-12)
    gamma = metric_field.christoffel_at(points[0])
    assert gamma.shape == (8, 8, 8)
    assert np.allclose(gamma, np.swapaxes(gamma, -1, -2))


def test_kostant_formula():
    field = killing_basis(2)[10]
    for point in points[:2]:
        direction = sample_unit_vectors(metric_field, point, rng)
        assert kostant_residual(metric_field, field, point, direction) <= 1e-5


def test_kostant_negative_control():
    # a generic quadratic vector field is far from satisfying the Kostant formula
    field = random_vector_field(2, rng)
    worst = max(kostant_residual(metric_field, field, point, sample_unit_vectors(metric_field, point, rng))
                for point in points)
    assert worst >= 1e-2


def test_model_riemann_components():
    # the closed-form model curvature agrees with differencing the chart metric
    for point in points[:2]:
        model = model_riemann_components(metric_field, point)
        differenced = metric_field.riemann_components(point)
        assert np.max(np.abs(model - differenced)) <= 1e-5 * np.max(np.abs(model))


def test_kostant_formula_detects_miscalibration():
    '''
    Rescaling the metric leaves the connection alone but not the curvature of ν = 1, so the
    Kostant formula fails on a metric that is off by a constant factor
    '''
    miscalibrated = copy.copy(metric_field)
    miscalibrated.scale = 1.5 * metric_field.scale
    field = killing_basis(2)[-1]
    point = points[0]
    direction = sample_unit_vectors(metric_field, point, rng)
    assert kostant_residual(metric_field, field, point, direction) <= 1e-5
    assert kostant_residual(miscalibrated, field, point, direction) >= 1e-2


def test_killing_negative_control():
    field = random_vector_field(2, rng)
    assert max(killing_residual(metric_field, field, point) for point in points) >= 1e-2


def test_polynomial_field():
    constant = np.ones(8)
    linear = np.eye(8)
    field = PolynomialField(constant, linear, np.zeros((8, 8, 8)))
    assert np.allclose(field(points), constant + points)
    antisymmetric = PolynomialField(np.ones((8, 8)), np.zeros((8, 8, 8)), np.zeros((8, 8, 8, 8)), antisymmetric=True)
    assert np.allclose(antisymmetric(points[0]), 0.0)
