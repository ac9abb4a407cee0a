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
Tests for the conformal-Killing 2-forms built from Killing fields
'''
import numpy as np
import pytest

from qkgeometry.ck_forms import CKForm, ck_coefficients, construct_psi, killing_form_parts, model_q_action
from qkgeometry.ck_forms import ck_residual, nabla_psi_residual, dpsi_residual, ecd_consistency_residual
from qkgeometry.ck_forms import codiff_check, integrated_residual, alternative_ck_residual, integrated_s2h_residual
from qkgeometry.ck_forms import hamiltonian_form, s2h_derivative_residual, s2h_eigenform_residual
from qkgeometry.ck_forms import u_residual, rest_component_residual, non_killing_witness, independence_report
from qkgeometry.hpn_geometry import MetricField, KillingField, PolynomialField, killing_basis, sample_points
from qkgeometry.hpn_geometry import sample_unit_vectors, random_form_field
from qkgeometry.quat_algebra import TwoForm, form_norm
from qkgeometry.qk_utils import InvalidStructureException

metric_field = MetricField(2)
rng = np.random.default_rng(7)
points = sample_points(2, 3, rng)
basis = killing_basis(2)
forms = [CKForm(metric_field, field) for field in basis]


def _constant_form_field(scale=1.0):
    constant = scale * rng.normal(size=(8, 8))
    return PolynomialField(constant, np.zeros((8, 8, 8)), np.zeros((8, 8, 8, 8)), antisymmetric=True)


def test_coefficients():
    c_h, c_e = ck_coefficients(2)
    assert c_h == pytest.approx(-2.0 / 7.0)
    assert c_e == pytest.approx(4.0 / 7.0)
    assert ck_coefficients(3) == pytest.approx((-2.0 / 11.0, 4.0 / 11.0))


def test_construction():
    psi = construct_psi(basis[4], metric_field)
    assert isinstance(psi, CKForm)
    assert isinstance(psi(points[0]), TwoForm)
    with pytest.raises(InvalidStructureException):
        construct_psi(np.zeros((3, 3, 4)), metric_field)
    with pytest.raises(InvalidStructureException):
        CKForm(metric_field, killing_basis(3)[0])
    # ξ = 0 gives ψ = 0
    zero = CKForm(metric_field, KillingField(np.zeros((3, 3, 4))))
    assert zero(points[0]).norm() == 0.0


def test_form_lies_in_s2h_plus_s2e():
    for psi in forms[::5]:
        for point in points:
            assert rest_component_residual(psi, point) <= 1e-6


def test_conformal_killing_equation():
    '''
    ψ satisfies the conformal-Killing equation and δψ = X, with the closed forms of ∇ψ and dψ
    '''
    for psi in forms[::3]:
        point = points[0]
        direction = sample_unit_vectors(metric_field, point, rng)
        assert ck_residual(psi, point, direction) <= 1e-5
        assert codiff_check(psi, point) <= 1e-5
        assert nabla_psi_residual(psi, point, direction) <= 1e-5
        assert dpsi_residual(psi, point) <= 1e-5
        assert ecd_consistency_residual(psi, point, direction) <= 1e-10


def test_conformal_killing_negative_control():
    # a constant coordinate form isn't conformal-Killing away from the origin
    psi = CKForm(metric_field, basis[0], _constant_form_field(), scale=0.0)
    point = np.full(8, 0.25)
    direction = sample_unit_vectors(metric_field, point, rng)
    assert ck_residual(psi, point, direction) >= 1e-2


def test_second_order_negative_control():
    # a constant coordinate form satisfies neither the integrated equation nor δψ = X
    psi = CKForm(metric_field, basis[0], _constant_form_field(), scale=0.0)
    point = np.full(8, 0.25)
    assert integrated_residual(psi, point) >= 1e-2
    assert codiff_check(psi, point) >= 1e-2


def test_not_killing():
    # every basis form has a nonzero codifferential somewhere
    for psi in forms[::4]:
        assert non_killing_witness(psi, points) > 1e-3


def test_u_residual():
    psi = forms[2]
    point = points[1]
    inverse = np.linalg.inv(metric_field.metric(point))
    assert u_residual(psi, point) == pytest.approx(0.0, abs=1e-14)
    assert u_residual(psi.scaled(2.0), point) == pytest.approx(form_norm(psi.canonical(point), inverse))
    excess = _constant_form_field(1e-2)
    assert u_residual(psi.with_excess(excess), point) == pytest.approx(form_norm(excess(point), inverse))


def test_linearity():
    first, second = basis[3], basis[12]
    combined = CKForm(metric_field, first + second).field(points)
    separate = CKForm(metric_field, first).field(points) + CKForm(metric_field, second).field(points)
    assert np.allclose(combined, separate, atol=1e-10)


def test_killing_form_parts():
    nabla, coefficients, s2h, s2e = killing_form_parts(metric_field, basis[9], points)
    assert nabla.shape == (3, 8, 8)
    assert coefficients.shape == (3, 3)
    assert np.allclose(nabla, -np.swapaxes(nabla, -1, -2), atol=1e-6)
    assert np.allclose(s2h, np.einsum('pi,piuv->puv', coefficients, metric_field.coordinate_kaehler(points)))
    assert s2e.shape == nabla.shape


def test_s2h_derivative():
    point = points[2]
    direction = sample_unit_vectors(metric_field, point, rng)
    for field in basis[::6]:
        assert s2h_derivative_residual(field, point, direction, metric_field) <= 1e-5


def test_second_order_equations():
    '''
    The integrated equation, its S²H part and the second-order form of the equation
    '''
    psi = forms[11]
    point = points[0]
    assert integrated_residual(psi, point) <= 1e-3
    assert integrated_s2h_residual(psi, point) <= 1e-3
    assert alternative_ck_residual(psi, point) <= 1e-3


def test_hamiltonian_form_eigenvalue():
    field = basis[13]
    point = points[1]
    assert s2h_eigenform_residual(field, point, metric_field) <= 1e-3
    assert hamiltonian_form(field, metric_field)(points).shape == (3, 8, 8)


def test_weitzenboeck():
    # Δ = ∇*∇ + q(R) on a generic form field
    field = random_form_field(2, rng)
    point = points[2]
    hodge = metric_field.laplacian(field, point)
    rough = metric_field.rough_laplacian(field, point) + model_q_action(metric_field, field(point), point)
    assert form_norm(hodge - rough, np.linalg.inv(metric_field.metric(point))) <= 1e-3


def test_independence():
    '''
    The 21 forms of the Killing basis are linearly independent; a repeated field adds nothing
    '''
    report = independence_report(2, 21, np.random.default_rng(3), metric_field)
    assert report.rank == 21
    assert report.dimension == 21
    assert report.to_dict()['sample_count'] == 21
    repeated = independence_report(2, 21, np.random.default_rng(3), metric_field, fields=basis + [basis[0]])
    assert repeated.rank == 21
    assert repeated.dimension == 21
    for count in [0, 1, 20]:
        with pytest.raises(InvalidStructureException):
            independence_report(2, count, rng, metric_field)
    with pytest.raises(InvalidStructureException):
        independence_report(2, 21, rng, metric_field, fields=[])
