'''
Conformal-Killing 2-forms on ℍPⁿ built from Killing vector fields.

A Killing field X gives ψ = c_H (∇X)^{S²H} + c_E (∇X)^{S²E} with c_H = -2/(ν(4n-1)) and
c_E = 4/(ν(4n-1)), ∇X read as the 2-form (U, V) -> g(∇_U X, V).  The residual evaluators below
test ψ against the conformal-Killing equation and the identities it implies, pointwise in the
chart.  Every evaluator returns a nonnegative number (a norm in the metric at the point).
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

import numpy as np

from qkgeometry.hpn_geometry import KillingField, MetricField, killing_basis, sample_points
from qkgeometry.quat_algebra import TwoForm, form_norm, covector_norm, three_form_norm
from qkgeometry.quat_algebra import wedge_components, one_form_wedge_two_form
from qkgeometry.quat_algebra import s2h_components, s2e_components, q_curvature_components
from qkgeometry.quat_algebra import model_curvature
from qkgeometry.qk_utils import InvalidStructureException, check_vector, QK_REDUCED_SCALAR_CURVATURE

NU = QK_REDUCED_SCALAR_CURVATURE


def ck_coefficients(n):
    '''
    The pair (c_H, c_E) = (-2/(ν(4n-1)), 4/(ν(4n-1)))
    '''
    return -2.0 / (NU * (4 * n - 1)), 4.0 / (NU * (4 * n - 1))


def killing_form_parts(metric_field, killing, points):
    '''
    ∇X as a 2-form at points, with its S²H coefficients and its S²H and S²E parts.
    Returns:
        (nabla, coefficients, s2h, s2e); coefficients[..., i] is ⟨(∇X)^{S²H}, J_i⟩ in Q
    '''
    points = np.asarray(points, dtype=float)
    nabla = metric_field.nabla_form(killing, points)
    inverse = np.linalg.inv(metric_field.metric(points))
    coefficients, s2h = s2h_components(nabla, metric_field.coordinate_kaehler(points), inverse)
    return nabla, coefficients, s2h, s2e_components(nabla, metric_field.structures)


class CKForm:
    '''
    The conformal-Killing 2-form of a Killing field, as a coordinate form field.  Calling it on a
    chart point gives the TwoForm in the admissible frame there.  An optional excess field is
    added to the canonical form, so candidate forms that aren't conformal-Killing can be fed to
    the same evaluators.
    Arguments:
        metric_field: the MetricField of ℍPⁿ
        source: the KillingField X
        excess: optional callable giving coordinate components of an extra 2-form field
        scale: a constant multiplying the canonical form
    '''
    def __init__(self, metric_field, source, excess=None, scale=1.0):
        if not isinstance(source, KillingField):
            raise InvalidStructureException(f'The source of a CKForm must be a KillingField, not {type(source)}')
        if source.n != metric_field.n:
            raise InvalidStructureException(f'Killing field for n={source.n} on a metric for n={metric_field.n}')
        self.metric_field = metric_field
        self.source = source
        self.excess = excess
        self.scale = float(scale)
        self.n = metric_field.n
        self.coefficients = ck_coefficients(self.n)

    def canonical(self, points):
        _, _, s2h, s2e = killing_form_parts(self.metric_field, self.source, points)
        return self.coefficients[0] * s2h + self.coefficients[1] * s2e

    def field(self, points):
        values = self.scale * self.canonical(points)
        if self.excess is not None:
            values = values + self.excess(points)
        return values

    def __call__(self, p):
        point = check_vector(self.metric_field.validate_points(p), self.metric_field.dimension, 'chart point')
        return TwoForm(self.metric_field.frames.to_frame(self.field(point), point))

    def with_excess(self, excess):
        return CKForm(self.metric_field, self.source, excess, self.scale)

    def scaled(self, factor):
        return CKForm(self.metric_field, self.source, self.excess, self.scale * factor)

    def __repr__(self):
        return f'CKForm(n={self.n}, scale={self.scale}, excess={self.excess is not None})'


def construct_psi(killing, metric_field=None):
    '''
    The conformal-Killing 2-form ψ of a Killing field.
    Arguments:
        killing: a KillingField
        metric_field: the MetricField to use; one is built for killing.n if None
    Returns:
        a CKForm
    '''
    if not isinstance(killing, KillingField):
        raise InvalidStructureException(f'construct_psi needs a KillingField, not {type(killing)}')
    if metric_field is None:
        metric_field = MetricField(killing.n)
    return CKForm(metric_field, killing)


def _point_data(psi, p, direction=None):
    metric_field = psi.metric_field
    point = check_vector(metric_field.validate_points(p), metric_field.dimension, 'chart point')
    metric = metric_field.metric(point)
    data = {'point': point, 'metric': metric, 'inverse': np.linalg.inv(metric)}
    if direction is not None:
        direction = check_vector(direction, metric_field.dimension, 'direction')
        norm = np.sqrt(direction @ metric @ direction)
        if norm == 0.0:
            raise InvalidStructureException('The direction must be nonzero')
        data['direction'] = direction / norm
    return data


def _nabla_psi(psi, point):
    return psi.metric_field.tensor_derivative(psi.field, point)


def _d_from_nabla(nabla):
    return nabla - np.einsum('bac->abc', nabla) + np.einsum('cab->abc', nabla)


def _delta_from_nabla(nabla, inverse):
    return -np.einsum('ki,kij->j', inverse, nabla)


def ck_residual(psi, p, direction):
    '''
    |∇_Y ψ - (1/3) i_Y dψ + (1/(4n-1)) Y∧δψ| at p, for g-unit Y
    '''
    data = _point_data(psi, p, direction)
    y = data['direction']
    nabla = _nabla_psi(psi, data['point'])
    covariant = np.einsum('k,kij->ij', y, nabla)
    interior = np.einsum('a,abc->bc', y, _d_from_nabla(nabla))
    delta = _delta_from_nabla(nabla, data['inverse'])
    defect = covariant - interior / 3.0 + wedge_components(data['metric'] @ y, delta) / (4 * psi.n - 1)
    return float(form_norm(defect, data['inverse']))


def _nabla_formula(metric_field, x, y, metric):
    # (1/(4n-1)) (X∧Y + Σ J_k X ∧ J_k Y - Σ ω_k(X, Y) ω_k) in coordinates
    structures = metric_field.structures
    kaehler = np.einsum('iku,kv->iuv', structures, metric)
    total = wedge_components(metric @ x, metric @ y)
    for J in structures:
        total = total + wedge_components(metric @ (J @ x), metric @ (J @ y))
    total = total - np.einsum('u,iuv,v,iab->ab', x, kaehler, y, kaehler)
    return total / (4 * metric_field.n - 1)


def nabla_psi_residual(psi, p, direction):
    '''
    |∇_Y ψ - (1/(4n-1))(X∧Y + Σ J_k X∧J_k Y - Σ ω_k(X, Y) ω_k)| at p, X = δψ the source field
    '''
    data = _point_data(psi, p, direction)
    y = data['direction']
    covariant = np.einsum('k,kij->ij', y, _nabla_psi(psi, data['point']))
    expected = _nabla_formula(psi.metric_field, psi.source(data['point']), y, data['metric'])
    return float(form_norm(covariant - expected, data['inverse']))


def _dpsi_formula(metric_field, x, metric):
    # -(3/(4n-1)) Σ J_i X ∧ ω_i
    kaehler = np.einsum('iku,kv->iuv', metric_field.structures, metric)
    total = 0.0
    for J, omega in zip(metric_field.structures, kaehler):
        total = total + one_form_wedge_two_form(metric @ (J @ x), omega)
    return -3.0 * total / (4 * metric_field.n - 1)


def dpsi_residual(psi, p):
    '''
    |dψ + (3/(4n-1)) Σ J_i X∧ω_i| at p
    '''
    data = _point_data(psi, p)
    dpsi = _d_from_nabla(_nabla_psi(psi, data['point']))
    expected = _dpsi_formula(psi.metric_field, psi.source(data['point']), data['metric'])
    return float(three_form_norm(dpsi - expected, data['inverse']))


def ecd_consistency_residual(psi, p, direction):
    '''
    Algebraic cross-check: substituting the formula for dψ and δψ = X into the right-hand side
    of the conformal-Killing equation reproduces the formula for ∇_Y ψ
    '''
    data = _point_data(psi, p, direction)
    y = data['direction']
    x = psi.source(data['point'])
    metric = data['metric']
    dpsi = _dpsi_formula(psi.metric_field, x, metric)
    rhs = np.einsum('a,abc->bc', y, dpsi) / 3.0 - wedge_components(metric @ y, metric @ x) / (4 * psi.n - 1)
    return float(form_norm(rhs - _nabla_formula(psi.metric_field, x, y, metric), data['inverse']))


def codiff_check(psi, p):
    '''
    |δψ - X| at p, with δψ raised to a vector
    '''
    data = _point_data(psi, p)
    delta = _delta_from_nabla(_nabla_psi(psi, data['point']), data['inverse'])
    defect = delta - data['metric'] @ psi.source(data['point'])
    return float(covector_norm(defect, data['inverse']))


def model_q_action(metric_field, forms, point):
    '''
    q(R) of the model curvature applied to coordinate 2-form components at a point
    '''
    frames = metric_field.frames
    values = model_curvature(metric_field.structure, NU).values
    return frames.from_frame(q_curvature_components(values, frames.to_frame(forms, point)), point)


def integrated_residual(psi, p):
    '''
    |(2/3)Δψ - q(R)ψ + (4(n-1)/(3(4n-1))) dX| at p, with dX(U, V) = g(∇_U X, V) - g(∇_V X, U)
    and q(R) the model curvature endomorphism
    '''
    data = _point_data(psi, p)
    point = data['point']
    metric_field = psi.metric_field
    laplacian = metric_field.laplacian(psi.field, point)
    nabla = metric_field.nabla_form(psi.source, point)
    n = psi.n
    defect = (2.0 / 3.0) * laplacian - model_q_action(metric_field, psi.field(point), point) \
        + 4.0 * (n - 1) / (3.0 * (4 * n - 1)) * (nabla - nabla.T)
    return float(form_norm(defect, data['inverse']))


def alternative_ck_residual(psi, p):
    '''
    |q(R)ψ - (2/3)δdψ - ((4n-2)/(4n-1)) dδψ| at p, the second-order form of the
    conformal-Killing equation for 2-forms
    '''
    data = _point_data(psi, p)
    point = data['point']
    metric_field = psi.metric_field
    d_delta, delta_d = metric_field.laplacian_parts(psi.field, point)
    n = psi.n
    defect = model_q_action(metric_field, psi.field(point), point) - (2.0 / 3.0) * delta_d \
        - (4.0 * n - 2.0) / (4.0 * n - 1.0) * d_delta
    return float(form_norm(defect, data['inverse']))


def _s2h_field(metric_field, killing, factor=1.0):
    def field(points):
        return factor * killing_form_parts(metric_field, killing, points)[2]
    return field


def hamiltonian_form(killing, metric_field):
    '''
    The Hamiltonian 2-form (2/(3ν))(∇X)^{S²H} of a Killing field, as a coordinate form field
    '''
    return _s2h_field(metric_field, killing, 2.0 / (3.0 * NU))


def integrated_s2h_residual(psi, p):
    '''
    The S²H component of the integrated equation,
    |(2/3)Δψ^{S²H} - 4νψ^{S²H} + (8(n-1)/(3(4n-1)))(∇X)^{S²H}| at p
    '''
    data = _point_data(psi, p)
    point = data['point']
    metric_field = psi.metric_field

    def projected(points):
        return s2h_components(psi.field(points), metric_field.coordinate_kaehler(points),
                              np.linalg.inv(metric_field.metric(points)))[1]
    laplacian = metric_field.laplacian(projected, point)
    n = psi.n
    source_s2h = killing_form_parts(metric_field, psi.source, point)[2]
    defect = (2.0 / 3.0) * laplacian - 4.0 * NU * projected(point) \
        + 8.0 * (n - 1) / (3.0 * (4 * n - 1)) * source_s2h
    return float(form_norm(defect, data['inverse']))


def s2h_derivative_residual(killing, p, direction, metric_field):
    '''
    |∇_Y (∇X)^{S²H} + (ν/2) Σ ω_i(Y, X) ω_i| at p
    '''
    point = check_vector(metric_field.validate_points(p), metric_field.dimension, 'chart point')
    direction = check_vector(direction, metric_field.dimension, 'direction')
    metric = metric_field.metric(point)
    derivative = metric_field.tensor_derivative(_s2h_field(metric_field, killing), point)
    covariant = np.einsum('k,kij->ij', direction, derivative)
    kaehler = metric_field.coordinate_kaehler(point)
    expected = -0.5 * NU * np.einsum('u,iuv,v,iab->ab', direction, kaehler, killing(point), kaehler)
    return float(form_norm(covariant - expected, np.linalg.inv(metric)))


def s2h_eigenform_residual(killing, p, metric_field):
    '''
    |ΔA - 2ν(n+2)A| / |A| at p for the Hamiltonian form A, or the absolute defect where A vanishes
    '''
    point = check_vector(metric_field.validate_points(p), metric_field.dimension, 'chart point')
    inverse = np.linalg.inv(metric_field.metric(point))
    form = hamiltonian_form(killing, metric_field)
    value = form(point)
    defect = metric_field.laplacian(form, point) - 2.0 * NU * (metric_field.n + 2) * value
    size = float(form_norm(value, inverse))
    return float(form_norm(defect, inverse)) / (size if size > 1e-8 else 1.0)


def u_residual(psi, p):
    '''
    |u| at p with u = ψ - c_H (∇X)^{S²H} - c_E (∇X)^{S²E}
    '''
    data = _point_data(psi, p)
    point = data['point']
    return float(form_norm(psi.field(point) - psi.canonical(point), data['inverse']))


def rest_component_residual(psi, p):
    '''
    |ψ^{S²H ⊗ Λ²₀E}| at p
    '''
    data = _point_data(psi, p)
    point = data['point']
    metric_field = psi.metric_field
    form = psi.field(point)
    s2h = s2h_components(form, metric_field.coordinate_kaehler(point), data['inverse'])[1]
    s2e = s2e_components(form, metric_field.structures)
    return float(form_norm(form - s2h - s2e, data['inverse']))


def non_killing_witness(psi, points):
    '''
    max |δψ| over points; a conformal-Killing form of a nonzero Killing field isn't Killing,
    so this is bounded away from zero
    '''
    metric_field = psi.metric_field
    points = metric_field.validate_points(points)
    worst = 0.0
    for point in np.atleast_2d(points):
        inverse = np.linalg.inv(metric_field.metric(point))
        delta = _delta_from_nabla(_nabla_psi(psi, point), inverse)
        worst = max(worst, float(covector_norm(delta, inverse)))
    return worst


class IndependenceReport:
    '''
    The numerical rank of the conformal-Killing forms of the Killing basis, sampled at points
    '''
    def __init__(self, rank, dimension, singular_values, sample_count):
        self.rank = rank
        self.dimension = dimension
        self.singular_values = singular_values
        self.sample_count = sample_count

    def to_dict(self):
        return {
            'rank': self.rank,
            'dimension': self.dimension,
            'sample_count': self.sample_count,
            'smallest_singular_value': float(self.singular_values[-1]) if len(self.singular_values) else 0.0,
        }


def independence_report(n, sample_count, rng, metric_field=None, threshold=1e-8, fields=None):
    '''
    Sample the forms ψ of a family of Killing fields at sample_count points and compute the
    numerical rank of the resulting matrix.  The family defaults to the (n+1)(2n+3) basis fields.
    Arguments:
        n: quaternionic dimension
        sample_count: number of chart points, at least (n+1)(2n+3)
        rng: a numpy Generator
        metric_field: the MetricField, built if None
        threshold: singular values below threshold * largest don't count
        fields: the KillingFields to sample, killing_basis(n) if None
    Returns:
        an IndependenceReport whose dimension is (n+1)(2n+3)
    Raises:
        InvalidStructureException if sample_count is below the dimension or the family is empty
    '''
    if metric_field is None:
        metric_field = MetricField(n)
    dimension = len(killing_basis(n))
    fields = killing_basis(n) if fields is None else list(fields)
    if len(fields) == 0:
        raise InvalidStructureException('An independence report needs at least one Killing field')
    if sample_count < dimension:
        raise InvalidStructureException(f'{sample_count} samples are fewer than the dimension {dimension}')
    points = sample_points(n, sample_count, rng)
    upper = np.triu_indices(metric_field.dimension, 1)
    rows = []
    for killing in fields:
        values = CKForm(metric_field, killing).field(points)
        rows.append(values[:, upper[0], upper[1]].ravel())
    singular_values = np.linalg.svd(np.array(rows), compute_uv=False)
    rank = int(np.sum(singular_values > threshold * singular_values[0]))
    logging.info(f'Conformal-Killing forms of HP^{n}: rank {rank} of {dimension} from {len(fields)} fields')
    return IndependenceReport(rank, dimension, singular_values, sample_count)
