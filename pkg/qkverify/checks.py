'''
The registered verification checks, grouped by suite.  Every check takes a CheckContext and returns
a CheckOutcome; the tolerance given at registration is its default.
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
from itertools import product

import numpy as np

from qkgeometry.ck_forms import CKForm, NU, ck_coefficients, model_q_action
from qkgeometry.ck_forms import ck_residual, nabla_psi_residual, dpsi_residual, ecd_consistency_residual
from qkgeometry.ck_forms import codiff_check, integrated_residual, integrated_s2h_residual, alternative_ck_residual
from qkgeometry.ck_forms import s2h_derivative_residual, s2h_eigenform_residual, u_residual
from qkgeometry.ck_forms import rest_component_residual, non_killing_witness, independence_report
from qkgeometry.hpn_geometry import KillingField, PolynomialField, killing_basis, random_killing_field
from qkgeometry.hpn_geometry import killing_value, killing_flow, killing_residual, kostant_residual
from qkgeometry.hpn_geometry import curvature_projection_residual, metric_compatibility_residual
from qkgeometry.hpn_geometry import q_parallelism_residual, isotropy_pullback_residual
from qkgeometry.hpn_geometry import random_vector_field, random_one_form_field, random_form_field
from qkgeometry.quat_algebra import CurvatureTensor, standard_structure, kaehler_form, wedge, decompose
from qkgeometry.quat_algebra import decomposable_projections, model_curvature, q_of_R, random_two_form
from qkgeometry.quat_algebra import project_S2E, form_norm, three_form_norm
from qkgeometry.twistor import LC_PATTERNS, SECOND_DERIVATIVE_PATTERNS, expected_scalar_curvature
from qkgeometry.twistor import complex_structure_residual, submersion_residual, random_lc_arguments, lc_residual
from qkgeometry.twistor import lift_commutator_residual, lift_killing_residual, lift_holomorphy_residual
from qkgeometry.twistor import hamiltonian_field, gradient_check, fiber_linear_fit
from qkgeometry.twistor import random_second_derivative_arguments, second_deriv_residual
from qkgeometry.twistor import random_sine_field, obata_residual, einstein_check, ricci_residual, fiber_curvature
from qkgeometry.qk_utils import QK_TOLERANCE_ALGEBRAIC, QK_TOLERANCE_FIRST_ORDER, QK_TOLERANCE_SECOND_ORDER
from qkverify.check_registry import CheckOutcome, CheckRegistry

check_registry = CheckRegistry()

""" Specific default tolerances """

KILLING_TOLERANCE = 1e-6
CURVATURE_TOLERANCE = 1e-6
METRIC_COMPATIBILITY_TOLERANCE = 1e-7
TWISTOR_FIRST_ORDER_TOLERANCE = 1e-4
SCALAR_CURVATURE_TOLERANCE = 1e-2
RANK_TOLERANCE = 0.5
LOWER_BOUND_TOLERANCE = 1.0

""" Sample floors and caps """

ALGEBRA_FORM_COUNT = 100
RIEMANN_POINT_COUNT = 20
KILLING_RANK_POINT_COUNT = 50
KOSTANT_DIRECTIONS = 3
CK_DIRECTIONS = 5
TWISTOR_SECOND_ORDER_POINTS = 3
OBATA_POINTS = 2
NEGATIVE_CONTROL_POINTS = 3
TWISTOR_CROSSED_POINTS = 2

""" Negative-control thresholds """

NON_KILLING_THRESHOLD = 1e-2
NON_CK_THRESHOLD = 1e-2
CK_NON_KILLING_THRESHOLD = 1e-3
OBATA_NEGATIVE_THRESHOLD = 1e-1

FLOW_STEP = 1e-4
ISOTROPY_TIME = 0.7


def _algebra_count(context):
    return max(context.samples, ALGEBRA_FORM_COUNT)


def _random_vector(context):
    return context.rng.normal(size=4 * context.n)


def _isotropy_field(context):
    # zero the blocks that move the origin, leaving sp(n) + sp(1)
    xi = random_killing_field(context.n, context.rng).xi.copy()
    xi[:context.n, context.n] = 0.0
    xi[context.n, :context.n] = 0.0
    return KillingField(xi)


def _cycled(items, points):
    # item k at point k mod len(points)
    return [(item, points[index % len(points)]) for index, item in enumerate(items)]


'''
algebra: exact identities of the pointwise model
'''


@check_registry.register('structure_relations', 'algebra', 'quaternion relations of an admissible basis',
                         QK_TOLERANCE_ALGEBRAIC)
def structure_relations(context):
    structure = standard_structure(context.n)
    J = structure.structures
    identity = np.eye(structure.dimension)
    inner = np.einsum('iab,jab->ij', J, J) / structure.dimension
    deviations = [
        structure.relation_residual(),
        float(np.max(np.abs(inner - np.eye(3)))),
        float(np.max(np.abs(J[0] @ J[1] @ J[2] + identity))),
        float(np.max(np.abs(np.einsum('iba,ibc->iac', J, J) - identity))),
    ]
    return CheckOutcome.from_residuals(deviations)


@check_registry.register('kaehler_form_norms', 'algebra', 'Kähler forms ω_i = g(J_i·,·)', QK_TOLERANCE_ALGEBRAIC)
def kaehler_form_norms(context):
    structure = standard_structure(context.n)
    omegas = [kaehler_form(structure, i) for i in (1, 2, 3)]
    residuals = [abs(omega.norm() ** 2 - 2 * context.n) for omega in omegas]
    J1 = structure.structures[0]
    for _ in range(_algebra_count(context)):
        x = _random_vector(context)
        residuals.append(abs(x @ omegas[0].components @ (J1 @ x) - x @ x) / (x @ x))
        residuals.append(abs(x @ omegas[1].components @ (J1 @ x)) / (x @ x))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('decomposition_projections', 'algebra', 'decomposition of 2-forms into S²H, S²E and the rest',
                         QK_TOLERANCE_ALGEBRAIC)
def decomposition_projections(context):
    structure = standard_structure(context.n)
    residuals = []
    for _ in range(_algebra_count(context)):
        form = random_two_form(context.n, context.rng)
        parts = decompose(form, structure)
        scale = max(1.0, form.norm())
        residuals.append(np.max(np.abs((parts[0] + parts[1] + parts[2] - form).components)) / scale)
        for index, part in enumerate(parts):
            again = decompose(part, structure)
            for other, piece in enumerate(again):
                expected = part if other == index else part * 0.0
                residuals.append(np.max(np.abs((piece - expected).components)) / scale)
            for other in range(index + 1, 3):
                residuals.append(abs(part.inner(parts[other])) / scale ** 2)
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('decomposable_projections', 'algebra', 'projections of a decomposable X∧Y',
                         QK_TOLERANCE_ALGEBRAIC)
def decomposable_projections_check(context):
    structure = standard_structure(context.n)
    residuals = []
    for _ in range(_algebra_count(context)):
        x, y = _random_vector(context), _random_vector(context)
        s2h, s2e, _ = decompose(wedge(x, y, structure), structure)
        closed_s2h, closed_s2e = decomposable_projections(x, y, structure)
        residuals.append(np.max(np.abs((s2h - closed_s2h).components)))
        residuals.append(np.max(np.abs((s2e - closed_s2e).components)))
    x = np.eye(structure.dimension)[0]
    closed_s2h, _ = decomposable_projections(x, structure.structures[0] @ x, structure)
    expected = kaehler_form(structure, 1) * (1.0 / (2 * context.n))
    residuals.append(np.max(np.abs((closed_s2h - expected).components)))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('curvature_symmetries', 'algebra', 'algebraic symmetries of the model curvature',
                         QK_TOLERANCE_ALGEBRAIC)
def curvature_symmetries(context):
    return CheckOutcome.from_residuals([model_curvature(standard_structure(context.n), NU).symmetry_residual()])


@check_registry.register('model_einstein', 'algebra', 'Einstein property Ric = ν(n+2)g of the model curvature',
                         QK_TOLERANCE_ALGEBRAIC)
def model_einstein(context):
    curvature = model_curvature(standard_structure(context.n), NU)
    n = context.n
    expected = 4.0 * n * (n + 2) * NU
    residuals = [np.max(np.abs(curvature.ricci() - NU * (n + 2) * np.eye(4 * n))),
                 abs(curvature.scalar() - expected) / expected]
    return CheckOutcome.from_residuals(residuals, value=curvature.scalar())


def _q_eigen_residuals(context, forms, eigenvalue):
    structure = standard_structure(context.n)
    curvature = model_curvature(structure, NU)
    residuals = []
    for form in forms:
        size = form.norm()
        if size > 0.0:
            residuals.append((q_of_R(curvature, form, structure) - form * eigenvalue).norm() / size)
    return residuals


@check_registry.register('q_curvature_s2h', 'algebra', 'q(R) = 4ν on S²H', QK_TOLERANCE_ALGEBRAIC)
def q_curvature_s2h(context):
    structure = standard_structure(context.n)
    forms = [kaehler_form(structure, i) for i in (1, 2, 3)]
    forms += [decompose(random_two_form(context.n, context.rng), structure)[0] for _ in range(context.samples)]
    return CheckOutcome.from_residuals(_q_eigen_residuals(context, forms, 4.0 * NU), value=4.0 * NU)


@check_registry.register('q_curvature_rest', 'algebra', 'q(R) = 2ν(n+2) on S²H⊗Λ²₀E', QK_TOLERANCE_ALGEBRAIC)
def q_curvature_rest(context):
    structure = standard_structure(context.n)
    forms = [decompose(random_two_form(context.n, context.rng), structure)[2] for _ in range(_algebra_count(context))]
    eigenvalue = 2.0 * NU * (context.n + 2)
    return CheckOutcome.from_residuals(_q_eigen_residuals(context, forms, eigenvalue), value=eigenvalue)


@check_registry.register('q_curvature_s2e', 'algebra', 'q(R) preserves S²E (measured scalar)', QK_TOLERANCE_ALGEBRAIC)
def q_curvature_s2e(context):
    structure = standard_structure(context.n)
    curvature = model_curvature(structure, NU)
    forms = [project_S2E(random_two_form(context.n, context.rng), structure) for _ in range(_algebra_count(context))]
    images = [q_of_R(curvature, form, structure) for form in forms]
    eigenvalue = float(np.mean([image.inner(form) / form.inner(form) for image, form in zip(images, forms)]))
    residuals = [(image - form * eigenvalue).norm() / form.norm() for image, form in zip(images, forms)]
    logging.info(f'q(R) acts on S²E by {eigenvalue:.12f}')
    return CheckOutcome.from_residuals(residuals, value=eigenvalue)


'''
geometry: the chart metric, its curvature and the Killing fields
'''


@check_registry.register('metric_isotropy', 'geometry', 'invariance of the metric under the isotropy group',
                         QK_TOLERANCE_ALGEBRAIC)
def metric_isotropy(context):
    metric_field = context.metric_field
    origin = metric_field.metric_at(np.zeros(metric_field.dimension))
    residuals = [np.max(np.abs(origin - origin[0, 0] * np.eye(metric_field.dimension))) / origin[0, 0]]
    for point in context.points():
        field = _isotropy_field(context)
        moved = field.flow(point, ISOTROPY_TIME)
        metric = metric_field.metric_at(point)
        before = np.linalg.eigvalsh(metric)
        after = np.linalg.eigvalsh(metric_field.metric_at(moved))
        residuals.append(np.max(np.abs(before - after)) / np.max(before))
        residuals.append(np.max(np.abs(metric - metric.T)))
        residuals.append(isotropy_pullback_residual(metric_field, field, point, ISOTROPY_TIME))
    return CheckOutcome.from_residuals(residuals, value=origin[0, 0])


@check_registry.register('calibration_constant', 'geometry', 'normalisation ν = 1 of the chart metric',
                         CURVATURE_TOLERANCE)
def calibration_constant(context):
    # the chart metric with ν = 1 is 4 times the quaternionic Fubini-Study expression
    scale = context.metric_field.scale
    return CheckOutcome(abs(scale - 4.0) / 4.0, 1, value=scale)


@check_registry.register('riemann_model', 'geometry', 'curvature of ℍPⁿ with vanishing quaternionic Weyl part',
                         CURVATURE_TOLERANCE)
def riemann_model(context):
    metric_field = context.metric_field
    frames = metric_field.frames
    residuals = []
    for point in context.points(max(context.samples, RIEMANN_POINT_COUNT)):
        model = model_curvature(frames.structure_at(point), NU)
        residuals.append(metric_field.riemann_at(point).relative_deviation(model))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('ricci_einstein', 'geometry', 'Einstein property Ric = (n+2)g', CURVATURE_TOLERANCE)
def ricci_einstein(context):
    metric_field = context.metric_field
    points = np.concatenate([np.zeros((1, metric_field.dimension)), context.points()])
    residuals = []
    for point in points:
        metric = metric_field.metric_at(point)
        ricci = metric_field.ricci_at(point)
        residuals.append(np.max(np.abs(ricci - (metric_field.n + 2) * NU * metric)) / np.max(np.abs(metric)))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('scalar_curvature', 'geometry', 'scalar curvature 4n(n+2)ν', CURVATURE_TOLERANCE)
def scalar_curvature(context):
    metric_field = context.metric_field
    expected = 4.0 * metric_field.n * (metric_field.n + 2) * NU
    values = [float(metric_field.scalar_curvature_at(point)) for point in context.points()]
    origin = float(metric_field.scalar_curvature_at(np.zeros(metric_field.dimension)))
    residuals = [abs(value - expected) / expected for value in values + [origin]]
    return CheckOutcome.from_residuals(residuals, value=origin)


@check_registry.register('fd_bianchi', 'geometry', 'first Bianchi identity of the computed curvature',
                         CURVATURE_TOLERANCE)
def fd_bianchi(context):
    metric_field = context.metric_field
    residuals = [CurvatureTensor(metric_field.riemann_components(point)).symmetry_residual()
                 for point in context.points()]
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('metric_compatibility', 'geometry', 'metric compatibility ∇g = 0',
                         METRIC_COMPATIBILITY_TOLERANCE)
def metric_compatibility(context):
    metric_field = context.metric_field
    return CheckOutcome.from_residuals([metric_compatibility_residual(metric_field, p) for p in context.points()])


@check_registry.register('curvature_projections', 'geometry', 'S²H and S²E parts of R(X, V)', CURVATURE_TOLERANCE)
def curvature_projections(context):
    metric_field = context.metric_field
    points = context.points()
    first, second = context.unit_vectors(points), context.unit_vectors(points)
    residuals = [curvature_projection_residual(metric_field, p, x, v) for p, x, v in zip(points, first, second)]
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('frame_orthonormality', 'geometry', 'admissible orthonormal frame', QK_TOLERANCE_ALGEBRAIC)
def frame_orthonormality(context):
    metric_field = context.metric_field
    frames = metric_field.frames
    standard = standard_structure(metric_field.n).structures
    residuals = []
    for point in context.points():
        frame = frames.frame_at(point)
        gram = frame.T @ metric_field.metric(point) @ frame
        residuals.append(np.max(np.abs(gram - np.eye(metric_field.dimension))))
        residuals.append(np.max(np.abs(frames.structure_at(point).structures - standard)))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('q_parallelism', 'geometry', 'parallelism of the quaternionic bundle Q',
                         QK_TOLERANCE_FIRST_ORDER)
def q_parallelism(context):
    metric_field = context.metric_field
    points = context.points()
    residuals = [q_parallelism_residual(metric_field, p, y) for p, y in zip(points, context.unit_vectors(points))]
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('killing_count', 'geometry', 'dim sp(n+1) = (n+1)(2n+3)', RANK_TOLERANCE)
def killing_count(context):
    count = len(killing_basis(context.n))
    return CheckOutcome(abs(count - (context.n + 1) * (2 * context.n + 3)), 1, value=count)


@check_registry.register('killing_equation', 'geometry', 'Killing equation L_X g = 0', KILLING_TOLERANCE)
def killing_equation(context):
    metric_field = context.metric_field
    points = context.points()
    residuals = [killing_residual(metric_field, field, p) for field in killing_basis(context.n) for p in points]
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('killing_negative_control', 'geometry', 'Killing equation fails for a generic vector field',
                         LOWER_BOUND_TOLERANCE)
def killing_negative_control(context):
    metric_field = context.metric_field
    field = random_vector_field(context.n, context.rng)
    points = context.points()
    worst = max(killing_residual(metric_field, field, p) for p in points)
    return CheckOutcome.lower_bound(NON_KILLING_THRESHOLD, worst, len(points))


@check_registry.register('killing_rank', 'geometry', 'independence of the Killing basis', RANK_TOLERANCE)
def killing_rank(context):
    points = context.points(max(context.samples, KILLING_RANK_POINT_COUNT))
    basis = killing_basis(context.n)
    values = np.array([field(points).ravel() for field in basis])
    singular_values = np.linalg.svd(values, compute_uv=False)
    rank = int(np.sum(singular_values > 1e-8 * singular_values[0]))
    return CheckOutcome(abs(rank - len(basis)), points.shape[0], value=rank)


@check_registry.register('killing_flow', 'geometry', 'Killing value as the derivative of the flow exp(tξ)',
                         QK_TOLERANCE_FIRST_ORDER)
def killing_flow_check(context):
    residuals = []
    origin = np.zeros(4 * context.n)
    residuals.append(np.max(np.abs(killing_value(_isotropy_field(context), origin))))
    for point in context.points():
        field = random_killing_field(context.n, context.rng)
        difference = (killing_flow(field, point, FLOW_STEP) - killing_flow(field, point, -FLOW_STEP)) / (2 * FLOW_STEP)
        value = killing_value(field, point)
        residuals.append(np.max(np.abs(difference - value)) / max(1.0, np.max(np.abs(value))))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('killing_linearity', 'geometry', 'linearity of ξ -> X and ξ -> ∇X', QK_TOLERANCE_ALGEBRAIC)
def killing_linearity(context):
    metric_field = context.metric_field
    residuals = []
    for point in context.points():
        first = random_killing_field(context.n, context.rng)
        second = random_killing_field(context.n, context.rng)
        combined = first + 2.0 * second
        values = killing_value(combined, point) - killing_value(first, point) - 2.0 * killing_value(second, point)
        residuals.append(np.max(np.abs(values)))
        direction = context.unit_vectors(point[None, :])[0]
        nabla = [metric_field.covariant_derivative(field, point, direction, kind='vector')
                 for field in (combined, first, second)]
        residuals.append(np.max(np.abs(nabla[0] - nabla[1] - 2.0 * nabla[2])))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('kostant_formula', 'geometry', 'Kostant formula ∇_Y(∇X) = R(Y, X)', QK_TOLERANCE_FIRST_ORDER)
def kostant_formula(context):
    metric_field = context.metric_field
    points = context.points()
    residuals = []
    for field in killing_basis(context.n):
        for point in points:
            for _ in range(KOSTANT_DIRECTIONS):
                direction = context.unit_vectors(point[None, :])[0]
                residuals.append(kostant_residual(metric_field, field, point, direction))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('kostant_negative_control', 'geometry', 'Kostant formula fails for a non-Killing field',
                         LOWER_BOUND_TOLERANCE)
def kostant_negative_control(context):
    metric_field = context.metric_field
    field = random_vector_field(context.n, context.rng)
    points = context.points()
    directions = context.unit_vectors(points)
    worst = max(kostant_residual(metric_field, field, p, y) for p, y in zip(points, directions))
    return CheckOutcome.lower_bound(NON_KILLING_THRESHOLD, worst, len(points))


@check_registry.register('d_squared', 'geometry', 'd∘d = 0', QK_TOLERANCE_FIRST_ORDER)
def d_squared(context):
    metric_field = context.metric_field
    field = random_one_form_field(context.n, context.rng)
    residuals = []
    for point in context.points():
        second = metric_field.exterior_derivative(lambda y: metric_field.exterior_derivative(field, y), point)
        residuals.append(three_form_norm(second, np.linalg.inv(metric_field.metric(point))))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('weitzenboeck', 'geometry', 'Weitzenböck formula Δ = ∇*∇ + q(R)', QK_TOLERANCE_SECOND_ORDER)
def weitzenboeck(context):
    metric_field = context.metric_field
    field = random_form_field(context.n, context.rng)
    residuals = []
    for point in context.points():
        hodge = metric_field.laplacian(field, point)
        rough = metric_field.rough_laplacian(field, point) + model_q_action(metric_field, field(point), point)
        residuals.append(form_norm(hodge - rough, np.linalg.inv(metric_field.metric(point))))
    return CheckOutcome.from_residuals(residuals)


'''
ckforms: the conformal-Killing 2-forms of the Killing fields
'''


def _forms(context):
    metric_field = context.metric_field
    return [CKForm(metric_field, field) for field in killing_basis(context.n)]


def _over_forms(context, evaluator, directions=0):
    # evaluator(psi, point) or evaluator(psi, point, direction), every basis form at every sample point
    points = context.points()
    residuals = []
    for psi in _forms(context):
        for point in points:
            if directions == 0:
                residuals.append(evaluator(psi, point))
                continue
            for direction in context.unit_vectors(np.repeat(point[None, :], directions, axis=0)):
                residuals.append(evaluator(psi, point, direction))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('ck_coefficients', 'ckforms', 'coefficients -2/(ν(4n-1)), 4/(ν(4n-1)) of ψ',
                         QK_TOLERANCE_ALGEBRAIC)
def ck_coefficients_check(context):
    c_h, c_e = ck_coefficients(2)
    residuals = [abs(c_h + 2.0 / 7.0), abs(c_e - 4.0 / 7.0),
                 abs(4.0 * (2 - 1) / (3.0 * (4 * 2 - 1)) - 4.0 / 21.0)]
    c_h, c_e = ck_coefficients(context.n)
    residuals.append(abs(c_e + 2.0 * c_h))
    return CheckOutcome.from_residuals(residuals, value=c_h)


@check_registry.register('ck_rest_component', 'ckforms', 'ψ is a section of S²H ⊕ S²E', KILLING_TOLERANCE)
def ck_rest_component(context):
    return _over_forms(context, rest_component_residual)


@check_registry.register('ck_equation', 'ckforms', 'conformal-Killing equation', QK_TOLERANCE_FIRST_ORDER)
def ck_equation(context):
    return _over_forms(context, ck_residual, CK_DIRECTIONS)


def _constant_form(context):
    # a constant coordinate 2-form, not conformal-Killing away from the origin
    dimension = context.metric_field.dimension
    constant = context.rng.normal(size=(dimension, dimension))
    return PolynomialField(constant, np.zeros((dimension,) * 3), np.zeros((dimension,) * 4), antisymmetric=True)


@check_registry.register('ck_negative_control', 'ckforms', 'conformal-Killing equation fails for a constant form',
                         LOWER_BOUND_TOLERANCE)
def ck_negative_control(context):
    psi = CKForm(context.metric_field, killing_basis(context.n)[0], _constant_form(context), scale=0.0)
    points = context.points()
    worst = max(ck_residual(psi, p, y) for p, y in zip(points, context.unit_vectors(points)))
    return CheckOutcome.lower_bound(NON_CK_THRESHOLD, worst, len(points))


@check_registry.register('integrated_negative_control', 'ckforms',
                         'integrated equation and δψ = X fail for a constant form', LOWER_BOUND_TOLERANCE)
def integrated_negative_control(context):
    psi = CKForm(context.metric_field, killing_basis(context.n)[0], _constant_form(context), scale=0.0)
    points = context.points(min(context.samples, NEGATIVE_CONTROL_POINTS))
    integrated = max(integrated_residual(psi, p) for p in points)
    codifferential = max(codiff_check(psi, p) for p in points)
    # both identities have to fail
    return CheckOutcome.lower_bound(NON_CK_THRESHOLD, min(integrated, codifferential), len(points))


@check_registry.register('nabla_psi_formula', 'ckforms', 'closed form of ∇_Y ψ', QK_TOLERANCE_FIRST_ORDER)
def nabla_psi_formula(context):
    return _over_forms(context, nabla_psi_residual, 1)


@check_registry.register('dpsi_formula', 'ckforms', 'closed form of dψ', QK_TOLERANCE_FIRST_ORDER)
def dpsi_formula(context):
    return _over_forms(context, dpsi_residual)


@check_registry.register('ecd_consistency', 'ckforms', 'dψ and δψ = X substituted into the conformal-Killing equation',
                         QK_TOLERANCE_ALGEBRAIC)
def ecd_consistency(context):
    return _over_forms(context, ecd_consistency_residual, 1)


@check_registry.register('codifferential_inverse', 'ckforms', 'δψ = X', QK_TOLERANCE_FIRST_ORDER)
def codifferential_inverse(context):
    return _over_forms(context, codiff_check)


@check_registry.register('non_killing_witness', 'ckforms', 'ψ is conformal-Killing but not Killing',
                         LOWER_BOUND_TOLERANCE)
def non_killing_witness_check(context):
    points = context.points()
    weakest = min(non_killing_witness(psi, points) for psi in _forms(context))
    return CheckOutcome.lower_bound(CK_NON_KILLING_THRESHOLD, weakest, len(points))


@check_registry.register('ck_linearity', 'ckforms', 'linearity of ξ -> ψ', QK_TOLERANCE_ALGEBRAIC)
def ck_linearity(context):
    metric_field = context.metric_field
    first = random_killing_field(context.n, context.rng)
    second = random_killing_field(context.n, context.rng)
    points = context.points()
    combined = CKForm(metric_field, first + second).field(points)
    separate = CKForm(metric_field, first).field(points) + CKForm(metric_field, second).field(points)
    residuals = np.max(np.abs(combined - separate), axis=(-1, -2))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('integrated_equation', 'ckforms', 'integrated equation (2/3)Δψ - q(R)ψ + c dX = 0',
                         QK_TOLERANCE_SECOND_ORDER)
def integrated_equation(context):
    return _over_forms(context, integrated_residual)


@check_registry.register('integrated_s2h', 'ckforms', 'S²H part of the integrated equation',
                         QK_TOLERANCE_SECOND_ORDER)
def integrated_s2h(context):
    residuals = [integrated_s2h_residual(psi, point) for psi, point in _cycled(_forms(context), context.points())]
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('alternative_ck_equation', 'ckforms', 'q(R)ψ = (2/3)δdψ + ((4n-2)/(4n-1))dδψ',
                         QK_TOLERANCE_SECOND_ORDER)
def alternative_ck_equation(context):
    residuals = [alternative_ck_residual(psi, point) for psi, point in _cycled(_forms(context), context.points())]
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('s2h_derivative', 'ckforms', '∇_Y (∇X)^{S²H} = -(ν/2) Σ ω_i(Y, X) ω_i',
                         QK_TOLERANCE_FIRST_ORDER)
def s2h_derivative(context):
    metric_field = context.metric_field
    points = context.points()
    directions = context.unit_vectors(points)
    residuals = [s2h_derivative_residual(field, p, y, metric_field)
                 for field in killing_basis(context.n) for p, y in zip(points, directions)]
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('s2h_eigenform', 'ckforms', 'Hamiltonian form is a Laplace eigenform, eigenvalue 2ν(n+2)',
                         QK_TOLERANCE_SECOND_ORDER)
def s2h_eigenform(context):
    metric_field = context.metric_field
    points = context.points()
    residuals = [s2h_eigenform_residual(field, p, metric_field) for field in killing_basis(context.n) for p in points]
    return CheckOutcome.from_residuals(residuals, value=2.0 * NU * (context.n + 2))


@check_registry.register('u_residual', 'ckforms', 'u = ψ - c_H(∇X)^{S²H} - c_E(∇X)^{S²E}', QK_TOLERANCE_ALGEBRAIC)
def u_residual_check(context):
    metric_field = context.metric_field
    dimension = metric_field.dimension
    residuals = []
    points = context.points()
    for psi, point in _cycled(_forms(context), points):
        residuals.append(u_residual(psi, point))
        inverse = np.linalg.inv(metric_field.metric(point))
        doubled = u_residual(psi.scaled(2.0), point)
        residuals.append(abs(doubled - form_norm(psi.canonical(point), inverse)))
        constant = 1e-2 * context.rng.normal(size=(dimension, dimension))
        excess = PolynomialField(constant, np.zeros((dimension,) * 3), np.zeros((dimension,) * 4), antisymmetric=True)
        residuals.append(abs(u_residual(psi.with_excess(excess), point) - form_norm(excess(point), inverse)))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('ck_dimension', 'ckforms', 'ck₂(ℍPⁿ) = (n+1)(2n+3)', RANK_TOLERANCE)
def ck_dimension(context):
    count = max(context.samples, (context.n + 1) * (2 * context.n + 3))
    report = independence_report(context.n, count, context.rng, context.metric_field)
    return CheckOutcome(abs(report.rank - report.dimension), count, value=report.rank)


'''
twistor: the twistor space, the lifts of Killing fields and the Obata equation
'''


def _twistor_points(context, cap=None):
    count = context.samples if cap is None else min(context.samples, cap)
    return context.twistor_points(count)


def _random_vertical(context, z):
    a = context.twistor.fiber(z)
    triple = context.rng.normal(size=3)
    return triple - (triple @ a) * a


def _random_tangent(context, z, letter):
    # a ḡ-unit horizontal (H) or vertical (V) tangent at z
    twistor = context.twistor
    if letter == 'H':
        vector = twistor.horizontal_lift(z, context.rng.normal(size=twistor.base_dimension))
    else:
        vector = twistor.vertical_vector(z, _random_vertical(context, z))
    return vector / np.sqrt(twistor.inner(z, vector, vector))


@check_registry.register('twistor_complex_structure', 'twistor', '𝒥² = -Id and ḡ-Hermitian', QK_TOLERANCE_ALGEBRAIC)
def twistor_complex_structure(context):
    twistor = context.twistor
    return CheckOutcome.from_residuals([complex_structure_residual(twistor, z) for z in _twistor_points(context)])


@check_registry.register('twistor_submersion', 'twistor', 'Riemannian submersion Z -> ℍPⁿ', QK_TOLERANCE_ALGEBRAIC)
def twistor_submersion(context):
    twistor = context.twistor
    residuals = []
    for z in _twistor_points(context):
        horizontal = context.rng.normal(size=twistor.base_dimension)
        residuals.append(submersion_residual(twistor, z, horizontal, _random_vertical(context, z)))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('lc_connection', 'twistor', 'Levi-Civita connection of ḡ on lifted fields',
                         QK_TOLERANCE_FIRST_ORDER)
def lc_connection_check(context):
    twistor = context.twistor
    residuals = []
    for z in _twistor_points(context):
        for pattern in LC_PATTERNS:
            residuals.append(lc_residual(twistor, z, pattern, random_lc_arguments(twistor, pattern, context.rng)))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('lift_commutator', 'twistor', '[∇X, J] = -2𝒥(Ã)', QK_TOLERANCE_ALGEBRAIC)
def lift_commutator(context):
    twistor = context.twistor
    points = _twistor_points(context)
    residuals = [lift_commutator_residual(twistor, field, z) for field in killing_basis(context.n) for z in points]
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('lift_killing', 'twistor', 'X^Z is Killing for ḡ', TWISTOR_FIRST_ORDER_TOLERANCE)
def lift_killing_check(context):
    twistor = context.twistor
    points = _twistor_points(context, TWISTOR_CROSSED_POINTS)
    residuals = [lift_killing_residual(twistor, field, z) for field in killing_basis(context.n) for z in points]
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('lift_holomorphic', 'twistor', 'X^Z is real holomorphic', TWISTOR_FIRST_ORDER_TOLERANCE)
def lift_holomorphic(context):
    twistor = context.twistor
    points = _twistor_points(context, TWISTOR_CROSSED_POINTS)
    residuals = [lift_holomorphy_residual(twistor, field, z) for field in killing_basis(context.n) for z in points]
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('hamiltonian_gradient', 'twistor', 'X^Z = 𝒥 grad f^X', TWISTOR_FIRST_ORDER_TOLERANCE)
def hamiltonian_gradient(context):
    twistor = context.twistor
    points = _twistor_points(context, TWISTOR_CROSSED_POINTS)
    residuals = [gradient_check(twistor, field, z) for field in killing_basis(context.n) for z in points]
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('hamiltonian_fiber_linear', 'twistor', 'f^X = κ⟨A, J⟩ (κ measured)',
                         TWISTOR_FIRST_ORDER_TOLERANCE)
def hamiltonian_fiber_linear(context):
    twistor = context.twistor
    points = context.twistor_points(max(context.samples, 3))
    fits = [fiber_linear_fit(twistor, field, points) for field in killing_basis(context.n)]
    constant = fits[0][0]
    residuals = [residual for _, residual in fits] + [abs(kappa - constant) for kappa, _ in fits]
    logging.info(f'Hamiltonian fiber-linear constant {constant:.8f}')
    return CheckOutcome.from_residuals(residuals, value=constant)


def _second_derivatives(context, field):
    twistor = context.twistor
    basis = killing_basis(context.n)
    residuals = []
    for index, (pattern, z) in enumerate(product(SECOND_DERIVATIVE_PATTERNS,
                                                 _twistor_points(context, TWISTOR_SECOND_ORDER_POINTS))):
        arguments = random_second_derivative_arguments(twistor, z, context.rng)
        residuals.append(second_deriv_residual(twistor, basis[index % len(basis)], z, field, pattern, arguments))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('lift_second_derivatives', 'twistor', 'second covariant derivative of X̄',
                         QK_TOLERANCE_SECOND_ORDER)
def lift_second_derivatives(context):
    return _second_derivatives(context, 'lift')


@check_registry.register('vertical_second_derivatives', 'twistor', 'second covariant derivative of Ã',
                         QK_TOLERANCE_SECOND_ORDER)
def vertical_second_derivatives(context):
    return _second_derivatives(context, 'vertical')


@check_registry.register('obata_equation', 'twistor', 'f^X satisfies the Obata equation', QK_TOLERANCE_SECOND_ORDER)
def obata_equation(context):
    twistor = context.twistor
    basis = killing_basis(context.n)
    residuals = []
    patterns = [''.join(letters) for letters in product('HV', repeat=3)]
    for index, (pattern, z) in enumerate(product(patterns, _twistor_points(context, OBATA_POINTS))):
        f = hamiltonian_field(twistor, basis[index % len(basis)])
        y, u, v = (_random_tangent(context, z, letter) for letter in pattern)
        residuals.append(obata_residual(twistor, f, z, y, u, v))
    return CheckOutcome.from_residuals(residuals)


@check_registry.register('obata_negative_control', 'twistor', 'Obata equation fails for a generic function',
                         LOWER_BOUND_TOLERANCE)
def obata_negative_control(context):
    twistor = context.twistor
    f = random_sine_field(twistor.dimension, context.rng)
    points = _twistor_points(context, OBATA_POINTS)
    worst = 0.0
    for z in points:
        y, u, v = (_random_tangent(context, z, 'H') for _ in range(3))
        worst = max(worst, abs(obata_residual(twistor, f, z, y, u, v)))
    return CheckOutcome.lower_bound(OBATA_NEGATIVE_THRESHOLD, worst, len(points))


@check_registry.register('twistor_scalar_curvature', 'twistor', 'scalar curvature 2(2n+1)(n+1) of ḡ',
                         SCALAR_CURVATURE_TOLERANCE)
def twistor_scalar_curvature(context):
    twistor = context.twistor
    expected = expected_scalar_curvature(context.n)
    values = [einstein_check(twistor, z) for z in _twistor_points(context)]
    return CheckOutcome.from_residuals([abs(value - expected) / expected for value in values], value=values[0])


@check_registry.register('twistor_einstein', 'twistor', 'ḡ is Einstein, Ric = (n+1)ḡ', QK_TOLERANCE_SECOND_ORDER)
def twistor_einstein(context):
    twistor = context.twistor
    # relative to |(n+1)ḡ| = (n+1)√(4n+2)
    scale = (context.n + 1) * np.sqrt(twistor.dimension)
    return CheckOutcome.from_residuals([ricci_residual(twistor, z) / scale for z in _twistor_points(context)])


@check_registry.register('fiber_curvature', 'twistor', 'round fibers of curvature 1', QK_TOLERANCE_SECOND_ORDER)
def fiber_curvature_check(context):
    twistor = context.twistor
    values = [fiber_curvature(twistor, z) for z in _twistor_points(context)]
    return CheckOutcome.from_residuals([abs(value - 1.0) for value in values], value=values[0])
