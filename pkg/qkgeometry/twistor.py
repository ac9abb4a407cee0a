'''
The twistor space Z = S(Q) of ℍPⁿ as a coordinate manifold of dimension 4n+2.

A twistor point is the coordinate array z = (x, s): x a chart point of ℍPⁿ and s stereographic
coordinates of the fiber point a(s) = (2s_1, 2s_2, 1 - |s|²) / (1 + |s|²), standing for the
complex structure J = a_1 J_1 + a_2 J_2 + a_3 J_3 at x.  A tangent vector is either a coordinate
vector w = (ẋ, ṡ) or its split (h, v): h = ẋ on the base, and v = Da ṡ + N ẋ the covariant
derivative of the fiber point, a triple orthogonal to a.  The metric is ḡ = g(h, h) + |v|² and
the complex structure sends (h, v) to (J h, a × v).

The covariant calculus on Z is carried out on coordinate components with the same
finite-difference stencils as on the base, and is the oracle for every closed form below.
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

from qkgeometry.ck_forms import killing_form_parts
from qkgeometry.finite_difference import partial_derivatives, directional_derivative, refined
from qkgeometry.hpn_geometry import PolynomialField, levi_civita, riemann_from_christoffel, sample_points
from qkgeometry.quat_algebra import endomorphism_norm, symmetric_norm, vector_norm
from qkgeometry.quat_algebra import wedge_components, s2e_components
from qkgeometry.qk_utils import ChartEvaluationException, InvalidStructureException, check_vector
from qkgeometry.qk_utils import QK_CHART_RADIUS_LIMIT, QK_FIBER_TOLERANCE, QK_OBATA_OUTER_STEP

LC_PATTERNS = ['HH', 'VH', 'HV', 'VV']
SECOND_DERIVATIVE_FIELDS = ['lift', 'vertical']
SECOND_DERIVATIVE_PATTERNS = ['HHH', 'HHV', 'HVH', 'VHH', 'VHV', 'VVH', 'HVV']

# sampled fiber points keep a_3 above this, away from the pole the stereographic chart misses
FIBER_SAMPLE_FLOOR = -0.5


def expected_scalar_curvature(n):
    '''
    The scalar curvature 2(2n+1)(n+1) of the twistor metric over ℍPⁿ with ν = 1
    '''
    return 2.0 * (2 * n + 1) * (n + 1)


def cross_matrix(a):
    '''
    The matrix of v -> a × v
    '''
    a = np.asarray(a, dtype=float)
    zero = np.zeros(a.shape[:-1])
    return np.stack([np.stack([zero, -a[..., 2], a[..., 1]], axis=-1),
                     np.stack([a[..., 2], zero, -a[..., 0]], axis=-1),
                     np.stack([-a[..., 1], a[..., 0], zero], axis=-1)], axis=-2)


def adapted_basis(a, b=None):
    '''
    An orthonormal triple (a, b', c' = a × b') adapted to the fiber point a.
    Arguments:
        a: a unit triple
        b: the triple whose component orthogonal to a gives b'; the coordinate axis least
           aligned with a if None
    Raises:
        InvalidStructureException if b is (numerically) parallel to a
    '''
    a = np.asarray(a, dtype=float)
    if b is None:
        b = np.eye(3)[int(np.argmin(np.abs(a)))]
    b = np.asarray(b, dtype=float)
    orthogonal = b - (b @ a) * a
    size = np.linalg.norm(orthogonal)
    if size < QK_FIBER_TOLERANCE:
        raise InvalidStructureException('Cannot build an adapted basis from a triple parallel to the fiber point')
    orthogonal = orthogonal / size
    return a, orthogonal, np.cross(a, orthogonal)


class TwistorSpace:
    '''
    Metric, complex structure and Levi-Civita calculus of Z over a MetricField.
    Arguments:
        metric_field: the MetricField of the base ℍPⁿ; its step and Richardson setting are shared
    '''
    def __init__(self, metric_field):
        self.metric_field = metric_field
        self.n = metric_field.n
        self.base_dimension = metric_field.dimension
        self.dimension = self.base_dimension + 2
        self.fd_step = metric_field.fd_step
        self.richardson = metric_field.richardson
        self.structures = metric_field.structures

    def validate_points(self, z):
        '''
        Check that z are twistor coordinates inside the trusted chart.
        Raises:
            ChartEvaluationException for a wrong shape, a non-finite coordinate, a base point beyond
            the chart limit, or a fiber coordinate too close to the pole of the stereographic chart
        '''
        z = np.asarray(z, dtype=float)
        if z.ndim == 0 or z.shape[-1] != self.dimension:
            raise ChartEvaluationException(f'Twistor points must have last axis {self.dimension}, not shape {z.shape}')
        self.metric_field.validate_points(z[..., :self.base_dimension])
        radius = float(np.max(np.linalg.norm(z[..., self.base_dimension:], axis=-1)))
        if radius > QK_CHART_RADIUS_LIMIT:
            raise ChartEvaluationException(f'Fiber coordinate |s| = {radius:.3e} is beyond {QK_CHART_RADIUS_LIMIT}')
        return z

    def validate_point(self, z):
        return check_vector(self.validate_points(z), self.dimension, 'twistor point')

    def split_point(self, z):
        z = np.asarray(z, dtype=float)
        return z[..., :self.base_dimension], z[..., self.base_dimension:]

    def fiber(self, z):
        '''
        The unit triple a(s) of the fiber point
        '''
        s = self.split_point(z)[1]
        radius = np.sum(s * s, axis=-1)
        return np.stack([2.0 * s[..., 0], 2.0 * s[..., 1], 1.0 - radius], axis=-1) / (1.0 + radius)[..., None]

    def fiber_jacobian(self, z):
        '''
        Da, jacobian[..., i, j] = ∂a_i / ∂s_j
        '''
        s = self.split_point(z)[1]
        conformal = 1.0 / (1.0 + np.sum(s * s, axis=-1))[..., None, None]
        weights = np.concatenate([s, np.ones(s.shape[:-1] + (1,))], axis=-1)
        planar = np.concatenate([np.eye(2), np.zeros((1, 2))], axis=0)
        return 2.0 * conformal * planar - 4.0 * conformal ** 2 * np.einsum('...i,...j->...ij', weights, s)

    def structure_endomorphism(self, z):
        '''
        J = Σ a_i J_i at the base point of z, as a chart matrix
        '''
        return np.einsum('...i,ikl->...kl', self.fiber(z), self.structures)

    def connection_forms(self, x):
        '''
        theta[..., i, k, m], the J_k component of ∇_m J_i at chart points x:
        -(1/4n) tr(J_k [Γ_m, J_i]) with (Γ_m)^l_p = Γ^l_mp
        '''
        gamma = self.metric_field.christoffel(x)
        structures = self.structures
        first = np.einsum('kql,...lmp,ipq->...ikm', structures, gamma, structures)
        second = np.einsum('kql,ilp,...pmq->...ikm', structures, structures, gamma)
        return -(first - second) / self.base_dimension

    def vertical_connection(self, z):
        '''
        N[..., k, m] = Σ_i a_i theta[..., i, k, m], so the vertical part of (ẋ, ṡ) is Da ṡ + N ẋ
        '''
        x = self.split_point(z)[0]
        return np.einsum('...i,...ikm->...km', self.fiber(z), self.connection_forms(x))

    def metric(self, z):
        '''
        ḡ at twistor points, no validation
        '''
        z = np.asarray(z, dtype=float)
        x = self.split_point(z)[0]
        base = self.metric_field.metric(x)
        vertical = self.vertical_connection(z)
        jacobian = self.fiber_jacobian(z)
        mixed = np.einsum('...km,...kj->...mj', vertical, jacobian)
        top = np.concatenate([base + np.einsum('...km,...kl->...ml', vertical, vertical), mixed], axis=-1)
        bottom = np.concatenate([np.swapaxes(mixed, -1, -2), np.einsum('...ki,...kj->...ij', jacobian, jacobian)],
                                axis=-1)
        return np.concatenate([top, bottom], axis=-2)

    def metric_at(self, z):
        '''
        ḡ at validated twistor point(s).
        Raises:
            ChartEvaluationException outside the chart or if ḡ isn't positive definite
        '''
        metric = self.metric(self.validate_points(z))
        if np.min(np.linalg.eigvalsh(metric)) <= 0.0:
            raise ChartEvaluationException('The twistor metric lost positive definiteness')
        return metric

    def metric_jacobian(self, z):
        return partial_derivatives(self.metric, z, self.fd_step)

    def christoffel(self, z):
        '''
        gamma[..., k, i, j] = Γ̄^k_ij of ḡ
        '''
        return levi_civita(self.metric(z), self.metric_jacobian(z))

    def split_tangent(self, z, w):
        '''
        (h, v) of coordinate tangents w at z
        '''
        w = np.asarray(w, dtype=float)
        horizontal = w[..., :self.base_dimension]
        vertical = (np.einsum('...ij,...j->...i', self.fiber_jacobian(z), w[..., self.base_dimension:])
                    + np.einsum('...km,...m->...k', self.vertical_connection(z), horizontal))
        return horizontal, vertical

    def _assemble(self, z, horizontal, vertical):
        jacobian = self.fiber_jacobian(z)
        normal = np.einsum('...ki,...kj->...ij', jacobian, jacobian)
        target = vertical - np.einsum('...km,...m->...k', self.vertical_connection(z), horizontal)
        rates = np.linalg.solve(normal, np.einsum('...ki,...k->...i', jacobian, target)[..., None])[..., 0]
        return np.concatenate([np.broadcast_to(horizontal, rates.shape[:-1] + (self.base_dimension,)), rates],
                              axis=-1)

    def assemble_tangent(self, z, horizontal, vertical):
        '''
        The coordinate tangent at z with split (horizontal, vertical).
        Raises:
            InvalidStructureException if the vertical part isn't orthogonal to the fiber point
        '''
        z = self.validate_point(z)
        horizontal = check_vector(horizontal, self.base_dimension, 'horizontal part')
        vertical = check_vector(vertical, 3, 'vertical part')
        overlap = abs(float(vertical @ self.fiber(z)))
        if overlap > QK_FIBER_TOLERANCE:
            raise InvalidStructureException(f'Vertical part is not orthogonal to the fiber point ({overlap:.3e})')
        return self._assemble(z, horizontal, vertical)

    def horizontal_lift(self, z, horizontal):
        return self._assemble(z, horizontal, np.zeros(np.shape(z)[:-1] + (3,)))

    def vertical_vector(self, z, triple):
        '''
        The coordinate tangent of the vertical vector triple - (triple · a) a at z
        '''
        a = self.fiber(z)
        triple = np.asarray(triple, dtype=float)
        projected = triple - np.sum(triple * a, axis=-1, keepdims=True) * a
        return self._assemble(z, np.zeros(np.shape(z)[:-1] + (self.base_dimension,)), projected)

    def complex_structure(self, z):
        '''
        The coordinate matrix of the complex structure at z: split, apply (J h, a × v), reassemble
        '''
        z = np.asarray(z, dtype=float)
        jacobian = self.fiber_jacobian(z)
        vertical = self.vertical_connection(z)
        normal = np.einsum('...ki,...kj->...ij', jacobian, jacobian)
        pseudo_inverse = np.linalg.solve(normal, np.swapaxes(jacobian, -1, -2))
        structure = self.structure_endomorphism(z)
        rotation = cross_matrix(self.fiber(z))
        # (h, v) -> (J h, a × (Da ṡ + N h)), then ṡ' = Da⁺ (v' - N J h)
        vertical_image = np.einsum('...ij,...jk->...ik', rotation, np.concatenate([vertical, jacobian], axis=-1))
        corrected = vertical_image - np.concatenate(
            [np.einsum('...km,...ml->...kl', vertical, structure), np.zeros(jacobian.shape)], axis=-1)
        top = np.concatenate([structure, np.zeros(structure.shape[:-1] + (2,))], axis=-1)
        bottom = np.einsum('...ik,...kl->...il', pseudo_inverse, corrected)
        return np.concatenate([top, bottom], axis=-2)

    def complex_structure_at(self, z):
        return self.complex_structure(self.validate_points(z))

    def inner(self, z, u, w):
        return np.einsum('...a,...ab,...b->...', u, self.metric(z), w)

    def riemann_components(self, z):
        '''
        values[..., i, j, k, d] = ḡ(R̄(∂_i, ∂_j)∂_k, ∂_d)
        '''
        return riemann_from_christoffel(self.christoffel, self.metric, z, self.fd_step, self.richardson)

    def sample_points(self, count, rng, radius=1.0):
        '''
        count twistor points: base points in the ball |q| <= radius, fiber points uniform on the
        sphere with a_3 > FIBER_SAMPLE_FLOOR
        '''
        base = sample_points(self.n, count, rng, radius)
        fibers = []
        while len(fibers) < count:
            triple = rng.normal(size=3)
            triple /= np.linalg.norm(triple)
            if triple[2] > FIBER_SAMPLE_FLOOR:
                fibers.append(triple)
        fibers = np.array(fibers)
        return np.concatenate([base, fibers[:, :2] / (1.0 + fibers[:, 2:])], axis=-1)

    def twistor_point(self, p, a):
        '''
        The coordinates of J = Σ a_i J_i over chart point p.
        Raises:
            InvalidStructureException if a is off the unit sphere
            ChartEvaluationException if a is the pole a = (0, 0, -1) the fiber chart misses
        '''
        p = check_vector(self.metric_field.validate_points(p), self.base_dimension, 'chart point')
        a = check_vector(a, 3, 'fiber point')
        if abs(float(np.linalg.norm(a)) - 1.0) > QK_FIBER_TOLERANCE:
            raise InvalidStructureException(f'The fiber point must be a unit triple, |a| = {np.linalg.norm(a)}')
        if 1.0 + a[2] < 1.0 / QK_CHART_RADIUS_LIMIT:
            raise ChartEvaluationException('The fiber point is too close to the pole of the fiber chart')
        return np.concatenate([p, a[:2] / (1.0 + a[2])])

    def __repr__(self):
        return f'TwistorSpace(n={self.n}, dimension={self.dimension})'


def _vector_norm_split(twistor, z, horizontal, vertical):
    metric = twistor.metric_field.metric(twistor.split_point(z)[0])
    return float(np.sqrt(max(horizontal @ metric @ horizontal + vertical @ vertical, 0.0)))


def _covariant(twistor, z, direction, field, step=None):
    # ∇̄_P Q at z for a coordinate vector field Q
    step = twistor.fd_step if step is None else step
    derivative = directional_derivative(field, z, direction, step)
    return derivative + np.einsum('cab,a,b->c', twistor.christoffel(z), direction, field(z))


def complex_structure_residual(twistor, z):
    '''
    max(|𝒥² + Id|, |ḡ(𝒥·, 𝒥·) - ḡ| / |ḡ|) at z
    '''
    z = twistor.validate_point(z)
    structure = twistor.complex_structure_at(z)
    metric = twistor.metric(z)
    square = float(np.max(np.abs(structure @ structure + np.eye(twistor.dimension))))
    hermitian = float(np.max(np.abs(structure.T @ metric @ structure - metric)) / np.max(np.abs(metric)))
    return max(square, hermitian)


def submersion_residual(twistor, z, horizontal, vertical):
    '''
    ||h|²_g - |h̄|²_ḡ| + |ḡ(h̄, v)| for a base vector h and a vertical triple v
    '''
    z = twistor.validate_point(z)
    horizontal = check_vector(horizontal, twistor.base_dimension, 'horizontal part')
    lifted = twistor.horizontal_lift(z, horizontal)
    upright = twistor.vertical_vector(z, check_vector(vertical, 3, 'vertical part'))
    metric = twistor.metric(z)
    base = twistor.metric_field.metric(twistor.split_point(z)[0])
    return float(abs(horizontal @ base @ horizontal - lifted @ metric @ lifted) + abs(lifted @ metric @ upright))


'''
Killing lifts and the Hamiltonian
'''


def _killing_coefficients(twistor, killing, x):
    return killing_form_parts(twistor.metric_field, killing, x)[1]


def lift_field(twistor, killing):
    '''
    The lift X^Z = X̄ - 2𝒥(Ã) of a Killing field, as a coordinate vector field on Z.  With
    A = Σ α_i J_i = (∇X)^{S²H}, the vertical part at a is -2 a × α.
    '''
    def field(z):
        z = np.asarray(z, dtype=float)
        x = twistor.split_point(z)[0]
        vertical = -2.0 * np.cross(twistor.fiber(z), _killing_coefficients(twistor, killing, x))
        return twistor._assemble(z, killing(x), vertical)
    return field


def lift_killing(twistor, killing, z):
    '''
    The split (h, v) of X^Z at z
    '''
    z = twistor.validate_point(z)
    x = twistor.split_point(z)[0]
    alpha = _killing_coefficients(twistor, killing, x)
    return killing(x), -2.0 * np.cross(twistor.fiber(z), alpha)


def vertical_field(twistor, killing):
    '''
    Ã, the vertical field J -> A - ⟨A, J⟩J induced by A = (∇X)^{S²H}
    '''
    def field(z):
        z = np.asarray(z, dtype=float)
        x = twistor.split_point(z)[0]
        a = twistor.fiber(z)
        alpha = _killing_coefficients(twistor, killing, x)
        vertical = alpha - np.sum(alpha * a, axis=-1, keepdims=True) * a
        return twistor._assemble(z, np.zeros(x.shape), vertical)
    return field


def horizontal_field(twistor, killing):
    '''
    X̄, the horizontal lift of the Killing field
    '''
    def field(z):
        z = np.asarray(z, dtype=float)
        return twistor.horizontal_lift(z, killing(twistor.split_point(z)[0]))
    return field


def lift_commutator_residual(twistor, killing, z):
    '''
    |[∇X, J] + 2 J∘Ã| at the base point of z, as endomorphisms
    '''
    z = twistor.validate_point(z)
    x = twistor.split_point(z)[0]
    a = twistor.fiber(z)
    metric_field = twistor.metric_field
    nabla = metric_field.vector_jacobian(killing, x).T
    alpha = _killing_coefficients(twistor, killing, x)
    structure = np.einsum('i,ikl->kl', a, twistor.structures)
    induced = np.einsum('i,ikl->kl', alpha - (alpha @ a) * a, twistor.structures)
    metric = metric_field.metric(x)
    defect = nabla @ structure - structure @ nabla + 2.0 * structure @ induced
    return float(endomorphism_norm(defect, metric, np.linalg.inv(metric)))


def _lie_metric(twistor, field, z):
    values = field(z)
    derivative = partial_derivatives(field, z, twistor.fd_step)
    metric = twistor.metric(z)
    return (np.einsum('c,cab->ab', values, twistor.metric_jacobian(z))
            + np.einsum('cb,ac->ab', metric, derivative) + np.einsum('ac,bc->ab', metric, derivative))


def lift_killing_residual(twistor, killing, z):
    '''
    |L_{X^Z} ḡ| at z
    '''
    z = twistor.validate_point(z)
    lie = _lie_metric(twistor, lift_field(twistor, killing), z)
    return float(symmetric_norm(lie, np.linalg.inv(twistor.metric(z))))


def lift_holomorphy_residual(twistor, killing, z):
    '''
    |L_{X^Z} 𝒥| at z
    '''
    z = twistor.validate_point(z)
    field = lift_field(twistor, killing)
    values = field(z)
    derivative = partial_derivatives(field, z, twistor.fd_step)
    structure = twistor.complex_structure(z)
    lie = (np.einsum('c,cab->ab', values, partial_derivatives(twistor.complex_structure, z, twistor.fd_step))
           - np.einsum('cb,ca->ab', structure, derivative) + np.einsum('ac,bc->ab', structure, derivative))
    metric = twistor.metric(z)
    return float(endomorphism_norm(lie, metric, np.linalg.inv(metric)))


def hamiltonian_field(twistor, killing):
    '''
    f^X = -(1/(2(n+1))) tr_ḡ (U, V) -> ḡ(∇̄_U X^Z, 𝒥V), as a scalar field on Z
    '''
    lift = lift_field(twistor, killing)
    scale = -1.0 / (2.0 * (twistor.n + 1))

    def field(z):
        z = np.asarray(z, dtype=float)
        derivative = (partial_derivatives(lift, z, twistor.fd_step)
                      + np.einsum('...cab,...b->...ac', twistor.christoffel(z), lift(z)))
        metric = twistor.metric(z)
        return scale * np.einsum('...ab,...ac,...cd,...db->...', np.linalg.inv(metric), derivative, metric,
                                 twistor.complex_structure(z))
    return field


def hamiltonian(twistor, killing, z):
    return float(hamiltonian_field(twistor, killing)(twistor.validate_point(z)))


def gradient_check(twistor, killing, z):
    '''
    |X^Z - 𝒥 grad_ḡ f^X|_ḡ at z
    '''
    z = twistor.validate_point(z)
    differential = partial_derivatives(hamiltonian_field(twistor, killing), z, twistor.fd_step)
    metric = twistor.metric(z)
    gradient = np.linalg.solve(metric, differential)
    defect = lift_field(twistor, killing)(z) - twistor.complex_structure(z) @ gradient
    return float(vector_norm(defect, metric))


def fiber_linear_fit(twistor, killing, zs):
    '''
    Fit f^X = κ ⟨A, J⟩ over twistor points by least squares.
    Returns:
        (κ, residual): the constant and the largest deviation from the fit
    '''
    zs = twistor.validate_points(zs)
    values = hamiltonian_field(twistor, killing)(zs)
    x = twistor.split_point(zs)[0]
    candidate = np.sum(_killing_coefficients(twistor, killing, x) * twistor.fiber(zs), axis=-1)
    size = float(candidate @ candidate)
    constant = float(candidate @ values) / size if size > 0.0 else 0.0
    residual = float(np.max(np.abs(values - constant * candidate)))
    logging.debug(f'Fiber-linear fit of the Hamiltonian: constant {constant:.6f}, residual {residual:.3e}')
    return constant, residual


'''
Levi-Civita connection of ḡ on horizontal and vertical fields.  Horizontal fields are lifts V̄
of affine chart fields; vertical fields are C̃ = C - ⟨C, J⟩J for sections C = Σ c_i J_i with
affine coefficients.  A pattern names the direction then the field, H or V.
'''


def _check_pattern(pattern, patterns):
    if pattern not in patterns:
        raise InvalidStructureException(f'Unknown pattern {pattern}, expected one of {patterns}')
    return pattern


def affine_field(constant, linear):
    '''
    The affine field x -> constant + x @ linear on the chart
    '''
    constant = np.asarray(constant, dtype=float)
    linear = np.asarray(linear, dtype=float)
    return PolynomialField(constant, linear, np.zeros(linear.shape[:1] + linear.shape))


def random_lc_arguments(twistor, pattern, rng):
    '''
    A random direction and field for an lc pattern: base vectors and chart fields for H, triples
    and section coefficients for V
    '''
    _check_pattern(pattern, LC_PATTERNS)
    dimension = twistor.base_dimension
    size = dimension if pattern[0] == 'H' else 3
    width = dimension if pattern[1] == 'H' else 3
    return {
        'direction': rng.normal(size=size),
        'field': affine_field(rng.normal(size=width), rng.normal(scale=0.5, size=(dimension, width))),
    }


def _lc_direction(twistor, z, pattern, direction):
    if pattern[0] == 'H':
        return twistor.horizontal_lift(z, check_vector(direction, twistor.base_dimension, 'direction'))
    return twistor.vertical_vector(z, check_vector(direction, 3, 'direction'))


def _lc_field(twistor, pattern, field):
    if pattern[1] == 'H':
        def lifted(z):
            return twistor.horizontal_lift(z, field(twistor.split_point(z)[0]))
        return lifted

    def upright(z):
        return twistor.vertical_vector(z, field(twistor.split_point(z)[0]))
    return upright


def lc_connection(twistor, z, pattern, arguments):
    '''
    The closed form of ∇̄_P Q at z, returned split as (h, v).
    Arguments:
        twistor: the TwistorSpace
        z: a twistor point
        pattern: 'HH' (∇̄_Ȳ V̄), 'VH' (∇̄_B̃ V̄), 'HV' (∇̄_Ȳ C̃) or 'VV' (∇̄_B̃ C̃)
        arguments: {'direction': Y or b, 'field': the affine field V or c}
    Raises:
        InvalidStructureException for an unknown pattern
    '''
    _check_pattern(pattern, LC_PATTERNS)
    z = twistor.validate_point(z)
    x = twistor.split_point(z)[0]
    a = twistor.fiber(z)
    field = arguments['field']
    value = field(x)
    direction = np.asarray(arguments['direction'], dtype=float)
    structures = twistor.structures
    structure = np.einsum('i,ikl->kl', a, structures)
    if pattern == 'HH':
        # ∇_Y V, and -(1/2)(ω_2(Y, V) c' - ω_3(Y, V) b') = -(1/2) a × ω(Y, V) in an adapted basis
        metric = twistor.metric_field.metric(x)
        gamma = twistor.metric_field.christoffel(x)
        horizontal = direction @ field.linear + np.einsum('kij,i,j->k', gamma, direction, value)
        omega = np.einsum('kuv,v,uw,w->k', structures, direction, metric, value)
        return horizontal, -0.5 * np.cross(a, omega)
    if pattern == 'VH':
        tilde = direction - (direction @ a) * a
        return -0.5 * structure @ np.einsum('i,ikl->kl', tilde, structures) @ value, np.zeros(3)
    if pattern == 'HV':
        tilde = value - (value @ a) * a
        horizontal = -0.5 * structure @ np.einsum('i,ikl->kl', tilde, structures) @ direction
        moved = direction @ field.linear + np.einsum('i,ikm,m->k', value, twistor.connection_forms(x), direction)
        return horizontal, moved - (moved @ a) * a
    tilde = direction - (direction @ a) * a
    return np.zeros(twistor.base_dimension), -(value @ a) * tilde


def lc_residual(twistor, z, pattern, arguments):
    '''
    Deviation of lc_connection from the finite-difference connection of ḡ, in the ḡ-norm
    '''
    _check_pattern(pattern, LC_PATTERNS)
    z = twistor.validate_point(z)
    expected = lc_connection(twistor, z, pattern, arguments)
    direction = _lc_direction(twistor, z, pattern, arguments['direction'])
    measured = twistor.split_tangent(z, _covariant(twistor, z, direction, _lc_field(twistor, pattern, arguments['field'])))
    return _vector_norm_split(twistor, z, measured[0] - expected[0], measured[1] - expected[1])


'''
Second covariant derivatives of X̄ and Ã.  A case is a field ('lift' for X̄, 'vertical' for Ã) and
a pattern of three letters for the slots of ḡ(∇̄²F(P, Q), R).  Horizontal slots take Y, U, V in
order of appearance and vertical slots take B, C.
'''


def random_second_derivative_arguments(twistor, z, rng):
    a = twistor.fiber(z)
    verticals = rng.normal(size=(2, 3))
    verticals = verticals - np.outer(verticals @ a, a)
    return {
        'Y': rng.normal(size=twistor.base_dimension),
        'U': rng.normal(size=twistor.base_dimension),
        'V': rng.normal(size=twistor.base_dimension),
        'B': verticals[0],
        'C': verticals[1],
    }


def _slot_names(pattern):
    horizontals = iter('YUV')
    verticals = iter('BC')
    return [next(horizontals) if letter == 'H' else next(verticals) for letter in pattern]


def _check_case(field, pattern):
    if field not in SECOND_DERIVATIVE_FIELDS:
        raise InvalidStructureException(f'Unknown field {field}, expected one of {SECOND_DERIVATIVE_FIELDS}')
    return _check_pattern(pattern, SECOND_DERIVATIVE_PATTERNS)


class _SecondDerivativeTerms:
    '''
    The quantities the closed forms are written in, at one twistor point
    '''
    def __init__(self, twistor, killing, z):
        x = twistor.split_point(z)[0]
        metric_field = twistor.metric_field
        self.structures = twistor.structures
        self.metric = metric_field.metric(x)
        self.a = twistor.fiber(z)
        _, self.b2, self.b3 = adapted_basis(self.a)
        self.x = killing(x)
        self.nabla = metric_field.vector_jacobian(killing, x)
        self.alpha = _killing_coefficients(twistor, killing, x)
        self.lam = float(self.alpha @ self.a)

    def g(self, u, v):
        return float(u @ self.metric @ v)

    def act(self, triple, u):
        # J_t u for t = Σ t_i e_i
        return np.einsum('i,ikl,l->k', triple, self.structures, u)

    def omega(self, triple, u, v):
        return self.g(self.act(triple, u), v)

    def omega_bar(self, u, v):
        return self.omega(self.a, u, v)

    def omega_2(self, u, v):
        return self.omega(self.b2, u, v)

    def omega_3(self, u, v):
        return self.omega(self.b3, u, v)

    def vertical_omega_bar(self, b, c):
        return float(np.cross(self.a, b) @ c)

    def moved(self, y):
        return y @ self.nabla

    def s2e_wedge(self, u, v, p, q):
        form = wedge_components(self.metric @ u, self.metric @ v)
        return float(p @ s2e_components(form, self.structures) @ q)


def _lift_closed_form(terms, pattern, Y, U, V, B, C):
    X = terms.x
    g = terms.g
    if pattern == 'HHH':
        return (0.25 * (terms.omega_2(Y, V) * terms.omega_2(X, U) + terms.omega_3(Y, V) * terms.omega_3(X, U))
                + 0.25 * (terms.omega_2(X, V) * terms.omega_2(Y, U) + terms.omega_3(X, V) * terms.omega_3(Y, U))
                + 0.5 * (terms.omega_2(X, Y) * terms.omega_2(U, V) + terms.omega_3(X, Y) * terms.omega_3(U, V))
                + terms.s2e_wedge(X, Y, U, V) + 0.5 * terms.omega_bar(X, Y) * terms.omega_bar(U, V))
    if pattern == 'HHV':
        return 0.5 * (g(terms.act(B, terms.moved(Y)), terms.act(terms.a, U))
                      + g(terms.act(B, terms.moved(U)), terms.act(terms.a, Y)))
    if pattern in ('HVH', 'VHH'):
        return -terms.lam * g(terms.act(B, Y), U) + float(terms.alpha @ B) * terms.omega_bar(Y, U)
    if pattern in ('VHV', 'VVH'):
        return -0.25 * (terms.omega_bar(X, Y) * terms.vertical_omega_bar(B, C) + g(X, Y) * float(B @ C))
    return -0.5 * float(B @ C) * g(X, Y)


def _vertical_closed_form(terms, pattern, Y, U, V, B, C):
    X = terms.x
    g = terms.g
    J = terms.a
    if pattern == 'HHH':
        return (0.25 * (terms.omega_2(Y, X) * terms.omega_3(U, V) - terms.omega_2(U, V) * terms.omega_3(Y, X))
                + 0.25 * (terms.omega_2(U, X) * terms.omega_3(Y, V) - terms.omega_2(Y, V) * terms.omega_3(U, X)))
    if pattern == 'HHV':
        return (-0.5 * (g(terms.act(B, U), terms.moved(Y)) + terms.lam * g(terms.act(B, Y), terms.act(J, U)))
                - 0.25 * (terms.omega_bar(Y, U) * float(np.cross(J, B) @ terms.alpha)
                          + g(Y, U) * float(terms.alpha @ B)))
    if pattern == 'HVH':
        twist = terms.lam * g(terms.act(B, Y), terms.act(J, U))
        return 0.25 * (g(terms.act(terms.alpha, U), terms.act(B, Y)) - twist) - 0.5 * twist
    if pattern in ('HVV', 'VHV'):
        return 0.25 * (g(X, Y) * terms.vertical_omega_bar(B, C) - terms.omega_bar(X, Y) * float(B @ C))
    if pattern == 'VHH':
        return -0.5 * terms.lam * g(terms.act(B, Y), terms.act(J, U))
    return 0.0


def second_derivative(twistor, killing, z, field, pattern, arguments):
    '''
    The closed form of ḡ(∇̄²F(P, Q), R) at z.
    Arguments:
        twistor: the TwistorSpace
        killing: the KillingField X
        z: a twistor point
        field: 'lift' (F = X̄) or 'vertical' (F = Ã)
        pattern: the H/V letters of (P, Q, R)
        arguments: dict with base vectors Y, U, V and vertical triples B, C
    Raises:
        InvalidStructureException for an unknown case
    '''
    _check_case(field, pattern)
    z = twistor.validate_point(z)
    terms = _SecondDerivativeTerms(twistor, killing, z)
    a = terms.a
    vectors = {name: np.asarray(arguments[name], dtype=float) for name in 'YUVBC'}
    for name in 'BC':
        vectors[name] = vectors[name] - (vectors[name] @ a) * a
    closed_form = _lift_closed_form if field == 'lift' else _vertical_closed_form
    return float(closed_form(terms, pattern, **vectors))


def second_derivative_fd(twistor, killing, z, field, pattern, arguments):
    '''
    ḡ(∇̄²F(P, Q), R) at z from nested finite differences, with (∇̄_P T)(Q) for T = ∇̄F
    '''
    _check_case(field, pattern)
    z = twistor.validate_point(z)
    F = horizontal_field(twistor, killing) if field == 'lift' else vertical_field(twistor, killing)
    vectors = []
    for name, letter in zip(_slot_names(pattern), pattern):
        if letter == 'H':
            vectors.append(twistor.horizontal_lift(z, check_vector(arguments[name], twistor.base_dimension, name)))
        else:
            vectors.append(twistor.vertical_vector(z, check_vector(arguments[name], 3, name)))
    first, second, third = vectors
    gamma = twistor.christoffel(z)
    metric = twistor.metric(z)

    def estimate(step):
        def tensor(points):
            return (partial_derivatives(F, points, step)
                    + np.einsum('...cab,...b->...ac', twistor.christoffel(points), F(points)))
        values = tensor(z)
        moved = (directional_derivative(tensor, z, first, step)
                 + np.einsum('cad,a,bd->bc', gamma, first, values)
                 - np.einsum('dab,a,dc->bc', gamma, first, values))
        return second @ moved @ metric @ third
    return float(refined(estimate, twistor.fd_step, twistor.richardson))


def second_deriv_residual(twistor, killing, z, field, pattern, arguments):
    '''
    |finite-difference value - closed form| of one second-derivative case
    '''
    measured = second_derivative_fd(twistor, killing, z, field, pattern, arguments)
    return abs(measured - second_derivative(twistor, killing, z, field, pattern, arguments))


'''
The Obata equation
'''


class SineField:
    '''
    A sum of plane sine waves on Z, a generic smooth function for the negative control
    '''
    def __init__(self, amplitudes, frequencies, phases):
        self.amplitudes = np.asarray(amplitudes, dtype=float)
        self.frequencies = np.asarray(frequencies, dtype=float)
        self.phases = np.asarray(phases, dtype=float)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        return np.sin(np.einsum('...a,ka->...k', z, self.frequencies) + self.phases) @ self.amplitudes


def random_sine_field(dimension, rng, terms=4):
    return SineField(rng.normal(size=terms), rng.normal(size=(terms, dimension)), rng.uniform(0.0, 2 * np.pi, terms))


def obata_residual(twistor, f, z, y, u, v, step=QK_OBATA_OUTER_STEP):
    '''
    The signed residual
    4∇²(df)(Y, U, V) + 2df(Y)ḡ(U, V) + df(U)ḡ(Y, V) + df(V)ḡ(Y, U) - df(𝒥U)ω̄(Y, V) - df(𝒥V)ω̄(Y, U)
    at z, with ω̄(Y, V) = ḡ(𝒥Y, V).  The third covariant derivative uses directional stencils of
    the given step, refined once; the first derivatives use the twistor step.
    Arguments:
        twistor: the TwistorSpace
        f: a scalar field on Z, taking coordinate arrays (..., 4n+2)
        z: a twistor point
        y, u, v: coordinate tangent vectors at z
        step: the stencil step of the third derivative
    '''
    z = twistor.validate_point(z)
    y, u, v = (check_vector(vector, twistor.dimension, name) for vector, name in ((y, 'Y'), (u, 'U'), (v, 'V')))
    gamma = twistor.christoffel(z)
    metric = twistor.metric(z)
    structure = twistor.complex_structure(z)

    def hessian(points, first, second, h):
        mixed = directional_derivative(lambda w: directional_derivative(f, w, second, h), points, first, h)
        correction = np.einsum('...kij,i,j->...k', twistor.christoffel(points), first, second)
        return mixed - directional_derivative(f, points, correction, h)

    def third(h):
        outer = directional_derivative(lambda w: hessian(w, u, v, h), z, y, h)
        return (outer - hessian(z, np.einsum('kij,i,j->k', gamma, y, u), v, h)
                - hessian(z, u, np.einsum('kij,i,j->k', gamma, y, v), h))

    def df(direction):
        return float(refined(lambda h: directional_derivative(f, z, direction, h), twistor.fd_step, twistor.richardson))

    def omega_bar(p, q):
        return float((structure @ p) @ metric @ q)

    value = float(refined(third, step, twistor.richardson))
    return (4.0 * value + 2.0 * df(y) * float(u @ metric @ v) + df(u) * float(y @ metric @ v)
            + df(v) * float(y @ metric @ u) - df(structure @ u) * omega_bar(y, v) - df(structure @ v) * omega_bar(y, u))


'''
Curvature of ḡ
'''


def _ricci(twistor, z):
    values = twistor.riemann_components(z)
    metric = twistor.metric(z)
    inverse = np.linalg.inv(metric)
    return np.einsum('id,ijkd->jk', inverse, values), metric, inverse


def einstein_check(twistor, z):
    '''
    The scalar curvature of ḡ at z
    '''
    ricci, _, inverse = _ricci(twistor, twistor.validate_point(z))
    return float(np.einsum('jk,jk->', inverse, ricci))


def ricci_residual(twistor, z):
    '''
    |Ric(ḡ) - (n+1)ḡ| at z, the Einstein constant being the scalar curvature over 4n+2
    '''
    ricci, metric, inverse = _ricci(twistor, twistor.validate_point(z))
    constant = expected_scalar_curvature(twistor.n) / twistor.dimension
    return float(symmetric_norm(ricci - constant * metric, inverse))


def fiber_curvature(twistor, z):
    '''
    The sectional curvature of ḡ on the vertical plane at z
    '''
    z = twistor.validate_point(z)
    _, second, third = adapted_basis(twistor.fiber(z))
    p = twistor.vertical_vector(z, second)
    q = twistor.vertical_vector(z, third)
    metric = twistor.metric(z)
    values = twistor.riemann_components(z)
    numerator = np.einsum('ijkd,i,j,k,d->', values, p, q, q, p)
    return float(numerator / ((p @ metric @ p) * (q @ metric @ q) - (p @ metric @ q) ** 2))
