'''
The quaternionic projective space ℍPⁿ in the affine chart q -> [q : 1], q in ℍⁿ = ℝ^{4n}.

The chart metric is the Fubini-Study metric scaled so that the reduced scalar curvature
ν = scal / (4n(n+2)) is 1; the scale is measured from the finite-difference curvature at the
origin when a MetricField is built.  Right multiplication by the imaginary units commutes with
the isometric left action of Sp(n+1), so the constant structures of standard_structure(n) are
admissible at every chart point, and g^{-1/2} turns them into an orthonormal admissible frame.

Killing fields are the infinitesimal generators of the left Sp(n+1) action.  All covariant
calculus (Christoffels, covariant derivatives of tensor fields, d, δ, the Hodge and rough
Laplacians, the curvature) is done on coordinate components with the stencils of
qkgeometry.finite_difference, vectorised over leading batch axes.
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
from scipy.linalg import expm

from qkgeometry.finite_difference import partial_derivatives, refined
from qkgeometry.quat_algebra import CurvatureTensor, QuaternionicStructure, standard_structure
from qkgeometry.quat_algebra import quaternion_conjugate, quaternion_inverse, quaternion_multiply
from qkgeometry.quat_algebra import left_multiplication_matrix, kaehler_components, model_curvature_components
from qkgeometry.quat_algebra import form_norm, symmetric_norm, wedge_components, s2h_components, s2e_components
from qkgeometry.qk_utils import ChartEvaluationException, InvalidStructureException
from qkgeometry.qk_utils import check_dimension, check_step, check_vector
from qkgeometry.qk_utils import QK_CHART_RADIUS_LIMIT, QK_FD_STEP, QK_GRAM_TOLERANCE, QK_REDUCED_SCALAR_CURVATURE

METRIC_JACOBIAN_CLOSED_FORM = 'closed_form'
METRIC_JACOBIAN_FINITE_DIFFERENCE = 'finite_difference'
METRIC_JACOBIANS = [METRIC_JACOBIAN_CLOSED_FORM, METRIC_JACOBIAN_FINITE_DIFFERENCE]

_INDEX_LETTERS = 'abcdefgh'


def _field_rank(values, points):
    return np.ndim(values) - (np.ndim(points) - 1)


def _connection_terms(values, gamma, rank):
    # Σ_s Γ^l_{k i_s} T_{i_1 .. l .. i_r}, the index k placed first
    letters = _INDEX_LETTERS[:rank]
    total = 0.0
    for slot in range(rank):
        replaced = letters[:slot] + 'l' + letters[slot + 1:]
        total = total + np.einsum(f'...lk{letters[slot]},...{replaced}->...k{letters}', gamma, values)
    return total


def levi_civita(metric, jacobian):
    '''
    Christoffel symbols gamma[..., k, i, j] = Γ^k_ij of a metric from its first derivatives
    jacobian[..., k, i, j] = ∂_k g_ij
    '''
    lowered = 0.5 * (np.einsum('...ijl->...lij', jacobian) + np.einsum('...jil->...lij', jacobian) - jacobian)
    return np.einsum('...kl,...lij->...kij', np.linalg.inv(metric), lowered)


def riemann_from_christoffel(christoffel, metric, points, step, richardson=True):
    '''
    Coordinate components values[..., i, j, k, d] = g(R(∂_i, ∂_j)∂_k, ∂_d), from
    R^l_kij = ∂_iΓ^l_jk - ∂_jΓ^l_ik + Γ^l_im Γ^m_jk - Γ^l_jm Γ^m_ik
    Arguments:
        christoffel: callable, points -> gamma[..., k, i, j]
        metric: callable, points -> g[..., i, j]
        points: array (..., D)
        step: finite-difference step for ∂Γ
        richardson: refine ∂Γ once
    '''
    points = np.asarray(points, dtype=float)
    gamma = christoffel(points)
    derivative = refined(lambda h: partial_derivatives(christoffel, points, h), step, richardson)
    upper = (np.einsum('...iljk->...lkij', derivative) - np.einsum('...jlik->...lkij', derivative)
             + np.einsum('...lim,...mjk->...lkij', gamma, gamma)
             - np.einsum('...ljm,...mik->...lkij', gamma, gamma))
    return np.einsum('...lkij,...ld->...ijkd', upper, metric(points))


class MetricField:
    '''
    The chart metric of ℍPⁿ normalised to ν = 1, with its Levi-Civita calculus.
    Arguments:
        n: the quaternionic dimension (>= 2)
        fd_step: the finite-difference step used by every derivative in this class
        richardson: if True, second-derivative quantities get one Richardson refinement
        metric_jacobian: 'closed_form' to differentiate the chart metric exactly, or
           'finite_difference' to difference it like everything else
    Raises:
        InvalidStructureException for a bad n or Jacobian mode
        ChartEvaluationException for an out-of-range step
    '''
    def __init__(self, n, fd_step=QK_FD_STEP, richardson=True, metric_jacobian=METRIC_JACOBIAN_CLOSED_FORM):
        self.n = check_dimension(n)
        self.dimension = 4 * self.n
        self.fd_step = check_step(fd_step)
        self.richardson = bool(richardson)
        if metric_jacobian not in METRIC_JACOBIANS:
            raise InvalidStructureException(f'Unknown metric Jacobian {metric_jacobian}, expected one of {METRIC_JACOBIANS}')
        self.metric_jacobian_mode = metric_jacobian
        self.structure = standard_structure(self.n)
        self.structures = self.structure.structures
        self._slopes = self._projection(np.eye(self.dimension))
        self.scale = 1.0
        self.scale = self._calibrate()
        logging.info(f'Chart metric of HP^{self.n} calibrated with scale {self.scale:.12f}')

    def _projection(self, points):
        # rows of Σ_a conj(q_a) dq_a, as a (4 x 4n) matrix linear in the point
        blocks = quaternion_conjugate(points.reshape(points.shape[:-1] + (self.n, 4)))
        left = left_multiplication_matrix(blocks)
        return np.moveaxis(left, -3, -2).reshape(points.shape[:-1] + (4, self.dimension))

    def _calibrate(self):
        origin = np.zeros(self.dimension)
        values = self.riemann_components(origin)
        inverse = np.linalg.inv(self.metric(origin))
        ricci = np.einsum('id,ijkd->jk', inverse, values)
        scalar = float(np.einsum('jk,jk->', inverse, ricci))
        return scalar / (4.0 * self.n * (self.n + 2)) / QK_REDUCED_SCALAR_CURVATURE

    def validate_points(self, points):
        '''
        Check that points lie in the trusted part of the chart.
        Raises:
            ChartEvaluationException for a wrong shape, a non-finite coordinate or |q| > 1e3
        '''
        points = np.asarray(points, dtype=float)
        if points.ndim == 0 or points.shape[-1] != self.dimension:
            raise ChartEvaluationException(f'Chart points must have last axis {self.dimension}, not shape {points.shape}')
        if not np.all(np.isfinite(points)):
            raise ChartEvaluationException('Chart point has a non-finite coordinate')
        radius = float(np.max(np.linalg.norm(points, axis=-1)))
        if radius > QK_CHART_RADIUS_LIMIT:
            raise ChartEvaluationException(f'Chart point at |q| = {radius:.3e} is beyond {QK_CHART_RADIUS_LIMIT}')
        return points

    def metric(self, points):
        '''
        The metric components g_ij at points (..., 4n), no validation
        '''
        points = np.asarray(points, dtype=float)
        conformal = 1.0 / (1.0 + np.sum(points * points, axis=-1))
        projection = self._projection(points)
        gram = np.einsum('...mi,...mj->...ij', projection, projection)
        identity = np.eye(self.dimension)
        return self.scale * (conformal[..., None, None] * identity - conformal[..., None, None] ** 2 * gram)

    def metric_jacobian(self, points):
        '''
        First derivatives of the metric, jacobian[..., k, i, j] = ∂_k g_ij
        '''
        points = np.asarray(points, dtype=float)
        if self.metric_jacobian_mode == METRIC_JACOBIAN_FINITE_DIFFERENCE:
            return partial_derivatives(self.metric, points, self.fd_step)
        conformal = (1.0 / (1.0 + np.sum(points * points, axis=-1)))[..., None, None, None]
        projection = self._projection(points)
        gram = np.einsum('...mi,...mj->...ij', projection, projection)[..., None, :, :]
        coordinate = points[..., :, None, None]
        identity = np.eye(self.dimension)
        moving = (np.einsum('kmi,...mj->...kij', self._slopes, projection)
                  + np.einsum('...mi,kmj->...kij', projection, self._slopes))
        jacobian = (-2.0 * coordinate * conformal ** 2 * identity
                    + 4.0 * coordinate * conformal ** 3 * gram
                    - conformal ** 2 * moving)
        return self.scale * jacobian

    def metric_at(self, p):
        '''
        The metric at chart point(s) p.
        Raises:
            ChartEvaluationException if p is outside the chart or the metric isn't positive definite there
        '''
        points = self.validate_points(p)
        metric = self.metric(points)
        if np.min(np.linalg.eigvalsh(metric)) <= 0.0:
            raise ChartEvaluationException('The chart metric lost positive definiteness')
        return metric

    def christoffel(self, points):
        '''
        gamma[..., k, i, j] = Γ^k_ij
        '''
        return levi_civita(self.metric(points), self.metric_jacobian(points))

    def christoffel_at(self, p):
        return self.christoffel(self.validate_points(p))

    def riemann_components(self, points, step=None):
        '''
        Coordinate curvature components values[..., i, j, k, d] = g(R(∂_i, ∂_j)∂_k, ∂_d)
        '''
        step = self.fd_step if step is None else step
        return riemann_from_christoffel(self.christoffel, self.metric, points, step, self.richardson)

    def riemann_at(self, p):
        '''
        The curvature at chart point p, as a CurvatureTensor in the admissible frame at p
        (where the model expression must hold with the standard structure)
        '''
        point = check_vector(self.validate_points(p), self.dimension, 'chart point')
        frame = self.frames.frame(point)
        values = np.einsum('ijkl,ia,jb,kc,ld->abcd', self.riemann_components(point), frame, frame, frame, frame)
        return CurvatureTensor(values)

    def ricci_components(self, points):
        values = self.riemann_components(points)
        inverse = np.linalg.inv(self.metric(points))
        return np.einsum('...id,...ijkd->...jk', inverse, values)

    def ricci_at(self, p):
        return self.ricci_components(self.validate_points(p))

    def scalar_curvature_at(self, p):
        points = self.validate_points(p)
        inverse = np.linalg.inv(self.metric(points))
        return np.einsum('...jk,...jk->...', inverse, self.ricci_components(points))

    @property
    def frames(self):
        return FrameField(self)

    '''
    Covariant calculus on coordinate components.  Every field is a callable taking
    points (..., 4n); a vector field returns (..., 4n) contravariant components, a covariant
    r-tensor or r-form returns (..., 4n, ..., 4n).
    '''

    def vector_jacobian(self, field, points, step=None):
        '''
        ∇X of a vector field, jacobian[..., i, k] = ∂_i X^k + Γ^k_ij X^j (the ∂_i derivative of X, component k)
        '''
        points = np.asarray(points, dtype=float)
        step = self.fd_step if step is None else step
        partials = partial_derivatives(field, points, step)
        return partials + np.einsum('...kij,...j->...ik', self.christoffel(points), field(points))

    def nabla_form(self, field, points, step=None):
        '''
        The 2-form (U, V) -> g(∇_U X, V) of a vector field X
        '''
        return np.einsum('...ik,...kj->...ij', self.vector_jacobian(field, points, step), self.metric(points))

    def tensor_derivative(self, field, points, step=None):
        '''
        ∇T of a covariant tensor field, derivative[..., k, i_1, .., i_r] = (∇_k T)_{i_1 .. i_r}
        '''
        points = np.asarray(points, dtype=float)
        step = self.fd_step if step is None else step
        values = np.asarray(field(points))
        rank = _field_rank(values, points)
        partials = partial_derivatives(field, points, step)
        if rank == 0:
            return partials
        return partials - _connection_terms(values, self.christoffel(points), rank)

    def covariant_derivative(self, field, p, direction, kind='form'):
        '''
        ∇_Y of a field at a point, for kind 'vector' (contravariant) or 'form' (covariant)
        Raises:
            InvalidStructureException for an unknown kind
        '''
        point = check_vector(self.validate_points(p), self.dimension, 'chart point')
        direction = check_vector(direction, self.dimension, 'direction')
        if kind == 'vector':
            return direction @ self.vector_jacobian(field, point)
        if kind == 'form':
            return np.tensordot(direction, self.tensor_derivative(field, point), axes=([0], [0]))
        raise InvalidStructureException(f'Unknown field kind {kind}, expected vector or form')

    def exterior_derivative(self, field, points, step=None):
        '''
        d of an r-form field, the alternating sum of its covariant derivative
        '''
        points = np.asarray(points, dtype=float)
        derivative = self.tensor_derivative(field, points, step)
        batch = points.ndim - 1
        rank = derivative.ndim - batch - 1
        result = 0.0
        for slot in range(rank + 1):
            result = result + (-1) ** slot * np.moveaxis(derivative, batch, batch + slot)
        return result

    def codifferential(self, field, points, step=None):
        '''
        δ of an r-form field, (δψ)_{i_2 .. i_r} = -g^{ka}(∇_k ψ)_{a i_2 .. i_r}
        '''
        points = np.asarray(points, dtype=float)
        derivative = self.tensor_derivative(field, points, step)
        rank = derivative.ndim - points.ndim
        rest = _INDEX_LETTERS[:rank - 1]
        inverse = np.linalg.inv(self.metric(points))
        return -np.einsum(f'...kz,...kz{rest}->...{rest}', inverse, derivative)

    def laplacian_parts(self, field, points):
        '''
        (dδψ, δdψ) for a form field, each with one Richardson refinement when enabled
        '''
        points = np.asarray(points, dtype=float)

        def d_delta(step):
            return self.exterior_derivative(lambda y: self.codifferential(field, y, step), points, step)

        def delta_d(step):
            return self.codifferential(lambda y: self.exterior_derivative(field, y, step), points, step)
        return refined(d_delta, self.fd_step, self.richardson), refined(delta_d, self.fd_step, self.richardson)

    def laplacian(self, field, points):
        '''
        The Hodge Laplacian Δ = dδ + δd of a form field
        '''
        d_delta, delta_d = self.laplacian_parts(field, points)
        return d_delta + delta_d

    def rough_laplacian(self, field, points):
        '''
        ∇*∇ψ = -g^{ab} ∇²ψ(∂_a, ∂_b) of a covariant tensor field
        '''
        points = np.asarray(points, dtype=float)

        def estimate(step):
            second = self.tensor_derivative(lambda y: self.tensor_derivative(field, y, step), points, step)
            rank = second.ndim - points.ndim - 1
            rest = _INDEX_LETTERS[:rank]
            inverse = np.linalg.inv(self.metric(points))
            return -np.einsum(f'...yz,...yz{rest}->...{rest}', inverse, second)
        return refined(estimate, self.fd_step, self.richardson)

    def coordinate_kaehler(self, points):
        '''
        Coordinate components of the Kähler forms ω_i = g(J_i ., .), shape (..., 3, 4n, 4n)
        '''
        return kaehler_components(self.structures, self.metric(points))

    def lower(self, vectors, points):
        return np.einsum('...ab,...b->...a', self.metric(points), vectors)

    def __repr__(self):
        return f'MetricField(n={self.n}, scale={self.scale:.6g}, fd_step={self.fd_step})'


def check_frame(frame, metric):
    '''
    Make sure the columns of frame are orthonormal for metric.
    Raises:
        InvalidStructureException if the Gram matrix deviates from the identity by more than 1e-10
    '''
    gram = np.einsum('...ia,...ij,...jb->...ab', frame, metric, frame)
    deviation = float(np.max(np.abs(gram - np.eye(gram.shape[-1]))))
    if deviation > QK_GRAM_TOLERANCE:
        raise InvalidStructureException(f'Frame is not orthonormal: Gram deviation {deviation:.3e}')
    return frame


class FrameField:
    '''
    The admissible orthonormal frame E(p) = g(p)^{-1/2}.  E commutes with the constant chart
    structures, so in this frame the structure is the standard one at every point.
    '''
    def __init__(self, metric_field):
        self.metric_field = metric_field
        self.n = metric_field.n

    def _eigen(self, points):
        return np.linalg.eigh(self.metric_field.metric(points))

    def frame(self, points):
        values, vectors = self._eigen(points)
        return np.einsum('...ak,...k,...bk->...ab', vectors, values ** -0.5, vectors)

    def inverse_frame(self, points):
        values, vectors = self._eigen(points)
        return np.einsum('...ak,...k,...bk->...ab', vectors, values ** 0.5, vectors)

    def frame_at(self, p):
        '''
        The admissible frame at p, columns E_a with coordinates frame[:, a].
        Raises:
            ChartEvaluationException outside the chart
            InvalidStructureException if the computed frame fails the orthonormality gate
        '''
        metric = self.metric_field.metric_at(p)
        return check_frame(self.frame(p), metric)

    def structure_at(self, p):
        '''
        The quaternionic structure at p expressed in the frame at p
        '''
        frame = self.frame_at(p)
        inverse = self.inverse_frame(p)
        return QuaternionicStructure(self.n, np.einsum('ab,ibc,cd->iad', inverse, self.metric_field.structures, frame))

    def to_frame(self, forms, points):
        '''
        Frame components of covariant 2-tensors given in coordinates
        '''
        frame = self.frame(points)
        return np.einsum('...ia,...ij,...jb->...ab', frame, forms, frame)

    def from_frame(self, forms, points):
        inverse = self.inverse_frame(points)
        return np.einsum('...ai,...ab,...bj->...ij', inverse, forms, inverse)


def sample_points(n, count, rng, radius=1.0):
    '''
    count chart points uniformly distributed in the ball |q| <= radius
    '''
    dimension = 4 * check_dimension(n)
    directions = rng.normal(size=(count, dimension))
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    radii = radius * rng.uniform(size=(count, 1)) ** (1.0 / dimension)
    return directions * radii


def sample_unit_vectors(metric_field, points, rng):
    '''
    One random g-unit tangent vector per point
    '''
    points = np.asarray(points, dtype=float)
    vectors = rng.normal(size=points.shape)
    norms = np.sqrt(np.einsum('...a,...ab,...b->...', vectors, metric_field.metric(points), vectors))
    return vectors / norms[..., None]


class KillingField:
    '''
    The Killing vector field of an element ξ of sp(n+1), stored as an (n+1) x (n+1) quaternionic
    matrix (array (n+1, n+1, 4)) with ξ + ξ* = 0.  Its value at the chart point q is
    top(ξv) - q bottom(ξv) with v = (q, 1), and its flow is the chart image of exp(tξ).
    Raises an InvalidStructureException if ξ isn't skew-Hermitian.
    '''
    def __init__(self, xi):
        xi = np.asarray(xi, dtype=float)
        if xi.ndim != 3 or xi.shape[0] != xi.shape[1] or xi.shape[2] != 4:
            raise InvalidStructureException(f'ξ must have shape (n+1, n+1, 4), not {xi.shape}')
        self.n = check_dimension(xi.shape[0] - 1)
        self.dimension = 4 * self.n
        adjoint = quaternion_conjugate(np.swapaxes(xi, 0, 1))
        deviation = float(np.max(np.abs(xi + adjoint)))
        if deviation > QK_GRAM_TOLERANCE * max(1.0, float(np.max(np.abs(xi)))):
            raise InvalidStructureException(f'ξ is not skew-Hermitian (deviation {deviation:.3e})')
        self.xi = xi
        size = 4 * (self.n + 1)
        self.generator = np.transpose(left_multiplication_matrix(xi), (0, 2, 1, 3)).reshape(size, size)

    def _homogeneous(self, points):
        unit = np.zeros(points.shape[:-1] + (4,))
        unit[..., 0] = 1.0
        return np.concatenate([points, unit], axis=-1)

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        image = np.einsum('ij,...j->...i', self.generator, self._homogeneous(points))
        blocks = points.reshape(points.shape[:-1] + (self.n, 4))
        top = image[..., :self.dimension].reshape(blocks.shape)
        bottom = image[..., self.dimension:]
        return (top - quaternion_multiply(blocks, bottom[..., None, :])).reshape(points.shape)

    def flow(self, points, t):
        '''
        The chart image of exp(tξ) applied to points
        Raises:
            ChartEvaluationException if the image leaves the affine chart
        '''
        points = np.asarray(points, dtype=float)
        image = np.einsum('ij,...j->...i', expm(t * self.generator), self._homogeneous(points))
        bottom = image[..., self.dimension:]
        if np.min(np.linalg.norm(bottom, axis=-1)) < 1.0 / QK_CHART_RADIUS_LIMIT:
            raise ChartEvaluationException('The flow carries the point out of the affine chart')
        top = image[..., :self.dimension].reshape(points.shape[:-1] + (self.n, 4))
        return quaternion_multiply(top, quaternion_inverse(bottom)[..., None, :]).reshape(points.shape)

    def is_isotropy(self):
        '''
        True iff the field vanishes at the origin of the chart
        '''
        return bool(np.allclose(self.xi[:self.n, self.n], 0.0))

    def __add__(self, other):
        return KillingField(self.xi + other.xi)

    def __mul__(self, scalar):
        return KillingField(float(scalar) * self.xi)

    __rmul__ = __mul__

    def __repr__(self):
        return f'KillingField(n={self.n})'


def killing_basis(n):
    '''
    A basis of sp(n+1): the imaginary units on the diagonal, and for a < b the pairs
    ξ_ab = e, ξ_ba = -conj(e) for e in {1, i, j, k}.  There are (n+1)(2n+3) of them.
    '''
    n = check_dimension(n)
    units = np.eye(4)
    basis = []
    for a in range(n + 1):
        for unit in (1, 2, 3):
            xi = np.zeros((n + 1, n + 1, 4))
            xi[a, a] = units[unit]
            basis.append(KillingField(xi))
    for a in range(n + 1):
        for b in range(a + 1, n + 1):
            for unit in range(4):
                xi = np.zeros((n + 1, n + 1, 4))
                xi[a, b] = units[unit]
                xi[b, a] = -quaternion_conjugate(units[unit])
                basis.append(KillingField(xi))
    return basis


def random_killing_field(n, rng):
    '''
    A random combination of the basis fields
    '''
    basis = killing_basis(n)
    coefficients = rng.normal(size=len(basis))
    return KillingField(sum(c * field.xi for c, field in zip(coefficients, basis)))


def killing_value(field, p):
    return field(check_vector(p, field.dimension, 'chart point'))


def killing_flow(field, p, t):
    return field.flow(check_vector(p, field.dimension, 'chart point'), t)


def killing_residual(metric_field, field, p):
    '''
    |L_X g| at p, the symmetrised covariant derivative of X
    '''
    point = metric_field.validate_points(p)
    nabla = metric_field.nabla_form(field, point)
    inverse = np.linalg.inv(metric_field.metric(point))
    return float(symmetric_norm(nabla + np.swapaxes(nabla, -1, -2), inverse))


def model_riemann_components(metric_field, p):
    '''
    Coordinate components of the model curvature -(ν/4)(X∧Y + Σ J_i X∧J_i Y + 2Σ ω_i(X, Y) ω_i)
    at p, built from the chart metric and its Kähler forms without differentiating
    '''
    point = metric_field.validate_points(p)
    return model_curvature_components(metric_field.structures, metric_field.coordinate_kaehler(point),
                                      metric_field.metric(point), QK_REDUCED_SCALAR_CURVATURE)


def kostant_residual(metric_field, field, p, direction):
    '''
    |∇_Y(∇X) - R(Y, X)| at p, with ∇X read as the 2-form (U, V) -> g(∇_U X, V).  The left side
    is differentiated numerically, R is the model curvature of ℍPⁿ.
    '''
    point = check_vector(metric_field.validate_points(p), metric_field.dimension, 'chart point')
    direction = check_vector(direction, metric_field.dimension, 'direction')
    derivative = metric_field.tensor_derivative(lambda y: metric_field.nabla_form(field, y), point)
    lhs = np.einsum('k,kij->ij', direction, derivative)
    rhs = np.einsum('abcd,a,b->cd', model_riemann_components(metric_field, point), direction, field(point))
    return float(form_norm(lhs - rhs, np.linalg.inv(metric_field.metric(point))))


def curvature_projection_residual(metric_field, p, x, v):
    '''
    Deviation of the projections of the finite-difference curvature R(X, V) from
    R(X, V)^{S²H} = -(ν/2) Σ ω_i(X, V) ω_i and R(X, V)^{S²E} = -ν (X∧V)^{S²E}
    '''
    point = check_vector(metric_field.validate_points(p), metric_field.dimension, 'chart point')
    metric = metric_field.metric(point)
    inverse = np.linalg.inv(metric)
    kaehler = metric_field.coordinate_kaehler(point)
    curvature = np.einsum('abcd,a,b->cd', metric_field.riemann_components(point), x, v)
    s2h = s2h_components(curvature, kaehler, inverse)[1]
    s2e = s2e_components(curvature, metric_field.structures)
    expected_s2h = -0.5 * QK_REDUCED_SCALAR_CURVATURE * np.einsum('u,iuv,v,iab->ab', x, kaehler, v, kaehler)
    decomposable = wedge_components(metric @ x, metric @ v)
    expected_s2e = -QK_REDUCED_SCALAR_CURVATURE * s2e_components(decomposable, metric_field.structures)
    return float(form_norm(s2h - expected_s2h, inverse) + form_norm(s2e - expected_s2e, inverse))


def metric_compatibility_residual(metric_field, p):
    '''
    max |∇g| at p
    '''
    point = metric_field.validate_points(p)
    return float(np.max(np.abs(metric_field.tensor_derivative(metric_field.metric, point))))


def q_parallelism_residual(metric_field, p, direction):
    '''
    The largest component of ∇_Y ω_i off span{ω_1, ω_2, ω_3}
    '''
    point = check_vector(metric_field.validate_points(p), metric_field.dimension, 'chart point')
    inverse = np.linalg.inv(metric_field.metric(point))
    kaehler = metric_field.coordinate_kaehler(point)
    worst = 0.0
    for index in range(3):
        derivative = metric_field.tensor_derivative(lambda y: metric_field.coordinate_kaehler(y)[..., index, :, :], point)
        moved = np.einsum('k,kij->ij', direction, derivative)
        off = moved - s2h_components(moved, kaehler, inverse)[1]
        worst = max(worst, float(form_norm(off, inverse)))
    return worst


def isotropy_pullback_residual(metric_field, field, p, t):
    '''
    Relative deviation of φ*g from g at p, for the isometry φ = exp(tξ)
    '''
    point = check_vector(metric_field.validate_points(p), metric_field.dimension, 'chart point')
    jacobian = partial_derivatives(lambda y: field.flow(y, t), point, metric_field.fd_step)
    image = field.flow(point, t)
    pulled = np.einsum('ik,kl,jl->ij', jacobian, metric_field.metric_at(image), jacobian)
    metric = metric_field.metric(point)
    return float(np.max(np.abs(pulled - metric)) / np.max(np.abs(metric)))


class PolynomialField:
    '''
    A polynomial tensor field of degree 2 in the chart coordinates, with coefficient arrays
    for the constant, linear and quadratic parts.  Used as a generic (non-Killing,
    non-conformal-Killing) field by the negative controls and the identity checks.
    '''
    def __init__(self, constant, linear, quadratic, antisymmetric=False):
        self.constant = constant
        self.linear = linear
        self.quadratic = quadratic
        self.antisymmetric = antisymmetric

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        letters = _INDEX_LETTERS[:np.ndim(self.constant)]
        linear = np.einsum(f'...k,k{letters}->...{letters}', points, self.linear)
        quadratic = 0.5 * np.einsum(f'...k,...l,kl{letters}->...{letters}', points, points, self.quadratic)
        values = self.constant + linear + quadratic
        if self.antisymmetric:
            values = 0.5 * (values - np.swapaxes(values, -1, -2))
        return values


def random_vector_field(n, rng, scale=0.5):
    dimension = 4 * check_dimension(n)
    return PolynomialField(rng.normal(scale=scale, size=dimension),
                           rng.normal(scale=scale, size=(dimension, dimension)),
                           rng.normal(scale=scale, size=(dimension, dimension, dimension)))


def random_one_form_field(n, rng, scale=0.5):
    return random_vector_field(n, rng, scale)


def random_form_field(n, rng, scale=0.5):
    '''
    A random polynomial 2-form field of degree 2
    '''
    dimension = 4 * check_dimension(n)
    return PolynomialField(rng.normal(scale=scale, size=(dimension, dimension)),
                           rng.normal(scale=scale, size=(dimension, dimension, dimension)),
                           rng.normal(scale=scale, size=(dimension, dimension, dimension, dimension)),
                           antisymmetric=True)
