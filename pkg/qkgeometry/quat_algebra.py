'''
Pointwise linear algebra of a quaternionic-Kähler tangent space: quaternions, quaternionic
structures (J1, J2, J3), 2-forms and their parallel decomposition into S²H, S²E and the rest,
the algebraic curvature of the model space and the curvature endomorphism q(R).
Nothing in this module differentiates; every routine is exact up to round-off.

The array-level routines (the ones ending in _components, and the norms and inner products)
are batched over leading axes and take an optional metric, so the geometry modules can use them
on coordinate components.  The TwoForm / QuaternionicStructure / CurvatureTensor classes work
in an orthonormal frame, where the metric is the identity.
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

import numpy as np

from qkgeometry.qk_utils import InvalidStructureException, check_dimension, check_vector
from qkgeometry.qk_utils import QK_ANTISYMMETRY_TOLERANCE, QK_GRAM_TOLERANCE, QK_REDUCED_SCALAR_CURVATURE


def _quaternion_product_table():
    # table[m, l, k] is the m-th component of e_l * e_k, for the basis (1, i, j, k)
    products = {
        (0, 0): (0, 1), (0, 1): (1, 1), (0, 2): (2, 1), (0, 3): (3, 1),
        (1, 0): (1, 1), (1, 1): (0, -1), (1, 2): (3, 1), (1, 3): (2, -1),
        (2, 0): (2, 1), (2, 1): (3, -1), (2, 2): (0, -1), (2, 3): (1, 1),
        (3, 0): (3, 1), (3, 1): (2, 1), (3, 2): (1, -1), (3, 3): (0, -1),
    }
    table = np.zeros((4, 4, 4))
    for (left, right), (component, sign) in products.items():
        table[component, left, right] = sign
    return table


QUATERNION_PRODUCT = _quaternion_product_table()
QUATERNION_CONJUGATION = np.diag([1.0, -1.0, -1.0, -1.0])


def quaternion_multiply(p, q):
    '''
    The quaternion product p*q, batched over leading axes.  Quaternions are arrays whose
    last axis holds the (1, i, j, k) components.
    '''
    return np.einsum('mlk,...l,...k->...m', QUATERNION_PRODUCT, p, q)


def quaternion_conjugate(p):
    return np.asarray(p) @ QUATERNION_CONJUGATION


def quaternion_inverse(p):
    p = np.asarray(p, dtype=float)
    return quaternion_conjugate(p) / np.sum(p * p, axis=-1, keepdims=True)


def left_multiplication_matrix(p):
    '''
    The real 4x4 matrix of x -> p*x
    '''
    return np.einsum('mlk,...l->...mk', QUATERNION_PRODUCT, p)


def right_multiplication_matrix(q):
    '''
    The real 4x4 matrix of x -> x*q
    '''
    return np.einsum('mlk,...k->...ml', QUATERNION_PRODUCT, q)


'''
Array-level operations on form components.  All of them are batched over leading axes, and
take the inverse metric when the components are coordinate components; with no metric the
components are taken in an orthonormal frame.
'''


def kaehler_components(structures, metric=None):
    '''
    The Kähler forms ω_i = g(J_i ., .) of three structures.
    Arguments:
        structures: array (..., 3, D, D) of endomorphisms J_1, J_2, J_3 (acting on columns)
        metric: the metric (..., D, D), or None for an orthonormal frame
    Returns:
        array (..., 3, D, D) with omega[..., i, u, v] = g(J_i e_u, e_v)
    '''
    if metric is None:
        return np.swapaxes(structures, -1, -2)
    return np.einsum('...iku,...kv->...iuv', structures, metric)


def form_inner(alpha, beta, metric_inverse=None):
    '''
    The inner product of 2-forms, half the full contraction of their components
    '''
    if metric_inverse is None:
        return 0.5 * np.einsum('...ab,...ab->...', alpha, beta)
    return 0.5 * np.einsum('...ac,...bd,...ab,...cd->...', metric_inverse, metric_inverse, alpha, beta)


def form_norm(alpha, metric_inverse=None):
    return np.sqrt(np.maximum(form_inner(alpha, alpha, metric_inverse), 0.0))


def three_form_norm(beta, metric_inverse=None):
    '''
    The norm of a 3-form, with a sixth of the full contraction as its square
    '''
    if metric_inverse is None:
        square = np.einsum('...abc,...abc->...', beta, beta) / 6.0
    else:
        square = np.einsum('...ad,...be,...cf,...abc,...def->...', metric_inverse, metric_inverse,
                           metric_inverse, beta, beta) / 6.0
    return np.sqrt(np.maximum(square, 0.0))


def vector_norm(vector, metric=None):
    if metric is None:
        return np.linalg.norm(vector, axis=-1)
    return np.sqrt(np.maximum(np.einsum('...a,...ab,...b->...', vector, metric, vector), 0.0))


def covector_norm(covector, metric_inverse=None):
    if metric_inverse is None:
        return np.linalg.norm(covector, axis=-1)
    return np.sqrt(np.maximum(np.einsum('...a,...ab,...b->...', covector, metric_inverse, covector), 0.0))


def symmetric_norm(tensor, metric_inverse=None):
    '''
    The full-contraction norm of a symmetric (or any) covariant 2-tensor
    '''
    if metric_inverse is None:
        square = np.einsum('...ab,...ab->...', tensor, tensor)
    else:
        square = np.einsum('...ac,...bd,...ab,...cd->...', metric_inverse, metric_inverse, tensor, tensor)
    return np.sqrt(np.maximum(square, 0.0))


def endomorphism_norm(endomorphism, metric=None, metric_inverse=None):
    '''
    The Frobenius norm of an endomorphism in an orthonormal frame, tr(P* P) under the square root
    '''
    if metric is None:
        square = np.einsum('...ab,...ab->...', endomorphism, endomorphism)
    else:
        square = np.einsum('...ab,...ac,...cd,...db->...', metric_inverse, endomorphism, metric, endomorphism)
    return np.sqrt(np.maximum(square, 0.0))


def wedge_components(alpha, beta):
    '''
    The wedge of two 1-forms, (α∧β)(U, V) = α(U)β(V) - β(U)α(V)
    '''
    return np.einsum('...u,...v->...uv', alpha, beta) - np.einsum('...u,...v->...uv', beta, alpha)


def one_form_wedge_two_form(alpha, omega):
    '''
    The 3-form (α∧ω)(a, b, c) = α_a ω_bc - α_b ω_ac + α_c ω_ab
    '''
    return (np.einsum('...a,...bc->...abc', alpha, omega)
            - np.einsum('...b,...ac->...abc', alpha, omega)
            + np.einsum('...c,...ab->...abc', alpha, omega))


def s2h_components(forms, kaehler, metric_inverse=None):
    '''
    The projection onto S²H = span{ω_1, ω_2, ω_3}.
    Arguments:
        forms: 2-form components (..., D, D)
        kaehler: the Kähler forms (..., 3, D, D)
        metric_inverse: inverse metric (..., D, D) or None in an orthonormal frame
    Returns:
        (coefficients, projection): coefficients (..., 3) of the ω_i, and the projected form
    '''
    forms = np.asarray(forms)
    # |ω_i|^2 = 2n
    dimension = forms.shape[-1]
    inverse = None if metric_inverse is None else np.asarray(metric_inverse)[..., None, :, :]
    coefficients = form_inner(forms[..., None, :, :], kaehler, inverse) / (dimension / 2.0)
    return coefficients, np.einsum('...i,...iuv->...uv', coefficients, kaehler)


def s2e_components(forms, structures):
    '''
    The projection onto S²E, the forms invariant under all of J_1, J_2, J_3:
    (ψ + Σ J_i*ψ) / 4 with (J*ψ)(U, V) = ψ(JU, JV)
    '''
    pulled = np.einsum('...iku,...kl,...ilv->...uv', structures, forms, structures)
    return 0.25 * (forms + pulled)


def q_curvature_components(values, forms):
    '''
    q(R)ψ = Σ E_j ∧ i_{E_i}(R(E_i, E_j)ψ), where R(X, Y) acts on 2-forms as a derivation,
    in an orthonormal frame.
    Arguments:
        values: curvature components values[a, b, c, d] = g(R(E_a, E_b)E_c, E_d)
        forms: 2-form components (..., D, D)
    Returns:
        q(R)ψ components (..., D, D)
    '''
    contracted = -(np.einsum('ijid,...dv->...jv', values, forms)
                   + np.einsum('ijvd,...id->...jv', values, forms))
    return contracted - np.swapaxes(contracted, -1, -2)


def _check_form_components(components):
    components = np.asarray(components, dtype=float)
    if components.ndim != 2 or components.shape[0] != components.shape[1]:
        raise InvalidStructureException(f'2-form components must be a square matrix, not shape {components.shape}')
    if components.shape[0] % 4 != 0:
        raise InvalidStructureException(f'2-form components must have a dimension divisible by 4, not {components.shape[0]}')
    if not np.all(np.isfinite(components)):
        raise InvalidStructureException('2-form components must be finite')
    scale = max(1.0, float(np.max(np.abs(components))))
    deviation = float(np.max(np.abs(components + components.T)))
    if deviation > QK_ANTISYMMETRY_TOLERANCE * scale:
        raise InvalidStructureException(f'2-form components are not antisymmetric (deviation {deviation:.3e})')
    return 0.5 * (components - components.T)


class TwoForm:
    '''
    A 2-form on a 4n-dimensional tangent space, given by its antisymmetric component matrix in an
    orthonormal frame.  Raises an InvalidStructureException if the components aren't an
    antisymmetric (4n x 4n) matrix.
    Arguments:
        components: the (4n x 4n) component matrix, components[u, v] = ψ(E_u, E_v)
    '''
    def __init__(self, components):
        self.components = _check_form_components(components)
        self.dimension = self.components.shape[0]
        self.n = self.dimension // 4

    def _coerce(self, other):
        if not isinstance(other, TwoForm):
            raise InvalidStructureException(f'Expected a TwoForm, not {type(other)}')
        if other.dimension != self.dimension:
            raise InvalidStructureException(f'Dimension mismatch: {self.dimension} and {other.dimension}')
        return other.components

    def __add__(self, other):
        return TwoForm(self.components + self._coerce(other))

    def __sub__(self, other):
        return TwoForm(self.components - self._coerce(other))

    def __neg__(self):
        return TwoForm(-self.components)

    def __mul__(self, scalar):
        return TwoForm(float(scalar) * self.components)

    __rmul__ = __mul__

    def inner(self, other):
        '''
        The inner product, half the Frobenius sum of the component products
        '''
        return float(form_inner(self.components, self._coerce(other)))

    def norm(self):
        return float(form_norm(self.components))

    def endomorphism(self):
        '''
        The skew endomorphism A with g(A U, V) = ψ(U, V)
        '''
        return self.components.T.copy()

    def __repr__(self):
        return f'TwoForm(n={self.n}, norm={self.norm():.6g})'


class QuaternionicStructure:
    '''
    An admissible basis (J_1, J_2, J_3) of the quaternionic structure on an orthonormal frame:
    each J_i is orthogonal, J_i^2 = -Id and J_1 J_2 = J_3.  Raises an InvalidStructureException
    if any of these fails by more than QK_GRAM_TOLERANCE.
    Arguments:
        n: the quaternionic dimension
        structures: array (3, 4n, 4n), the matrices of J_1, J_2, J_3 acting on column vectors
    '''
    def __init__(self, n, structures):
        self.n = check_dimension(n)
        self.dimension = 4 * self.n
        structures = np.asarray(structures, dtype=float)
        if structures.shape != (3, self.dimension, self.dimension):
            raise InvalidStructureException(
                f'Structures must have shape (3, {self.dimension}, {self.dimension}), not {structures.shape}')
        identity = np.eye(self.dimension)
        checks = {
            'J_i^2 = -Id': np.einsum('iab,ibc->iac', structures, structures) + identity,
            'J_i orthogonal': np.einsum('iba,ibc->iac', structures, structures) - identity,
            'J_1 J_2 = J_3': structures[0] @ structures[1] - structures[2],
        }
        for relation, deviation in checks.items():
            worst = float(np.max(np.abs(deviation)))
            if worst > QK_GRAM_TOLERANCE:
                raise InvalidStructureException(f'Quaternionic relation {relation} fails by {worst:.3e}')
        self.structures = structures
        self.kaehler = kaehler_components(structures)

    def relation_residual(self):
        '''
        The worst deviation from the quaternion relations, including J_2 J_3 = J_1 and J_3 J_1 = J_2
        '''
        J = self.structures
        identity = np.eye(self.dimension)
        deviations = [J[i] @ J[i] + identity for i in range(3)]
        deviations += [J[i] @ J[(i + 1) % 3] - J[(i + 2) % 3] for i in range(3)]
        deviations += [J[i] @ J[(i + 1) % 3] + J[(i + 1) % 3] @ J[i] for i in range(3)]
        return max(float(np.max(np.abs(deviation))) for deviation in deviations)

    def __repr__(self):
        return f'QuaternionicStructure(n={self.n})'


def standard_structure(n):
    '''
    The standard admissible basis on ℍⁿ = ℝ^{4n}, quaternion blocks ordered (1, i, j, k):
    J_a is right multiplication by the conjugate of the a-th imaginary unit on each block,
    so that J_1 J_2 = J_3.
    Arguments:
        n: the quaternionic dimension (>= 2)
    Returns:
        a QuaternionicStructure
    '''
    n = check_dimension(n)
    blocks = [right_multiplication_matrix(quaternion_conjugate(np.eye(4)[unit])) for unit in (1, 2, 3)]
    structures = np.array([np.kron(np.eye(n), block) for block in blocks])
    return QuaternionicStructure(n, structures)


def _check_structure(structure):
    if not isinstance(structure, QuaternionicStructure):
        raise InvalidStructureException(f'Expected a QuaternionicStructure, not {type(structure)}')
    return structure


def _check_matching(form, structure):
    _check_structure(structure)
    if not isinstance(form, TwoForm):
        raise InvalidStructureException(f'Expected a TwoForm, not {type(form)}')
    if form.dimension != structure.dimension:
        raise InvalidStructureException(f'Dimension mismatch: form {form.dimension}, structure {structure.dimension}')


def kaehler_form(structure, i):
    '''
    The Kähler form ω_i = g(J_i ., .), i in {1, 2, 3}
    '''
    _check_structure(structure)
    if i not in (1, 2, 3):
        raise InvalidStructureException(f'Kähler forms are indexed by 1, 2, 3, not {i}')
    return TwoForm(structure.kaehler[i - 1])


def wedge(x, y, structure=None):
    '''
    The decomposable 2-form X∧Y, (X∧Y)(U, V) = g(X, U)g(Y, V) - g(Y, U)g(X, V)
    '''
    dimension = np.asarray(x).shape[-1] if structure is None else _check_structure(structure).dimension
    x = check_vector(x, dimension, 'first vector')
    y = check_vector(y, dimension, 'second vector')
    return TwoForm(wedge_components(x, y))


def project_S2H(form, structure):
    _check_matching(form, structure)
    return TwoForm(s2h_components(form.components, structure.kaehler)[1])


def project_S2E(form, structure):
    _check_matching(form, structure)
    return TwoForm(s2e_components(form.components, structure.structures))


def decompose(form, structure):
    '''
    Split a 2-form along Λ² = S²H ⊕ S²E ⊕ (S²H ⊗ Λ²₀E).
    Returns:
        (s2h, s2e, rest), three TwoForms that sum to form
    '''
    s2h = project_S2H(form, structure)
    s2e = project_S2E(form, structure)
    return s2h, s2e, form - s2h - s2e


def decomposable_projections(x, y, structure):
    '''
    The closed forms of the projections of X∧Y:
    (X∧Y)^{S²H} = (1/2n) Σ ω_i(X, Y) ω_i and (X∧Y)^{S²E} = (1/4)(X∧Y + Σ J_i X ∧ J_i Y)
    Returns:
        (s2h, s2e) as TwoForms
    '''
    _check_structure(structure)
    x = check_vector(x, structure.dimension, 'first vector')
    y = check_vector(y, structure.dimension, 'second vector')
    coefficients = np.einsum('u,iuv,v->i', x, structure.kaehler, y)
    s2h = np.einsum('i,iuv->uv', coefficients, structure.kaehler) / (2.0 * structure.n)
    rotated = [wedge_components(J @ x, J @ y) for J in structure.structures]
    s2e = 0.25 * (wedge_components(x, y) + sum(rotated))
    return TwoForm(s2h), TwoForm(s2e)


def random_two_form(n, rng, scale=1.0):
    dimension = 4 * check_dimension(n)
    components = rng.normal(scale=scale, size=(dimension, dimension))
    return TwoForm(components - components.T)


class CurvatureTensor:
    '''
    An algebraic curvature tensor in an orthonormal frame, values[a, b, c, d] = g(R(E_a, E_b)E_c, E_d).
    With this convention the round sphere of curvature K has values = -K (E_a∧E_b)(E_c, E_d)
    and the Ricci tensor is Ric[b, c] = Σ_a values[a, b, c, a].
    '''
    def __init__(self, values):
        values = np.asarray(values, dtype=float)
        if values.ndim != 4 or len(set(values.shape)) != 1:
            raise InvalidStructureException(f'Curvature values must have shape (D, D, D, D), not {values.shape}')
        self.values = values
        self.dimension = values.shape[0]
        self.n = self.dimension // 4

    def ricci(self):
        return np.einsum('abca->bc', self.values)

    def scalar(self):
        return float(np.trace(self.ricci()))

    def acting(self, x, y):
        '''
        The curvature 2-form (U, V) -> g(R(X, Y)U, V)
        '''
        return TwoForm(np.einsum('abcd,a,b->cd', self.values, x, y))

    def symmetry_residual(self):
        '''
        The worst failure of the algebraic symmetries: antisymmetry in each pair, pair symmetry
        and the first Bianchi identity
        '''
        R = self.values
        scale = max(1.0, float(np.max(np.abs(R))))
        deviations = [
            R + np.einsum('abcd->bacd', R),
            R + np.einsum('abcd->abdc', R),
            R - np.einsum('abcd->cdab', R),
            R + np.einsum('abcd->bcad', R) + np.einsum('abcd->cabd', R),
        ]
        return max(float(np.max(np.abs(deviation))) for deviation in deviations) / scale

    def relative_deviation(self, other):
        if not isinstance(other, CurvatureTensor) or other.dimension != self.dimension:
            raise InvalidStructureException('Curvature tensors of different dimensions cannot be compared')
        scale = max(float(np.max(np.abs(other.values))), np.finfo(float).tiny)
        return float(np.max(np.abs(self.values - other.values))) / scale

    def __repr__(self):
        return f'CurvatureTensor(dimension={self.dimension})'


def model_curvature_components(structures, kaehler, metric, nu=QK_REDUCED_SCALAR_CURVATURE):
    '''
    Components of R(X, Y) = -(ν/4)(X∧Y + Σ J_i X∧J_i Y + 2Σ ω_i(X, Y) ω_i), the curvature of a
    quaternionic-Kähler metric with vanishing quaternionic Weyl part, in any frame with metric g
    '''
    g = np.asarray(metric)
    base = np.einsum('ac,bd->abcd', g, g) - np.einsum('bc,ad->abcd', g, g)
    rotated = np.einsum('iac,ibd->abcd', kaehler, kaehler) - np.einsum('ibc,iad->abcd', kaehler, kaehler)
    kaehler_square = 2.0 * np.einsum('iab,icd->abcd', kaehler, kaehler)
    return -(nu / 4.0) * (base + rotated + kaehler_square)


def model_curvature(structure, nu=QK_REDUCED_SCALAR_CURVATURE):
    '''
    The curvature of ℍPⁿ with reduced scalar curvature ν, Ric = ν(n+2)g, in an orthonormal frame
    adapted to structure.
    '''
    _check_structure(structure)
    if not nu > 0.0:
        raise InvalidStructureException(f'The reduced scalar curvature must be positive, not {nu}')
    return CurvatureTensor(model_curvature_components(structure.structures, structure.kaehler,
                                                     np.eye(structure.dimension), nu))


def q_of_R(curvature, form, structure=None, gram=None):
    '''
    The curvature endomorphism q(R) applied to a 2-form.  It acts by 4ν on S²H and by 2ν(n+2) on
    S²H ⊗ Λ²₀E for the model curvature.
    Arguments:
        curvature: a CurvatureTensor
        form: a TwoForm in the same frame
        structure: optionally the QuaternionicStructure of that frame, checked against the form
        gram: optionally the Gram matrix g(E_a, E_b) of the frame, which must be the identity
    Returns:
        q(R)ψ as a TwoForm
    Raises:
        InvalidStructureException for mismatched inputs or a frame that isn't orthonormal
    '''
    if not isinstance(curvature, CurvatureTensor):
        raise InvalidStructureException(f'Expected a CurvatureTensor, not {type(curvature)}')
    if not isinstance(form, TwoForm) or form.dimension != curvature.dimension:
        raise InvalidStructureException('q(R) needs a TwoForm of the curvature dimension')
    if structure is not None:
        _check_matching(form, structure)
    if gram is not None:
        gram = np.asarray(gram, dtype=float)
        if gram.shape != (form.dimension, form.dimension):
            raise InvalidStructureException(f'Gram matrix must have shape ({form.dimension}, {form.dimension})')
        deviation = float(np.max(np.abs(gram - np.eye(form.dimension))))
        if deviation > QK_GRAM_TOLERANCE:
            raise InvalidStructureException(f'Frame is not orthonormal: Gram deviation {deviation:.3e}')
    return TwoForm(q_curvature_components(curvature.values, form.components))
