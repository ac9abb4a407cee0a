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
Tests for the finite-difference stencils and the Richardson refinement
'''
import numpy as np
import pytest

from qkgeometry.finite_difference import partial_derivatives, directional_derivative, richardson, refined
from qkgeometry.qk_utils import ChartEvaluationException, check_step


def _cubic(points):
    return np.sum(points ** 3, axis=-1)


def test_partials_exact_on_cubics():
    '''
    The five-point stencil differentiates cubics exactly, up to round-off
    '''
    points = np.array([[0.3, -0.2, 0.7], [1.0, 2.0, -1.5]])
    partials = partial_derivatives(_cubic, points, 1e-2)
    assert partials.shape == (2, 3)
    assert np.allclose(partials, 3 * points ** 2, atol=1e-9)


def test_partials_shape_of_tensor_fields():
    # the derivative index comes right after the batch axes
    matrix = np.arange(12.0).reshape(3, 4)

    def field(points):
        return np.einsum('...k,kl->...l', points, matrix)[..., :, None] * np.ones(2)
    points = np.zeros((5, 3))
    partials = partial_derivatives(field, points, 1e-3)
    assert partials.shape == (5, 3, 4, 2)
    assert np.allclose(partials[0, :, :, 1], matrix)


def test_directional_derivative():
    points = np.array([[0.1, 0.2], [0.5, -0.4]])
    direction = np.array([1.0, 2.0])
    derivative = directional_derivative(lambda x: np.sin(x[..., 0]) * np.cos(x[..., 1]), points, direction, 1e-3)
    expected = (np.cos(points[:, 0]) * np.cos(points[:, 1])
                - 2.0 * np.sin(points[:, 0]) * np.sin(points[:, 1]))
    assert np.allclose(derivative, expected, atol=1e-10)


def test_richardson_improves():
    # the refined estimate of exp'(0) beats the plain one at a coarse step
    def estimate(step):
        return directional_derivative(np.exp, np.zeros(1), np.ones(1), step)[0]
    coarse = abs(estimate(5e-2) - 1.0)
    improved = abs(richardson(estimate, 5e-2) - 1.0)
    assert improved < coarse
    assert refined(estimate, 5e-2, False) == estimate(5e-2)
    assert refined(estimate, 5e-2, True) == richardson(estimate, 5e-2)


def test_step_range():
    assert check_step(1e-3) == 1e-3
    for step in [1e-7, 1e-6, 0.1, 0.5, -1e-3, 'x', None]:
        with pytest.raises(ChartEvaluationException):
            check_step(step)
    with pytest.raises(ChartEvaluationException):
        partial_derivatives(_cubic, np.zeros(3), 0.2)
