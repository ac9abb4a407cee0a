'''
Fourth-order central differences, vectorised over leading batch axes, plus one-step
Richardson refinement.  A field is any callable taking points of shape (..., D) and returning
values of shape (..., *value_shape); the stencil points are handed to the field as one batch,
so nested differences (a derivative of a derivative) evaluate in a single call per level.
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

from qkgeometry.qk_utils import check_step

FD_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
FD_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def partial_derivatives(field, points, step):
    '''
    All first partial derivatives of field at points.
    Arguments:
        field: callable, (..., D) -> (..., *value_shape)
        points: array (..., D)
        step: the stencil step h, in (1e-6, 1e-1)
    Returns:
        array (..., D, *value_shape), the derivative index placed right after the batch axes
    Raises:
        ChartEvaluationException if the step is out of range
    '''
    step = check_step(step)
    points = np.asarray(points, dtype=float)
    dimension = points.shape[-1]
    offsets = step * FD_OFFSETS[:, None, None] * np.eye(dimension)[None, :, :]
    stencil = points[..., None, None, :] + offsets
    values = np.asarray(field(stencil))
    return np.tensordot(FD_WEIGHTS, values, axes=([0], [points.ndim - 1])) / step


def directional_derivative(field, points, direction, step):
    '''
    The derivative of field at points along direction (a vector, or one vector per point).
    Returns:
        array (..., *value_shape)
    '''
    step = check_step(step)
    points = np.asarray(points, dtype=float)
    direction = np.asarray(direction, dtype=float)
    stencil = points[..., None, :] + step * FD_OFFSETS[:, None] * direction[..., None, :]
    values = np.asarray(field(stencil))
    return np.tensordot(FD_WEIGHTS, values, axes=([0], [stencil.ndim - 2])) / step


def richardson(estimate, step):
    '''
    One Richardson refinement of a fourth-order estimate: (16 D(h/2) - D(h)) / 15
    Arguments:
        estimate: callable, step -> estimate
        step: the coarse step h
    '''
    return (16.0 * np.asarray(estimate(step / 2.0)) - np.asarray(estimate(step))) / 15.0


def refined(estimate, step, enabled):
    return richardson(estimate, step) if enabled else np.asarray(estimate(step))
