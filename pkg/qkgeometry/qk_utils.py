'''
Constants and utilities for the quaternionic-Kähler geometry library
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

""" Dimensions and the model normalisation """

QK_MIN_N = 2
QK_REDUCED_SCALAR_CURVATURE = 1.0

""" Finite-difference scheme """

QK_FD_STEP = 1e-3
QK_FD_STEP_MIN = 1e-6
QK_FD_STEP_MAX = 1e-1
QK_OBATA_OUTER_STEP = 2e-2
QK_CHART_RADIUS_LIMIT = 1e3

""" Admissibility gates """

QK_GRAM_TOLERANCE = 1e-10
QK_FIBER_TOLERANCE = 1e-8
QK_ANTISYMMETRY_TOLERANCE = 1e-10

""" Default tolerance classes """

QK_TOLERANCE_ALGEBRAIC = 1e-10
QK_TOLERANCE_FIRST_ORDER = 1e-5
QK_TOLERANCE_SECOND_ORDER = 1e-3

'''
Exceptions for the geometry library
'''


class InvalidStructureException(Exception):
    '''
    An exception thrown when an algebraic input is malformed: a dimension below 2,
    a 2-form that isn't antisymmetric, a frame that isn't orthonormal, a fiber
    vector off the unit sphere, a vertical vector that isn't orthogonal to its fiber point,
    or an unknown case selector
    '''
    def __init__(self, message):
        super().__init__(message)
        self.message = message


class ChartEvaluationException(Exception):
    '''
    An exception thrown when a chart evaluation can't be trusted: a point outside the
    chart, a metric that lost positive definiteness, or a finite-difference step out of range
    '''
    def __init__(self, message):
        super().__init__(message)
        self.message = message


def check_dimension(n):
    '''
    Make sure that n is an integer quaternionic dimension of at least QK_MIN_N.
    Arguments:
        n: the quaternionic dimension
    Returns:
        n, as an int
    Raises:
        InvalidStructureException if n is not an integer >= QK_MIN_N
    '''
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise InvalidStructureException(f'The quaternionic dimension must be an integer, not {type(n)}')
    if n < QK_MIN_N:
        raise InvalidStructureException(f'The quaternionic dimension must be at least {QK_MIN_N}, not {n}')
    return int(n)


def check_step(step):
    '''
    Make sure a finite-difference step lies strictly inside (QK_FD_STEP_MIN, QK_FD_STEP_MAX)
    Arguments:
        step: the step
    Returns:
        the step, as a float
    Raises:
        ChartEvaluationException if the step is outside the admissible range
    '''
    try:
        step = float(step)
    except (TypeError, ValueError):
        raise ChartEvaluationException(f'The finite-difference step must be a number, not {step}')
    if not (QK_FD_STEP_MIN < step < QK_FD_STEP_MAX):
        raise ChartEvaluationException(
            f'The finite-difference step {step} is outside ({QK_FD_STEP_MIN}, {QK_FD_STEP_MAX})')
    return step


def check_vector(vector, dimension, name='vector'):
    '''
    Convert vector to a float array of shape (dimension,)
    Raises:
        InvalidStructureException if the shape is wrong or an entry isn't finite
    '''
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (dimension,):
        raise InvalidStructureException(f'The {name} must have shape ({dimension},), not {vector.shape}')
    if not np.all(np.isfinite(vector)):
        raise InvalidStructureException(f'The {name} has a non-finite entry')
    return vector
