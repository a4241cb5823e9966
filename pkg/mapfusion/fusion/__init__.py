"""
Factor-graph back-end and the online fusion loop.
"""

from .factors import BetweenFactor, PriorFactor
from .noise import NoiseModel, map_prior_noise
from .optimizer import FusionGraph, OptimizationResult, optimize
from .session import FusionSession, StepRecord, replay

__all__ = [
    'BetweenFactor', 'PriorFactor', 'NoiseModel', 'map_prior_noise', 'FusionGraph',
    'OptimizationResult', 'optimize', 'FusionSession', 'StepRecord', 'replay',
]
