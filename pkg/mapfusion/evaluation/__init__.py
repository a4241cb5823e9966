"""
Trajectory evaluation: association, rigid alignment and horizontal ATE.
"""

from .ate import AteReport, align_6dof, associate, ate_2d, evaluate
from .trajectory import Trajectory

__all__ = ['AteReport', 'align_6dof', 'associate', 'ate_2d', 'evaluate', 'Trajectory']
