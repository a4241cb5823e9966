"""
Synthetic drives for testing and benchmarking fusion.
"""

from .evaluation import ArmResult, ScenarioReport, evaluate_scenario
from .generator import SimulatedDrive, generate
from .scenario import DriftSpec, GpsSpec, Scenario

__all__ = ['ArmResult', 'ScenarioReport', 'evaluate_scenario', 'SimulatedDrive', 'generate',
           'DriftSpec', 'GpsSpec', 'Scenario']
