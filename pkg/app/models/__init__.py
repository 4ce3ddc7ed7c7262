from .enums import CheckTarget, ExitCode, ModelKind
from .mesh import Mesh1D, Mesh2D
from .system import LatentPair, PHSystemBundle, PortSnapshot, StructureReport
from .states import (BalanceReport, BeamState, EnstrophyLedger, InseState, NanorodState,
                     TimeSeries)
from .configs import BeamConfig, InseConfig, NanorodConfig, RunConfig

__all__ = [
    'CheckTarget', 'ExitCode', 'ModelKind',
    'Mesh1D', 'Mesh2D',
    'LatentPair', 'PHSystemBundle', 'PortSnapshot', 'StructureReport',
    'BalanceReport', 'BeamState', 'EnstrophyLedger', 'InseState', 'NanorodState', 'TimeSeries',
    'BeamConfig', 'InseConfig', 'NanorodConfig', 'RunConfig'
]
