from .nanorod import nanorod_cmd
from .beam import beam_cmd
from .inse import inse_cmd
from .check import check_cmd
from .sweep import sweep_cmd
from .version import version_cmd

__all__ = [
    'nanorod_cmd', 'beam_cmd', 'inse_cmd',
    'check_cmd', 'sweep_cmd', 'version_cmd'
]
