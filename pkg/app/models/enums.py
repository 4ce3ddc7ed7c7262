from enum import Enum, IntEnum


class ModelKind(Enum):
    NANOROD = "nanorod"
    BEAM = "beam"
    INSE = "inse"
    CHECK = "check"
    SWEEP = "sweep"


class CheckTarget(Enum):
    NANOROD = "nanorod"
    NANOROD_FREE = "nanorod-free"
    BEAM = "beam"
    BEAM_EXPLICIT = "beam-explicit"
    INSE = "inse"


class ExitCode(IntEnum):
    OK = 0
    CONFIG_ERROR = 1
    SOLVER_FAILURE = 2
    STRUCTURE_FAILURE = 3
