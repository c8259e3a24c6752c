from bcsynth.sdp.instance import BlockInfo, MultiplierInfo, SdpInstance
from bcsynth.sdp.solver import SdpSolution, SolverConfig, residuals, solve
from bcsynth.sdp.sdpa import export_sdpa

__all__ = [
    "BlockInfo",
    "MultiplierInfo",
    "SdpInstance",
    "SdpSolution",
    "SolverConfig",
    "residuals",
    "solve",
    "export_sdpa",
]
