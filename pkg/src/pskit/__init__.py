"""Phase-space pictures of one-dimensional wave packets.

Wigner functions, Fermi-function zero sets g_F = 0, their contours and
the quartic-oscillator dynamics used to compare them.
"""

from .packets import AnalyticPacket, PhysConfig, SampledWavefunction, make_gaussian
from .wigner import PhaseSpaceGrid, ScalarField, wigner_transform
from .fermi import FermiCurve, fermi_branches, fermi_field, reconstruct_wavefunction
from .contour import Polyline, enclosed_area, extract_level_set, hausdorff_distance

__all__ = [
    "AnalyticPacket", "PhysConfig", "SampledWavefunction", "make_gaussian",
    "PhaseSpaceGrid", "ScalarField", "wigner_transform",
    "FermiCurve", "fermi_branches", "fermi_field", "reconstruct_wavefunction",
    "Polyline", "enclosed_area", "extract_level_set", "hausdorff_distance",
]
__version__ = "0.1.0"
