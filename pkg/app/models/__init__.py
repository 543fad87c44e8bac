from app.models.enums import BandFeature, CriticalPoint, EPaForm, GapCharacter
from app.models.matrix import EigenResult, HermitianMatrix

__all__ = [
    "BandFeature",
    "CriticalPoint",
    "EPaForm",
    "GapCharacter",
    "EigenResult",
    "HermitianMatrix",
]
