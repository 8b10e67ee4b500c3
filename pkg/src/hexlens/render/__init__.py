from .params import Camera, LensState, RenderParams, TransferFunction
from .composite import CapacityError, FragmentBuffer, sort_and_composite
from .pipeline import RenderResult, Scene, render

__all__ = [
    "Scene",
    "Camera",
    "LensState",
    "RenderParams",
    "TransferFunction",
    "CapacityError",
    "FragmentBuffer",
    "sort_and_composite",
    "RenderResult",
    "render",
]
