# Zig-Zag samplers (standard, subsampled, local, fully local) and skeleton handling
from .fully_local import zigzag_fully_local
from .models import Algorithm, SamplerResult, Skeleton, SkeletonMeta, SkeletonMode
from .providers import ExactRateProvider, GaussianTarget, RateProvider, SubsampledRateProvider
from .skeleton import discretize, positions_at, read_skeleton, replay, write_skeleton
from .streams import RunStreams
from .zigzag import zigzag_local, zigzag_standard, zigzag_subsampled

__all__ = [
    "Algorithm",
    "ExactRateProvider",
    "GaussianTarget",
    "RateProvider",
    "RunStreams",
    "SamplerResult",
    "Skeleton",
    "SkeletonMeta",
    "SkeletonMode",
    "SubsampledRateProvider",
    "discretize",
    "positions_at",
    "read_skeleton",
    "replay",
    "write_skeleton",
    "zigzag_fully_local",
    "zigzag_local",
    "zigzag_standard",
    "zigzag_subsampled",
]
