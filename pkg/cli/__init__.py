# Command-line driver: run configs, skeleton/path persistence, comparison harness
from .app import build_parser, main
from .harness import compare, run_sampler
from .models import CompareConfig, ComparisonRow, RunConfig

__all__ = ["CompareConfig", "ComparisonRow", "RunConfig", "build_parser", "compare", "main", "run_sampler"]
