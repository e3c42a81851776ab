from .config import ExperimentConfig
from .io import ResultRow
from .suite import SuiteResult, verify_suite

__all__ = ["ExperimentConfig", "ResultRow", "SuiteResult", "verify_suite"]
