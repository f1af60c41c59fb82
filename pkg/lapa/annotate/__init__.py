from lapa.annotate.backends import ApiBackend, Backend, CachingBackend, ReplayBackend, RuleBackend
from lapa.annotate.cache import ResponseCache
from lapa.annotate.pipeline import AnnotateConfig, AnnotationRun, classify, run_pipeline, segment

__all__ = [
    "AnnotateConfig",
    "AnnotationRun",
    "ApiBackend",
    "Backend",
    "CachingBackend",
    "ReplayBackend",
    "ResponseCache",
    "RuleBackend",
    "classify",
    "run_pipeline",
    "segment",
]
