"""Stage commands. Each stage reads and writes files in the output directory."""
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from lapa.annotate import pipeline
from lapa.annotate.backends import ApiBackend, Backend, CachingBackend, ReplayBackend, RuleBackend
from lapa.annotate.cache import ResponseCache
from lapa.annotate.pipeline import AnnotateConfig, AnnotationRun
from lapa.config import RunConfig
from lapa.env import LLMSettings
from lapa.errors import ConfigError, InsufficientDataError, JoinError, PipelineError
from lapa.ingest import load_corpus, parse_psychometrics
from lapa.metrics import (
    DEFAULT_BIN_COUNT,
    BinSpec,
    CorpusDistribution,
    corpus_distribution,
    get_metrics_df,
    get_participant_to_metrics,
    read_persistence_counts,
    write_metrics_csv,
)
from lapa.models.annotation import AnnotatedAction
from lapa.models.corpus import Corpus
from lapa.models.participant import Division, Participant
from lapa.report.figures import (
    ScatterPanel,
    fig_box,
    fig_coefficients,
    fig_frequency,
    fig_scatter_fit,
    fig_scatter_panels,
    write_figure,
)
from lapa.report.formatters import format_percent
from lapa.report.tables import emit_tables
from lapa.stats.analysis import CORRELATION_NAMES, AnalysisResult, analyze
from lapa.synth import SynthConfig, SynthOutput, generate
from lapa.taxonomy import Catalog, load_catalog
from lapa.utils import write_json

logger = logging.getLogger(__name__)

CORPUS_FILE = "corpus.json"
ANNOTATIONS_FILE = "annotations.jsonl"
FAILURES_FILE = "failures.json"
METRICS_FILE = "metrics.csv"
DISTRIBUTION_FILE = "distribution.json"
ANALYSIS_FILE = "analysis.json"


@dataclass(frozen=True)
class RunSummary:
    participant_count: int
    total_occurrences: int
    top_techniques: list[tuple[str, int, str]]
    grips_r: float
    grips_p: float

    def render(self) -> str:
        top = "; ".join(f"{name} ({count}, {percent})" for name, count, percent in self.top_techniques) or "-"
        return (
            f"participants: {self.participant_count}\n"
            f"persistence occurrences: {self.total_occurrences}\n"
            f"top techniques: {top}\n"
            f"GRiPS correlation: r={self.grips_r:.4f} p={self.grips_p:.4f}\n"
        )


def cmd_ingest(config: RunConfig) -> Corpus:
    notes_dir = config.require_dir(config.notes_dir, "notes directory")
    psychometrics = config.require_file(config.psychometrics, "psychometrics file")
    corpus = load_corpus(notes_dir, psychometrics, config.allow_partial, config.max_inflight, config.window)
    write_json(config.stage_file(CORPUS_FILE), corpus.to_dict())
    return corpus


def cmd_annotate(config: RunConfig, catalog: Catalog | None = None) -> AnnotationRun:
    corpus_path = config.require_file(config.stage_file(CORPUS_FILE), "corpus file (run `ingest` first)")
    corpus = Corpus.from_dict(json.loads(corpus_path.read_text(encoding="utf-8")))
    catalog = catalog or load_catalog(config.require_file(config.catalog, "catalog"))
    backend = build_backend(config)
    annotate_config = AnnotateConfig(
        model=LLMSettings().MODEL,
        context_window=config.context_window,
        max_inflight=config.max_inflight,
        fuzzy_threshold=config.fuzzy_threshold,
    )

    run = pipeline.run_pipeline(corpus, catalog, backend, annotate_config)
    pipeline.write_annotations(config.stage_file(ANNOTATIONS_FILE), run.actions)
    write_json(config.stage_file(FAILURES_FILE), [f.to_dict() for f in run.failures])
    if run.failures:
        logger.warning(f"Participants excluded after annotation failures: {run.failed_participant_ids}")
        if config.strict:
            raise PipelineError(f"Annotation failed for participants {run.failed_participant_ids}")
    return run


def cmd_metrics(config: RunConfig) -> CorpusDistribution:
    corpus_path = config.require_file(config.stage_file(CORPUS_FILE), "corpus file (run `ingest` first)")
    annotations_path = config.require_file(config.stage_file(ANNOTATIONS_FILE), "annotations (run `annotate` first)")
    corpus = Corpus.from_dict(json.loads(corpus_path.read_text(encoding="utf-8")))
    actions = pipeline.read_annotations(annotations_path)

    failed = set(_read_failed_ids(config.stage_file(FAILURES_FILE)))
    participant_ids = [pid for pid in corpus.participant_ids if pid not in failed]
    if not participant_ids:
        if failed:
            raise PipelineError(f"Annotation failed for every participant: {sorted(failed)}")
        raise InsufficientDataError("Corpus has no participants to measure")
    bin_spec = build_bin_spec(config, actions)
    participant_to_metrics = get_participant_to_metrics(actions, participant_ids, bin_spec)
    all_metrics = list(participant_to_metrics.values())

    write_metrics_csv(config.stage_file(METRICS_FILE), get_metrics_df(all_metrics, bin_spec))
    distribution = corpus_distribution(all_metrics)
    write_json(config.stage_file(DISTRIBUTION_FILE), distribution.to_dict())
    return distribution


def cmd_analyze(config: RunConfig) -> AnalysisResult:
    counts = read_persistence_counts(config.stage_file(METRICS_FILE))
    participants = _load_participants(config, counts)
    result = analyze(counts, participants, config.alpha)

    write_json(config.stage_file(ANALYSIS_FILE), result.to_dict())
    emit_tables(result.correlations, result.regression, config.report_dir)
    _write_analysis_figures(config.report_dir, result)
    return result


def cmd_report(config: RunConfig) -> AnalysisResult:
    result = cmd_analyze(config)
    distribution_path = config.require_file(config.stage_file(DISTRIBUTION_FILE), "distribution (run `metrics` first)")
    distribution = CorpusDistribution.from_dict(json.loads(distribution_path.read_text(encoding="utf-8")))
    if distribution.totals:
        write_figure(config.report_dir, "fig1", fig_frequency(distribution))
    else:
        logger.warning("No persistence occurrences; fig1 skipped")

    counts_by_division: dict[str, list[float]] = {}
    for group, count in zip(_division_labels(result), result.data.counts):
        counts_by_division.setdefault(group, []).append(count)
    write_figure(config.report_dir, "fig4", fig_box(counts_by_division))
    logger.info(f"Report written to {config.report_dir.as_posix()}")
    return result


def cmd_run(config: RunConfig) -> RunSummary:
    catalog = load_catalog(config.require_file(config.catalog, "catalog"))
    corpus = cmd_ingest(config)
    cmd_annotate(config, catalog)
    distribution = cmd_metrics(config)
    result = cmd_report(config)

    grips = result.correlation(CORRELATION_NAMES["grips"])
    summary = RunSummary(
        participant_count=distribution.participant_count,
        total_occurrences=distribution.grand_total,
        top_techniques=[
            (name, count, format_percent(distribution.percentages[name])) for name, count in distribution.ranked()[:3]
        ],
        grips_r=grips.r,
        grips_p=grips.p_value,
    )
    logger.info(f"Run finished for {len(corpus)} participants")
    return summary


def cmd_synth(synth_config: SynthConfig, catalog_path: Path, out_dir: Path) -> SynthOutput:
    if not catalog_path.is_file():
        raise ConfigError(f"catalog not found: {catalog_path.as_posix()}")
    return generate(synth_config, load_catalog(catalog_path), out_dir)


def build_backend(config: RunConfig) -> Backend:
    cache = ResponseCache(config.cache_dir) if config.cache_dir else None
    if config.backend == "replay":
        if cache is None:
            raise ConfigError("The replay backend needs --cache-dir")
        return ReplayBackend(cache=cache)

    inner: Backend
    if config.backend == "rules":
        inner = RuleBackend()
    else:
        llm = LLMSettings()
        if not llm.API_KEY:
            raise ConfigError("The api backend needs LLM_API_KEY")
        inner = ApiBackend(base_url=llm.BASE_URL, api_key=llm.API_KEY, model=llm.MODEL)

    return CachingBackend(inner=inner, cache=cache) if cache else inner


def build_bin_spec(config: RunConfig, actions: list[AnnotatedAction]) -> BinSpec:
    if config.stages:
        return BinSpec.from_stages([(stage.label, stage.start) for stage in config.stages])
    return BinSpec.equal_width((a.segment.start for a in actions), DEFAULT_BIN_COUNT)


def _load_participants(config: RunConfig, counts: dict[str, int]) -> list[Participant]:
    if config.psychometrics is not None:
        participants = parse_psychometrics(config.psychometrics)
    else:
        corpus_path = config.require_file(config.stage_file(CORPUS_FILE), "psychometrics file")
        participants = Corpus.from_dict(json.loads(corpus_path.read_text(encoding="utf-8"))).participants

    ids = {p.participant_id for p in participants}
    metrics_only = sorted(set(counts) - ids)
    psychometrics_only = sorted(ids - set(counts))
    failed = set(_read_failed_ids(config.stage_file(FAILURES_FILE)))
    # participants dropped by annotation failures are expected to be missing from the metrics
    unexpected = [pid for pid in psychometrics_only if pid not in failed]
    if metrics_only or unexpected:
        if not config.allow_partial:
            raise JoinError(metrics_only, unexpected)
        logger.warning(f"Partial join: metrics only={metrics_only} psychometrics only={unexpected}")
    return [p for p in participants if p.participant_id in counts]


def _read_failed_ids(path: Path) -> list[str]:
    if not path.is_file():
        return []
    return sorted({f["participant_id"] for f in json.loads(path.read_text(encoding="utf-8"))})


def _division_labels(result: AnalysisResult) -> list[str]:
    return [Division.OPEN.value if indicator else Division.EXPERT.value for indicator in result.data.division]


def _write_analysis_figures(report_dir: Path, result: AnalysisResult) -> None:
    data = result.data
    groups = _division_labels(result)
    write_figure(report_dir, "fig2a", fig_scatter_fit(data.grips, data.counts, groups, x_label="GRiPS Score"))
    panels = [
        ScatterPanel(x=data.admc_rc1, y=data.counts, groups=groups, x_label="ADMC RC1 Score"),
        ScatterPanel(x=data.admc_rc2, y=data.counts, groups=groups, x_label="ADMC RC2 Score"),
    ]
    title = "Resistance to framing and persistence technique usage"
    write_figure(report_dir, "fig2b", fig_scatter_panels(panels, title))
    write_figure(report_dir, "fig3", fig_coefficients(result.regression))
