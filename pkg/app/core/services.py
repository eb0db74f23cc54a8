"""Pipeline stages: each reads the previous stage's outputs and writes its own plus a manifest."""

import json
import logging
import random
from abc import ABC, abstractmethod
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from app.adapters.loaders import (
    load_categories,
    load_labeled_examples,
    load_link_patterns,
    load_rank_lists,
    load_site_list,
    load_snippets,
    read_lines,
)
from app.core.analysis.changepoints import ChangePointConfig, changepoint_concentration
from app.core.analysis.corpus_stats import (
    category_distribution,
    gdpr_validation,
    interval_counts,
    length_by_bucket,
    length_report,
    rank_bucket_stats,
    readability_by_bucket,
    readability_report,
    snapshots_per_site,
    update_by_bucket,
    update_report,
)
from app.core.analysis.lemmatizer import Lemmatizer
from app.core.analysis.links import outbound_policy_links
from app.core.analysis.matchers import load_matchers, match_terms, overall_share, validate_matchers
from app.core.analysis.trends import surface_trends
from app.core.classifier.text import load_stopwords
from app.core.classifier.training import classify, train_policy_classifier
from app.core.config import Settings
from app.core.crawler import HOMEPAGE_HTML, POLICY_HTML, SiteCrawler, detect_site_language
from app.core.curation import PublicSuffixes, curate, failure_stats
from app.core.errors import ArchiveError, ConfigurationError
from app.core.extraction import extract_main_content, extract_title, to_markdown, visible_text
from app.core.interfaces import IArchiveClient
from app.core.intervals import build_target_list, interval_range, parse_interval
from app.core.language import TrigramLanguageDetector, detect_language, is_english
from app.core.models import (
    SUCCESS,
    AttemptRecord,
    FailureCause,
    Interval,
    PolicyDocument,
    SiteRecord,
    SnapshotRef,
)
from app.core.snapshots import group_by_interval, in_interval
from app.infrastructure.manifests import Manifest, ManifestStore, files_digest, text_digest
from app.infrastructure.reports import CsvReportWriter
from app.infrastructure.storage import CorpusStorage, ModelStorage

logger = logging.getLogger(__name__)

STAGES = ("discover", "fetch", "extract", "classify", "train", "curate", "analyze", "report")
PREREQUISITES: Dict[str, Tuple[str, ...]] = {
    "discover": (),
    "fetch": ("discover",),
    "extract": ("fetch",),
    "train": (),
    "classify": ("extract", "train"),
    "curate": ("classify",),
    "analyze": ("curate",),
    "report": ("analyze",),
}
# outcomes a record can carry once its policy page was captured
POLICY_CAPTURED = (SUCCESS, FailureCause.NON_ENGLISH_POLICY.value, FailureCause.CLASSIFIED_NEGATIVE.value)


class PipelineResources:
    """Config-data files, loaded on first use."""

    def __init__(self, settings: Settings):
        self.settings = settings

    @cached_property
    def stopwords(self):
        return load_stopwords(self.settings.resource(self.settings.classifier.stopwords_file, "stopwords.txt"))

    @cached_property
    def link_patterns(self):
        return load_link_patterns(self.settings.resource(self.settings.extraction.link_patterns_file, "link_patterns.txt"))

    @cached_property
    def detector(self) -> TrigramLanguageDetector:
        directory = self.settings.resource(self.settings.extraction.language_profiles_dir, "languages")
        return TrigramLanguageDetector.from_directory(directory)

    @cached_property
    def suffixes(self) -> PublicSuffixes:
        return PublicSuffixes.from_file(self.settings.resource(self.settings.curation.public_suffix_file, "public_suffixes.txt"))

    @cached_property
    def parking_domains(self) -> List[str]:
        return [line.lower() for line in read_lines(self.settings.resource(self.settings.curation.parking_file, "parking_providers.txt"))]

    @cached_property
    def lemmatizer(self) -> Lemmatizer:
        return Lemmatizer.from_file(self.settings.resource(None, "lemma_exceptions.txt"))

    @cached_property
    def matchers(self):
        return load_matchers(self.settings.resource(self.settings.analysis.matchers_dir, "matchers"))

    @cached_property
    def gdpr_phrases(self) -> List[str]:
        return read_lines(self.settings.resource(self.settings.analysis.gdpr_phrases_file, "gdpr_phrases.txt"))


class PipelineContext:
    def __init__(self, settings: Settings, archive: Optional[IArchiveClient] = None, limiter=None):
        self.settings = settings
        self.archive = archive
        self.limiter = limiter
        self.corpus = CorpusStorage(Path(settings.paths.corpus))
        self.reports = CsvReportWriter(Path(settings.paths.reports))
        self.models = ModelStorage(Path(settings.paths.models))
        self.manifests = ManifestStore(Path(settings.paths.corpus))
        self.resources = PipelineResources(settings)

    @property
    def roots(self) -> List[Path]:
        return [self.corpus.root, self.reports.directory, self.models.path.parent]

    def require_archive(self) -> IArchiveClient:
        if self.archive is None:
            raise ConfigurationError("This stage needs an archive client")
        return self.archive

    def crawl_intervals(self) -> List[Interval]:
        crawl = self.settings.crawl
        return interval_range(parse_interval(crawl.first_interval), parse_interval(crawl.last_interval))


@dataclass
class StageOutcome:
    counts: dict
    outputs: List[Path]
    inputs: List[str] = field(default_factory=list)
    metrics: dict = field(default_factory=dict)


class StageService(ABC):
    name: str = ""

    def __init__(self, context: PipelineContext):
        self.context = context
        self.settings = context.settings

    def run(self) -> Manifest:
        upstream = self.context.manifests.upstream_digests(self.name, PREREQUISITES[self.name])
        logger.info(f"Stage {self.name}: starting")
        outcome = self.execute()
        manifest = Manifest(
            stage=self.name,
            inputs_digest=text_digest(*[f"{k}={v}" for k, v in sorted(upstream.items())], *outcome.inputs),
            config_digest=self.settings.digest(),
            outputs_digest=files_digest(outcome.outputs, self.context.roots),
            upstream=upstream,
            counts=outcome.counts,
            metrics=outcome.metrics,
        )
        self.context.manifests.write(manifest)
        logger.info(f"Stage {self.name}: done {json.dumps(outcome.counts, sort_keys=True)}")
        return manifest

    @abstractmethod
    def execute(self) -> StageOutcome:
        pass

    def _report(self, name: str, frame: pd.DataFrame, outputs: List[Path]) -> None:
        outputs.append(self.context.reports.write(name, frame))


def site_rng(seed: int, domain: str) -> random.Random:
    return random.Random(f"{seed}:{domain}")


def document_from_record(record: AttemptRecord, markdown: str) -> PolicyDocument:
    return PolicyDocument(
        site=record.site,
        interval=parse_interval(record.interval),
        policy_url=record.policy_url,
        policy_timestamp=record.policy_timestamp,
        title=record.title,
        markdown=markdown,
        link_text=record.link_text,
        language=record.language or "en",
        classifier_score=record.classifier_score,
    )


def _followable(ref: SnapshotRef) -> bool:
    """2xx captures and 3xx redirect captures; fetching polices where redirects land."""
    return 200 <= ref.status < 400


def _outcome_counts(records: Sequence[AttemptRecord]) -> dict:
    return dict(sorted(Counter(r.outcome for r in records).items()))


class DiscoveryService(StageService):
    """Target list, snapshot listings and site-level language."""

    name = "discover"

    def execute(self) -> StageOutcome:
        archive = self.context.require_archive()
        sites, inputs = self._targets()
        categories_file = self.settings.analysis.categories_file
        if categories_file:
            categories = load_categories(Path(categories_file))
            for domain, site in sites.items():
                site.categories = categories.get(domain, [])
        intervals = set(self.context.crawl_intervals())

        def discover(site: SiteRecord) -> int:
            try:
                listed = archive.list_snapshots(site.domain)
            except ArchiveError as e:
                logger.error(f"Snapshot listing for {site.domain} failed: {str(e)}")
                listed = []
            snapshots = [ref for ref in listed if _followable(ref) and any(in_interval(ref, i) for i in intervals)]
            self.context.corpus.save_snapshots(site.domain, snapshots)
            language, confidence = detect_site_language(
                snapshots,
                archive,
                self.context.resources.detector,
                site_rng(self.settings.seed, site.domain),
                self.settings.crawl.language_fallback_snapshots,
            )
            site.language, site.language_confidence = language, round(confidence, 6)
            return len(snapshots)

        with ThreadPoolExecutor(max_workers=self.settings.archive.workers) as pool:
            snapshot_counts = list(pool.map(discover, [sites[d] for d in sorted(sites)]))
        self.context.corpus.save_sites(sites)
        min_conf = self.settings.extraction.min_language_confidence
        excluded = [s.domain for s in sites.values() if not is_english(s.language, s.language_confidence, min_conf)]
        for domain in sorted(excluded):
            logger.info(f"Excluding non-English site {domain} ({sites[domain].language})")
        outputs = [self.context.corpus.root / "sites.jsonl"]
        outputs += [self.context.corpus.root / "snapshots" / f"{d}.jsonl" for d in sites]
        counts = {"sites": len(sites), "snapshots": sum(snapshot_counts), "excluded_non_english": len(excluded)}
        return StageOutcome(counts=counts, outputs=outputs, inputs=inputs)

    def _targets(self) -> Tuple[Dict[str, SiteRecord], List[str]]:
        crawl = self.settings.crawl
        if crawl.sites_file:
            domains = load_site_list(Path(crawl.sites_file))
            return {d: SiteRecord(domain=d) for d in domains}, domains
        if crawl.rank_lists_dir:
            rank_lists = load_rank_lists(Path(crawl.rank_lists_dir))
            sites: Dict[str, SiteRecord] = {}
            build_target_list(rank_lists, crawl.cutoff, sites)
            return sites, sorted(sites)
        raise ConfigurationError("Set crawl.sites_file or crawl.rank_lists_dir")


class FetchService(StageService):
    """Homepage and policy captures for every (site, interval), logged per attempt."""

    name = "fetch"

    def execute(self) -> StageOutcome:
        corpus = self.context.corpus
        resources = self.context.resources
        crawler = SiteCrawler(
            self.context.require_archive(),
            corpus,
            resources.detector,
            resources.link_patterns,
            self.settings.extraction.blank_threshold,
            self.settings.extraction.min_language_confidence,
        )
        min_conf = self.settings.extraction.min_language_confidence
        intervals = set(self.context.crawl_intervals())
        tasks = []
        for domain, site in sorted(corpus.load_sites().items()):
            if not is_english(site.language or "und", site.language_confidence, min_conf):
                continue
            snapshots = corpus.load_snapshots(domain)
            for interval in sorted(group_by_interval(snapshots)):
                if interval in intervals:
                    tasks.append((domain, interval, snapshots))

        corpus.metadata.clear()

        def attempt(task) -> Optional[AttemptRecord]:
            domain, interval, snapshots = task
            try:
                record = crawler.crawl(domain, interval, snapshots)
            except Exception as e:
                logger.error(f"{domain} {interval}: attempt failed: {str(e)}")
                record = AttemptRecord(site=domain, interval=str(interval), outcome=FailureCause.FETCH_ERROR.value)
            if record is not None:
                corpus.metadata.append(record)
            return record

        with ThreadPoolExecutor(max_workers=self.settings.archive.workers) as pool:
            list(pool.map(attempt, tasks))
        records = corpus.metadata.read()
        corpus.metadata.rewrite(records)
        outputs = [corpus.metadata.path]
        outputs += [corpus.capture_path(r.site, r.interval, name) for r in records for name in (HOMEPAGE_HTML, POLICY_HTML)]
        metrics = self.context.limiter.metrics() if self.context.limiter else {}
        if metrics:
            logger.info(f"Archive requests: {json.dumps(metrics, sort_keys=True)}")
        return StageOutcome(counts={"attempts": len(records), **_outcome_counts(records)}, outputs=outputs, metrics=metrics)


class ExtractionService(StageService):
    """Main content of each captured policy page as markdown, plus the policy language check."""

    name = "extract"

    def execute(self) -> StageOutcome:
        corpus = self.context.corpus
        detector = self.context.resources.detector
        min_conf = self.settings.extraction.min_language_confidence
        records = corpus.metadata.read()
        outputs = [corpus.metadata.path]
        for record in records:
            if record.outcome not in POLICY_CAPTURED or not corpus.has_capture(record.site, record.interval, POLICY_HTML):
                continue
            html = corpus.load_capture(record.site, record.interval, POLICY_HTML)
            markdown = to_markdown(extract_main_content(html))
            record.title = extract_title(html)
            record.classifier_score = None
            language, confidence = detect_language(visible_text(markdown), detector)
            record.language = language
            if not is_english(language, confidence, min_conf, allow_undetermined=False):
                record.outcome = FailureCause.NON_ENGLISH_POLICY.value
                continue
            record.outcome = SUCCESS
            outputs.append(corpus.save_policy(record.site, record.interval, markdown))
        corpus.metadata.rewrite(records)
        return StageOutcome(counts=_outcome_counts(records), outputs=outputs)


class TrainingService(StageService):
    name = "train"

    def execute(self) -> StageOutcome:
        labels_file = self.settings.classifier.labels_file
        if not labels_file:
            raise ConfigurationError("Set classifier.labels_file to train the policy classifier")
        examples = load_labeled_examples(Path(labels_file))
        model, report = train_policy_classifier(
            examples, self.settings.classifier, self.settings.seed, self.context.resources.stopwords
        )
        outputs = [self.context.models.save(model)]
        self._report("classifier_cv", pd.DataFrame(report.cv_rows, columns=["kind", "params", "mean_auc"]), outputs)
        evaluation = {k: v for k, v in report.evaluation.items() if k != "roc"}
        evaluation = {"kind": model.kind, "params": json.dumps(model.hyperparameters, sort_keys=True), **evaluation}
        self._report("classifier_eval", pd.DataFrame([evaluation]), outputs)
        roc = pd.DataFrame(report.evaluation.get("roc", []), columns=["threshold", "fpr", "tpr"])
        self._report("classifier_roc", roc, outputs)
        counts = {"examples": len(examples), "positives": sum(1 for e in examples if e.label), "kind": model.kind}
        return StageOutcome(counts=counts, outputs=outputs, inputs=[model.training_digest])


class ClassificationService(StageService):
    name = "classify"

    def execute(self) -> StageOutcome:
        corpus = self.context.corpus
        model = self.context.models.load()
        stopwords = self.context.resources.stopwords
        records = corpus.metadata.read()
        for record in records:
            if record.outcome not in (SUCCESS, FailureCause.CLASSIFIED_NEGATIVE.value):
                continue
            markdown = corpus.load_policy(record.site, record.interval)
            if markdown is None:
                continue
            score, is_policy = classify(document_from_record(record, markdown), model, stopwords)
            record.classifier_score = score
            record.outcome = SUCCESS if is_policy else FailureCause.CLASSIFIED_NEGATIVE.value
        corpus.metadata.rewrite(records)
        return StageOutcome(counts=_outcome_counts(records), outputs=[corpus.metadata.path], inputs=[model.training_digest])


class CurationService(StageService):
    name = "curate"

    def execute(self) -> StageOutcome:
        corpus = self.context.corpus
        resources = self.context.resources
        records = corpus.metadata.read()
        result = curate(records, resources.parking_domains, resources.suffixes)
        corpus.curated.rewrite(result.kept)
        outputs = [corpus.curated.path]
        self._report("curation", pd.DataFrame([s.model_dump() for s in result.stages], columns=["stage", "removed_count", "kept_count"]), outputs)
        failures = pd.DataFrame([row.model_dump() for row in failure_stats(records)], columns=["cause", "count", "percent"])
        self._report("failures", failures, outputs)
        counts = {"policies": len(result.kept), **{s.stage: s.removed_count for s in result.stages}}
        return StageOutcome(counts=counts, outputs=outputs)


class AnalysisService(StageService):
    """Every longitudinal table over the curated corpus."""

    name = "analyze"

    def execute(self) -> StageOutcome:
        corpus = self.context.corpus
        resources = self.context.resources
        analysis = self.settings.analysis
        curated = corpus.curated.read()
        records = corpus.metadata.read()
        sites = corpus.load_sites()
        documents = []
        for record in curated:
            markdown = corpus.load_policy(record.site, record.interval)
            if markdown is None:
                logger.warning(f"Curated policy {record.site} {record.interval} has no markdown; skipped")
                continue
            documents.append(document_from_record(record, markdown))
        logger.info(f"Analyzing {len(documents)} policies from {len(set(d.site for d in documents))} sites")

        outputs: List[Path] = []
        self._report("rank_buckets", rank_bucket_stats(records, curated, sites), outputs)
        self._report("interval_counts", interval_counts(records, curated), outputs)
        self._report("snapshots_per_site", snapshots_per_site(curated), outputs)
        categories = {domain: site.categories for domain, site in sites.items()}
        self._report("categories", category_distribution(sorted(sites), curated, categories), outputs)

        self._report("lengths", length_report(documents), outputs)
        self._report("lengths_by_bucket", length_by_bucket(documents, sites), outputs)
        self._report("readability", readability_report(documents), outputs)
        self._report("readability_by_bucket", readability_by_bucket(documents, sites), outputs)
        self._report("updates", update_report(documents, analysis.similarity_threshold), outputs)
        self._report("updates_by_bucket", update_by_bucket(documents, sites, analysis.similarity_threshold), outputs)

        config = ChangePointConfig(penalty=analysis.changepoint_penalty, min_doc_freq=analysis.changepoint_min_doc_freq)
        rows = []
        for n in analysis.changepoint_ngram_sizes:
            for interval, count in changepoint_concentration(documents, n, config, resources.lemmatizer).items():
                rows.append({"interval": str(interval), "n": n, "changepoint_count": count})
        self._report("changepoints", pd.DataFrame(rows, columns=["interval", "n", "changepoint_count"]), outputs)

        baseline, target = parse_interval(analysis.gdpr_baseline_interval), parse_interval(analysis.gdpr_target_interval)
        selected, validation = gdpr_validation(documents, resources.gdpr_phrases, baseline, target, analysis.gdpr_max_baseline_freq)
        self._report("gdpr_validation", validation, outputs)
        self._report("gdpr_phrases", pd.DataFrame({"phrase": selected}, columns=["phrase"]), outputs)

        self._matcher_reports(documents, outputs)

        flags, ranking = outbound_policy_links(documents, resources.suffixes, resources.link_patterns)
        self._report("outbound_links", pd.DataFrame(ranking, columns=["url", "distinct_linking_sites"]), outputs)
        flag_rows = [{"site": site, "links_other_policy": flag} for site, flag in flags.items()]
        self._report("outbound_link_sites", pd.DataFrame(flag_rows, columns=["site", "links_other_policy"]), outputs)

        kinds = tuple(f"ngram{n}" for n in analysis.trend_ngram_sizes) + ("sentence", "entity", "url")
        trends = surface_trends(documents, kinds, top_k=analysis.trend_top_k, min_doc_freq=analysis.trend_min_doc_freq)
        trend_rows = [
            {"kind": kind, "scorer": scorer, "rank": rank, "term": term, "score": score}
            for (kind, scorer), ranked in trends.items()
            for rank, (term, score) in enumerate(ranked, start=1)
        ]
        self._report("trends", pd.DataFrame(trend_rows, columns=["kind", "scorer", "rank", "term", "score"]), outputs)

        counts = {"policies": len(documents), "sites": len(set(d.site for d in documents)), "reports": len(outputs)}
        return StageOutcome(counts=counts, outputs=outputs)

    def _matcher_reports(self, documents: Sequence[PolicyDocument], outputs: List[Path]) -> None:
        analysis = self.settings.analysis
        matchers = self.context.resources.matchers
        rows = []
        for name, fractions in sorted(match_terms(documents, matchers).items()):
            if overall_share(fractions) < analysis.matcher_min_share:
                continue
            rows.extend({"matcher": name, "interval": str(i), "fraction": f} for i, f in sorted(fractions.items()))
        self._report("matchers", pd.DataFrame(rows, columns=["matcher", "interval", "fraction"]), outputs)
        if analysis.matcher_snippets_file:
            snippets = load_snippets(Path(analysis.matcher_snippets_file))
            validation = pd.DataFrame(
                [row.model_dump() for row in validate_matchers(matchers, snippets)],
                columns=["matcher", "positives", "negatives", "agreement"],
            )
            self._report("matcher_validation", validation, outputs)


class ReportService(StageService):
    """Checks the manifest chain and indexes every report."""

    name = "report"

    def execute(self) -> StageOutcome:
        self.context.manifests.verify_chain([stage for stage in STAGES if stage != self.name])
        index = self.context.reports.write_index()
        reports = self.context.reports.existing()
        return StageOutcome(counts={"reports": len(reports)}, outputs=[index])


SERVICES = {
    service.name: service
    for service in (
        DiscoveryService,
        FetchService,
        ExtractionService,
        ClassificationService,
        TrainingService,
        CurationService,
        AnalysisService,
        ReportService,
    )
}
