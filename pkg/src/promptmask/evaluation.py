"""Entity-level accuracy accounting and semantic-consistency measurement.

Scoring matches detector output against gold annotations as a multiset of
exact (surface, label) pairs. When an upstream transport is supplied, each
record is additionally pushed through mask -> upstream -> unmask, and the
restored output is compared with a baseline produced from the unmasked prompt
(cosine over embeddings, Jaro-Winkler, normalized Levenshtein).
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .detection import EntityMention, SOURCE_MANUAL, locate_spans, resolve_overlaps
from .labels import EntityLabel
from .masking import Vault, mask, unmask
from .similarity import (
    TokenCountEmbedder,
    jaro_winkler,
    normalized_levenshtein,
    semantic_similarity,
)
from .synthgen import SyntheticRecord
from .upstream import complete

logger = logging.getLogger(__name__)

Pair = tuple[str, EntityLabel]


@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def add(self, other: "Counts") -> None:
        self.tp += other.tp
        self.fp += other.fp
        self.fn += other.fn


@dataclass
class MatchCounts:
    overall: Counts = field(default_factory=Counts)
    per_label: dict[EntityLabel, Counts] = field(default_factory=dict)

    def add(self, other: "MatchCounts") -> None:
        self.overall.add(other.overall)
        for label, counts in other.per_label.items():
            self.per_label.setdefault(label, Counts()).add(counts)


def match_entities(gold: list[Pair], predicted: list[Pair]) -> MatchCounts:
    """Multiset matching on exact (surface, label) pairs.

    Each gold item matches at most one predicted item and vice versa;
    unmatched predicted items count as false positives and unmatched gold as
    false negatives. Per-label counts partition the totals.
    """
    gold_counter = Counter(gold)
    pred_counter = Counter(predicted)
    result = MatchCounts()
    labels = {label for _, label in gold_counter} | {label for _, label in pred_counter}
    for label in labels:
        counts = Counts()
        gold_pairs = {p: c for p, c in gold_counter.items() if p[1] == label}
        pred_pairs = {p: c for p, c in pred_counter.items() if p[1] == label}
        for pair, gcount in gold_pairs.items():
            counts.tp += min(gcount, pred_pairs.get(pair, 0))
        counts.fp = sum(pred_pairs.values()) - counts.tp
        counts.fn = sum(gold_pairs.values()) - counts.tp
        result.per_label[label] = counts
        result.overall.add(counts)
    return result


@dataclass
class Scores:
    precision: float
    recall: float
    f1: float
    vacuous_precision: bool = False
    vacuous_recall: bool = False


def precision_recall_f1(counts: Counts) -> Scores:
    """P = tp/(tp+fp), R = tp/(tp+fn), F1 their harmonic mean.

    An empty denominator yields 1.0 flagged as vacuous, which keeps per-label
    tables totally ordered while marking categories that carried no items.
    F1 is 0 when P + R is 0.
    """
    vac_p = (counts.tp + counts.fp) == 0
    vac_r = (counts.tp + counts.fn) == 0
    p = 1.0 if vac_p else counts.tp / (counts.tp + counts.fp)
    r = 1.0 if vac_r else counts.tp / (counts.tp + counts.fn)
    f1 = 0.0 if (p + r) == 0 else 2 * p * r / (p + r)
    return Scores(p, r, f1, vac_p, vac_r)


@dataclass
class SimilarityBlock:
    mean_cosine: float
    mean_jaro_winkler: float
    mean_levenshtein: float
    records: int


@dataclass
class EvalReport:
    detector: str
    counts: MatchCounts
    overall: Scores
    per_label: dict[EntityLabel, Scores]
    similarity: SimilarityBlock | None = None
    dataset: dict | None = None
    skipped: list[dict] = field(default_factory=list)


# ---------------------------------------------------------------------------
# detectors the harness can run

def gold_detector(record: SyntheticRecord) -> list[Pair]:
    """Scripted oracle: predicts exactly the record's gold annotations."""
    return list(record.gold)


def make_degraded_detector(drop_label: EntityLabel = EntityLabel.LOCATION,
                           spurious: Pair = ("Glarbex Consolidated", EntityLabel.COMPANY)):
    """Scripted detector that misses every `drop_label` gold item and adds one
    spurious prediction per record; used to calibrate the scoring arithmetic."""

    def detector(record: SyntheticRecord) -> list[Pair]:
        pairs = [(s, l) for s, l in record.gold if l != drop_label]
        pairs.append(spurious)
        return pairs

    return detector


def derive_gazetteer(records: list[SyntheticRecord]) -> dict[EntityLabel, list[str]]:
    """Gazetteer seeded from a dataset's gold surfaces, per label, sorted."""
    surfaces: dict[EntityLabel, set[str]] = {}
    for record in records:
        for surface, label in record.gold:
            surfaces.setdefault(label, set()).add(surface)
    return {label: sorted(values) for label, values in surfaces.items()}


def _normalize_prediction(record: SyntheticRecord, predicted) -> tuple[list[Pair], list[EntityMention]]:
    """Split detector output into scoring pairs and maskable mentions.

    Detectors may return mentions (spans known) or bare pairs; bare pairs are
    localized for masking, and unlocatable ones are skipped for masking only —
    they still count toward scoring.
    """
    pairs: list[Pair] = []
    mentions: list[EntityMention] = []
    text_bytes = record.prompt.encode("utf-8")
    located: dict[Pair, list[EntityMention]] = {}
    for item in predicted:
        if isinstance(item, EntityMention):
            pairs.append((item.surface, item.label))
            mentions.append(item)
            continue
        surface, label = item
        pairs.append((surface, label))
        key = (surface, label)
        if key not in located:
            found = []
            if surface:
                for start, end in locate_spans(record.prompt, surface):
                    actual = text_bytes[start:end].decode("utf-8")
                    found.append(EntityMention(actual, label, start, end, SOURCE_MANUAL))
            located[key] = found
    mentions.extend(m for group in located.values() for m in group)
    return pairs, mentions


def run_evaluation(
    records: list[SyntheticRecord],
    detector,
    detector_name: str,
    transport=None,
    model: str = "eval-upstream",
    temperature: float = 0.0,
    embedder=None,
    dataset_manifest: dict | None = None,
) -> EvalReport:
    """Score a detector over a dataset; optionally measure output fidelity.

    For every record the detector's predictions are matched against gold.
    With a transport, the record is also masked and dispatched, the original
    prompt is dispatched as a baseline, and the three similarity measures are
    computed between the baseline output and the unmasked pipeline output.
    Record-level failures are recorded as skips, not raised.
    """
    totals = MatchCounts()
    sims: list[tuple[float, float, float]] = []
    skipped: list[dict] = []
    embedder = embedder or TokenCountEmbedder()

    for record in records:
        try:
            predicted = detector(record)
            pairs, mentions = _normalize_prediction(record, predicted)
            totals.add(match_entities(record.gold, pairs))

            if transport is not None:
                vault = Vault(session_id=f"eval-{record.id}")
                resolved = resolve_overlaps(mentions)
                masked = mask(record.prompt, resolved, vault)
                baseline = complete(transport, model, [("user", record.prompt)], temperature)
                piped = complete(transport, model, [("user", masked.masked_text)], temperature)
                restored = unmask(piped, vault).text
                sims.append((
                    semantic_similarity(baseline, restored, embedder),
                    jaro_winkler(baseline, restored),
                    normalized_levenshtein(baseline, restored),
                ))
        except Exception as exc:
            logger.warning("skipping record %s: %s", record.id, exc)
            skipped.append({"id": record.id, "error": str(exc)})

    per_label = {label: precision_recall_f1(counts)
                 for label, counts in totals.per_label.items()}
    similarity = None
    if sims:
        similarity = SimilarityBlock(
            mean_cosine=sum(s[0] for s in sims) / len(sims),
            mean_jaro_winkler=sum(s[1] for s in sims) / len(sims),
            mean_levenshtein=sum(s[2] for s in sims) / len(sims),
            records=len(sims),
        )
    return EvalReport(
        detector=detector_name,
        counts=totals,
        overall=precision_recall_f1(totals.overall),
        per_label=per_label,
        similarity=similarity,
        dataset=dataset_manifest,
        skipped=skipped,
    )


# ---------------------------------------------------------------------------
# report serialization and plain-text tables

def report_to_dict(report: EvalReport) -> dict:
    def scores_dict(s: Scores) -> dict:
        return {
            "precision": s.precision,
            "recall": s.recall,
            "f1": s.f1,
            "vacuous_precision": s.vacuous_precision,
            "vacuous_recall": s.vacuous_recall,
        }

    def counts_dict(c: Counts) -> dict:
        return {"tp": c.tp, "fp": c.fp, "fn": c.fn}

    return {
        "detector": report.detector,
        "dataset": report.dataset,
        "overall": {**counts_dict(report.counts.overall), **scores_dict(report.overall)},
        "per_label": {
            label.name: {**counts_dict(report.counts.per_label[label]),
                         **scores_dict(scores)}
            for label, scores in sorted(report.per_label.items(), key=lambda kv: kv[0].name)
        },
        "similarity": None if report.similarity is None else {
            "mean_cosine": report.similarity.mean_cosine,
            "mean_jaro_winkler": report.similarity.mean_jaro_winkler,
            "mean_levenshtein": report.similarity.mean_levenshtein,
            "records": report.similarity.records,
        },
        "skipped": list(report.skipped),
    }


# Grid rows of the per-entity table, in presentation order.
ENTITY_TABLE_ROWS: tuple[EntityLabel, ...] = (
    EntityLabel.PERSON,
    EntityLabel.ADDRESS,
    EntityLabel.NATIONALITY,
    EntityLabel.DATE,
    EntityLabel.LOCATION,
    EntityLabel.LAW_OFFICE,
    EntityLabel.COMPANY,
    EntityLabel.TAX_ID,
    EntityLabel.CASE_NUMBER,
)

SIMILARITY_TABLE_ROWS = ("Cosine Similarity", "Jaro-Winkler Similarity", "Levenshtein Distance")


def _scores_for(report: EvalReport, label: EntityLabel) -> Scores:
    scores = report.per_label.get(label)
    if scores is None:
        scores = precision_recall_f1(Counts())
    return scores


def render_entity_table(named_reports: list[tuple[str, EvalReport]]) -> str:
    """Per-entity P/R/F1 grid with one column group per detector."""
    left_width = max(len("Entity Type"), max(len(l.name.lower()) for l in ENTITY_TABLE_ROWS))
    sub = f"{'P':>4}{'R':>6}{'F1':>6}"
    col_widths = [max(len(name), len(sub)) for name, _ in named_reports]

    def rule() -> str:
        return "+" + "-" * (left_width + 2) + "".join("+" + "-" * (w + 2) for w in col_widths) + "+"

    def row(left: str, cells: list[str]) -> str:
        out = f"| {left.ljust(left_width)} "
        for cell, width in zip(cells, col_widths):
            out += f"| {cell.ljust(width)} "
        return out + "|"

    lines = [rule(),
             row("Entity Type", [name for name, _ in named_reports]),
             row("", [sub] * len(named_reports)),
             rule()]
    for label in ENTITY_TABLE_ROWS:
        cells = []
        for _, report in named_reports:
            s = _scores_for(report, label)
            cells.append(f"{s.precision:4.2f}{s.recall:6.2f}{s.f1:6.2f}")
        lines.append(row(label.name.lower(), cells))
    lines.append(rule())
    overall_cells = [f"{r.overall.precision:4.2f}{r.overall.recall:6.2f}{r.overall.f1:6.2f}"
                     for _, r in named_reports]
    lines.append(row("overall", overall_cells))
    lines.append(rule())
    return "\n".join(lines) + "\n"


def render_similarity_table(named_reports: list[tuple[str, EvalReport]]) -> str:
    """Three-row mean-similarity block, one column per detector."""
    left_width = max(len("Metric"), max(len(r) for r in SIMILARITY_TABLE_ROWS))
    col_widths = [max(len(name), len("0.0000")) for name, _ in named_reports]

    def rule() -> str:
        return "+" + "-" * (left_width + 2) + "".join("+" + "-" * (w + 2) for w in col_widths) + "+"

    def row(left: str, cells: list[str]) -> str:
        out = f"| {left.ljust(left_width)} "
        for cell, width in zip(cells, col_widths):
            out += f"| {cell.rjust(width)} "
        return out + "|"

    lines = [rule(), row("Metric", [name for name, _ in named_reports]), rule()]
    values = []
    for _, report in named_reports:
        block = report.similarity
        if block is None:
            values.append(("n/a", "n/a", "n/a"))
        else:
            values.append((f"{block.mean_cosine:.4f}",
                           f"{block.mean_jaro_winkler:.4f}",
                           f"{block.mean_levenshtein:.4f}"))
    for i, metric in enumerate(SIMILARITY_TABLE_ROWS):
        lines.append(row(metric, [v[i] for v in values]))
    lines.append(rule())
    return "\n".join(lines) + "\n"


def write_report(named_reports: list[tuple[str, EvalReport]], out_dir: str | Path) -> dict[str, Path]:
    """Emit the JSON report plus the two plain-text tables into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": out_dir / "report.json",
        "entity_table": out_dir / "entity_table.txt",
        "similarity_table": out_dir / "similarity_table.txt",
    }
    payload = {name: report_to_dict(report) for name, report in named_reports}
    paths["report"].write_text(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
                               encoding="utf-8")
    paths["entity_table"].write_text(render_entity_table(named_reports), encoding="utf-8")
    paths["similarity_table"].write_text(render_similarity_table(named_reports), encoding="utf-8")
    return paths
