"""
Comparison report: merges proportions, consistency, diversity and metric
scores of every subset and system into one document, and writes it as JSON,
Markdown and CSV.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import pandas as pd

from src import __version__
from src.annotation import Annotation
from src.corpus import Register, SentencePair
from src.evaluation import OVERALL, consistency, diversity, proportions, voice_crosstab
from src.extraction import SubsetName
from src.metrics import Metric, score_subset
from src.preprocessing import Segment
from src.utils import PathLike, logger, write_json

HUMAN = "human"
SOURCE = "source"
COMET = "COMET"
METRIC_COLUMNS = {Metric.BLEU: "BLEU", Metric.CHRF_PP: "chrF++"}
SCORECARD_COLUMNS = [
    "subset", "direction", "system", "BLEU", "chrF++", COMET,
    "label_div", "strategy_div", "voice_consistency", "structure_consistency",
]


@dataclass(frozen=True)
class SubsetEvaluation:
    """Human annotations of one subset: source and target side, aligned with ``pairs``."""

    subset: SubsetName
    pairs: Sequence[SentencePair]
    source: Sequence[Annotation]
    target: Sequence[Annotation]


@dataclass(frozen=True)
class SystemRun:
    """
    One MT system: its outputs and, when its translations were parsed, their annotations.

    ``annotations`` maps pair_id to the annotation of the system translation.
    """

    name: str
    outputs: Mapping[str, Segment]
    annotations: Optional[Mapping[str, Annotation]] = None


@dataclass
class Report:
    document: Dict[str, Any]
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)


def _native(value):
    if hasattr(value, "item"):
        return value.item()
    return value


def _records(frame: pd.DataFrame) -> List[Dict[str, Any]]:
    return [{key: _native(value) for key, value in row.items()} for row in frame.reset_index().to_dict("records")]


def _system_annotations(system: SystemRun, evaluation: SubsetEvaluation) -> Optional[List[Annotation]]:
    if system.annotations is None:
        return None
    return [system.annotations[pair.pair_id] for pair in evaluation.pairs if pair.pair_id in system.annotations]


def _evaluate_subset(evaluation: SubsetEvaluation, systems: Sequence[SystemRun],
                     tokenizers: Optional[Mapping[str, str]], report: Report,
                     scorecard: List[Dict[str, Any]]) -> Dict[str, Any]:
    subset = evaluation.subset
    slug = subset.slug
    pairs = list(evaluation.pairs)
    entry: Dict[str, Any] = {
        "subset": subset.value,
        "slug": slug,
        "direction": subset.direction.value,
        "pairs": len(pairs),
    }
    if not pairs:
        logger.warning(f"Subset {subset.value} has no pairs; left out of the report")
        return entry

    registers = {pair.pair_id: pair.register for pair in pairs}
    register_counts = {r.value: sum(1 for p in pairs if p.register is r) for r in Register}
    absent = [name for name, count in register_counts.items() if count == 0]
    if absent:
        logger.warning(f"Subset {subset.value}: no pairs for register(s) {', '.join(absent)}; omitted")
    entry["registers"] = {name: count for name, count in register_counts.items() if count}

    annotated = [s for s in systems if s.annotations is not None]
    for system in systems:
        if system.annotations is None:
            logger.warning(f"System {system.name} has no parsed translations; scored by metrics only")
    target_columns: Dict[str, Sequence[Annotation]] = {HUMAN: list(evaluation.target)}
    for system in annotated:
        target_columns[system.name] = _system_annotations(system, evaluation)

    source_table = proportions({SOURCE: list(evaluation.source)})
    target_table = proportions(target_columns)
    crosstab = voice_crosstab(evaluation.source, evaluation.target)
    report.tables[f"{slug}.proportions.source"] = source_table.frame
    report.tables[f"{slug}.proportions.target"] = target_table.frame
    report.tables[f"{slug}.voice_crosstab"] = crosstab
    entry["proportions"] = {
        SOURCE: {"language": source_table.language.value, "rows": _records(source_table.frame)},
        "target": {"language": target_table.language.value, "rows": _records(target_table.frame)},
    }
    entry["voice_crosstab"] = _records(crosstab)

    diversity_by_column = {name: diversity(annotations) for name, annotations in target_columns.items()}
    entry["diversity"] = {
        name: {
            "distinct_labels": summary.distinct_labels,
            "label_universe": summary.label_universe,
            "distinct_strategies": summary.distinct_strategies,
            "strategy_universe": summary.strategy_universe,
            "labels": [label.value for label in summary.labels],
            "strategies": [strategy.value for strategy in summary.strategies],
        }
        for name, summary in diversity_by_column.items()
    }
    report.tables[f"{slug}.diversity"] = pd.DataFrame.from_records(
        [
            {"column": name, "label_div": summary.label_fraction, "strategy_div": summary.strategy_fraction}
            for name, summary in diversity_by_column.items()
        ]
    ).set_index("column")

    entry["consistency"] = {}
    consistency_frames = []
    overall_by_system = {}
    for system in annotated:
        summary = consistency(evaluation.target, target_columns[system.name], registers)
        overall_by_system[system.name] = summary.overall
        entry["consistency"][system.name] = {
            "granularity": summary.granularity,
            "rows": [
                {
                    "register": name,
                    "n": row.n,
                    "voice_consistency": row.voice_consistency,
                    "structure_consistency": row.structure_consistency,
                }
                for name, row in summary.rows.items()
            ],
        }
        frame = summary.to_frame() * [1, 100.0, 100.0]
        frame.columns = ["n", "voice %", "structure %"]
        frame["n"] = frame["n"].astype(int)
        frame.insert(0, "system", system.name)
        consistency_frames.append(frame)
    if consistency_frames:
        report.tables[f"{slug}.consistency"] = pd.concat(consistency_frames)

    entry["metrics"] = {}
    human_diversity = diversity_by_column[HUMAN]
    scorecard.append({
        "subset": subset.value, "direction": subset.direction.value, "system": HUMAN,
        "BLEU": None, "chrF++": None, COMET: None,
        "label_div": human_diversity.label_fraction, "strategy_div": human_diversity.strategy_fraction,
        "voice_consistency": None, "structure_consistency": None,
    })
    for system in systems:
        scores = score_subset(pairs, system.outputs, subset.direction, tokenizers)
        metric_values = {METRIC_COLUMNS[score.metric]: score.value for score in scores}
        entry["metrics"][system.name] = {
            **metric_values,
            COMET: None,
            "details": {METRIC_COLUMNS[score.metric]: score.details for score in scores},
        }
        system_diversity = diversity_by_column.get(system.name)
        overall = overall_by_system.get(system.name)
        scorecard.append({
            "subset": subset.value, "direction": subset.direction.value, "system": system.name,
            **metric_values, COMET: None,
            "label_div": system_diversity.label_fraction if system_diversity else None,
            "strategy_div": system_diversity.strategy_fraction if system_diversity else None,
            "voice_consistency": overall.voice_consistency if overall else None,
            "structure_consistency": overall.structure_consistency if overall else None,
        })
    return entry


def compare_report(evaluations: Sequence[SubsetEvaluation], systems: Sequence[SystemRun],
                   tokenizers: Optional[Mapping[str, str]] = None) -> Report:
    """
    Build the comparison report.

    Args:
        evaluations: Human annotations per subset, in report order
        systems: MT systems in column order
        tokenizers: Metric tokenizer policies

    Returns:
        Report with the JSON document and the tables for Markdown/CSV export
    """
    report = Report(document={})
    scorecard: List[Dict[str, Any]] = []
    subsets = [_evaluate_subset(evaluation, systems, tokenizers, report, scorecard) for evaluation in evaluations]
    report.document = {
        "tool": "passivelens",
        "version": __version__,
        "systems": [system.name for system in systems],
        "subsets": subsets,
        "scorecard": scorecard,
    }
    report.tables["scorecard"] = pd.DataFrame.from_records(scorecard, columns=SCORECARD_COLUMNS)
    return report


def _markdown_table(frame: pd.DataFrame) -> str:
    rounded = frame.round(1)
    return rounded.to_markdown()


def render_markdown(report: Report) -> str:
    """Markdown rendering of every report table, one decimal place."""
    lines = [f"# passivelens report (version {report.document['version']})", ""]
    for name, frame in report.tables.items():
        lines.append(f"## {name}")
        lines.append("")
        lines.append(_markdown_table(frame))
        lines.append("")
    if report.document["subsets"]:
        lines.append(f"Consistency rows cover registers with pairs plus `{OVERALL}`; COMET is left empty.")
        lines.append("")
    return "\n".join(lines)


def write_report(report: Report, directory: PathLike, formats: Sequence[str]) -> List[Path]:
    """
    Write the report in the requested formats.

    Args:
        report: Output of compare_report
        directory: Report directory
        formats: Any of 'json', 'md', 'csv'

    Returns:
        Paths written, in write order
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in formats:
        written.append(write_json(directory / "report.json", report.document))
    if "md" in formats:
        path = directory / "report.md"
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(render_markdown(report))
        logger.info(f"Wrote {path}")
        written.append(path)
    if "csv" in formats:
        for name, frame in report.tables.items():
            path = directory / f"{name}.csv"
            frame.to_csv(path, encoding='utf-8')
            written.append(path)
        logger.info(f"Wrote {len(report.tables)} CSV tables to {directory}")
    return written
