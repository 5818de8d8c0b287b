"""
Main entry point for passivelens (command-line interface).

    passivelens extract  --config run.json
    passivelens annotate --config run.json
    passivelens evaluate --config run.json [--system NAME=PATH ...] [--format json|md|csv ...]
    passivelens sample   --config run.json --subset NAME [--per-register N] [--seed S]

Every failure prints one ``CODE: message`` line on stderr and exits with the
code documented in ``src.exceptions``.
"""

import functools
import sys
from contextlib import contextmanager
from dataclasses import asdict
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import click

from src import __version__
from src.annotation import SIDES, StrategyAnnotator, apply_corrections, read_annotations, write_annotations
from src.config import REPORT_FORMATS, RunConfig, load_annotator_config, load_run_config
from src.corpus import Language, SentencePair, index_sentences, load_manifest, load_parsed_file, load_register_map
from src.exceptions import ConfigError, PairSetMismatchError, PassiveLensError, UnknownSentenceError, UsageError
from src.extraction import (
    SubsetName,
    census_table,
    clean_pair,
    corpus_size,
    partition_subsets,
    sample_test_set,
    subset_census,
)
from src.metrics import read_system_outputs
from src.reporting import SubsetEvaluation, SystemRun, compare_report, write_report
from src.utils import FILE_ONLY, logger, read_tsv, setup_logging, teardown_logging, write_json, write_tsv

EXTRACT_DIR = "extract"
ANNOTATIONS_DIR = "annotations"
REPORT_DIR = "report"
SAMPLE_DIR = "sample"
RUN_LOG = "run.log"
MEMBERSHIP_HEADER = ("subset", "pair_id")

config_option = click.option(
    "--config", "config_path", required=True, type=click.Path(dir_okay=False), help="Run configuration (JSON)."
)


def pipeline_command(command):
    """Turn pipeline errors into a single stderr line and the documented exit code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except PassiveLensError as e:
            logger.error(e.one_line(), extra={FILE_ONLY: True})
            click.echo(e.one_line(), err=True)
            sys.exit(e.exit_code)
        except click.ClickException:
            raise
        except Exception as e:
            logger.exception("internal error", extra={FILE_ONLY: True})
            click.echo(f"E_INTERNAL: {' '.join(str(e).split()) or type(e).__name__}", err=True)
            sys.exit(1)
        finally:
            teardown_logging()

    return wrapper


def _start(config_path: str, verbose: bool) -> RunConfig:
    setup_logging(verbose=verbose)
    config = load_run_config(config_path)
    setup_logging(config.output_dir / RUN_LOG, verbose=verbose)
    logger.info(f"passivelens {__version__} with config {Path(config_path).resolve()}")
    return config


def _selected_subsets(config: RunConfig) -> List[SubsetName]:
    if not config.subsets:
        return list(SubsetName)
    selected = []
    for value in config.subsets:
        try:
            selected.append(SubsetName.parse(value))
        except ValueError as e:
            raise ConfigError(f"subsets: {e}") from None
    return [name for name in SubsetName if name in selected]


def _load_pairs(config: RunConfig) -> List[SentencePair]:
    collections = [load_parsed_file(spec.path, spec.language) for spec in config.parsed_files]
    sentences = index_sentences(*collections)
    register_map = load_register_map(config.register_map)
    return load_manifest(config.manifest, register_map, sentences)


def _read_membership(config: RunConfig, pairs: Sequence[SentencePair]) -> Dict[SubsetName, List[SentencePair]]:
    path = config.output_dir / EXTRACT_DIR / "subsets.tsv"
    if not path.exists():
        raise ConfigError(f"subset membership not found: {path}; run 'passivelens extract' first")
    by_id = {pair.pair_id: pair for pair in pairs}
    membership: Dict[SubsetName, List[SentencePair]] = {name: [] for name in SubsetName}
    for row in read_tsv(path, MEMBERSHIP_HEADER):
        try:
            name = SubsetName.parse(row["subset"])
        except ValueError as e:
            raise ConfigError(f"{path}:{row['_line']}: {e}") from None
        if row["pair_id"] not in by_id:
            raise UnknownSentenceError(f"{path}:{row['_line']}: unknown pair_id {row['pair_id']!r}")
        membership[name].append(by_id[row["pair_id"]])
    return membership


def _annotation_path(config: RunConfig, subset: SubsetName, side: str) -> Path:
    return config.output_dir / ANNOTATIONS_DIR / f"{subset.slug}.{side}.tsv"


def _parse_system_option(values: Sequence[str]) -> Dict[str, Path]:
    systems: Dict[str, Path] = {}
    for value in values:
        name, separator, path = value.partition("=")
        if not separator or not name or not path:
            raise ConfigError(f"--system: expected NAME=PATH, got {value!r}")
        if name in systems:
            raise ConfigError(f"--system: system {name!r} given twice")
        systems[name] = Path(path)
    return systems


class UsageLine(click.ClickException):
    """A click usage error rendered as one ``E_USAGE: message`` line."""

    exit_code = UsageError.exit_code

    def show(self, file=None):
        click.echo(UsageError(self.message).one_line(), err=True)


# click >= 8.2 shows the help page for a bare group invocation through a UsageError subclass
_HELP_PAGE_ERRORS = tuple(
    getattr(click.exceptions, name) for name in ("NoArgsIsHelpError",) if hasattr(click.exceptions, name)
)


@contextmanager
def _usage_errors_as_one_line():
    try:
        yield
    except click.UsageError as e:
        if isinstance(e, _HELP_PAGE_ERRORS):
            raise
        raise UsageLine(e.format_message()) from e


class PassiveLensGroup(click.Group):
    """Command group whose argument errors follow the ``CODE: message`` convention."""

    def make_context(self, *args, **kwargs):
        with _usage_errors_as_one_line():
            return super().make_context(*args, **kwargs)

    def invoke(self, ctx):
        with _usage_errors_as_one_line():
            return super().invoke(ctx)


@click.group(cls=PassiveLensGroup)
@click.version_option(__version__, prog_name="passivelens")
@click.option("--verbose", "-v", is_flag=True, help="Show progress messages on stderr.")
@click.pass_context
def cli(ctx, verbose):
    """passivelens: passive constructions and their translation strategies in Chinese-English corpora."""
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose


@cli.command("extract", help="Clean the pairs, split them into passive subsets and write the census.")
@config_option
@click.pass_context
@pipeline_command
def extract(ctx, config_path):
    config = _start(config_path, ctx.obj["verbose"])
    pairs = _load_pairs(config)
    out = config.output_dir / EXTRACT_DIR

    verdicts = [(pair, clean_pair(pair)) for pair in pairs]
    write_tsv(out / "cleaning.tsv", ("pair_id", "keep", "reason"),
              ((pair.pair_id, "true" if v.keep else "false", v.reason.value) for pair, v in verdicts))
    kept = [pair for pair, verdict in verdicts if verdict.keep]
    if not kept:
        logger.warning("cleaning filtered out every pair; all subsets are empty")
    logger.info(f"Cleaning kept {len(kept)} of {len(pairs)} pairs")

    selected = _selected_subsets(config)
    subsets = partition_subsets(kept)
    subsets = {name: subsets[name] for name in selected}
    write_tsv(out / "subsets.tsv", MEMBERSHIP_HEADER,
              ((name.value, pair_id) for name, subset in subsets.items() for pair_id in subset.pairs))
    for name, subset in subsets.items():
        if not len(subset):
            logger.warning(f"Subset {name.value} is empty")

    census = subset_census(subsets, kept)
    flat = census.reset_index()
    write_tsv(out / "census.tsv", list(flat.columns), flat.itertuples(index=False))
    for name in selected:
        table = census_table(census, name).reset_index().rename(columns={"index": "register"})
        write_tsv(out / f"census.{name.slug}.tsv", list(table.columns), table.itertuples(index=False))
    write_json(out / "corpus_size.json", {"raw": asdict(corpus_size(pairs)), "cleaned": asdict(corpus_size(kept))})

    click.echo(f"extract: {len(kept)}/{len(pairs)} pairs kept")
    for name, subset in subsets.items():
        click.echo(f"  {name.value}: {len(subset)}")


@cli.command("annotate", help="Label the source and target side of every subset pair with a translation strategy.")
@config_option
@click.pass_context
@pipeline_command
def annotate(ctx, config_path):
    config = _start(config_path, ctx.obj["verbose"])
    pairs = _load_pairs(config)
    membership = _read_membership(config, pairs)
    annotator = StrategyAnnotator(load_annotator_config(config.annotator_config))
    pair_ids = [pair.pair_id for pair in pairs]

    for name in _selected_subsets(config):
        for side in SIDES:
            annotations = annotator.annotate_pairs(membership[name], side)
            if config.corrections is not None:
                annotations = apply_corrections(annotations, config.corrections, known_pair_ids=pair_ids)
            for annotation in annotations:
                if annotation.unevaluable:
                    logger.info(f"{annotation.pair_id} {side}: not evaluable: {', '.join(annotation.unevaluable)}")
            write_annotations(annotations, _annotation_path(config, name, side))
        click.echo(f"annotate: {name.value}: {len(membership[name])} pairs")


def _load_human(config: RunConfig, name: SubsetName, pairs: Sequence[SentencePair]) -> SubsetEvaluation:
    expected = [pair.pair_id for pair in pairs]
    sides = {}
    for side in SIDES:
        path = _annotation_path(config, name, side)
        if not path.exists():
            raise ConfigError(f"annotations not found: {path}; run 'passivelens annotate' first")
        by_pair = {annotation.pair_id: annotation for annotation in read_annotations(path)}
        if set(by_pair) != set(expected):
            raise PairSetMismatchError(f"{path} does not match subset {name.value}",
                                       missing=set(expected) - set(by_pair), extra=set(by_pair) - set(expected))
        sides[side] = [by_pair[pair_id] for pair_id in expected]
    return SubsetEvaluation(name, pairs, sides["source"], sides["target"])


def _system_parse_paths(path: Path) -> Dict[Language, Path]:
    base = path.with_suffix("") if path.suffix == ".tsv" else path
    return {language: Path(f"{base}.{language.value}.conllu") for language in Language}


def _load_system(name: str, path: Path, annotator: StrategyAnnotator,
                 evaluations: Sequence[SubsetEvaluation]) -> SystemRun:
    outputs = read_system_outputs(path)
    parses = {language: p for language, p in _system_parse_paths(path).items() if p.exists()}
    if not parses:
        logger.warning(f"No parsed translations next to {path}; {name} is scored by BLEU/chrF++ only")
        return SystemRun(name, outputs)

    sentences = {language: {s.id: s for s in load_parsed_file(p, language.value)} for language, p in parses.items()}
    annotations = {}
    for evaluation in evaluations:
        language = evaluation.subset.direction.target_language
        parsed = sentences.get(language, {})
        missing = [pair.pair_id for pair in evaluation.pairs if pair.pair_id not in parsed]
        if missing:
            raise PairSetMismatchError(
                f"parsed {language.value} translations of {name} do not cover subset {evaluation.subset.value}",
                missing=missing,
            )
        for pair in evaluation.pairs:
            annotations[pair.pair_id] = annotator.annotate(parsed[pair.pair_id], pair.pair_id, "target")
    return SystemRun(name, outputs, annotations)


@cli.command("evaluate", help="Compare system translations with the human ones and write the report.")
@config_option
@click.option("--system", "system_options", multiple=True, metavar="NAME=PATH",
              help="System-output TSV; repeat for several systems (order is kept).")
@click.option("--format", "formats", multiple=True, type=click.Choice(REPORT_FORMATS),
              help="Report format; repeatable. Defaults to the config's formats.")
@click.pass_context
@pipeline_command
def evaluate(ctx, config_path, system_options, formats):
    config = _start(config_path, ctx.obj["verbose"])
    systems = _parse_system_option(system_options) if system_options else dict(config.systems)
    for system_name, path in systems.items():
        if not path.exists():
            raise ConfigError(f"system output for {system_name} not found: {path}")
    pairs = _load_pairs(config)
    membership = _read_membership(config, pairs)
    annotator = StrategyAnnotator(load_annotator_config(config.annotator_config))

    evaluations = [_load_human(config, name, membership[name]) for name in _selected_subsets(config)]
    runs = [_load_system(name, path, annotator, evaluations) for name, path in systems.items()]
    report = compare_report(evaluations, runs, config.tokenizers)
    written = write_report(report, config.output_dir / REPORT_DIR, formats or config.formats)
    click.echo(f"evaluate: {len(runs)} systems, {len(evaluations)} subsets, {len(written)} files written")


@cli.command("sample", help="Draw the stratified manual-validation sample of one subset.")
@config_option
@click.option("--subset", "subset_name", required=True, help="Subset name or slug, e.g. zh-bei_en.")
@click.option("--per-register", default=50, show_default=True, type=click.IntRange(min=1), help="Pairs per register.")
@click.option("--seed", default=0, show_default=True, type=int, help="Random seed.")
@click.pass_context
@pipeline_command
def sample(ctx, config_path, subset_name, per_register, seed):
    config = _start(config_path, ctx.obj["verbose"])
    try:
        name = SubsetName.parse(subset_name)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    pairs = _load_pairs(config)
    membership = _read_membership(config, pairs)
    chosen = sample_test_set(membership[name], per_register=per_register, seed=seed)
    write_tsv(
        config.output_dir / SAMPLE_DIR / f"{name.slug}.tsv",
        ("pair_id", "direction", "register", "corpus", "genre", "source", "target"),
        ((p.pair_id, p.direction.value, p.register.value, p.corpus, p.genre, p.source.surface(), p.target.surface())
         for p in chosen),
    )
    click.echo(f"sample: {len(chosen)} pairs from {name.value}")


def main(argv: Optional[List[str]] = None):
    """Run the CLI."""
    cli.main(args=argv, prog_name="passivelens")


if __name__ == "__main__":
    main()
