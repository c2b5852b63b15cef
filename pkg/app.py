import logging
import sys
from typing import List, Optional, Tuple

import click
from pydantic import ValidationError

from models import config
from models.builders import named_movie
from models.chaincomplex import build_complex, element_model, element_to_text
from models.cobordism import kj_cycle, movie_from_json, movie_to_json
from models.config import get_logger, read_fixture_file, set_log_level
from models.diagram import parse_pd
from models.errors import FrameMismatchError, KJClassError, ParseError, ResourceLimitError
from models.homology import classify, homology_groups, homology_table, write_table
from models.kjinvariants import SUITES, apply_trims, distinguish_slices, run_suite
from models.schemas import KJReportModel, RunConfig

logger = get_logger("kjclass")

EXIT_CODES = [
    (ParseError, 2),
    (ResourceLimitError, 3),
    (FrameMismatchError, 4),
    (KJClassError, 1),
]


def parse_trims(text: Optional[str]) -> List[Tuple[int, str]]:
    """'0:L,1:L,2:R' -> [(0, 'L'), (1, 'L'), (2, 'R')]"""
    if not text:
        return []
    trims = []
    for item in text.split(","):
        crossing, _, side = item.strip().partition(":")
        if not crossing.isdigit() or side not in ("L", "R"):
            raise ParseError(f"bad trim {item!r}; expected crossing:L or crossing:R", location="--trim")
        trims.append((int(crossing), side))
    return trims


def _configure(cfg: RunConfig):
    config.MAX_CROSSINGS = cfg.max_crossings
    config.ALLOW_LARGE = cfg.allow_large or config.ALLOW_LARGE
    if cfg.verbose:
        set_log_level(logging.INFO if cfg.verbose == 1 else logging.DEBUG)


def _read(path: str) -> str:
    text = read_fixture_file(path)
    if not text.strip():
        raise ParseError("empty or unreadable file", location=path)
    return text


def run(command: str, body, **flags):
    """Build the RunConfig, run the command body, map library errors to exit codes."""
    try:
        cfg = RunConfig(command=command, **flags)
    except ValidationError as exc:
        click.echo(f"error: {exc.errors()[0]['msg']}", err=True)
        sys.exit(2)
    try:
        _configure(cfg)
        logger.info("running %s on %s", cfg.command, cfg.inputs)
        code = body(cfg) or 0
    except KJClassError as exc:
        code = next(c for kind, c in EXIT_CODES if isinstance(exc, kind))
        click.echo(f"error: {exc}", err=True)
    sys.exit(code)


def common_options(f):
    f = click.option("-v", "--verbose", count=True, help="INFO with -v, DEBUG with -vv.")(f)
    f = click.option("--max-crossings", type=int, default=None, help="Crossing cap for chain complexes.")(f)
    f = click.option("--seed", type=int, default=None, help="Seed for randomized suites.")(f)
    f = click.option("--format", "fmt", type=click.Choice(["text", "json", "tsv"]), default="text")(f)
    f = click.option("--allow-large", is_flag=True, help="Unlock windmill and other large instances.")(f)
    return f


def _flags(inputs, fmt, seed, max_crossings, verbose, allow_large, trims=None, runslow=False):
    return dict(
        inputs=list(inputs),
        format=fmt,
        seed=config.DEFAULT_SEED if seed is None else seed,
        max_crossings=config.MAX_CROSSINGS if max_crossings is None else max_crossings,
        verbose=verbose,
        allow_large=allow_large,
        trims=trims or [],
        runslow=runslow,
    )


@click.group()
def cli():
    """Khovanov homology and Khovanov-Jacobsson classes of surface movies."""


@cli.command()
@click.argument("pd_file", type=click.Path(exists=True, dir_okay=False))
@common_options
def homology(pd_file, fmt, seed, max_crossings, verbose, allow_large):
    """Homology table of a PD diagram."""

    def body(cfg: RunConfig):
        d = parse_pd(_read(pd_file))
        table = homology_table(homology_groups(build_complex(d)))
        if cfg.format == "json":
            click.echo(table.to_json(orient="records"))
        else:
            click.echo(write_table(table), nl=False)

    run("homology", body, **_flags([pd_file], fmt, seed, max_crossings, verbose, allow_large))


@cli.command()
@click.argument("movie_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--trim", "trim_text", default=None, help="Trim schedule, e.g. 0:L,1:L,2:L.")
@common_options
def kj(movie_file, trim_text, fmt, seed, max_crossings, verbose, allow_large):
    """Khovanov-Jacobsson cycle of a movie and its homology verdict."""
    trims = _parse_or_exit(trim_text)

    def body(cfg: RunConfig):
        m = movie_from_json(_read(movie_file))
        cycle = kj_cycle(m)
        verdict = classify(build_complex(m.final), cycle)
        report = KJReportModel(movie=m.name, cycle=element_model(cycle), verdict=verdict.to_model(), trims=cfg.trims)
        trimmed_text = ""
        if cfg.trims:
            trimmed, f = apply_trims(m.final, cfg.trims)
            image = f(cycle)
            trimmed_verdict = classify(build_complex(trimmed), image)
            report.trimmed_cycle = element_model(image)
            report.trimmed_verdict = trimmed_verdict.to_model()
            trimmed_text = f"trimmed:\n{element_to_text(image)}{_verdict_line(trimmed_verdict.to_model())}\n"
        if cfg.format == "json":
            click.echo(report.model_dump_json(indent=2))
            return
        click.echo(element_to_text(cycle), nl=False)
        click.echo(_verdict_line(report.verdict))
        click.echo(trimmed_text, nl=False)

    run("kj", body, **_flags([movie_file], fmt, seed, max_crossings, verbose, allow_large, trims))


@cli.command()
@click.argument("movie0", type=click.Path(exists=True, dir_okay=False))
@click.argument("movie1", type=click.Path(exists=True, dir_okay=False))
@click.option("--trim", "trim_text", default=None, help="Trim schedule, e.g. 0:L,1:L,2:L.")
@common_options
def distinguish(movie0, movie1, trim_text, fmt, seed, max_crossings, verbose, allow_large):
    """Whether two movies onto the same diagram give different classes."""
    trims = _parse_or_exit(trim_text)

    def body(cfg: RunConfig):
        m0, m1 = (movie_from_json(_read(p)) for p in (movie0, movie1))
        report = distinguish_slices(m0, m1, trims=cfg.trims).to_model()
        if cfg.format == "json":
            click.echo(report.model_dump_json(indent=2))
            return
        click.echo(report.conclusion)
        click.echo(f"c0 - c1: {_verdict_line(report.difference)}")
        click.echo(f"c0 + c1: {_verdict_line(report.sum)}")
        if report.trimmed_difference is not None:
            click.echo(f"trimmed c0 - c1: {_verdict_line(report.trimmed_difference)}")
            click.echo(f"trimmed c0 + c1: {_verdict_line(report.trimmed_sum)}")

    run("distinguish", body, **_flags([movie0, movie1], fmt, seed, max_crossings, verbose, allow_large, trims))


@cli.command(help="Run a theorem suite: one of " + ", ".join(SUITES) + ".")
@click.argument("suite")
@click.option("--runslow", is_flag=True, help="Include the slow suites.")
@common_options
def verify(suite, runslow, fmt, seed, max_crossings, verbose, allow_large):
    def body(cfg: RunConfig):
        report = run_suite(suite, cfg.seed, runslow=cfg.runslow)
        if cfg.format == "json":
            click.echo(report.model_dump_json(indent=2))
        else:
            for case in report.cases:
                click.echo(f"{'PASS' if case.passed else 'FAIL'}  {case.name}  {case.detail}")
            click.echo(f"{report.suite}: {'passed' if report.passed else 'failed'} (seed {report.seed})")
        return 0 if report.passed else 1

    run("verify", body, **_flags([suite], fmt, seed, max_crossings, verbose, allow_large, runslow=runslow))


@cli.command()
@click.argument("kind")
@click.argument("params", nargs=-1)
@click.option("-o", "--output", type=click.Path(dir_okay=False), default=None, help="Write here instead of stdout.")
@common_options
def export(kind, params, output, fmt, seed, max_crossings, verbose, allow_large):
    """Write a built movie as JSON: slice N L|R, windmill SIDES, filling N GENUS, closed GENUS."""

    def body(cfg: RunConfig):
        text = movie_to_json(named_movie(kind, params))
        if output is None:
            click.echo(text)
            return
        with open(output, "w", encoding="utf-8") as f:
            f.write(text + "\n")
        logger.info("wrote %s", output)

    run("export", body, **_flags([kind, *params], fmt, seed, max_crossings, verbose, allow_large))


def _verdict_line(v) -> str:
    kind = v.certificate.get("kind", "")
    if not v.is_cycle:
        return f"not a cycle ({kind})"
    state = "boundary" if v.is_boundary else "nontrivial class"
    return f"cycle at {tuple(v.bigrading) if v.bigrading else '-'}: {state} ({kind})"


def _parse_or_exit(text: Optional[str]) -> List[Tuple[int, str]]:
    try:
        return parse_trims(text)
    except ParseError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    cli()
