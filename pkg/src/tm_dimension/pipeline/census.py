"""Census of a results directory.

Counts are weighted by twin-class size, so a reduced run and a full run of
the same space give the same numbers. Function fingerprints are the output
tapes over the job's inputs, verbatim, with non-halting inputs marked.
"""

from collections import Counter, defaultdict
from collections.abc import Iterable
from pathlib import Path

import structlog

from tm_dimension.dimension.report import Bucket
from tm_dimension.errors import ResultStoreError
from tm_dimension.models import CensusTable, RunRecord
from tm_dimension.store.results import Results, load_results

logger = structlog.get_logger(__name__)

CENSUS_JSON = "census.json"
CENSUS_TEXT = "census.txt"
DIVERGENCE_MARKER = "-"
SUPER_POLYNOMIAL = (Bucket.EXP_LINEAR, Bucket.EXP_EXP, Bucket.OTHER_SUPER_POLYNOMIAL)


def function_fingerprints(runs: Iterable[RunRecord]) -> dict[int, tuple[str, ...]]:
    """Per machine, its outputs in input order with DIVERGENCE_MARKER for non-halting inputs."""
    by_machine: dict[int, list[tuple[int, str]]] = defaultdict(list)
    for record in runs:
        by_machine[record.machine].append((record.x, record.output if record.halted else DIVERGENCE_MARKER))
    return {machine: tuple(out for _, out in sorted(outputs)) for machine, outputs in by_machine.items()}


def build_census(results: Results) -> CensusTable:
    """Aggregate bucket, dimension and function counts over every dimension record."""
    buckets: Counter[str] = Counter({bucket.value: 0 for bucket in Bucket})
    dimensions: Counter[str] = Counter()
    analyzed = undefined = 0
    for record in results.dimensions:
        if record.undefined:
            undefined += record.class_size
            continue
        analyzed += record.class_size
        buckets[record.bucket] += record.class_size
        dimensions[record.d] += record.class_size

    fingerprints = set(function_fingerprints(results.runs).values())
    with_divergence = sum(1 for f in fingerprints if DIVERGENCE_MARKER in f)

    footnotes = [
        f"Counts are weighted by twin-class size over {results.manifest.machines} scheduled machines.",
        f"Functions are output tapes on inputs {results.manifest.job.inputs}; "
        f"'{DIVERGENCE_MARKER}' marks an input without a halting run.",
    ]
    job = results.manifest.job
    if job.sample is not None:
        footnotes.append(f"Seeded sample of {job.sample} machines (seed {job.seed}), not the whole space.")
    if with_divergence:
        footnotes.append(
            f"{with_divergence} of {len(fingerprints)} functions are partial (contain a divergence marker); "
            "no completion rule is applied to them."
        )
    if results.partial:
        footnotes.append(f"PARTIAL: {results.coverage:.1%} of scheduled machines have results.")

    table = CensusTable(
        space=results.manifest.job.space,
        analyzed=analyzed,
        undefined=undefined,
        buckets=dict(buckets),
        super_polynomial=sum(buckets[b.value] for b in SUPER_POLYNOMIAL),
        dimensions=dict(sorted(dimensions.items(), key=lambda kv: (-kv[1], kv[0]))),
        functions=len(fingerprints),
        functions_with_divergence=with_divergence,
        partial=results.partial,
        coverage=results.coverage,
        footnotes=footnotes,
    )
    if table.partial:
        logger.warning("census_partial", space=table.space, coverage=table.coverage)
    return table


def census_rows(table: CensusTable) -> list[tuple[str, str, int]]:
    """(section, label, count) rows in display order."""
    rows = [("machines", "analyzed", table.analyzed), ("machines", "undefined", table.undefined)]
    rows.extend(("bucket", label, count) for label, count in table.buckets.items())
    rows.append(("bucket", "super-polynomial (total)", table.super_polynomial))
    rows.extend(("dimension", f"d = {label}", count) for label, count in table.dimensions.items())
    rows.append(("functions", "distinct", table.functions))
    rows.append(("functions", "with divergence", table.functions_with_divergence))
    return rows


def format_census(table: CensusTable) -> str:
    """Aligned plain-text census."""
    rows = census_rows(table)
    section_width = max(len(r[0]) for r in rows)
    label_width = max(len(r[1]) for r in rows)
    count_width = max(len(str(r[2])) for r in rows)
    lines = [f"Census of ({table.space}) space" + (" [PARTIAL]" if table.partial else "")]
    for section, label, count in rows:
        lines.append(f"{section:<{section_width}}  {label:<{label_width}}  {count:>{count_width}}")
    lines.extend(f"* {note}" for note in table.footnotes)
    return "\n".join(lines) + "\n"


def run_census(root: Path) -> CensusTable:
    """Build the census of ``root`` and write it next to the results as JSON and text."""
    table = build_census(load_results(root))
    try:
        (root / CENSUS_JSON).write_text(table.model_dump_json(indent=2) + "\n", encoding="utf-8")
        (root / CENSUS_TEXT).write_text(format_census(table), encoding="utf-8")
    except OSError as e:
        msg = f"Cannot write the census into '{root}'."
        raise ResultStoreError(msg, str(e)) from e
    logger.info("census_written", space=table.space, analyzed=table.analyzed, functions=table.functions)
    return table
