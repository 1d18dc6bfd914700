"""Aggregation of per-pair stats into summary tables, cross-group rank
tests, derivation persistence, associated-lemma counts, and distribution
exports.

All emitted files are deterministic for identical inputs: groups are
iterated in a fixed PoS/relation order and floats are serialized with
``repr`` (CSV) or fixed human formats (Markdown).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from coocstat.corpus import CONTENT_POS
from coocstat.lexicon import RELATIONS, DerivedPair, LemmaPair
from coocstat.metrics import DEFAULT_ALPHA, ScoredPair
from coocstat.stats import TestResult, brunner_munzel

POS_ORDER = CONTENT_POS
REL_ORDER = RELATIONS
METRICS = ("g2", "order", "distance")


def _mean(values: Sequence[float]) -> float | None:
    # Summed in sorted order so the result is exactly permutation-invariant.
    return sum(sorted(values)) / len(values) if values else None


def pair_key(pair: LemmaPair) -> tuple[str, str, str, str]:
    return (pair.w.lemma, pair.v.lemma, pair.w.pos, pair.relation)


@dataclass
class RelationSummary:
    """Aggregates for one PoS x relation cell.

    `avg_g2` covers every observed pair while `avg_g2_sig` restricts to
    significant ones; order and distance aggregates always restrict to
    significantly co-occurring pairs (`n_sig_cooc` of them).  Aggregates
    over an empty population are None, never 0.
    """

    pos: str
    relation: str
    n_pairs: int
    avg_g2: float | None
    avg_g2_sig: float | None
    pct_g2_sig: float | None
    avg_order: float | None
    pct_order_pref: float | None
    avg_distance: float | None
    avg_distance_pooled: float | None
    n_sig_cooc: int


def group_scored(
    scored: Iterable[ScoredPair],
) -> dict[tuple[str, str], list[ScoredPair]]:
    groups: dict[tuple[str, str], list[ScoredPair]] = {}
    for item in scored:
        groups.setdefault((item.pair.w.pos, item.pair.relation), []).append(item)
    return groups


def summarize(scored: Sequence[ScoredPair]) -> list[RelationSummary]:
    """One RelationSummary per PoS x relation cell that has any pairs."""
    groups = group_scored(scored)
    summaries = []
    for pos in POS_ORDER:
        for rel in REL_ORDER:
            group = groups.get((pos, rel))
            if not group:
                continue
            stats = [item.stats for item in group]
            sig = [s for s in stats if s.g2_significant]
            sig_cooc = [s for s in sig if s.n_cooc > 0]
            n_events = sum(s.n_cooc for s in sig_cooc)
            pooled = (
                sum(sorted(s.mean_distance * s.n_cooc for s in sig_cooc)) / n_events
                if n_events
                else None
            )
            summaries.append(
                RelationSummary(
                    pos=pos,
                    relation=rel,
                    n_pairs=len(stats),
                    avg_g2=_mean([s.g2 for s in stats]),
                    avg_g2_sig=_mean([s.g2 for s in sig]),
                    pct_g2_sig=100.0 * len(sig) / len(stats),
                    avg_order=_mean([s.order_score for s in sig_cooc]),
                    pct_order_pref=(
                        100.0
                        * sum(1 for s in sig_cooc if s.has_preferred_order)
                        / len(sig_cooc)
                        if sig_cooc
                        else None
                    ),
                    avg_distance=_mean(
                        [s.mean_distance for s in sig_cooc if s.mean_distance is not None]
                    ),
                    avg_distance_pooled=pooled,
                    n_sig_cooc=len(sig_cooc),
                )
            )
    return summaries


# ---------------------------------------------------------------------------
# Cross-relation comparisons

@dataclass
class ComparisonMatrix:
    """Pairwise rank-test results over relation groups for one metric.

    `results` is keyed by the unordered relation pair (None marks an
    untestable comparison, i.e. a group below two values); `distinct`
    flags relations that differ significantly from every other relation
    present.
    """

    relations: list[str]
    results: dict[frozenset[str], TestResult | None]
    distinct: dict[str, bool]
    alpha: float

    def result(self, rel_a: str, rel_b: str) -> TestResult | None:
        return self.results[frozenset((rel_a, rel_b))]


def compare_relations(
    groups: Mapping[str, Sequence[float]], alpha: float = DEFAULT_ALPHA
) -> ComparisonMatrix:
    """Brunner-Munzel tests on every unordered pair of relation groups."""
    relations = [r for r in REL_ORDER if r in groups] + [
        r for r in groups if r not in REL_ORDER
    ]
    results: dict[frozenset[str], TestResult | None] = {}
    for i, rel_a in enumerate(relations):
        for rel_b in relations[i + 1 :]:
            a, b = groups[rel_a], groups[rel_b]
            if len(a) < 2 or len(b) < 2:
                results[frozenset((rel_a, rel_b))] = None
            else:
                results[frozenset((rel_a, rel_b))] = brunner_munzel(list(a), list(b))
    distinct = {}
    for rel in relations:
        others = [r for r in relations if r != rel]
        distinct[rel] = bool(others) and all(
            results[frozenset((rel, other))] is not None
            and results[frozenset((rel, other))].p_value < alpha
            for other in others
        )
    return ComparisonMatrix(relations, results, distinct, alpha)


def metric_values(
    group: Sequence[ScoredPair], metric: str, g2_population: str = "all"
) -> list[float]:
    """Per-pair values of one metric, over that metric's population."""
    if metric == "g2":
        if g2_population == "all":
            return [item.stats.g2 for item in group]
        return [item.stats.g2 for item in group if item.stats.g2_significant]
    stats = [
        s.stats for s in group if s.stats.g2_significant and s.stats.n_cooc > 0
    ]
    if metric == "order":
        return [s.order_score for s in stats]
    if metric == "distance":
        return [s.mean_distance for s in stats if s.mean_distance is not None]
    if metric == "order_asym":
        return [s.asym_order_score for s in stats if s.asym_order_score is not None]
    raise ValueError(f"unknown metric {metric!r}")


def compare_all(
    scored: Sequence[ScoredPair],
    alpha: float = DEFAULT_ALPHA,
    g2_population: str = "all",
) -> dict[tuple[str, str], ComparisonMatrix]:
    """ComparisonMatrix per (pos, metric) over all relations present."""
    groups = group_scored(scored)
    out = {}
    for pos in POS_ORDER:
        rel_groups = {
            rel: group for (p, rel), group in groups.items() if p == pos
        }
        if not rel_groups:
            continue
        for metric in METRICS:
            values = {
                rel: metric_values(group, metric, g2_population)
                for rel, group in rel_groups.items()
            }
            values = {rel: vals for rel, vals in values.items() if vals}
            if values:
                out[(pos, metric)] = compare_relations(values, alpha)
    return out


# ---------------------------------------------------------------------------
# Derivation persistence

class DerivationRow(NamedTuple):
    orig_pos: str
    derv_pos: str
    orig_rel: str
    derv_rel: str
    count: int
    count_sustaining: int


def derivation_persistence(
    derived: Sequence[DerivedPair],
    stats_by_pair: Mapping[tuple[str, str, str, str], "object"],
) -> list[DerivationRow]:
    """Tally derived pairs whose original pair co-occurs significantly.

    A derived pair enters `count` when its original is significant and
    the derived pair itself was scored; it also enters
    `count_sustaining` when it stays significant.
    """
    counts: dict[tuple[str, str, str, str], list[int]] = {}
    for d in derived:
        orig_stats = stats_by_pair.get(pair_key(d.original))
        derv_stats = stats_by_pair.get(pair_key(d.derived))
        if orig_stats is None or derv_stats is None:
            continue
        if not orig_stats.g2_significant:
            continue
        key = (
            d.original.w.pos,
            d.derived.w.pos,
            d.original.relation,
            d.derived.relation,
        )
        cell = counts.setdefault(key, [0, 0])
        cell[0] += 1
        if derv_stats.g2_significant:
            cell[1] += 1

    def sort_key(key: tuple[str, str, str, str]):
        return (
            POS_ORDER.index(key[0]),
            POS_ORDER.index(key[1]),
            REL_ORDER.index(key[2]),
            REL_ORDER.index(key[3]),
        )

    return [
        DerivationRow(*key, counts[key][0], counts[key][1])
        for key in sorted(counts, key=sort_key)
    ]


# ---------------------------------------------------------------------------
# Associated lemma counts

class AssociatedRow(NamedTuple):
    pos: str
    relation: str
    avg: float


def associated_counts(
    pairs: Sequence[LemmaPair],
) -> tuple[list[AssociatedRow], dict[str, float]]:
    """Average number of distinct partners per frequent-side lemma.

    Returns per PoS x relation rows plus a per-relation micro average
    (total pairs over total distinct frequent lemmas).
    """
    partners: dict[tuple[str, str], dict[str, set[str]]] = {}
    for p in pairs:
        group = partners.setdefault((p.w.pos, p.relation), {})
        group.setdefault(p.w.lemma, set()).add(p.v.lemma)

    rows = []
    totals: dict[str, list[int]] = {}
    for pos in POS_ORDER:
        for rel in REL_ORDER:
            group = partners.get((pos, rel))
            if not group:
                continue
            n_pairs = sum(len(vs) for vs in group.values())
            rows.append(AssociatedRow(pos, rel, n_pairs / len(group)))
            tot = totals.setdefault(rel, [0, 0])
            tot[0] += n_pairs
            tot[1] += len(group)
    micro = {rel: tot[0] / tot[1] for rel, tot in totals.items()}
    return rows, micro


# ---------------------------------------------------------------------------
# Distributions

class FiveNumber(NamedTuple):
    n: int
    min: float
    q1: float
    median: float
    q3: float
    max: float


def five_number(values: Sequence[float]) -> FiveNumber:
    """Five-number summary with linear-interpolation quantiles."""
    arr = np.asarray(values, dtype=float)
    q = np.quantile(arr, [0.0, 0.25, 0.5, 0.75, 1.0])
    return FiveNumber(len(values), *(float(x) for x in q))


def distribution_groups(
    scored: Sequence[ScoredPair], metric: str, g2_population: str = "all"
) -> dict[tuple[str, str], list[float]]:
    groups = group_scored(scored)
    out = {}
    for pos in POS_ORDER:
        for rel in REL_ORDER:
            group = groups.get((pos, rel))
            if not group:
                continue
            values = metric_values(group, metric, g2_population)
            if values:
                out[(pos, rel)] = values
    return out


# ---------------------------------------------------------------------------
# Rendering

def _fmt_cell(value: float | None, fmt: str) -> str:
    return "--" if value is None else format(value, fmt)


def _csv_cell(value: float | None) -> str:
    return "" if value is None else repr(value)


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _md_grid(
    title: str,
    cells: Mapping[tuple[str, str], list[str]],
    n_value_rows: int,
) -> str:
    """Markdown grid with REL_ORDER columns and `n_value_rows` lines per
    PoS followed by an empty separator row."""
    lines = [f"## {title}", ""]
    lines.append("| PoS | " + " | ".join(REL_ORDER) + " |")
    lines.append("|" + "---|" * (len(REL_ORDER) + 1))
    empty_row = "| " + " | ".join([""] * (len(REL_ORDER) + 1)) + " |"
    for pos in POS_ORDER:
        for row_idx in range(n_value_rows):
            row = [pos if row_idx == 0 else ""]
            for rel in REL_ORDER:
                values = cells.get((pos, rel))
                row.append(values[row_idx] if values else "--")
            lines.append("| " + " | ".join(row) + " |")
        lines.append(empty_row)
    return "\n".join(lines) + "\n"


def _bold(text: str, flag: bool) -> str:
    return f"**{text}**" if flag else text


def _distinct_flag(
    comparisons: Mapping[tuple[str, str], ComparisonMatrix],
    pos: str,
    metric: str,
    rel: str,
) -> bool:
    matrix = comparisons.get((pos, metric))
    return bool(matrix and matrix.distinct.get(rel, False))


class ReportOptions(NamedTuple):
    alpha: float = DEFAULT_ALPHA
    avg_population: str = "all"  # population of the headline G2 average
    distance_pooling: str = "pair"  # "pair" = mean of per-pair means
    tables: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    figures: tuple[str, ...] = ("g2", "order", "distance", "order_asym")
    svg: bool = False


def write_report(
    scored: Sequence[ScoredPair],
    out_dir: str | Path,
    options: ReportOptions = ReportOptions(),
    derived: Sequence[DerivedPair] = (),
) -> list[Path]:
    """Emit every requested table and figure file; returns written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summaries = {(s.pos, s.relation): s for s in summarize(scored)}
    comparisons = compare_all(scored, options.alpha, options.avg_population)
    stats_by_pair = {pair_key(item.pair): item.stats for item in scored}
    written: list[Path] = []

    def emit_csv(name, header, rows):
        path = out / name
        _write_csv(path, header, rows)
        written.append(path)

    def emit_text(name, text):
        path = out / name
        path.write_text(text, encoding="utf-8")
        written.append(path)

    if 1 in options.tables:
        rows = []
        cells = {}
        for (pos, rel), s in summaries.items():
            rows.append([pos, rel, str(s.n_pairs)])
            cells[(pos, rel)] = [str(s.n_pairs)]
        emit_csv("table1.csv", ["pos", "relation", "n_pairs"], rows)
        emit_text("table1.md", _md_grid("Observed pair counts", cells, 1))

    if 2 in options.tables:
        rows = []
        cells = {}
        for (pos, rel), s in summaries.items():
            headline = s.avg_g2 if options.avg_population == "all" else s.avg_g2_sig
            distinct = _distinct_flag(comparisons, pos, "g2", rel)
            rows.append(
                [
                    pos,
                    rel,
                    str(s.n_pairs),
                    _csv_cell(headline),
                    _csv_cell(s.pct_g2_sig),
                    _csv_cell(s.avg_g2),
                    _csv_cell(s.avg_g2_sig),
                    "1" if distinct else "0",
                ]
            )
            cells[(pos, rel)] = [
                _bold(_fmt_cell(headline, ".1f"), distinct),
                _fmt_cell(s.pct_g2_sig, ".0f") + "%",
            ]
        emit_csv(
            "table2.csv",
            [
                "pos",
                "relation",
                "n_pairs",
                "avg_g2",
                "pct_g2_sig",
                "avg_g2_all",
                "avg_g2_sig_only",
                "distinct",
            ],
            rows,
        )
        emit_text(
            "table2.md",
            _md_grid(
                "Co-occurrence strength: average G2 and % significant", cells, 2
            ),
        )

    if 3 in options.tables:
        rows = []
        cells = {}
        for (pos, rel), s in summaries.items():
            distinct = _distinct_flag(comparisons, pos, "order", rel)
            rows.append(
                [
                    pos,
                    rel,
                    _csv_cell(s.avg_order),
                    _csv_cell(s.pct_order_pref),
                    str(s.n_sig_cooc),
                    "1" if distinct else "0",
                ]
            )
            cells[(pos, rel)] = [
                _bold(_fmt_cell(s.avg_order, ".2f"), distinct),
                (
                    "--"
                    if s.pct_order_pref is None
                    else format(s.pct_order_pref, ".0f") + "%"
                ),
            ]
        emit_csv(
            "table3.csv",
            ["pos", "relation", "avg_order", "pct_order_pref", "n_sig_cooc", "distinct"],
            rows,
        )
        emit_text(
            "table3.md",
            _md_grid("Order preference: average order score and % preferred", cells, 2),
        )

    if 4 in options.tables:
        rows = []
        cells = {}
        for (pos, rel), s in summaries.items():
            value = (
                s.avg_distance
                if options.distance_pooling == "pair"
                else s.avg_distance_pooled
            )
            distinct = _distinct_flag(comparisons, pos, "distance", rel)
            rows.append(
                [
                    pos,
                    rel,
                    _csv_cell(value),
                    _csv_cell(s.avg_distance),
                    _csv_cell(s.avg_distance_pooled),
                    str(s.n_sig_cooc),
                    "1" if distinct else "0",
                ]
            )
            cells[(pos, rel)] = [_bold(_fmt_cell(value, ".1f"), distinct)]
        emit_csv(
            "table4.csv",
            [
                "pos",
                "relation",
                "avg_distance",
                "avg_distance_pair_mean",
                "avg_distance_event_pooled",
                "n_sig_cooc",
                "distinct",
            ],
            rows,
        )
        emit_text(
            "table4.md",
            _md_grid("Average token distance of significant co-occurrence", cells, 1),
        )

    if 5 in options.tables:
        der_rows = derivation_persistence(derived, stats_by_pair)
        emit_csv(
            "table5.csv",
            ["orig_pos", "derv_pos", "orig_rel", "derv_rel", "count", "count_sustaining"],
            [[r.orig_pos, r.derv_pos, r.orig_rel, r.derv_rel, str(r.count), str(r.count_sustaining)] for r in der_rows],
        )
        lines = [
            "## Significance persistence under derivation",
            "",
            "| Orig. PoS | Derv. PoS | Orig. Rel. | Derv. Rel. | Count |",
            "|---|---|---|---|---|",
        ]
        total = [0, 0]
        for r in der_rows:
            lines.append(
                f"| {r.orig_pos} | {r.derv_pos} | {r.orig_rel} | {r.derv_rel} | "
                f"{r.count} ({r.count_sustaining}) |"
            )
            total[0] += r.count
            total[1] += r.count_sustaining
        lines.append(f"| TOTAL | | | | {total[0]} ({total[1]}) |")
        emit_text("table5.md", "\n".join(lines) + "\n")

    if 6 in options.tables:
        assoc_rows, micro = associated_counts([item.pair for item in scored])
        by_cell = {(r.pos, r.relation): r.avg for r in assoc_rows}
        rows = [[r.pos, r.relation, repr(r.avg)] for r in assoc_rows]
        for rel in REL_ORDER:
            if rel in micro:
                rows.append(["MICRO", rel, repr(micro[rel])])
        cells = {
            key: [format(avg, ".1f")] for key, avg in by_cell.items()
        }
        md = _md_grid("Associated partner lemmas per frequent lemma", cells, 1)
        micro_row = "| Micro AVG | " + " | ".join(
            format(micro[rel], ".1f") if rel in micro else "--" for rel in REL_ORDER
        ) + " |"
        md += micro_row + "\n"
        emit_csv("table6.csv", ["pos", "relation", "avg_associated"], rows)
        emit_text("table6.md", md)

    # Pairwise comparison dump (the boldface evidence for tables 2-4).
    comp_rows = []
    for (pos, metric), matrix in comparisons.items():
        for i, rel_a in enumerate(matrix.relations):
            for rel_b in matrix.relations[i + 1 :]:
                res = matrix.result(rel_a, rel_b)
                if res is None:
                    comp_rows.append(
                        [pos, metric, rel_a, rel_b, "", "", "", "", "", "1"]
                    )
                else:
                    comp_rows.append(
                        [
                            pos,
                            metric,
                            rel_a,
                            rel_b,
                            repr(res.statistic),
                            repr(res.p_value),
                            _csv_cell(res.df),
                            _csv_cell(res.effect),
                            "1" if res.p_value < options.alpha else "0",
                            "0",
                        ]
                    )
    emit_csv(
        "comparisons.csv",
        [
            "pos",
            "metric",
            "rel_a",
            "rel_b",
            "statistic",
            "p_value",
            "df",
            "effect",
            "significant",
            "untestable",
        ],
        comp_rows,
    )
    distinct_rows = [
        [pos, metric, rel, "1" if flag else "0"]
        for (pos, metric), matrix in comparisons.items()
        for rel, flag in matrix.distinct.items()
    ]
    emit_csv("distinct.csv", ["pos", "metric", "relation", "distinct"], distinct_rows)

    for metric in options.figures:
        groups = distribution_groups(scored, metric, options.avg_population)
        if metric == "order_asym" and not groups:
            continue
        summary_rows = []
        value_rows = []
        for (pos, rel), values in groups.items():
            f = five_number(values)
            summary_rows.append(
                [pos, rel, str(f.n)]
                + [repr(x) for x in (f.min, f.q1, f.median, f.q3, f.max)]
            )
            value_rows.extend([pos, rel, repr(v)] for v in values)
        emit_csv(
            f"fig_{metric}.csv",
            ["pos", "relation", "n", "min", "q1", "median", "q3", "max"],
            summary_rows,
        )
        emit_csv(f"fig_{metric}_values.csv", ["pos", "relation", "value"], value_rows)
        if options.svg:
            fives = {key: five_number(vals) for key, vals in groups.items()}
            emit_text(f"fig_{metric}.svg", render_boxplot_svg(fives, metric))

    return written


# ---------------------------------------------------------------------------
# Minimal SVG box plots (hand-rendered so output is byte-stable)

def _svg_scale(fives: Mapping[tuple[str, str], FiveNumber]) -> tuple[float, float, bool]:
    lo = min(f.min for f in fives.values())
    hi = max(f.max for f in fives.values())
    log = lo > 0 and hi / max(lo, 1e-12) > 100
    if log:
        lo, hi = np.log10(lo), np.log10(hi)
    if hi == lo:
        hi = lo + 1.0
    return lo, hi, log


def render_boxplot_svg(
    fives: Mapping[tuple[str, str], FiveNumber], title: str
) -> str:
    """Grouped box plots, one panel per PoS, one box per relation."""
    width_per_box = 42
    panel_pad = 30
    height = 320
    plot_top, plot_bottom = 40, 280
    lo, hi, log = _svg_scale(fives)

    def y_of(value: float) -> float:
        v = np.log10(value) if log else value
        frac = (v - lo) / (hi - lo)
        return plot_bottom - frac * (plot_bottom - plot_top)

    parts = []
    x = panel_pad
    for pos in POS_ORDER:
        rels = [rel for rel in REL_ORDER if (pos, rel) in fives]
        if not rels:
            continue
        panel_x = x
        for rel in rels:
            f = fives[(pos, rel)]
            cx = x + width_per_box / 2
            box_w = width_per_box * 0.6
            y_min, y_q1 = y_of(f.min), y_of(f.q1)
            y_med, y_q3, y_max = y_of(f.median), y_of(f.q3), y_of(f.max)
            parts.append(
                f'<line x1="{cx:.1f}" y1="{y_min:.1f}" x2="{cx:.1f}" y2="{y_max:.1f}" '
                'stroke="black" stroke-width="1"/>'
            )
            parts.append(
                f'<rect x="{cx - box_w / 2:.1f}" y="{y_q3:.1f}" width="{box_w:.1f}" '
                f'height="{max(y_q1 - y_q3, 0.5):.1f}" fill="lightsteelblue" stroke="black"/>'
            )
            parts.append(
                f'<line x1="{cx - box_w / 2:.1f}" y1="{y_med:.1f}" '
                f'x2="{cx + box_w / 2:.1f}" y2="{y_med:.1f}" stroke="black" stroke-width="2"/>'
            )
            parts.append(
                f'<text x="{cx:.1f}" y="{plot_bottom + 14:.1f}" font-size="9" '
                f'text-anchor="middle">{rel}</text>'
            )
            x += width_per_box
        parts.append(
            f'<text x="{(panel_x + x) / 2:.1f}" y="{plot_bottom + 30:.1f}" '
            f'font-size="11" text-anchor="middle" font-weight="bold">{pos}</text>'
        )
        x += panel_pad
    width = x
    scale_note = " (log scale)" if log else ""
    header = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
        f'<text x="{panel_pad}" y="20" font-size="13" font-weight="bold">'
        f"{title}{scale_note}</text>"
    )
    return header + "".join(parts) + "</svg>\n"
