"""Result-table rendering: full-train grid, few-shot grid, mean/std summary, runtime data.

Reports are pure functions of a results list. Seed repeats are averaged and
labeled; excluded or failed cells render as an em-dash with a footnote.
"""

from __future__ import annotations

from collections import defaultdict

from .classifiers import ALGORITHMS
from .harness import RunResult
from .metrics import FEW_SHOT_K, MetricsError, mean, mean_std_over_k

REPORT_STYLES = ("table3", "table4", "table5", "runtime")


class ReportError(ValueError):
    pass


def _model_order(models: set[str]) -> list[str]:
    known = [m for m in ALGORITHMS if m in models]
    extra = sorted(models - set(ALGORITHMS))
    return known + extra


def _first_seen_order(values: list[str]) -> list[str]:
    seen: dict[str, None] = {}
    for v in values:
        seen.setdefault(v)
    return list(seen)


def _k_sort_key(k) -> tuple[int, int]:
    return (1, 0) if isinstance(k, str) else (0, int(k))


def _fmt(value: float | None, best: float | None, digits: int) -> str:
    if value is None:
        return "—"
    text = f"{value:.{digits}f}"
    return f"**{text}**" if best is not None and abs(value - best) < 10 ** -(digits + 6) else text


def _markdown_table(header: list[str], rows: list[list[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines)


def _group_cells(results: list[RunResult]):
    """(model, dataset, k) -> seed-averaged metrics over ok rows; exclusions kept separately."""
    ok: dict[tuple, list[RunResult]] = defaultdict(list)
    excluded: dict[tuple, str] = {}
    for r in results:
        key = (r.model, r.dataset, str(r.k))
        if r.status == "ok":
            ok[key].append(r)
        else:
            excluded.setdefault(key, f"{r.status}: {r.notes}" if r.notes else r.status)
    cells = {
        key: {
            "f1": mean(r.metrics.f1 for r in rows),
            "precision": mean(r.metrics.precision for r in rows),
            "recall": mean(r.metrics.recall for r in rows),
            "train_time_s": mean(r.metrics.train_time_s for r in rows),
            "infer_time_s": mean(r.metrics.infer_time_s for r in rows),
            "seeds": len(rows),
        }
        for key, rows in ok.items()
    }
    return cells, excluded


def report(results: list[RunResult], style: str) -> tuple[str, list[dict]]:
    """Render one report style; returns (markdown text, plot-ready rows)."""
    if not results:
        raise ReportError("results are empty; nothing to report")
    if style not in REPORT_STYLES:
        raise ReportError(f"unknown report style {style!r}; expected one of {REPORT_STYLES}")
    if style == "table3":
        return _report_full_train(results)
    if style == "table4":
        return _report_few_shot(results)
    if style == "table5":
        return _report_mean_std(results)
    return _report_runtime(results)


def _report_full_train(results: list[RunResult]):
    cells, excluded = _group_cells(results)
    datasets = _first_seen_order([r.dataset for r in results])
    models = _model_order({r.model for r in results})
    seeds = max((c["seeds"] for c in cells.values()), default=0)

    grid: dict[tuple, dict | None] = {}
    for model in models:
        for dataset in datasets:
            grid[(model, dataset)] = cells.get((model, dataset, "full"))
    best: dict[tuple, float | None] = {}
    for dataset in datasets:
        for metric in ("f1", "precision", "recall"):
            vals = [grid[(m, dataset)][metric] for m in models if grid[(m, dataset)]]
            best[(dataset, metric)] = max(vals) if vals else None

    header = ["Model"] + [f"{d} {m}" for d in datasets for m in ("F1", "P", "R")]
    rows = []
    for model in models:
        row = [model]
        for dataset in datasets:
            cell = grid[(model, dataset)]
            for metric in ("f1", "precision", "recall"):
                row.append(_fmt(cell[metric] if cell else None, best[(dataset, metric)], 2))
        rows.append(row)

    notes = [
        f"- excluded: {m}/{d} ({why})"
        for (m, d, k), why in sorted(excluded.items())
        if k == "full"
    ]
    text = "# Full-train test scores per dataset\n\n"
    text += f"Seed repeats averaged: {seeds}.\n\n"
    text += _markdown_table(header, rows)
    if notes:
        text += "\n\n" + "\n".join(notes)
    plot_rows = [
        {"model": m, "dataset": d, "metric": metric, "value": grid[(m, d)][metric]}
        for m in models for d in datasets if grid[(m, d)]
        for metric in ("f1", "precision", "recall")
    ]
    return text + "\n", plot_rows


def _macro_f1_rows(results: list[RunResult]):
    """(model, k) -> macro-F1 over the datasets present (seed means first)."""
    cells, excluded = _group_cells(results)
    datasets = _first_seen_order([r.dataset for r in results])
    ks = sorted({str(r.k) for r in results}, key=lambda s: _k_sort_key(int(s) if s.isdigit() else s))
    models = _model_order({r.model for r in results})
    macro: dict[tuple, float] = {}
    gaps: list[str] = []
    for model in models:
        for k in ks:
            present = [cells[(model, d, k)]["f1"] for d in datasets if (model, d, k) in cells]
            if present:
                macro[(model, k)] = mean(present)
            if len(present) < len(datasets):
                missing = [d for d in datasets if (model, d, k) not in cells]
                gaps.append(
                    f"- {model} k={k}: macro over {len(present)}/{len(datasets)} datasets "
                    f"(missing {', '.join(missing)})"
                )
    return models, ks, macro, gaps, excluded


def _report_few_shot(results: list[RunResult]):
    models, ks, macro, gaps, _ = _macro_f1_rows(results)
    seeds = sorted({r.seed for r in results})
    best = {k: max((macro[(m, k)] for m in models if (m, k) in macro), default=None) for k in ks}
    header = ["Model"] + [str(k) for k in ks]
    rows = []
    for model in models:
        rows.append(
            [model] + [_fmt(macro.get((model, k)), best[k], 3) for k in ks]
        )
    text = "# Macro-F1 across datasets by number of training samples\n\n"
    text += f"Seeds averaged per cell: {seeds}.\n\n"
    text += _markdown_table(header, rows)
    if gaps:
        text += "\n\n" + "\n".join(sorted(set(gaps)))
    plot_rows = [
        {"model": m, "k": k, "macro_f1": macro[(m, k)]}
        for m in models for k in ks if (m, k) in macro
    ]
    return text + "\n", plot_rows


def _report_mean_std(results: list[RunResult]):
    models, ks, macro, gaps, _ = _macro_f1_rows(results)
    header = ["Model", "mean F1", "std"]
    rows = []
    plot_rows = []
    skipped = []
    for model in models:
        row = {}
        for k in FEW_SHOT_K:
            key = (model, str(k))
            if key in macro:
                row[k] = macro[key]
        try:
            m, s = mean_std_over_k(row)
        except MetricsError:
            skipped.append(f"- {model}: missing sample-size cells, no summary")
            continue
        rows.append([model, f"{m:.4f}", f"{s:.4f}"])
        plot_rows.append({"model": model, "mean_f1": m, "std_f1": s})
    text = "# Mean F1 across all sample sizes (macro over datasets)\n\n"
    text += _markdown_table(header, rows)
    if skipped:
        text += "\n\n" + "\n".join(skipped)
    if gaps:
        text += "\n\n" + "\n".join(sorted(set(gaps)))
    return text + "\n", plot_rows


def _report_runtime(results: list[RunResult]):
    cells, _ = _group_cells(results)
    models = _model_order({r.model for r in results})
    ks = sorted({str(r.k) for r in results}, key=lambda s: _k_sort_key(int(s) if s.isdigit() else s))
    datasets = _first_seen_order([r.dataset for r in results])
    plot_rows = []
    rows = []
    for model in models:
        for k in ks:
            train_times = [cells[(model, d, k)]["train_time_s"] for d in datasets if (model, d, k) in cells]
            infer_times = [cells[(model, d, k)]["infer_time_s"] for d in datasets if (model, d, k) in cells]
            if not train_times:
                continue
            row = {
                "model": model,
                "k": k,
                "train_time_s": mean(train_times),
                "infer_time_s": mean(infer_times),
            }
            plot_rows.append(row)
            rows.append([model, k, f"{row['train_time_s']:.4f}", f"{row['infer_time_s']:.4f}"])
    text = "# Train and inference wall time by number of training samples\n\n"
    text += "Times are macro averages over datasets (seconds).\n\n"
    text += _markdown_table(["Model", "k", "train_s", "infer_s"], rows)
    return text + "\n", plot_rows


def plot_rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    columns = list(rows[0])
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in columns))
    return "\n".join(lines) + "\n"
