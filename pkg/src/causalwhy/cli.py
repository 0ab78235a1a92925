"""Command-line surface: offline learning, online explanation, synthetic-data
generation, the benchmark grid and the HTTP server."""

from __future__ import annotations

import csv as csv_mod
import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from .explain import eval_delta as eval_query_delta, explain as run_explain, make_query, optimize_avg, optimize_sum
from . import tabular
from .discovery import AugmentedPag, LearnerConfig, learn
from .explain import DegenerateQueryError, QueryError
from .synth import filter_f1, gen_syn_a, gen_syn_b


@click.group()
def main():
    """Causal and non-causal explanations for aggregate why-queries."""


@main.command("learn")
@click.option("--data", required=True, type=click.Path(), help="CSV input")
@click.option("--out", required=True, type=click.Path(), help="graph JSON output")
@click.option("--alpha", default=0.05, show_default=True)
@click.option("--bins", default=5, show_default=True)
@click.option("--max-cond", default=3, show_default=True)
def cli_learn(data, out, alpha, bins, max_cond):
    """Learn the FD-augmented graph for a CSV table."""
    try:
        d = tabular.load_csv(data)
        cfg = LearnerConfig(alpha=alpha, bins=bins, max_cond_size=max_cond)
        pag = learn(d, cfg=cfg)
    except Exception as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    Path(out).write_text(pag.to_json_str())
    counts = {}
    for _, _, mu, mv in pag.graph.edges():
        kind = f"{mu}/{mv}"
        counts[kind] = counts.get(kind, 0) + 1
    click.echo(f"nodes: {len(pag.graph.nodes)}  edges: {pag.graph.edge_count()}")
    for kind, n in sorted(counts.items()):
        click.echo(f"  {kind}: {n}")


def _parse_background(pairs):
    out = []
    for item in pairs:
        if "=" not in item:
            raise click.BadParameter(f"background must be dim=value, got {item}")
        dim, value = item.split("=", 1)
        out.append(tabular.Filter(dim, value))
    return out


@main.command("explain")
@click.option("--data", required=True, type=click.Path())
@click.option("--graph", "graph_path", required=True, type=click.Path())
@click.option("--measure", required=True)
@click.option("--agg", type=click.Choice(["sum", "avg"], case_sensitive=False), required=True)
@click.option("--dim", "foreground", required=True, help="foreground dimension")
@click.option("--v1", required=True)
@click.option("--v2", required=True)
@click.option("--background", multiple=True, help="dim=value, repeatable")
@click.option("--epsilon-frac", default=0.1, show_default=True)
@click.option("--top", default=None, type=int)
@click.option("--out", default=None, type=click.Path(), help="JSON output path")
def cli_explain(data, graph_path, measure, agg, foreground, v1, v2, background, epsilon_frac, top, out):
    """Rank predicate explanations for a why-query."""
    try:
        d = tabular.load_csv(data)
        pag = AugmentedPag.from_json(Path(graph_path).read_text())
        query = make_query(
            d,
            measure=measure,
            agg=agg,
            foreground=foreground,
            value_1=v1,
            value_2=v2,
            background=_parse_background(background),
            epsilon_frac=epsilon_frac,
        )
        results = run_explain(d, pag, query)
    except FileNotFoundError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except (QueryError, DegenerateQueryError, tabular.TabularError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    if top is not None:
        results = results[:top]
    payload = {
        "query": query.to_json(),
        "delta": eval_query_delta(d, query),
        "explanations": [e.to_json() for e in results],
    }
    if out:
        Path(out).write_text(json.dumps(payload, indent=2))
    header = f"{'rank':<5}{'type':<12}{'dimension':<20}{'predicate':<36}{'resp':>8}{'score':>8}"
    click.echo(header)
    for i, e in enumerate(results, 1):
        values = ",".join(str(v) for v in sorted(e.predicate.values, key=str))
        click.echo(f"{i:<5}{e.kind:<12}{e.dimension:<20}{values:<36}{e.responsibility:>8.3f}{e.score:>8.3f}")


@main.command("synth")
@click.argument("family", type=click.Choice(["syn-a", "syn-b"]))
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--vars", "n_vars", default=10, show_default=True, help="syn-a variable count")
@click.option("--rows", default=10000, show_default=True)
@click.option("--cardinality", default=10, show_default=True, help="syn-b dimension size")
@click.option("--k", default=3, show_default=True, help="syn-b planted filter count")
@click.option("--mu", default=10.0, show_default=True)
@click.option("--mu-star", default=60.0, show_default=True)
def cli_synth(family, seed, out_dir, n_vars, rows, cardinality, k, mu, mu_star):
    """Write a ground-truthed synthetic instance to a directory."""
    if family == "syn-a":
        inst = gen_syn_a(n_vars, seed=seed, n_rows=rows)
    else:
        inst = gen_syn_b(rows=rows, cardinality=cardinality, k=k, mu=mu, mu_star=mu_star, seed=seed)
    inst.to_dir(out_dir)
    click.echo(f"wrote {family} instance (seed={seed}) to {out_dir}")


@main.command("bench")
@click.option("--out", default="bench.csv", show_default=True, type=click.Path())
@click.option("--rows", multiple=True, type=int, default=(10000, 100000), show_default=True)
@click.option("--cardinality", multiple=True, type=int, default=(10, 20, 50, 100), show_default=True)
@click.option("--seeds", default=3, show_default=True)
def cli_bench(out, rows, cardinality, seeds):
    """Planted-explanation recovery grid: F1 and wall time per cell."""
    table = []
    for n_rows in rows:
        for card in cardinality:
            for agg in ("SUM", "AVG"):
                f1s, times = [], []
                for seed in range(seeds):
                    inst = gen_syn_b(rows=n_rows, cardinality=card, seed=seed)
                    q = inst.query(agg=agg)
                    t0 = time.perf_counter()
                    if agg == "SUM":
                        exp = optimize_sum(inst.dataset, q, "Y")
                    else:
                        exp = optimize_avg(inst.dataset, q, "Y")
                    times.append(time.perf_counter() - t0)
                    f1s.append(filter_f1(exp.predicate.values, inst.truth_values) if exp else 0.0)
                table.append(
                    {
                        "rows": n_rows,
                        "cardinality": card,
                        "agg": agg,
                        "f1": round(float(np.mean(f1s)), 4),
                        "time_sec": round(float(np.mean(times)), 5),
                    }
                )
                click.echo(f"rows={n_rows} card={card} {agg}: f1={table[-1]['f1']} t={table[-1]['time_sec']}s")
    with open(out, "w", newline="") as fh:
        writer = csv_mod.DictWriter(fh, fieldnames=["rows", "cardinality", "agg", "f1", "time_sec"])
        writer.writeheader()
        writer.writerows(table)
    click.echo(f"wrote {out}")


@main.command("serve")
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--persist-dir", default=None, type=click.Path())
def cli_serve(port, host, persist_dir):
    """Run the HTTP API."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(persist_dir=persist_dir), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
