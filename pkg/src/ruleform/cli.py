"""Batch tooling: compile, lint, order, benchmark, generate, run cases, serve.

Exit codes: 0 success, 1 usage error, 2 input or parse error, 3 internal error.
"""

from __future__ import annotations

import json
import math
import statistics
import time
from pathlib import Path

import click

from . import __version__
from .cases import dump_cases, evaluate_cases, load_cases, summarize_cases
from .catalog import Catalog, load_catalog
from .display import (
    Order,
    compile_display_rules,
    displayed_conditions,
    expected_rule_count,
    export_display_rules,
)
from .dsl import parse_rulebase
from .errors import RuleformError
from .ordering import (
    OptimizerConfig,
    OrderingInstance,
    brute_force_order,
    condition_frequency_order,
    objective,
    optimize_order,
)
from .rules import PatientState, RuleBase, validate_rulebase
from .service import ServiceConfig, serve
from .synth import SynthSpec, build_model, generate_synthetic, random_cases

BRUTE_FORCE_CAP = 8


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise click.FileError(path, hint=str(exc)) from exc


def _load_model(rulebase_path: str, catalog_path: str) -> tuple[Catalog, RuleBase]:
    catalog = load_catalog(_read(catalog_path))
    rb = parse_rulebase(_read(rulebase_path), catalog)
    return catalog, rb


def _parse_drugs(text: str) -> frozenset[str]:
    return frozenset(part.strip() for part in text.split(",") if part.strip())


def _choose_order(rb: RuleBase, mode: str, seed: int, drugs: frozenset[str]) -> Order:
    inst = OrderingInstance(rb, drugs)
    if mode == "optimize":
        return optimize_order(inst, OptimizerConfig(seed=seed))
    if mode == "brute":
        return brute_force_order(inst, BRUTE_FORCE_CAP)[0]
    return condition_frequency_order(rb)


@click.group()
@click.version_option(__version__, prog_name="ruleform")
def cli():
    """Rule-to-questionnaire compiler and adaptive questionnaire tooling."""


@cli.command("compile")
@click.argument("rulebase", type=click.Path())
@click.argument("catalog", type=click.Path())
@click.option("--order-mode", type=click.Choice(["frequency", "optimize"]), default="frequency")
@click.option("--seed", type=int, default=0, help="Seed for the optimizer.")
@click.option("--output", "-o", type=click.Path(), help="Write JSON here instead of stdout.")
def compile_cmd(rulebase, catalog, order_mode, seed, output):
    """Compile a rulebase into display rules and emit them as JSON."""
    _, rb = _load_model(rulebase, catalog)
    order = _choose_order(rb, order_mode, seed, frozenset())
    drs = compile_display_rules(rb, order)
    doc = {
        "order": list(order.sequence),
        "ruleCount": len(rb.rules),
        "displayRuleCount": len(drs),
        "expectedDisplayRuleCount": expected_rule_count(rb),
        "displayRules": export_display_rules(drs),
    }
    text = json.dumps(doc, indent=2)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
        click.echo(f"wrote {len(drs)} display rules to {output}")
    else:
        click.echo(text)


@cli.command("lint")
@click.argument("rulebase", type=click.Path())
@click.argument("catalog", type=click.Path())
def lint_cmd(rulebase, catalog):
    """Report rulebase diagnostics (contradictions, degenerate groups, unused ids)."""
    _, rb = _load_model(rulebase, catalog)
    diagnostics = validate_rulebase(rb)
    for diag in diagnostics:
        click.echo(f"{diag.level}[{diag.code}] {diag.message}")
    if not diagnostics:
        click.echo("no issues found")


@cli.command("order")
@click.argument("rulebase", type=click.Path())
@click.argument("catalog", type=click.Path())
@click.option("--mode", type=click.Choice(["frequency", "optimize", "brute"]), default="frequency")
@click.option("--seed", type=int, default=0)
@click.option("--drugs", default="", help="Comma-separated non-clinical ids assumed present.")
@click.option("--format", "fmt", type=click.Choice(["table", "data"]), default="table")
def order_cmd(rulebase, catalog, mode, seed, drugs, fmt):
    """Compute a priority order and compare the available solvers."""
    _, rb = _load_model(rulebase, catalog)
    drug_set = _parse_drugs(drugs)
    inst = OrderingInstance(rb, drug_set)

    chosen = _choose_order(rb, mode, seed, drug_set)
    chosen_cost = objective(inst, chosen)

    comparison: dict[str, int | None] = {
        "frequency": objective(inst, condition_frequency_order(rb)),
        "optimize": objective(inst, optimize_order(inst, OptimizerConfig(seed=seed))),
    }
    if len(rb.referenced_clinical_ids()) <= BRUTE_FORCE_CAP:
        comparison["brute"] = brute_force_order(inst, BRUTE_FORCE_CAP)[1]
    else:
        comparison["brute"] = None

    if fmt == "data":
        click.echo(
            json.dumps(
                {
                    "mode": mode,
                    "order": list(chosen.sequence),
                    "objective": chosen_cost,
                    "comparison": comparison,
                },
                indent=2,
            )
        )
        return
    click.echo(f"mode:      {mode}")
    click.echo(f"objective: {chosen_cost}")
    click.echo(f"order:     {' < '.join(chosen.sequence) if chosen.sequence else '(empty)'}")
    click.echo("comparison:")
    for name in ("frequency", "optimize", "brute"):
        value = comparison[name]
        click.echo(f"  {name:<10} {value if value is not None else 'n/a (too large)'}")


@cli.command("order-bench")
@click.option("--instances", type=int, default=100, show_default=True)
@click.option("--clinical", type=int, default=6, show_default=True)
@click.option("--rules", type=int, default=5, show_default=True)
@click.option("--drug-count", type=int, default=0, show_default=True)
@click.option("--seed", type=int, default=0)
@click.option("--format", "fmt", type=click.Choice(["table", "data"]), default="table")
def order_bench_cmd(instances, clinical, rules, drug_count, seed, fmt):
    """Optimizer vs exhaustive search over random instances; reports the match rate."""
    rows = []
    for i in range(instances):
        spec = SynthSpec(
            rule_count=rules,
            clinical_count=clinical,
            drug_count=drug_count,
            stopp_fraction=0.5 if drug_count else 0.0,
            seed=seed + i,
        )
        _, rb = build_model(spec)
        inst = OrderingInstance(rb)
        heuristic_cost = objective(inst, condition_frequency_order(rb))
        optimizer_cost = objective(inst, optimize_order(inst, OptimizerConfig(seed=seed + i)))
        brute_cost = brute_force_order(inst, BRUTE_FORCE_CAP)[1]
        rows.append(
            {
                "instance": i,
                "heuristic": heuristic_cost,
                "optimizer": optimizer_cost,
                "brute": brute_cost,
            }
        )
    matches = sum(1 for r in rows if r["optimizer"] == r["brute"])
    regressions = sum(1 for r in rows if r["optimizer"] > r["heuristic"])
    if fmt == "data":
        click.echo(
            json.dumps(
                {"instances": rows, "optimalMatches": matches, "heuristicRegressions": regressions},
                indent=2,
            )
        )
        return
    click.echo(f"instances:              {instances}")
    click.echo(f"optimizer == brute:     {matches}/{instances}")
    click.echo(f"optimizer > heuristic:  {regressions}/{instances}")


@cli.command("run-cases")
@click.argument("rulebase", type=click.Path())
@click.argument("catalog", type=click.Path())
@click.argument("cases", type=click.Path())
@click.option("--order-mode", type=click.Choice(["frequency", "optimize"]), default="frequency")
@click.option("--seed", type=int, default=0)
@click.option("--format", "fmt", type=click.Choice(["table", "data"]), default="table")
def run_cases_cmd(rulebase, catalog, cases, order_mode, seed, fmt):
    """Run a clinical case suite and report per-case questionnaire metrics."""
    _, rb = _load_model(rulebase, catalog)
    suite = load_cases(_read(cases))
    order = _choose_order(rb, order_mode, seed, frozenset())
    metrics = evaluate_cases(rb, suite, order)
    summary = summarize_cases(metrics)
    if fmt == "data":
        doc = {
            "cases": [
                {
                    "id": m.case_id,
                    "drugCount": m.drug_count,
                    "executionTimeSeconds": round(m.execution_time_seconds, 6),
                    "conditionsDisplayed": m.conditions_displayed,
                    "rulesTriggered": m.rules_triggered,
                    "displayedFraction": round(m.displayed_fraction, 4),
                }
                for m in metrics
            ],
            "mean": None
            if summary is None
            else {
                "drugCount": round(summary.mean_drugs, 2),
                "executionTimeSeconds": round(summary.mean_time_seconds, 6),
                "conditionsDisplayed": round(summary.mean_displayed, 2),
                "rulesTriggered": round(summary.mean_triggered, 2),
                "displayedFraction": round(summary.mean_fraction, 4),
            },
        }
        click.echo(json.dumps(doc, indent=2))
        return
    header = f"{'Case':<12} {'Drugs':>5} {'Time':>9} {'Displayed':>10} {'Triggered':>10} {'Fraction':>9}"
    click.echo(header)
    click.echo("-" * len(header))
    for m in metrics:
        click.echo(
            f"{m.case_id:<12} {m.drug_count:>5} {m.execution_time_seconds:>8.3f}s "
            f"{m.conditions_displayed:>10} {m.rules_triggered:>10} {m.displayed_fraction:>8.1%}"
        )
    if summary is not None:
        click.echo("-" * len(header))
        click.echo(
            f"{'Mean':<12} {summary.mean_drugs:>5.1f} {summary.mean_time_seconds:>8.3f}s "
            f"{summary.mean_displayed:>10.1f} {summary.mean_triggered:>10.1f} "
            f"{summary.mean_fraction:>8.1%}"
        )


@cli.command("generate")
@click.option("--rules", type=int, required=True)
@click.option("--clinical", type=int, required=True)
@click.option("--drugs", type=int, required=True)
@click.option("--stopp-fraction", type=float, default=1.0, show_default=True)
@click.option("--seed", type=int, default=0)
@click.option("--out-dir", type=click.Path(), required=True)
@click.option("--cases", "case_count", type=int, default=0, help="Also emit a case suite.")
@click.option("--mean-drugs", type=float, default=11.5, show_default=True)
@click.option("--truth-prob", type=float, default=0.25, show_default=True)
def generate_cmd(rules, clinical, drugs, stopp_fraction, seed, out_dir, case_count, mean_drugs, truth_prob):
    """Generate a synthetic catalog + rulebase (and optionally cases) at scale."""
    spec = SynthSpec(
        rule_count=rules,
        clinical_count=clinical,
        drug_count=drugs,
        stopp_fraction=stopp_fraction,
        seed=seed,
    )
    catalog_text, rules_text = generate_synthetic(spec)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "catalog.yaml").write_text(catalog_text, encoding="utf-8")
    (out / "rulebase.rules").write_text(rules_text, encoding="utf-8")
    written = ["catalog.yaml", "rulebase.rules"]
    if case_count:
        _, rb = build_model(spec)
        suite = random_cases(rb, case_count, mean_drugs, truth_prob, seed)
        (out / "cases.json").write_text(dump_cases(suite), encoding="utf-8")
        written.append("cases.json")
    click.echo(f"wrote {', '.join(written)} to {out}")


@cli.command("dump-full")
@click.argument("rulebase", type=click.Path())
@click.argument("catalog", type=click.Path())
@click.option("--format", "fmt", type=click.Choice(["table", "data"]), default="table")
def dump_full_cmd(rulebase, catalog, fmt):
    """List every rule-referenced clinical condition: the non-adaptive baseline."""
    cat, rb = _load_model(rulebase, catalog)
    referenced = rb.referenced_clinical_ids()
    panels = []
    for category in cat.categories:
        members = sorted(
            (c for c in referenced if cat.condition(c).category == category.name),
            key=lambda c: (cat.condition(c).label, c),
        )
        if not members:
            continue
        panels.append((category, members))
    if fmt == "data":
        doc = [
            {
                "category": category.name,
                "color": category.color,
                "items": [
                    {
                        "conditionId": cond_id,
                        "label": cat.condition(cond_id).label,
                        "codes": [
                            f"{code.system}:{code.value}"
                            for code in cat.condition(cond_id).codes
                        ],
                    }
                    for cond_id in members
                ],
            }
            for category, members in panels
        ]
        click.echo(json.dumps(doc, indent=2))
        return
    for category, members in panels:
        click.echo(f"== {category.name} ==")
        for cond_id in members:
            cond = cat.condition(cond_id)
            codes = ", ".join(f"{c.system}:{c.value}" for c in cond.codes)
            click.echo(f"  [ ] {cond.label} ({cond_id})  {codes}")
    click.echo(f"total: {len(referenced)} conditions")


@cli.command("bench")
@click.argument("rulebase", type=click.Path())
@click.argument("catalog", type=click.Path())
@click.option("--repetitions", type=int, default=200, show_default=True)
@click.option("--drugs", default="", help="Comma-separated non-clinical ids assumed present.")
@click.option("--format", "fmt", type=click.Choice(["table", "data"]), default="table")
def bench_cmd(rulebase, catalog, repetitions, drugs, fmt):
    """Time one full display-rule evaluation pass, repeated."""
    _, rb = _load_model(rulebase, catalog)
    order = condition_frequency_order(rb)
    drs = compile_display_rules(rb, order)
    patient = PatientState(present_nonclinical=set(_parse_drugs(drugs)))
    timings = []
    for _ in range(repetitions):
        started = time.perf_counter()
        displayed_conditions(drs, patient)
        timings.append(time.perf_counter() - started)
    timings.sort()
    mean = sum(timings) / len(timings)
    median = statistics.median(timings)
    p95 = timings[max(0, math.ceil(0.95 * len(timings)) - 1)]
    if fmt == "data":
        click.echo(
            json.dumps(
                {
                    "repetitions": repetitions,
                    "displayRules": len(drs),
                    "meanSeconds": round(mean, 6),
                    "medianSeconds": round(median, 6),
                    "p95Seconds": round(p95, 6),
                },
                indent=2,
            )
        )
        return
    click.echo(f"display rules: {len(drs)}")
    click.echo(f"repetitions:   {repetitions}")
    click.echo(f"mean:          {mean:.6f} s")
    click.echo(f"median:        {median:.6f} s")
    click.echo(f"p95:           {p95:.6f} s")


def _parse_mounts(pairs: tuple[str, ...], what: str) -> dict[str, Path]:
    mounts = {}
    for pair in pairs:
        name, _, path = pair.partition("=")
        if not name or not path:
            raise click.UsageError(f"{what} must look like id=path, got {pair!r}")
        mounts[name] = Path(path)
    return mounts


@cli.command("serve")
@click.option("--catalog", "catalog_path", type=click.Path(), required=True)
@click.option("--rulebase", "rulebases", multiple=True, required=True, help="id=path, repeatable.")
@click.option("--order-file", "order_files", multiple=True, help="id=path, repeatable (mode file).")
@click.option("--order-mode", type=click.Choice(["frequency", "optimize", "file"]), default="frequency")
@click.option("--seed", type=int, default=0)
@click.option("--patient-specific", is_flag=True, help="Recompute the order per session (mode optimize).")
@click.option("--expiry", type=float, default=3600.0, show_default=True, help="Session idle expiry (s).")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--cors-origin", "cors_origins", multiple=True, help="Allowed CORS origin, repeatable.")
def serve_cmd(catalog_path, rulebases, order_files, order_mode, seed, patient_specific, expiry, host, port, cors_origins):
    """Serve the questionnaire HTTP API (compiles everything up front)."""
    config = ServiceConfig(
        catalog_path=Path(catalog_path),
        rulebase_paths=_parse_mounts(rulebases, "--rulebase"),
        host=host,
        port=port,
        ordering_mode=order_mode,
        order_paths=_parse_mounts(order_files, "--order-file"),
        optimizer_seed=seed,
        patient_specific=patient_specific,
        session_expiry_seconds=expiry,
        cors_origins=tuple(cors_origins),
    )
    serve(config)


def main(argv=None) -> int:
    """CLI entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 1
    except (RuleformError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except Exception as exc:  # noqa: BLE001 - anything else is an internal bug
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
