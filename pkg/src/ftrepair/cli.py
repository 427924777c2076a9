"""Command line front end.

Exit codes: 0 repair done and verified (or check passed), 2 repair not
possible / check failed, 3 usage or input error, 4 internal disagreement
between a repair and its verifier.
"""
from __future__ import annotations

import dataclasses
import json
import os
import sys
import time

import click

from . import casestudies
from .core import Model, NotPossible, Repaired, UsageError
from .dsl import evaluate_predicate, load_model, parse_model, state_cap
from .fault_tolerance import (
    add_failsafe,
    add_masking,
    add_nonmasking,
    verification_model,
)
from .semantics import (
    Verdict,
    format_trace,
    verify_failsafe,
    verify_leadsto,
    verify_masking,
    verify_stabilization,
)
from .serialize import dump_document, load_candidate, outcome_document
from .stabilize import add_stabilization
from .transforms import (
    consecutive_env_transform,
    eventually_fair_transform,
    strict_invariant_mode,
)

EXIT_OK = 0
EXIT_NOT_POSSIBLE = 2
EXIT_USAGE = 3
EXIT_MISMATCH = 4

MODES = ("stabilize", "failsafe", "masking", "nonmasking")
PROPERTIES = ("stabilization", "failsafe", "masking", "leadsto")


def _fail_usage(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(EXIT_USAGE)


def _load(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    spec = parse_model(text)
    from .dsl import elaborate

    return spec, elaborate(spec, cap=state_cap())


@click.group()
def main():
    """Repair and verify fault tolerance of finite transition systems."""


@main.command()
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(MODES), default="stabilize", show_default=True)
@click.option("--k-override", type=int, default=None, help="Replace the model's k.")
@click.option("--eventually-fair", is_flag=True,
              help="Treat every environment transition as also being a fault.")
@click.option("--consecutive-env", is_flag=True,
              help="Close the environment relation transitively.")
@click.option("--strict-invariant", is_flag=True,
              help="Reject repairs that shrink the invariant.")
@click.option("--sound-only", is_flag=True,
              help="Run fault-tolerance repair for k > 2 (sound, not complete; "
                   "a NotPossible answer is then reported as unknown).")
@click.option("--no-verify", is_flag=True, help="Skip re-verification.")
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--trace", is_flag=True, help="Print a counterexample trace on failure.")
def repair(model_file, mode, k_override, eventually_fair, consecutive_env,
           strict_invariant, sound_only, no_verify, out, trace):
    """Repair the model in MODEL_FILE and write <name>.repaired.json."""
    timings = {}
    try:
        t0 = time.perf_counter()
        spec, model = _load(model_file)
        timings["load"] = time.perf_counter() - t0
        if k_override is not None:
            if k_override <= 1:
                raise UsageError("--k-override must be greater than 1")
            model = model.with_k(k_override)
        if consecutive_env:
            model = consecutive_env_transform(model)
        if eventually_fair and mode != "stabilize":
            model = eventually_fair_transform(model)

        verifier = None
        t0 = time.perf_counter()
        if mode == "stabilize":
            # program restrictions and safety merge for convergence repair
            work = dataclasses.replace(model, delta_b=model.delta_b | model.delta_r)
            outcome = add_stabilization(work)
            verifier = lambda m, o: verify_stabilization(
                dataclasses.replace(m, delta_b=m.delta_b | m.delta_r), o.delta_p_prime
            )
        else:
            if model.k != 2 and not sound_only:
                raise UsageError(
                    f"{mode} repair with k = {model.k} is only available "
                    "with --sound-only"
                )
            algorithm = {"failsafe": add_failsafe, "masking": add_masking,
                         "nonmasking": add_nonmasking}[mode]
            outcome = algorithm(model, sound_only=sound_only)
            if model.k == 2:
                check = verify_failsafe if mode == "failsafe" else verify_masking
                if mode == "nonmasking":
                    relaxed = lambda m: dataclasses.replace(
                        m, delta_b=type(m.delta_b).empty(m.space)
                    )
                    verifier = lambda m, o: verify_masking(
                        relaxed(verification_model(m, o)), o.delta_p_prime, o.invariant_prime
                    )
                else:
                    verifier = lambda m, o, check=check: check(
                        verification_model(m, o), o.delta_p_prime, o.invariant_prime
                    )
        timings["repair"] = time.perf_counter() - t0

        if strict_invariant:
            outcome = strict_invariant_mode(model, outcome)

        verdict = None
        if isinstance(outcome, Repaired) and not no_verify and verifier is not None:
            t0 = time.perf_counter()
            verdict = verifier(model, outcome)
            timings["verify"] = time.perf_counter() - t0
    except UsageError as exc:
        _fail_usage(str(exc))

    status = "repaired" if isinstance(outcome, Repaired) else (
        "unknown" if sound_only and mode != "stabilize" and model.k != 2
        else "not-possible"
    )
    report = {
        "mode": mode,
        "k": model.k,
        "outcome": status,
        "verified": bool(verdict) if verdict is not None else None,
        "sizes": {
            "states": model.space.count,
            "delta_p": len(model.delta_p),
            "delta_e": len(model.delta_e),
            "delta_b": len(model.delta_b),
            "delta_r": len(model.delta_r),
            "faults": len(model.faults),
            "invariant": len(model.invariant),
        },
        "stats": {k: (list(v) if isinstance(v, tuple) else v)
                  for k, v in outcome.stats.items()},
    }
    if isinstance(outcome, Repaired):
        report["sizes"]["delta_p_prime"] = len(outcome.delta_p_prime)
        report["sizes"]["invariant_prime"] = len(outcome.invariant_prime)

    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, f"{spec.name}.repaired.json")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_document(outcome_document(model, outcome, report)))

    console = dict(report)
    console["timings"] = {k: round(v, 6) for k, v in timings.items()}
    console["output"] = path
    click.echo(json.dumps(console, indent=2, sort_keys=True))

    if verdict is not None and not verdict.passed:
        click.echo(f"verification mismatch: {verdict.reason}", err=True)
        if trace and verdict.steps:
            click.echo(format_trace(model, verdict.steps, verdict.cycle), err=True)
        sys.exit(EXIT_MISMATCH)
    sys.exit(EXIT_OK if isinstance(outcome, Repaired) else EXIT_NOT_POSSIBLE)


@main.command()
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--candidate", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Program/invariant JSON to check (defaults to the model's own).")
@click.option("--property", "prop", type=click.Choice(PROPERTIES), required=True)
@click.option("--origin", default=None, help="Origin predicate for leadsto.")
@click.option("--goal", default=None, help="Goal predicate for leadsto.")
@click.option("--k-override", type=int, default=None)
@click.option("--trace", is_flag=True, help="Print a counterexample trace on failure.")
def check(model_file, candidate, prop, origin, goal, k_override, trace):
    """Check a property of MODEL_FILE (or of a candidate repair of it)."""
    try:
        spec, model = _load(model_file)
        if k_override is not None:
            if k_override <= 1:
                raise UsageError("--k-override must be greater than 1")
            model = model.with_k(k_override)
        if candidate is not None:
            program, invariant = load_candidate(candidate, model)
        else:
            program, invariant = model.delta_p, model.invariant
        if prop == "stabilization":
            verdict = verify_stabilization(model, program)
        elif prop == "failsafe":
            verdict = verify_failsafe(model, program, invariant)
        elif prop == "masking":
            verdict = verify_masking(model, program, invariant)
        else:
            if origin is None or goal is None:
                raise UsageError("leadsto needs --origin and --goal")
            verdict = verify_leadsto(
                model,
                program,
                evaluate_predicate(spec, model.space, origin),
                evaluate_predicate(spec, model.space, goal),
            )
    except UsageError as exc:
        _fail_usage(str(exc))

    if verdict.passed:
        click.echo(f"{prop}: pass")
        sys.exit(EXIT_OK)
    click.echo(f"{prop}: fail ({verdict.reason})")
    if trace and verdict.steps:
        click.echo(format_trace(model, verdict.steps, verdict.cycle))
    sys.exit(EXIT_NOT_POSSIBLE)


@main.command()
@click.argument("name", type=click.Choice(["smart-grid", "pressure-cooker"]))
@click.option("--max", "max_value", type=int, default=3, show_default=True,
              help="Sensor domain bound for the smart grid.")
@click.option("--variant", type=click.Choice(["db", "db2"]), default="db",
              show_default=True, help="Bad-transition variant for the smart grid.")
@click.option("--k", type=int, default=None, help="Window width (defaults: grid 2, cooker 3).")
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True)
def example(name, max_value, variant, k, out):
    """Write a ready-to-use example model file."""
    try:
        if name == "smart-grid":
            text = casestudies.smart_grid_text(max_value, variant, k if k is not None else 2)
            fname = f"smart_grid_{variant}.model"
        else:
            text = casestudies.pressure_cooker_text(k if k is not None else 3)
            fname = "pressure_cooker.model"
        if k is not None and k <= 1:
            raise UsageError("k must be greater than 1")
    except UsageError as exc:
        _fail_usage(str(exc))
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, fname)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    click.echo(path)
    sys.exit(EXIT_OK)


if __name__ == "__main__":  # pragma: no cover
    main()
