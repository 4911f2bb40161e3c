# /*
#  * -----------------------------------------------------------------------------
#  *  Copyright (c) 2025 Magda Kowalska. All rights reserved.
#  *
#  *  This software and its source code are the intellectual property of
#  *  Magda Kowalska. Unauthorized copying, reproduction, or use of this
#  *  software, in whole or in part, is strictly prohibited without express
#  *  written permission.
#  *
#  *  This software is protected under the Berne Convention for the Protection
#  *  of Literary and Artistic Works, EU copyright law, and international
#  *  copyright treaties.
#  *
#  *  Author: Magda Kowalska
#  *  Created: 2026-10-19
#  *  Last Modified: 2026-10-19
#  * -----------------------------------------------------------------------------
#  */

"""Command-line entry point.

    python -m opfield.main homotopy --hermitian h.json --unitary u.json --delta 1e-6 --out out/
    python -m opfield.main stitch --field field.json --epsilon 0.05 --out out/ --csv
    python -m opfield.main refine --field field.json --schedule 1e-2:0.0625:4 --out out/
    python -m opfield.main gen --spec spec.json --kind pair --out out/
    python -m opfield.main verify --path out/path.json --certificate out/certificate.json \\
        --hermitian h.json --unitary u.json

Matrix files are {"rows": n, "cols": n, "entries": [[re, im], ...]} in
row-major order. Field files are {"base": {"kind": "interval", "a": -1,
"b": 1}, "p": 1, "n": 2, "grid": [...], "values": [<matrix>, ...]}.
Exit codes: 0 ok, 1 input error, 2 bound or verification failure,
3 grid-density violation.
"""

import logging
import os
import sys

import click
from pydantic import ValidationError

from opfield.config import (
    DEFAULT_DELTA,
    DEFAULT_EPSILON,
    DEFAULT_OUT,
    DEFAULT_SCHEDULE,
    DEFAULT_SEED,
    LOG_LEVEL,
    SAMPLES_PER_STAGE,
)
from opfield.exceptions import EXIT_BOUND, EXIT_DENSITY, EXIT_INPUT, OpfieldError
from opfield.field_stitch import refine_field, stitch_field
from opfield.homotopy import build_homotopy, path_profile, verify_certificate
from opfield.models import GeneratorSpec
from opfield.schema import (
    CertificateFile,
    EigenvalueFieldFile,
    FieldFile,
    JumpReportFile,
    MatrixFile,
    PathFile,
    RunConfig,
)
from opfield.utils.instance_utils import gen_almost_commuting_pair, gen_field
from opfield.utils.io_utils import curves_frame, read_model, write_csv, write_json

logger = logging.getLogger(__name__)

EXIT_OK = 0


def _banner(title: str) -> None:
    click.echo(f"\n{'=' * 60}")
    click.echo(title)
    click.echo("=" * 60)


def _out(config: RunConfig, name: str) -> str:
    return os.path.join(config.out, name)


def _load_matrix(path: str):
    return read_model(path, MatrixFile).to_array()


def cmd_homotopy(config: RunConfig) -> int:
    """Build, verify and write the homotopy for the pair in config.inputs"""
    _banner("HOMOTOPY")
    h = _load_matrix(config.inputs["hermitian"])
    u = _load_matrix(config.inputs["unitary"])
    result = build_homotopy(h, u, config.delta, config.samples_per_stage or SAMPLES_PER_STAGE)
    cert = result.certificate
    report = verify_certificate(result.path, h, cert, u, pre_path=result.pre_path)

    write_json(_out(config, "path.json"), PathFile.from_path(result.path))
    write_json(_out(config, "pre_path.json"), PathFile.from_path(result.pre_path))
    write_json(_out(config, "certificate.json"), CertificateFile(certificate=cert, verification=report))
    write_json(_out(config, "verification.json"), report)
    if config.emit_csv:
        write_csv(_out(config, "profile.csv"), path_profile(result, h))

    click.echo(f"Branch: {cert.branch} (m={cert.m}, N={cert.N})")
    click.echo(f"sup ||[u(t), h]|| = {cert.sup_commutator:.3e}  (threshold {cert.thresholds.commutator:.3e})")
    for check in report.checks:
        status = "ok" if check.passed else ("FAIL" if check.enforced else "over (not enforced)")
        click.echo(f"  {check.name:<24} {check.measured:.3e} / {check.threshold:.3e}  {status}")
    for note in report.notes:
        click.echo(f"  note: {note}")
    return EXIT_OK if report.passed else EXIT_BOUND


def cmd_stitch(config: RunConfig) -> int:
    """Stitch (or refine) the field in config.inputs and write curves and reports"""
    _banner(config.command.upper())
    field = read_model(config.inputs["field"], FieldFile).to_field()
    exit_code = EXIT_OK

    if config.command == "refine":
        refinement = refine_field(field, config.refinement)
        result = refinement.final
        write_json(
            _out(config, "cauchy.json"),
            {
                "checks": refinement.cauchy,
                "iterations": refinement.iterations,
            },
        )
        for check in refinement.cauchy:
            click.echo(
                f"  iteration {check.iteration}: delta {check.delta:.3e} "
                f"bound {check.bound:.3e} {'ok' if check.passed else 'FAIL'}"
            )
        if not all(check.passed for check in refinement.cauchy):
            exit_code = EXIT_BOUND
    else:
        result = stitch_field(field, config.epsilon)

    write_json(_out(config, "eigenvalue_field.json"), EigenvalueFieldFile.from_result(result))
    write_json(_out(config, "jump_report.json"), JumpReportFile.from_result(result, field))
    if config.emit_csv:
        write_csv(_out(config, "curves.csv"), curves_frame(result))

    click.echo(f"Nodes: {len(field.values)}, breakpoints: {len(result.breakpoints)}")
    click.echo(f"Max jump: {result.max_jump:.3e}")
    if result.holonomy_jump is not None:
        click.echo(f"Holonomy jump: {result.holonomy_jump:.3e}")
    if result.density_violations:
        click.echo(f"Grid too coarse at {len(result.density_violations)} node(s):")
        for violation in result.density_violations:
            click.echo(f"  node {violation.node}: {violation.distance:.3e} >= {violation.epsilon:.3e}")
        return EXIT_DENSITY
    return exit_code


def cmd_gen(config: RunConfig, kind: str) -> int:
    _banner(f"GENERATE {kind.upper()}")
    spec = read_model(config.inputs["spec"], GeneratorSpec)
    if config.seed is not None:
        spec = spec.model_copy(update={"seed": config.seed})

    if kind == "pair":
        h, u, measured = gen_almost_commuting_pair(spec)
        write_json(_out(config, "h.json"), MatrixFile.from_array(h.matrix))
        write_json(_out(config, "u.json"), MatrixFile.from_array(u.matrix))
        write_json(
            _out(config, "pair.json"),
            {"seed": spec.seed, "target_delta": spec.target_delta, "measured_delta": measured},
        )
        click.echo(f"Pair dim {h.dim}: measured ||[u, h]|| = {measured:.3e}")
    else:
        field = gen_field(spec)
        write_json(_out(config, "field.json"), FieldFile.from_field(field))
        click.echo(f"Field {spec.field_shape}: {len(field.values)} nodes, dim {field.dim}")
    return EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    _banner("VERIFY")
    path = read_model(config.inputs["path"], PathFile).to_path(check_unitarity=False)
    stored = read_model(config.inputs["certificate"], CertificateFile)
    h = _load_matrix(config.inputs["hermitian"])
    u = _load_matrix(config.inputs["unitary"])
    pre_path = None
    if "pre_path" in config.inputs:
        pre_path = read_model(config.inputs["pre_path"], PathFile).to_path(check_unitarity=False)

    report = verify_certificate(path, h, stored.certificate, u, pre_path=pre_path)
    write_json(_out(config, "verification.json"), report)
    click.echo(f"Verification {'passed' if report.passed else 'FAILED'}")
    return EXIT_OK if report.passed else EXIT_BOUND


def _run(build_config, command, *args) -> None:
    """Validate the config, run the command and exit with its code"""
    try:
        config = build_config()
        code = command(config, *args)
    except OpfieldError as exc:
        click.echo(f"Error: {exc.detail}", err=True)
        code = exc.exit_code
    except ValidationError as exc:
        click.echo(f"Error: invalid input\n{exc}", err=True)
        code = EXIT_INPUT
    sys.exit(code)


def _inputs(**paths) -> dict[str, str]:
    return {role: path for role, path in paths.items() if path is not None}


out_option = click.option("--out", envvar="OPFIELD_OUT", default=DEFAULT_OUT, show_default=True, help="Output directory.")
csv_option = click.option("--csv/--no-csv", "emit_csv", envvar="OPFIELD_CSV", default=False, help="Also write CSV for plotting.")


@click.group()
@click.option("--log-level", envvar="OPFIELD_LOG_LEVEL", default=LOG_LEVEL, show_default=True)
@click.pass_context
def cli(ctx, log_level):
    """Almost-commuting homotopies and stitched eigenvalue fields."""
    logging.basicConfig(
        level=getattr(logging, log_level.upper(), logging.INFO),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    ctx.obj = {"log_level": log_level}


@cli.command()
@click.option("--hermitian", required=True, help="Matrix file with h.")
@click.option("--unitary", required=True, help="Matrix file with u.")
@click.option("--delta", envvar="OPFIELD_DELTA", type=float, default=DEFAULT_DELTA, show_default=True)
@click.option("--samples", envvar="OPFIELD_SAMPLES", type=int, default=SAMPLES_PER_STAGE, show_default=True)
@out_option
@csv_option
@click.pass_context
def homotopy(ctx, hermitian, unitary, delta, samples, out, emit_csv):
    """Connect u to the identity keeping [u(t), h] small; writes path, certificate and report."""
    _run(
        lambda: RunConfig(
            command="homotopy",
            inputs=_inputs(hermitian=hermitian, unitary=unitary),
            out=out,
            delta=delta,
            samples_per_stage=samples,
            emit_csv=emit_csv,
            log_level=ctx.obj["log_level"],
        ),
        cmd_homotopy,
    )


@cli.command()
@click.option("--field", "field_path", required=True, help="Field file.")
@click.option("--epsilon", envvar="OPFIELD_EPSILON", type=float, default=DEFAULT_EPSILON, show_default=True)
@out_option
@csv_option
@click.pass_context
def stitch(ctx, field_path, epsilon, out, emit_csv):
    """Diagonalize a sampled field into ordered eigenvalue blocks with a jump report."""
    _run(
        lambda: RunConfig(
            command="stitch",
            inputs=_inputs(field=field_path),
            out=out,
            epsilon=epsilon,
            emit_csv=emit_csv,
            log_level=ctx.obj["log_level"],
        ),
        cmd_stitch,
    )


@cli.command()
@click.option("--field", "field_path", required=True, help="Field file.")
@click.option("--schedule", envvar="OPFIELD_SCHEDULE", default=DEFAULT_SCHEDULE, show_default=True, help="eps0:ratio:iters")
@out_option
@csv_option
@click.pass_context
def refine(ctx, field_path, schedule, out, emit_csv):
    """Stitch at a decreasing epsilon schedule and check the Cauchy bounds."""
    _run(
        lambda: RunConfig(
            command="refine",
            inputs=_inputs(field=field_path),
            out=out,
            schedule=schedule,
            emit_csv=emit_csv,
            log_level=ctx.obj["log_level"],
        ),
        cmd_stitch,
    )


@cli.command()
@click.option("--spec", "spec_path", required=True, help="Generator spec file.")
@click.option("--kind", type=click.Choice(["pair", "field"]), default="pair", show_default=True)
@click.option("--seed", envvar="OPFIELD_SEED", type=int, default=None, help=f"Overrides the spec seed (default {DEFAULT_SEED}).")
@out_option
@click.pass_context
def gen(ctx, spec_path, kind, seed, out):
    """Generate an almost-commuting pair or a sampled field from a spec file."""
    _run(
        lambda: RunConfig(
            command="gen",
            inputs=_inputs(spec=spec_path),
            out=out,
            seed=seed,
            log_level=ctx.obj["log_level"],
        ),
        cmd_gen,
        kind,
    )


@cli.command()
@click.option("--path", "path_file", required=True, help="Retracted path file.")
@click.option("--certificate", required=True, help="Certificate file.")
@click.option("--hermitian", required=True, help="Matrix file with h.")
@click.option("--unitary", required=True, help="Matrix file with u.")
@click.option("--pre-path", "pre_path", default=None, help="Pre-retraction path file.")
@out_option
@click.pass_context
def verify(ctx, path_file, certificate, hermitian, unitary, pre_path, out):
    """Re-measure a stored homotopy against its certificate."""
    _run(
        lambda: RunConfig(
            command="verify",
            inputs=_inputs(
                path=path_file,
                certificate=certificate,
                hermitian=hermitian,
                unitary=unitary,
                pre_path=pre_path,
            ),
            out=out,
            log_level=ctx.obj["log_level"],
        ),
        cmd_verify,
    )


if __name__ == "__main__":
    cli()
