"""Command-line front end.

Subcommands: fit, select-dim, simulate, reproduce-figure, replay. Every run
writes a manifest next to its outputs; ``replay`` re-executes one. Exit codes
are 0 on success, 2 on bad input and 3 when fitting fails.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from datetime import datetime, timezone
from pathlib import Path

import pandas as pd
from pydantic import ValidationError

from reductive import __version__
from reductive.basis import build_basis
from reductive.errors import DataFormatError, ReductionError
from reductive.infrastructure.datasets import (
    inverse_response_frame,
    read_dataset,
    read_matrix,
    write_matrix,
)
from reductive.infrastructure.export import CsvTableExporter, GnuplotScriptExporter
from reductive.models import BasisKind, ExtendedStrategy, Method, RunManifest, StudyTable
from reductive.moments import Dataset
from reductive.services.estimators import (
    FittedReduction,
    fit_extended_pc,
    fit_extended_pfc,
    fit_general_pc_known_delta,
    fit_general_pfc,
    fit_general_pfc_known_delta,
    fit_ols,
    fit_pc,
    fit_pfc_iso,
    fit_sir,
)
from reductive.services.expfam import fit_bernoulli_pc
from reductive.services.selection import select_d
from reductive.simulation import PRESETS, StudySpec, preset_study, run_study

from .settings import get_settings

UTC = timezone.utc  # datetime.UTC is 3.11+

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FIT = 3

STRATEGY_CHOICES = [s.value for s in ExtendedStrategy]


class CommandError(Exception):
    """Bad command-line input detected after argument parsing."""


# =============================================================================
# Shared helpers
# =============================================================================


def _basis_arg(text: str) -> BasisKind:
    try:
        return BasisKind.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _predictors_arg(text: str) -> list[str]:
    return [c.strip() for c in text.split(",") if c.strip()]


def _write_manifest(
    args: argparse.Namespace, argv: Sequence[str], outputs: list[Path], seed: int | None = None
) -> Path:
    out_dir: Path = args.out
    config = {
        k: (str(v) if isinstance(v, Path | BasisKind) else v)
        for k, v in vars(args).items()
        if k != "handler"
    }
    manifest = RunManifest(
        command=args.command,
        argv=list(argv),
        config=config,
        seed=seed,
        code_version=__version__,
        timestamp=datetime.now(UTC),
        outputs=[str(p) for p in outputs],
    )
    path = out_dir / f"{args.command}_manifest.json"
    path.write_text(manifest.model_dump_json(indent=2))
    logger.info(f"Wrote manifest {path}")
    return path


def _read(args: argparse.Namespace, binary: bool = False) -> Dataset:
    return read_dataset(args.data, args.response, args.predictors, binary=binary)


def _orientation(fit: FittedReduction, data: Dataset) -> str:
    if fit.d >= data.p:
        return "n/a"
    try:
        return f"{fit.subspace.angle_to(fit_pc(data, fit.d).subspace):.3f}"
    except ReductionError:
        return "n/a"


# =============================================================================
# fit
# =============================================================================


def _fit(args: argparse.Namespace, data: Dataset) -> FittedReduction:
    method = Method(args.method)
    basis: BasisKind = args.basis
    d: int = args.d
    if method is Method.PC:
        return fit_pc(data, d, between_class=args.between_class, standardize=args.standardize)
    if method is Method.PFC:
        return fit_pfc_iso(data, basis, d)
    if method is Method.EXTENDED_PC:
        return fit_extended_pc(data, d)
    if method is Method.EXTENDED_PFC:
        return fit_extended_pfc(data, basis, d, args.strategy)
    if method is Method.GENERAL_PFC:
        return fit_general_pfc(data, basis, d)
    if method is Method.SIR:
        return fit_sir(data, args.slices, d)
    if method is Method.OLS:
        return fit_ols(data)
    if method in (Method.GENERAL_PFC_KNOWN_DELTA, Method.GENERAL_PC_KNOWN_DELTA):
        if args.delta_file is None:
            raise CommandError(f"--method {method.value} needs --delta-file")
        delta = read_matrix(args.delta_file)
        if method is Method.GENERAL_PC_KNOWN_DELTA:
            return fit_general_pc_known_delta(data, d, delta)
        return fit_general_pfc_known_delta(data, basis, d, delta)
    # bernoulli-pc
    F = build_basis(data.y, basis) if args.constrain_basis else None
    _, fit = fit_bernoulli_pc(data.X, d, basis=F, column_names=data.column_names)
    return fit


def cmd_fit(args: argparse.Namespace, argv: Sequence[str]) -> int:
    data = _read(args, binary=args.method == Method.BERNOULLI_PC.value)
    fit = _fit(args, data)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{Path(args.data).stem}_{fit.method.value}"

    doc_path = out / f"{stem}_fit.json"
    doc_path.write_text(fit.to_document().model_dump_json(indent=2))
    reduced_path = write_matrix(
        out / f"{stem}_reduced.csv",
        fit.reduce(data.X),
        [f"z{j + 1}" for j in range(fit.coordinate_map.shape[1])],
    )
    outputs = [doc_path, reduced_path]
    if args.export_inverse:
        inverse_path = out / f"{stem}_inverse.csv"
        inverse_response_frame(data).to_csv(inverse_path, index=False)
        outputs.append(inverse_path)
    _write_manifest(args, argv, outputs)

    print(
        f"method={fit.method.value} d={fit.d} loglik={fit.loglik:.6g} "
        f"angle_to_pc_deg={_orientation(fit, data)}"
    )
    for w in fit.warnings:
        print(f"warning: {w}")
    return EXIT_OK


# =============================================================================
# select-dim
# =============================================================================


def cmd_select_dim(args: argparse.Namespace, argv: Sequence[str]) -> int:
    data = _read(args)
    selection = select_d(data, args.basis, args.alpha, args.strategy, all_tests=args.all_tests)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    table_path = out / f"{Path(args.data).stem}_dimension_tests.csv"
    pd.DataFrame([t.model_dump() for t in selection.tests]).to_csv(table_path, index=False)
    json_path = out / f"{Path(args.data).stem}_dimension_selection.json"
    json_path.write_text(selection.model_dump_json(indent=2))
    _write_manifest(args, argv, [table_path, json_path])

    for t in selection.tests:
        print(f"d={t.d} Lambda={t.lambda_d:.4f} df={t.df} p={t.p_value:.4g}")
    print(f"chosen_d={selection.chosen_d} alpha={selection.alpha}")
    return EXIT_OK


# =============================================================================
# simulate / reproduce-figure
# =============================================================================


def _export_study(
    args: argparse.Namespace, table: StudyTable, argv: Sequence[str], seed: int
) -> int:
    out: Path = args.out
    table_path = out / f"{table.name}.csv"
    outputs = CsvTableExporter().export(table=table, out_path=table_path)
    if args.gnuplot:
        value = "mse" if any(r.mean_mse is not None for r in table.rows) else "angle"
        outputs += GnuplotScriptExporter(value).export(table=table, out_path=table_path)
    json_path = out / f"{table.name}.json"
    json_path.write_text(table.model_dump_json(indent=2))
    outputs.append(json_path)
    _write_manifest(args, argv, outputs, seed=seed)

    column = "log_mean_angle" if table.log_angles else "mean_angle_deg"
    for x in table.sweep_values():
        cells = " ".join(
            f"{est}={getattr(table.row(x, est), column)}" for est in table.estimators
        )
        print(f"{table.sweep_param}={x:g} {cells}")
    failed = sum(r.n_fail for r in table.rows)
    print(f"study={table.name} rows={len(table.rows)} failed_fits={failed} table={table_path}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, argv: Sequence[str]) -> int:
    try:
        spec = StudySpec.model_validate_json(Path(args.config).read_text())
    except ValidationError as e:
        raise CommandError(f"invalid study config {args.config}: {e}") from None
    update = {}
    if args.reps is not None:
        update["reps"] = args.reps
    if args.seed is not None:
        update["seed"] = args.seed
    if update:
        spec = spec.model_copy(update={"base": spec.base.model_copy(update=update)})
    table = run_study(spec, threads=args.threads)
    return _export_study(args, table, argv, spec.base.seed)


def cmd_reproduce_figure(args: argparse.Namespace, argv: Sequence[str]) -> int:
    settings = get_settings()
    reps = args.reps if args.reps is not None else settings.default_reps
    seed = args.seed if args.seed is not None else settings.default_seed
    spec = preset_study(args.figure, reps=reps, seed=seed)
    table = run_study(spec, threads=args.threads)
    return _export_study(args, table, argv, seed)


def cmd_replay(args: argparse.Namespace, argv: Sequence[str]) -> int:
    try:
        manifest = RunManifest.model_validate_json(Path(args.manifest).read_text())
    except ValidationError as e:
        raise CommandError(f"invalid manifest {args.manifest}: {e}") from None
    if manifest.command == "replay":
        raise CommandError("a replay manifest cannot be replayed")
    logger.info(f"Replaying {manifest.command} recorded at {manifest.timestamp.isoformat()}")
    return main(manifest.argv)


# =============================================================================
# Parser and entry point
# =============================================================================


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="reductive", description="Model-based sufficient dimension reduction."
    )
    parser.add_argument("--log-level", default=None, help="Override REDUCTIVE_LOG_LEVEL")
    parser.add_argument(
        "--out", type=Path, default=settings.output_dir, help="Output directory"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def data_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("data", type=Path, help="CSV file with a header row")
        p.add_argument("--response", required=True, help="Response column")
        p.add_argument(
            "--predictors", type=_predictors_arg, default=None,
            help="Comma-separated predictor columns (default: all others)",
        )
        p.add_argument("--basis", type=_basis_arg, default=BasisKind.linear(),
                       help="linear, poly:<k>, slices:<h> or fourier:<k>")

    p_fit = sub.add_parser("fit", help="Estimate a reduction")
    data_args(p_fit)
    p_fit.add_argument("--method", required=True, choices=[m.value for m in Method])
    p_fit.add_argument("--d", type=int, default=1, help="Dimension of the reduction")
    p_fit.add_argument("--strategy", type=ExtendedStrategy,
                       default=ExtendedStrategy.PFC_ALL, choices=STRATEGY_CHOICES)
    p_fit.add_argument("--slices", type=int, default=8, help="Slices for SIR")
    p_fit.add_argument("--delta-file", type=Path, default=None,
                       help="CSV with the known p x p Delta (gpfc-delta, gpc-delta)")
    p_fit.add_argument("--between-class", action="store_true",
                       help="PC of the between-class covariance (pc only)")
    p_fit.add_argument("--standardize", action="store_true",
                       help="PC of the correlation matrix (pc only)")
    p_fit.add_argument("--constrain-basis", action="store_true",
                       help="Constrain bernoulli-pc coordinates to nu_y = beta f_y")
    p_fit.add_argument("--export-inverse", action="store_true",
                       help="Also write (predictor, y, x) pairs for inverse response plots")
    p_fit.set_defaults(handler=cmd_fit)

    p_sel = sub.add_parser("select-dim", help="Likelihood-ratio choice of the dimension")
    data_args(p_sel)
    p_sel.add_argument("--alpha", type=float, default=0.05)
    p_sel.add_argument("--strategy", type=ExtendedStrategy,
                       default=ExtendedStrategy.GRASSMANN, choices=STRATEGY_CHOICES)
    p_sel.add_argument("--all-tests", action="store_true", help="Test every d up to p")
    p_sel.set_defaults(handler=cmd_select_dim)

    def study_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--reps", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=settings.threads)
        p.add_argument("--gnuplot", action="store_true", help="Also write a gnuplot script")

    p_sim = sub.add_parser("simulate", help="Run a study from a JSON config")
    p_sim.add_argument("config", type=Path, help="StudySpec JSON file")
    study_args(p_sim)
    p_sim.set_defaults(handler=cmd_simulate)

    p_fig = sub.add_parser("reproduce-figure", help="Run a figure preset")
    p_fig.add_argument("figure", choices=sorted(PRESETS))
    study_args(p_fig)
    p_fig.set_defaults(handler=cmd_reproduce_figure)

    p_rep = sub.add_parser("replay", help="Re-run a recorded manifest")
    p_rep.add_argument("manifest", type=Path)
    p_rep.set_defaults(handler=cmd_replay)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT
    if args.log_level:
        logging.getLogger().setLevel(args.log_level.upper())
    try:
        return args.handler(args, argv)
    except (DataFormatError, CommandError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ReductionError as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FIT
    except ValueError as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
