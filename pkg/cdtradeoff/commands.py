from __future__ import annotations

import argparse
import json
import logging
from typing import Callable, Dict, List

from .auxiliary import (
    DUECK_PRESETS,
    FEEDBACK_RECEIVER1,
    InnerAuxiliary,
    constant_outer_aux,
    dueck_feedback_preset,
    dueck_input_law,
    identity_outer_aux,
)
from .channel_io import load_channel_file, load_inner_aux_file
from .channels import (
    BUILTIN_CHANNELS,
    DUECK,
    MULTIPLICATIVE,
    NoTradeoffWitness,
    SdmbcSpec,
    build_channel,
    check_no_tradeoff,
    check_physically_degraded,
)
from .closed_forms import ClosedFormParams, corollary1_region, corollary2_region, dueck_inner, dueck_outer
from .errors import DomainError, SchemaError
from .estimation import ESTIMATOR_COLUMNS, brute_force_estimator, estimator_rows, expected_distortion, optimal_estimator
from .exports import FORMATS, render_rows
from .figures import FIG2_COLUMNS, FIG4_COLUMNS, FIGURES, fig2_rows, fig4_rows
from .logging_utils import channel_log_context, log_with_context
from .montecarlo import SimConfig, simulate
from .prob import Pmf, as_pmf
from .regions import (
    REGION_COLUMNS,
    RegionPoint,
    degraded_region,
    pareto_frontier,
    prop3_inner,
    theorem1_envelope,
    theorem1_outer,
)
from .runtime import CliRuntime

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_USAGE = 2
EXIT_IO = 3

REGION_KINDS = ("degraded", "corollary1", "corollary2", "dueck-outer", "dueck-inner", "thm1", "prop3")
CHECK_KINDS = ("degraded", "no-tradeoff")
WITNESSES = ("indicator", "identity", "constant")
THM1_AUX = ("constant", "identity", "grid")
SIM_COLUMNS = ("k", "mean", "stderr")
DEFAULT_CHANNELS = {"prop3": DUECK}

Command = Callable[[CliRuntime, argparse.Namespace], int]


def load_spec(runtime: CliRuntime, args: argparse.Namespace) -> SdmbcSpec:
    if getattr(args, "spec", None):
        try:
            return load_channel_file(args.spec, tol=runtime.config.normalization_tol)
        except OSError as exc:
            raise SchemaError(f"cannot read channel document {args.spec}: {exc.strerror or exc}") from exc
    name = args.channel or DEFAULT_CHANNELS.get(getattr(args, "kind", ""), MULTIPLICATIVE)
    return build_channel(name, q=args.q, gamma=args.gamma, ps1=args.ps1)


def load_prop3_aux(runtime: CliRuntime, args: argparse.Namespace, spec: SdmbcSpec) -> InnerAuxiliary:
    if args.aux_spec:
        try:
            return load_inner_aux_file(args.aux_spec, tol=runtime.config.normalization_tol)
        except OSError as exc:
            raise SchemaError(f"cannot read auxiliary document {args.aux_spec}: {exc.strerror or exc}") from exc
    if spec.name != DUECK:
        raise DomainError(f"feedback presets are built for the {DUECK} channel; pass --aux-spec to evaluate {spec.name}")
    beta = 0.5 if args.beta is None else args.beta
    return dueck_feedback_preset(args.preset, beta)


def _emit_points(runtime: CliRuntime, args: argparse.Namespace, points: List[RegionPoint], **extra: object) -> None:
    rows = [point.as_row() for point in points]
    runtime.emit(render_rows(REGION_COLUMNS, rows, args.format, **extra), args.out)


def cmd_figure(runtime: CliRuntime, args: argparse.Namespace) -> int:
    if args.name == "fig2":
        text = render_rows(FIG2_COLUMNS, fig2_rows(args.q, args.gamma, args.grid_res), args.format)
    else:
        text = render_rows(FIG4_COLUMNS, fig4_rows(args.ps1, exact=args.exact), args.format)
    runtime.emit(text, args.out)
    return EXIT_OK


def _closed_form_params(args: argparse.Namespace, **defaults: float) -> ClosedFormParams:
    values: Dict[str, float] = dict(defaults)
    for name in ("p", "r", "q_aux", "beta", "gamma_ts"):
        if getattr(args, name, None) is not None:
            values[name] = getattr(args, name)
    return ClosedFormParams(**values)


def cmd_region(runtime: CliRuntime, args: argparse.Namespace) -> int:
    config = runtime.config
    kind = args.kind
    if kind in ("corollary1", "corollary2"):
        params = _closed_form_params(args, p=0.5, r=1.0)
        formula = corollary1_region if kind == "corollary1" else corollary2_region
        _emit_points(runtime, args, [formula(args.q, args.gamma, params.p, params.r)])
        return EXIT_OK

    if kind == "dueck-outer":
        params = _closed_form_params(args, p=0.5, q_aux=0.5, beta=0.5)
        _emit_points(runtime, args, dueck_outer(args.ps1, params).corners())
        return EXIT_OK

    if kind == "dueck-inner":
        report = dueck_inner(args.ps1, _closed_form_params(args, beta=0.0, gamma_ts=1.0))
        runtime.report(report.describe())
        _emit_points(
            runtime,
            args,
            list(report.points),
            regime=report.regime,
            product_form=report.product_form,
            d_min=report.d_min,
        )
        return EXIT_OK

    spec = load_spec(runtime, args)
    if kind == "degraded":
        check = check_physically_degraded(spec, tol=config.degraded_tol)
        if not check:
            runtime.report(f"degraded region needs a physically degraded channel: {check.describe()}")
            return EXIT_USAGE
        frontier = degraded_region(
            spec,
            u_card=args.u_card,
            grid_res=args.grid_res,
            max_points=config.max_grid_points,
            threads=config.threads,
        )
        _emit_points(runtime, args, list(frontier))
        return EXIT_OK

    if kind == "thm1":
        if args.aux == "grid":
            frontier = theorem1_envelope(
                spec,
                u_card=args.u_card or 2,
                grid_res=args.grid_res,
                max_points=config.max_grid_points,
                threads=config.threads,
            )
            _emit_points(runtime, args, list(frontier))
            return EXIT_OK
        law = parse_input_law(runtime, args, spec)
        aux = constant_outer_aux(law) if args.aux == "constant" else identity_outer_aux(law)
        bound = theorem1_outer(spec, None, aux, clamp_tol=config.cmi_clamp_tol)
        _emit_points(
            runtime,
            args,
            bound.corners(),
            r1_bound=bound.r1_bound,
            r2_bound=bound.r2_bound,
            sum_bound=bound.sum_bound,
        )
        return EXIT_OK

    # prop3
    evaluation = prop3_inner(spec, None, load_prop3_aux(runtime, args, spec), clamp_tol=config.cmi_clamp_tol)
    _emit_points(
        runtime,
        args,
        list(pareto_frontier(evaluation.corners())),
        r1_bound=evaluation.r1_bound,
        r2_bound=evaluation.r2_bound,
        sum_bound=evaluation.sum_bound,
    )
    return EXIT_OK


def build_witness(name: str, spec: SdmbcSpec) -> NoTradeoffWitness:
    if name == "indicator":
        return NoTradeoffWitness.erasure_indicator()
    if name == "identity":
        return NoTradeoffWitness.identity(spec.z_size)
    return NoTradeoffWitness.constant(spec.z_size)


def cmd_check(runtime: CliRuntime, args: argparse.Namespace) -> int:
    spec = load_spec(runtime, args)
    if args.kind == "degraded":
        check = check_physically_degraded(spec, tol=runtime.config.degraded_tol)
        runtime.report(check.describe())
        return EXIT_OK if check else EXIT_VIOLATED

    result = check_no_tradeoff(
        spec,
        build_witness(args.witness, spec),
        args.samples,
        args.seed,
        tol=runtime.config.degraded_tol,
    )
    runtime.report("no-tradeoff conditions hold" if result else f"no-tradeoff conditions violated: {result.violation}")
    return EXIT_OK if result else EXIT_VIOLATED


def cmd_estimate(runtime: CliRuntime, args: argparse.Namespace) -> int:
    spec = load_spec(runtime, args)
    estimator = optimal_estimator(spec)
    if args.brute_force:
        law = parse_input_law(runtime, args, spec)
        searched = brute_force_estimator(spec, law, limit=runtime.config.brute_force_limit)
        optimal = expected_distortion(spec, law, estimator)
        exhaustive = expected_distortion(spec, law, searched)
        runtime.report(
            f"optimal estimator D = ({optimal[0]:.9f}, {optimal[1]:.9f}); "
            f"exhaustive search D = ({exhaustive[0]:.9f}, {exhaustive[1]:.9f})"
        )
    rows = estimator_rows(spec, estimator)
    runtime.emit(render_rows(ESTIMATOR_COLUMNS, rows, args.format, channel=spec.name), args.out)
    return EXIT_OK


def parse_input_law(runtime: CliRuntime, args: argparse.Namespace, spec: SdmbcSpec) -> Pmf:
    """--px as a comma list, --beta as the Dueck coupling, uniform otherwise."""
    if getattr(args, "px", None):
        try:
            values = [float(part) for part in args.px.split(",")]
        except ValueError as exc:
            raise DomainError(f"--px must be a comma-separated list of numbers, got {args.px!r}") from exc
        return as_pmf(values, tol=runtime.config.normalization_tol)
    if spec.name == DUECK and getattr(args, "beta", None) is not None:
        return dueck_input_law(args.beta)
    return Pmf.uniform(spec.x_size)


def cmd_simulate(runtime: CliRuntime, args: argparse.Namespace) -> int:
    spec = load_spec(runtime, args)
    cfg = SimConfig(
        n=args.n,
        seed=args.seed,
        input_law=parse_input_law(runtime, args, spec),
        block_size=runtime.config.sim_block_size,
        threads=runtime.config.threads,
    )
    result = simulate(spec, optimal_estimator(spec), None, cfg)
    if args.format == "json":
        text = json.dumps(result.to_dict(), indent=2) + "\n"
    else:
        rows = [(k, result.mean[k - 1], result.stderr[k - 1]) for k in (1, 2)]
        text = render_rows(SIM_COLUMNS, rows, "csv")
    runtime.emit(text, args.out)
    log_with_context(logging.INFO, "Simulation written", **channel_log_context(spec), out=runtime.written)
    return EXIT_OK


def _add_output_flags(parser: argparse.ArgumentParser, default_format: str = "csv") -> None:
    parser.add_argument("--out", help="output file (relative paths resolve against CDT_OUTPUT_DIR); stdout if omitted")
    parser.add_argument("--format", choices=FORMATS, default=default_format)


def _add_channel_flags(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--channel", choices=BUILTIN_CHANNELS, help=f"built-in channel (default {MULTIPLICATIVE}, {DUECK} for prop3)")
    source.add_argument("--spec", help="path to a channel document (JSON)")


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--q", type=float, default=0.6)
    parser.add_argument("--gamma", type=float, default=0.5)
    parser.add_argument("--ps1", type=float, default=0.75)


def register_subcommands(subparsers: argparse._SubParsersAction) -> None:
    figure = subparsers.add_parser("figure", help="emit figure data: fig2 (multiplicative channel) or fig4 (Dueck sum-rate)")
    figure.add_argument("name", choices=FIGURES)
    _add_model_flags(figure)
    figure.add_argument("--grid-res", type=int, default=20)
    figure.add_argument("--exact", action="store_true", help="fig4: exact envelopes instead of sample-and-hold")
    _add_output_flags(figure)
    figure.set_defaults(handler=cmd_figure)

    region = subparsers.add_parser("region", help="evaluate a region bound")
    region.add_argument("kind", choices=REGION_KINDS)
    _add_channel_flags(region)
    _add_model_flags(region)
    for name in ("--p", "--r", "--beta", "--gamma-ts", "--q-aux"):
        region.add_argument(name, type=float, default=None)
    region.add_argument("--grid-res", type=int, default=20)
    region.add_argument("--u-card", type=int, default=None)
    region.add_argument("--aux", choices=THM1_AUX, default="constant", help="thm1 auxiliaries")
    region.add_argument("--px", help="thm1 input law as a comma-separated list")
    region.add_argument("--preset", type=int, choices=DUECK_PRESETS, default=FEEDBACK_RECEIVER1)
    region.add_argument("--aux-spec", help="prop3 auxiliary law and feedback kernel (JSON); overrides --preset")
    _add_output_flags(region)
    region.set_defaults(handler=cmd_region)

    check = subparsers.add_parser("check", help="test a structural channel property")
    check.add_argument("kind", choices=CHECK_KINDS)
    _add_channel_flags(check)
    _add_model_flags(check)
    check.add_argument("--witness", choices=WITNESSES, default="indicator")
    check.add_argument("--samples", type=int, default=20)
    check.add_argument("--seed", type=int, default=0)
    check.set_defaults(handler=cmd_check)

    estimate = subparsers.add_parser("estimate", help="dump the optimal symbolwise estimator")
    _add_channel_flags(estimate)
    _add_model_flags(estimate)
    estimate.add_argument("--brute-force", action="store_true", help="cross-check against exhaustive search")
    estimate.add_argument("--px", help="input law for the cross-check as a comma-separated list")
    estimate.add_argument("--beta", type=float, default=None, help="Dueck coupling P(X1 != X2)")
    _add_output_flags(estimate)
    estimate.set_defaults(handler=cmd_estimate)

    sim = subparsers.add_parser("simulate", help="Monte Carlo distortion of the optimal estimator")
    _add_channel_flags(sim)
    _add_model_flags(sim)
    sim.add_argument("--px", help="input law as a comma-separated list")
    sim.add_argument("--beta", type=float, default=None, help="Dueck coupling P(X1 != X2)")
    sim.add_argument("--n", type=int, default=100_000)
    sim.add_argument("--seed", type=int, default=0)
    _add_output_flags(sim, default_format="json")
    sim.set_defaults(handler=cmd_simulate)
