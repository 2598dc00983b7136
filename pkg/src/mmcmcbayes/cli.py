"""Command line interface: ``mmcmcbayes <subcommand> ...``.

Exit status is 0 on success, 2 on usage errors and 1 on data errors.
Primary output goes to ``--out`` files or stdout; progress and diagnostics go
to stderr.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .analysis import compare_dmrs, format_summary, plot_dmr_region, summarize_dmrs
from .asgn import AsgnPriors, default_priors
from .engine import DetectConfig, mmcmc_detect
from .errors import MmcmcError
from .io import load_methylation_csv, read_dmr_table, write_dmr_table, write_methylation_csv
from .sampler import McmcConfig, asgn_fit
from .simulate import SimConfig, evaluate, read_truth, simulate_dataset, write_truth

log = logging.getLogger("mmcmcbayes")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _prior_triple(text: str) -> AsgnPriors:
    """Parse ``alpha=A,mu=M,sigma2=S``."""
    fields = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected key=value, got {part!r}")
        try:
            fields[key.strip()] = float(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"non-numeric prior value {value!r}") from None
    if set(fields) != {"alpha", "mu", "sigma2"}:
        raise argparse.ArgumentTypeError("prior needs exactly alpha=, mu= and sigma2=")
    try:
        return AsgnPriors.from_triple(fields["alpha"], fields["mu"], fields["sigma2"])
    except MmcmcError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _pos_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _add_mcmc_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--nburn", type=_nonneg_int, default=5000, help="burn-in iterations")
    p.add_argument("--niter", type=_pos_int, default=10000, help="post-burn-in iterations")
    p.add_argument("--thin", type=_pos_int, default=1, help="keep every thin-th draw")
    p.add_argument("--seed", type=_nonneg_int, default=0, help="master random seed")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="mmcmcbayes", description="Multistage MCMC detection of differentially methylated regions."
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("detect", formatter_class=fmt, help="detect DMRs in a cancer/normal pair")
    p.add_argument("--cancer", required=True, help="cancer group CSV (CpG_ID,Chromosome,samples...)")
    p.add_argument("--normal", required=True, help="normal group CSV, same CpGs in the same order")
    p.add_argument("--out", required=True, help="output DMR table CSV")
    p.add_argument("--stage", type=_pos_int, default=1, help="starting stage")
    p.add_argument("--max-stages", type=_pos_int, default=3, help="maximum number of stages")
    p.add_argument("--num-splits", type=int, default=50, help="subsegments per split")
    p.add_argument(
        "--bf-thresholds", type=_float_list, default="0.5,0.8,1.05", help="per-stage Bayes factor thresholds"
    )
    _add_mcmc_flags(p)
    p.add_argument("--prior-cancer", type=_prior_triple, default=None, help="alpha=A,mu=M,sigma2=S")
    p.add_argument("--prior-normal", type=_prior_triple, default=None, help="alpha=A,mu=M,sigma2=S")
    p.add_argument("--threads", type=_pos_int, default=1, help="worker threads (output does not depend on it)")
    p.add_argument("--beta", action="store_true", help="inputs hold beta-values; convert to M-values")
    p.add_argument(
        "--shared-group-seed", action="store_true", help="use one chain seed for both groups of a segment"
    )

    p = sub.add_parser("fit", formatter_class=fmt, help="fit the ASGN model to one column of values")
    p.add_argument("data", help="one-column CSV of reals (optional header, NA allowed)")
    _add_mcmc_flags(p)
    p.add_argument("--prior", type=_prior_triple, default=None, help="alpha=A,mu=M,sigma2=S; data-driven if omitted")
    p.add_argument("--out", default=None, help="output CSV (stdout if omitted)")

    p = sub.add_parser("summarize", formatter_class=fmt, help="summarize a DMR table")
    p.add_argument("--dmrs", required=True, help="DMR table CSV")

    p = sub.add_parser("compare", formatter_class=fmt, help="overlap between two DMR tables")
    p.add_argument("--a", required=True, help="first DMR table")
    p.add_argument("--b", required=True, help="second DMR table")
    p.add_argument("--index", required=True, help="methylation CSV used to resolve CpG IDs to rows")
    p.add_argument("--out", default=None, help="output CSV (stdout if omitted)")

    p = sub.add_parser("plot", formatter_class=fmt, help="SVG plot of one detected region")
    p.add_argument("--dmrs", required=True, help="DMR table CSV")
    p.add_argument("--cancer", required=True, help="cancer group CSV")
    p.add_argument("--normal", required=True, help="normal group CSV")
    p.add_argument("--index", type=_pos_int, required=True, help="1-based row of the DMR table")
    p.add_argument("--out", required=True, help="output SVG path")
    p.add_argument("--beta", action="store_true", help="inputs hold beta-values")

    p = sub.add_parser("simulate", formatter_class=fmt, help="inject synthetic DMRs into a baseline")
    p.add_argument("--baseline", required=True, help="baseline methylation CSV")
    p.add_argument("--out-dir", required=True, help="directory for cancer.csv, normal.csv, truth.csv")
    p.add_argument("--noise-sd", type=float, default=0.5, help="Gaussian noise standard deviation")
    p.add_argument("--n-dmrs", type=_nonneg_int, default=10, help="number of injected DMRs")
    p.add_argument("--shifts", type=_float_list, default="1.0,2.0", help="candidate mean shifts")
    p.add_argument("--lengths", type=_int_list, default="10,20,50", help="candidate DMR lengths")
    p.add_argument("--seed", type=_nonneg_int, default=0, help="random seed")
    p.add_argument("--beta", action="store_true", help="baseline holds beta-values")

    p = sub.add_parser("evaluate", formatter_class=fmt, help="score detections against injected truth")
    p.add_argument("--detected", required=True, help="DMR table CSV")
    p.add_argument("--truth", required=True, help="truth.csv written by simulate")
    p.add_argument("--index", required=True, help="methylation CSV used to resolve CpG IDs to rows")
    p.add_argument("--runtime", type=float, default=None, help="seconds, copied to the output")
    return parser


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def _read_column(path) -> list[float]:
    values = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            cell = row[0].strip()
            if cell in ("", "NA"):
                values.append(math.nan)
                continue
            try:
                values.append(float(cell))
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise MmcmcError(f"non-numeric value {cell!r} at row {lineno}") from None
    return values


def cmd_detect(args) -> None:
    cancer = load_methylation_csv(args.cancer, beta=args.beta)
    normal = load_methylation_csv(args.normal, beta=args.beta)
    config = DetectConfig(
        stage=args.stage,
        max_stages=args.max_stages,
        num_splits=args.num_splits,
        bf_thresholds=args.bf_thresholds,
        mcmc=McmcConfig(args.nburn, args.niter, args.thin),
        priors_cancer=args.prior_cancer,
        priors_normal=args.prior_normal,
        master_seed=args.seed,
        threads=args.threads,
        shared_group_seed=args.shared_group_seed,
    )
    records = mmcmc_detect(cancer, normal, config)
    write_dmr_table(records, args.out)
    log.info("wrote %d region(s) to %s", len(records), args.out)


def cmd_fit(args) -> None:
    data = _read_column(args.data)
    priors = args.prior if args.prior is not None else default_priors(data)
    fit = asgn_fit(data, priors, McmcConfig(args.nburn, args.niter, args.thin, args.seed))
    fh, close = _open_out(args.out)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["parameter", "mean", "ci_lower", "ci_upper", "acceptance_rate"])
        for i, name in enumerate(("alpha", "nu", "delta2")):
            writer.writerow(
                [name, repr(fit.mean.as_tuple()[i]), repr(fit.ci_lower[i]), repr(fit.ci_upper[i]), repr(fit.acceptance_rates[i])]
            )
    finally:
        if close:
            fh.close()


def cmd_summarize(args) -> None:
    sys.stdout.write(format_summary(summarize_dmrs(read_dmr_table(args.dmrs))))


def cmd_compare(args) -> None:
    index = load_methylation_csv(args.index)
    report = compare_dmrs(read_dmr_table(args.a), read_dmr_table(args.b), index)
    if not report:
        log.warning("no overlapping regions")
    fh, close = _open_out(args.out)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index_a", "index_b", "overlap_percent"])
        for o in report:
            writer.writerow([o.index_a + 1, o.index_b + 1, f"{o.overlap_percent:.4f}"])
    finally:
        if close:
            fh.close()


def cmd_plot(args) -> None:
    cancer = load_methylation_csv(args.cancer, beta=args.beta)
    normal = load_methylation_csv(args.normal, beta=args.beta)
    svg = plot_dmr_region(read_dmr_table(args.dmrs), cancer, normal, args.index)
    Path(args.out).write_text(svg, encoding="utf-8")


def cmd_simulate(args) -> None:
    baseline = load_methylation_csv(args.baseline, beta=args.beta)
    config = SimConfig(
        baseline=baseline,
        noise_sd=args.noise_sd,
        n_dmrs=args.n_dmrs,
        shifts=args.shifts,
        lengths=args.lengths,
        seed=args.seed,
    )
    cancer, normal, truth = simulate_dataset(config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_methylation_csv(cancer, out / "cancer.csv")
    write_methylation_csv(normal, out / "normal.csv")
    write_truth(truth, baseline, out / "truth.csv")
    log.info("wrote %d injected DMR(s) to %s", len(truth), out)


def cmd_evaluate(args) -> None:
    index = load_methylation_csv(args.index)
    metrics = evaluate(read_dmr_table(args.detected), read_truth(args.truth), index)
    metrics["runtime"] = "" if args.runtime is None else args.runtime
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(list(metrics))
    writer.writerow([f"{v:.6f}" if isinstance(v, float) else v for v in metrics.values()])


COMMANDS = {
    "detect": cmd_detect,
    "fit": cmd_fit,
    "summarize": cmd_summarize,
    "compare": cmd_compare,
    "plot": cmd_plot,
    "simulate": cmd_simulate,
    "evaluate": cmd_evaluate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        COMMANDS[args.command](args)
    except (MmcmcError, OSError, ValueError) as exc:
        print(f"mmcmcbayes {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
