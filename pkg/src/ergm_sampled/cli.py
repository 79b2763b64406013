"""Command-line interface.

Subcommands cover the whole pipeline: ``simulate`` draws networks from a
model, ``sample`` realizes an observation design, ``fit``/``fit-missing``
estimate natural parameters from complete/partial data, ``mean-value`` maps
natural parameters to expected statistics, ``kl`` compares two parameter
vectors, ``design-prob`` evaluates design probabilities, ``ht`` computes
design-based edge-total estimates, and ``study`` reruns the two-wave
link-tracing experiment.

Results go to stdout (or ``--out``) as JSON or CSV; diagnostics go to
stderr.  Exit codes: 0 success, 1 usage error, 2 malformed data, 3
degeneracy / non-convergence / design-based refusal.
"""

from __future__ import annotations

import argparse
import json
import sys
import tempfile

import numpy as np

from .design_based import (
    UnobservableProbabilityError,
    ht_edge_total,
    ht_variance_estimate,
    observability_report,
)
from .designs import (
    SATURATED,
    BernoulliInitial,
    EgoCentricDesign,
    EnumerationBoundExceeded,
    FixedSeeds,
    LinkTracingDesign,
    design_probability,
    design_probability_mc,
    draw_initial,
    trace,
)
from .graphs import ObservationPattern, PartialNetwork, restrict
from .io import (
    DataFormatError,
    load_dataset,
    load_lazega,
    result_to_jsonable,
    write_results,
)
from .likelihood import (
    FitConfig,
    kl_divergence,
    mean_value_params,
    mle_complete,
    mle_missing,
)
from .sampler import ErgmModel, McmcConfig, sample_full
from .stats import Edges, Gwesp, HomophilyMatch, NodalMain
from .study import complete_sampling_sd, figure2_data, run_study, summarize

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

COLLABORATION_MODEL = ("edges,gwesp:0.7781,nodal:seniority,nodal:practice,"
                       "match:practice,match:gender,match:office")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def parse_statistics(spec: str):
    """Parse a model string like ``edges,gwesp:0.5,nodal:age,match:office``."""
    statistics = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, arg = part.partition(":")
        name = name.strip().lower()
        arg = arg.strip()
        if name == "edges":
            statistics.append(Edges())
        elif name == "gwesp":
            statistics.append(Gwesp(float(arg)) if arg else Gwesp())
        elif name == "nodal":
            if not arg:
                raise CliError("nodal term needs an attribute: nodal:NAME",
                               EXIT_USAGE)
            statistics.append(NodalMain(arg))
        elif name == "match":
            if not arg:
                raise CliError("match term needs an attribute: match:NAME",
                               EXIT_USAGE)
            statistics.append(HomophilyMatch(arg))
        else:
            raise CliError(f"unknown statistic {name!r}", EXIT_USAGE)
    if not statistics:
        raise CliError("empty model specification", EXIT_USAGE)
    return tuple(statistics)


def _parse_floats(text: str, name: str) -> np.ndarray:
    try:
        return np.array([float(tok) for tok in text.split(",") if tok.strip()])
    except ValueError:
        raise CliError(f"--{name} must be comma-separated numbers",
                       EXIT_USAGE) from None


def _load_data(args) -> tuple:
    if args.lazega:
        return load_lazega()
    if args.adjacency is None:
        raise CliError("either --lazega or --adjacency is required", EXIT_USAGE)
    return load_dataset(args.adjacency, args.attributes,
                        format=args.input_format, directed=args.directed,
                        n=args.n)


def _model_terms(args, attributes):
    if args.stats is not None:
        return parse_statistics(args.stats)
    if attributes is not None:
        return parse_statistics(COLLABORATION_MODEL)
    return parse_statistics("edges,gwesp:0.7781")


def _fit_config(args) -> FitConfig:
    kwargs = {}
    for name in ("draws", "burn_in", "thin", "max_anchors", "bridge_steps"):
        value = getattr(args, name, None)
        if value is not None:
            kwargs[name] = value
    return FitConfig(**kwargs)


def _design_from_args(args, directed: bool):
    if args.psi is not None and args.seeds is not None:
        raise CliError("--psi and --seeds are mutually exclusive", EXIT_USAGE)
    if args.psi is not None:
        initial = BernoulliInitial(args.psi)
    elif args.seeds is not None:
        initial = FixedSeeds(args.seeds)
    elif getattr(args, "seed_pair", None):
        initial = FixedSeeds(2)
    else:
        raise CliError("the design needs --psi, --seeds or --seed-pair",
                       EXIT_USAGE)
    if args.design == "ego":
        return EgoCentricDesign(initial=initial, directed=directed)
    if args.design == "trace":
        waves = SATURATED if args.waves == "sat" else int(args.waves)
        return LinkTracingDesign(initial=initial, waves=waves,
                                 directed=directed)
    raise CliError(f"unknown design {args.design!r}", EXIT_USAGE)


def _initial_sample(args, spec, n: int, rng) -> np.ndarray:
    pair = getattr(args, "seed_pair", None)
    if pair:
        try:
            i, j = (int(tok) for tok in pair.split(","))
        except ValueError:
            raise CliError("--seed-pair takes two 1-based labels: I,J",
                           EXIT_USAGE) from None
        if not (1 <= i <= n and 1 <= j <= n) or i == j:
            raise CliError(f"--seed-pair labels must be distinct and in 1..{n}",
                           EXIT_USAGE)
        s0 = np.zeros(n, dtype=np.uint8)
        s0[i - 1] = s0[j - 1] = 1
        return s0
    return draw_initial(spec, n, rng)


def _load_mask(path: str, directed: bool) -> np.ndarray:
    network, _ = load_dataset(path, format="matrix", directed=directed)
    return network.adj.copy()


def _emit(args, result, extra=None) -> None:
    if args.out:
        write_results(result, args.out, format=args.format, extra=extra)
        _log(f"wrote {args.out}")
        return
    if args.format == "json":
        body = result_to_jsonable(result) if not isinstance(result, list) \
            else {"kind": "rows", "rows": result_to_jsonable({"rows": result})["rows"]}
        if extra:
            body.update(extra)
        json.dump(body, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        with tempfile.NamedTemporaryFile("r", suffix=".csv") as tmp:
            write_results(result, tmp.name, format="csv")
            sys.stdout.write(open(tmp.name).read())


def _matrix_csv(path: str, matrix: np.ndarray) -> None:
    n = matrix.shape[0]
    with open(path, "w") as fh:
        fh.write(",".join(str(k + 1) for k in range(n)) + "\n")
        for row in matrix:
            fh.write(",".join(str(int(v)) for v in row) + "\n")


# ---------------------------------------------------------------- commands


def cmd_simulate(args, rng) -> int:
    if args.adjacency or args.lazega:
        network, attributes = _load_data(args)
        n, directed, initial = network.n, network.directed, network
    else:
        if args.n is None:
            raise CliError("simulate needs a dataset or --n", EXIT_USAGE)
        n, directed, initial, attributes = args.n, args.directed, None, None
    statistics = _model_terms(args, attributes)
    eta = _parse_floats(args.eta, "eta")
    model = ErgmModel(n, statistics, eta, attributes, directed)
    config = McmcConfig(burn_in=args.burn_in, thin=args.thin)
    res = sample_full(model, args.size, config, rng, initial=initial)
    _log(f"acceptance rate {res.acceptance_rate:.3f}")
    out = {
        "kind": "simulate",
        "labels": model.labels,
        "eta": eta.tolist(),
        "size": args.size,
        "acceptance_rate": res.acceptance_rate,
        "mean_stats": res.stats.mean(axis=0).tolist(),
        "stats": res.stats.tolist(),
    }
    if args.format == "csv":
        rows = [dict(zip(model.labels, draw)) for draw in res.stats.tolist()]
        _emit(args, rows)
    else:
        _emit(args, out)
    return 0


def cmd_sample(args, rng) -> int:
    network, _ = _load_data(args)
    spec = _design_from_args(args, network.directed)
    s0 = _initial_sample(args, spec, network.n, rng)
    realization = trace(spec, network, s0)
    pattern = realization.pattern
    partial = restrict(network, pattern)
    out = {
        "kind": "sample",
        "design": args.design,
        "waves": [sorted((np.flatnonzero(w) + 1).tolist())
                  for w in pattern.waves] if pattern.waves else None,
        "selected": sorted((np.flatnonzero(pattern.selected) + 1).tolist()),
        "n_sampled_nodes": realization.n_sampled,
        "n_observed_dyads": pattern.n_observed_dyads(),
        "n_observed_edges": partial.observed_edge_count(),
        "exhausted": realization.exhausted,
    }
    if args.mask_out:
        _matrix_csv(args.mask_out, pattern.mask)
        _log(f"wrote observation mask to {args.mask_out}")
    if args.values_out:
        _matrix_csv(args.values_out, partial.values)
        _log(f"wrote observed values to {args.values_out}")
    _emit(args, out)
    return 0


def _partial_from_args(args, network, rng) -> PartialNetwork:
    if args.mask:
        mask = _load_mask(args.mask, network.directed)
        pattern = ObservationPattern(mask, directed=network.directed)
        return restrict(network, pattern)
    if args.design:
        spec = _design_from_args(args, network.directed)
        s0 = _initial_sample(args, spec, network.n, rng)
        realization = trace(spec, network, s0)
        return restrict(network, realization.pattern)
    raise CliError("partial data needs --mask or a --design to realize",
                   EXIT_USAGE)


def _finish_fit(args, fit, seed) -> int:
    for line in (f"converged: {fit.converged}", f"degenerate: {fit.degenerate}",
                 f"anchors used: {fit.anchors_used}"):
        _log(line)
    _emit(args, fit, extra={"rng_seed": seed})
    if fit.degenerate or not fit.converged:
        return EXIT_NUMERIC
    return 0


def cmd_fit(args, rng) -> int:
    network, attributes = _load_data(args)
    statistics = _model_terms(args, attributes)
    fit = mle_complete(network, statistics, attributes, _fit_config(args), rng)
    return _finish_fit(args, fit, args.rng_seed)


def cmd_fit_missing(args, rng) -> int:
    network, attributes = _load_data(args)
    statistics = _model_terms(args, attributes)
    partial = _partial_from_args(args, network, rng)
    _log(f"observed dyads: {partial.pattern.n_observed_dyads()} of "
         f"{len(partial.pattern.dyads())}")
    fit = mle_missing(partial, statistics, attributes, _fit_config(args), rng)
    return _finish_fit(args, fit, args.rng_seed)


def cmd_mean_value(args, rng) -> int:
    network, attributes = _load_data(args)
    statistics = _model_terms(args, attributes)
    eta = _parse_floats(args.eta, "eta")
    mv = mean_value_params(eta, statistics, attributes, network.n,
                           network.directed, _fit_config(args), rng,
                           initial=network)
    _emit(args, mv, extra={"rng_seed": args.rng_seed,
                           "labels": [s.label for s in statistics]})
    return 0


def cmd_kl(args, rng) -> int:
    network, attributes = _load_data(args)
    statistics = _model_terms(args, attributes)
    xi = _parse_floats(args.xi, "xi")
    eta = _parse_floats(args.eta, "eta")
    est = kl_divergence(xi, eta, statistics, attributes, network.n,
                        network.directed, _fit_config(args), rng,
                        initial=network)
    _emit(args, est, extra={"rng_seed": args.rng_seed})
    return 0


def cmd_design_prob(args, rng) -> int:
    network, _ = _load_data(args)
    spec = _design_from_args(args, network.directed)
    if args.mask:
        mask = _load_mask(args.mask, network.directed)
        pattern = ObservationPattern(mask, directed=network.directed)
    else:
        s0 = _initial_sample(args, spec, network.n, rng)
        pattern = trace(spec, network, s0).pattern
    out = {"kind": "design_prob", "design": args.design}
    if args.mc:
        estimate, se = design_probability_mc(spec, pattern, network, args.mc,
                                             rng)
        out.update(probability=estimate, se=se, draws=args.mc, method="mc")
    else:
        try:
            prob = design_probability(spec, pattern, network)
        except EnumerationBoundExceeded as exc:
            raise CliError(f"{exc} (use --mc DRAWS for an estimate)",
                           EXIT_NUMERIC) from None
        out.update(probability=prob, method="exact")
    _emit(args, out)
    return 0


def cmd_ht(args, rng) -> int:
    network, _ = _load_data(args)
    if args.design and args.design != "ego":
        spec = _design_from_args(args, network.directed)
        report = observability_report(spec)
        if not report.dyadic_observable:
            raise CliError(
                "edge totals are not design-unbiasedly estimable under "
                f"{report.scheme}: dyadic inclusion probabilities are not "
                "identified from the observed data", EXIT_NUMERIC)
    if args.mask:
        mask = _load_mask(args.mask, network.directed)
        pattern = ObservationPattern(mask, directed=network.directed)
        partial = restrict(network, pattern)
    elif args.design:
        partial = _partial_from_args(args, network, rng)
    else:
        pattern = ObservationPattern(np.ones((network.n, network.n),
                                              dtype=np.uint8),
                                     directed=network.directed)
        partial = restrict(network, pattern)
    if args.psi is None:
        raise CliError("--psi is required for inverse-probability weighting",
                       EXIT_USAGE)
    try:
        total = ht_edge_total(partial, args.psi)
        out = {"kind": "ht", "psi": args.psi, "edge_total": total,
               "observed_edges": partial.observed_edge_count()}
        if args.variance:
            out["variance_estimate"] = ht_variance_estimate(partial, args.psi)
    except UnobservableProbabilityError as exc:
        raise CliError(str(exc), EXIT_NUMERIC) from None
    _emit(args, out)
    return 0


def cmd_study(args, rng) -> int:
    network, attributes = _load_data(args)
    statistics = _model_terms(args, attributes)
    config = _fit_config(args)
    _log("fitting the complete data ...")
    complete = mle_complete(network, statistics, attributes, config,
                            np.random.default_rng(
                                np.random.SeedSequence([args.master_seed, 1])))
    if complete.eta_hat is None:
        raise CliError("complete-data fit is degenerate", EXIT_NUMERIC)
    _log(f"complete eta_hat: {np.round(complete.eta_hat, 3).tolist()}")
    subsample = None if args.full else args.subsample
    records = run_study(network, statistics, attributes, complete, config,
                        subsample=subsample, master_seed=args.master_seed,
                        workers=args.workers)
    n_excluded = sum(r.excluded for r in records)
    _log(f"{len(records)} samples fitted, {n_excluded} excluded")
    sd_nat = sd_mean = None
    if args.bootstrap:
        _log(f"bootstrapping complete-data sampling SDs (B={args.bootstrap}) ...")
        sd_nat, sd_mean, dropped = complete_sampling_sd(
            network, statistics, attributes, complete.eta_hat,
            b=args.bootstrap, config=config, master_seed=args.master_seed,
            workers=args.workers)
        if dropped:
            _log(f"{dropped} bootstrap replicates were degenerate")
    from .stats import compute_stats
    observed = compute_stats(network, statistics, attributes)
    summary = summarize(records, complete, mean_reference=observed,
                        sd_natural=sd_nat, sd_mean=sd_mean)
    if args.records_out:
        write_results({"kind": "study_records",
                       "records": [result_to_jsonable(r) for r in records]},
                      args.records_out, format="json",
                      extra={"master_seed": args.master_seed})
        _log(f"wrote per-sample records to {args.records_out}")
    if args.figure2_out:
        write_results(figure2_data(records), args.figure2_out, format="csv")
        _log(f"wrote KL scatter data to {args.figure2_out}")
    _emit(args, summary, extra={"master_seed": args.master_seed})
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    data = argparse.ArgumentParser(add_help=False)
    g = data.add_argument_group("dataset")
    g.add_argument("--lazega", action="store_true",
                   help="use the bundled law-firm collaboration data")
    g.add_argument("--adjacency", help="adjacency file")
    g.add_argument("--attributes", help="node attribute CSV")
    g.add_argument("--input-format", choices=("matrix", "edgelist"),
                   default="matrix")
    g.add_argument("--directed", action="store_true")
    g.add_argument("--n", type=int, help="node count (edge lists / simulate)")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--stats", help="model terms, e.g. "
                       "'edges,gwesp:0.7781,nodal:seniority,match:office'")

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--rng-seed", type=int, default=0)
    out.add_argument("--out", help="output path (default: stdout)")
    out.add_argument("--format", choices=("json", "csv"), default="json")

    mcmc = argparse.ArgumentParser(add_help=False)
    mcmc.add_argument("--draws", type=int)
    mcmc.add_argument("--burn-in", type=int)
    mcmc.add_argument("--thin", type=int)
    mcmc.add_argument("--max-anchors", type=int)
    mcmc.add_argument("--bridge-steps", type=int)

    design = argparse.ArgumentParser(add_help=False)
    dg = design.add_argument_group("design")
    dg.add_argument("--design", choices=("ego", "trace"))
    dg.add_argument("--waves", default="1",
                    help="wave count for tracing, or 'sat' (default 1)")
    dg.add_argument("--psi", type=float,
                    help="independent initial-inclusion probability")
    dg.add_argument("--seeds", type=int, help="fixed initial sample size")
    dg.add_argument("--seed-pair",
                    help="two 1-based node labels 'I,J' as the initial sample")
    dg.add_argument("--mask", help="observation mask (matrix CSV)")

    parser = argparse.ArgumentParser(
        prog="ergm-sampled",
        description="ERGM simulation, sampling designs and estimation for "
                    "partially observed networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[data, model, out],
                       help="draw networks from a model")
    p.add_argument("--eta", required=True, help="comma-separated parameters")
    p.add_argument("--size", type=int, default=100)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--thin", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sample", parents=[data, design, out],
                       help="realize an observation design")
    p.add_argument("--mask-out", help="write the 0/1 observation mask here")
    p.add_argument("--values-out", help="write the observed adjacency here")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit", parents=[data, model, mcmc, out],
                       help="complete-data maximum likelihood")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("fit-missing", parents=[data, model, mcmc, design, out],
                       help="maximum likelihood from a partial observation")
    p.set_defaults(func=cmd_fit_missing)

    p = sub.add_parser("mean-value", parents=[data, model, mcmc, out],
                       help="expected statistics under given parameters")
    p.add_argument("--eta", required=True)
    p.set_defaults(func=cmd_mean_value)

    p = sub.add_parser("kl", parents=[data, model, mcmc, out],
                       help="KL divergence between two parameter vectors")
    p.add_argument("--xi", required=True, help="reference parameters")
    p.add_argument("--eta", required=True, help="comparison parameters")
    p.set_defaults(func=cmd_kl)

    p = sub.add_parser("design-prob", parents=[data, design, out],
                       help="probability of an observation pattern")
    p.add_argument("--mc", type=int,
                   help="Monte Carlo draws (when enumeration is infeasible)")
    p.set_defaults(func=cmd_design_prob)

    p = sub.add_parser("ht", parents=[data, design, out],
                       help="design-based (Horvitz-Thompson) edge total")
    p.add_argument("--variance", action="store_true",
                   help="also estimate the sampling variance")
    p.set_defaults(func=cmd_ht)

    p = sub.add_parser("study", parents=[data, model, mcmc, out],
                       help="two-wave link-tracing study over seed pairs")
    p.add_argument("--subsample", type=int, default=50,
                   help="number of seed pairs (seeded subsample; default 50)")
    p.add_argument("--full", action="store_true",
                   help="sweep all seed pairs instead of a subsample")
    p.add_argument("--master-seed", type=int, default=0)
    p.add_argument("--bootstrap", type=int, default=0,
                   help="bootstrap replicates for efficiency-loss SDs")
    p.add_argument("--workers", type=int)
    p.add_argument("--records-out", help="write per-sample records (JSON)")
    p.add_argument("--figure2-out", help="write the KL scatter data (CSV)")
    p.set_defaults(func=cmd_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; 0 for --help
        return 0 if exc.code == 0 else EXIT_USAGE
    rng = np.random.default_rng(args.rng_seed)
    try:
        return args.func(args, rng)
    except CliError as exc:
        _log(f"error: {exc}")
        return exc.code
    except DataFormatError as exc:
        _log(f"error: {exc}")
        return EXIT_DATA
    except FileNotFoundError as exc:
        _log(f"error: {exc}")
        return EXIT_DATA
    except UnobservableProbabilityError as exc:
        _log(f"error: {exc}")
        return EXIT_NUMERIC
    except ValueError as exc:
        _log(f"error: {exc}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
