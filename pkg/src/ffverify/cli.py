"""Command-line front end.

Commands: gap, samples, compare, check-bounds, simulate.
Exit codes: 0 success, 2 input error, 3 resource error, 4 invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import aklt, detectability, graph as graphs, hamiltonian as ham
from . import protocol as proto
from . import simulate as sims
from .errors import InputError, InvariantViolation, ResourceError
from .tolerances import max_dim

#: documented gap defaults for large lattices (finite-size gaps are never
#: extrapolated; pass --gamma explicitly for anything else)
DEFAULT_GAMMA_CHAIN = 0.350
DEFAULT_GAMMA_HONEYCOMB = 0.10


def _build_graph(args) -> graphs.Hypergraph:
    picked = [bool(args.chain), bool(args.honeycomb), bool(args.square), bool(args.graph)]
    if sum(picked) != 1:
        raise InputError("pick exactly one of --chain, --honeycomb, --square, --graph")
    if args.chain:
        return graphs.chain(args.chain, closed=args.closed)
    if args.honeycomb:
        w, h = _parse_wh(args.honeycomb)
        return graphs.honeycomb_lattice(w, h, periodic=args.periodic)
    if args.square:
        w, h = _parse_wh(args.square)
        return graphs.square_lattice(w, h, periodic=args.periodic)
    return graphs.Hypergraph.from_file(args.graph)


def _parse_wh(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise InputError(f"expected WxH, got {text!r}") from exc


def _load_design(name: str | None) -> aklt.DirectionDistribution | None:
    if name is None or name == "isotropic":
        return None
    if name in aklt.CATALOG_ORDERS:
        return aklt.design_catalog(name)
    return aklt.DirectionDistribution.from_file(name)


def _design_order(mu) -> int | None:
    """Effective (symmetrized) design order, which governs homogeneity."""
    if mu is None:
        return None
    return aklt.design_order(mu)


def _emit(args, rows: list[dict]) -> None:
    if args.format == "csv":
        text = proto.report_rows_to_csv(rows)
    else:
        text = proto.report_rows_to_json(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _check_dim(h: ham.FFHamiltonian) -> None:
    if h.dim > max_dim():
        raise ResourceError(
            f"Hilbert dimension {h.dim} exceeds FFV_MAX_DIM={max_dim()}; "
            "use a smaller instance or raise the cap")


def cmd_gap(args) -> int:
    g = _build_graph(args)
    h = aklt.aklt_hamiltonian(g)
    _check_dim(h)
    mu = _load_design(args.design)
    order = _design_order(mu)
    spins = {aklt.bond(h, e).twice_se for e in g.edges}
    twice_se_max = max(spins)
    if order is not None and twice_se_max > order:
        print(f"warning: design order {order} below 2*S_E = {twice_se_max}; "
              "bond operators will not be homogeneous", file=sys.stderr)
    if len(spins) > 1:
        # open-chain end bonds and other boundary bonds carry smaller total spin
        listed = ", ".join(str(t / 2) for t in sorted(spins))
        print(f"note: bond total spins vary across edges ({listed}); "
              "nu_E is the minimum bond gap", file=sys.stderr)

    cover = graphs.trivial_cover(g) if args.coloring == "trivial" else graphs.edge_coloring(g)
    if args.p == "proportional":
        cover = cover.with_proportional_probabilities()
    protocol = proto.build_protocol(h, cover, mu)
    ordering = None
    if args.optimize_ordering:
        ordering, _ = ham.best_zeta_ordering(h)
    profile = ham.spectral_profile(h, ordering=ordering, gamma=args.gamma)
    report = proto.gap_report(protocol, profile=profile)
    row = report.to_dict()
    row["N"] = proto.sample_count(report.nu_measured, args.epsilon, args.delta)
    if len(cover) >= 2:
        n_strong, n_weak = proto.sample_count_from_bounds(
            len(cover), protocol.nu_e, args.epsilon, args.delta, profile.gamma,
            profile.s, profile.g)
        row["N_strong"], row["N_weak"] = n_strong, n_weak
    _emit(args, [row])
    return 0


def cmd_samples(args) -> int:
    row: dict = {"epsilon": args.epsilon, "delta": args.delta}
    if args.nu is not None:
        row["nu"] = args.nu
        row["N"] = proto.sample_count(args.nu, args.epsilon, args.delta)
    else:
        if None in (args.m, args.nu_e, args.gamma, args.s, args.g):
            raise InputError("--nu or all of --m --nu-e --gamma --s --g required")
        strong, weak = proto.matching_gap_bounds(args.m, args.nu_e, args.gamma,
                                                 args.s, args.g)
        n_strong, n_weak = proto.sample_count_from_bounds(
            args.m, args.nu_e, args.epsilon, args.delta, args.gamma, args.s, args.g)
        row.update({"m": args.m, "gamma": args.gamma,
                    "thm1_strong": strong, "thm1_weak": weak,
                    "N": proto.sample_count(strong, args.epsilon, args.delta),
                    "N_strong": n_strong, "N_weak": n_weak})
    _emit(args, [row])
    return 0


def cmd_compare(args) -> int:
    """Sample costs on even closed chains: constant for the coloring protocol,
    polynomial growth for the competitors."""
    sizes = range(args.n_min, args.n_max + 1, args.n_step)
    rows = []
    n_strong, _ = proto.sample_count_from_bounds(
        m=2, nu_e=2.0 / 5.0, epsilon=args.epsilon, delta=args.delta,
        gamma=args.gamma, s=0.5, g=2)
    for n in sizes:
        if n % 2:
            continue
        costs = proto.competitor_costs(args.epsilon, args.delta, gamma=args.gamma,
                                       n=n, edge_count=n, kappa=args.kappa,
                                       alpha=args.alpha)
        rows.append({"n": n, "coloring_N": n_strong,
                     "HKSE_N": costs["HKSE"], "BHSRE_N": costs["BHSRE"]})
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "coloring_N", "HKSE_N", "BHSRE_N"])
        for r in rows:
            w.writerow([r["n"], r["coloring_N"], f"{r['HKSE_N']:.6e}", f"{r['BHSRE_N']:.6e}"])
        text = buf.getvalue()
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        _emit(args, rows)
    return 0


def _check_bound_suite(seed: int, instances: int) -> list[tuple[str, bool, str]]:
    """Invariant checks on random instances plus the AKLT chain."""
    rng = np.random.default_rng(seed)
    results: list[tuple[str, bool, str]] = []

    for i in range(instances):
        dims = [int(rng.integers(2, 4)) for _ in range(3)]
        h = ham.random_ff_instance(
            int(rng.integers(0, 2 ** 31)), nodes=(0, 1, 2), dims=dims,
            edges=((0, 1), (1, 2)), ground_rank=1)
        report = detectability.dl_norm_check(h)
        results.append((f"dl-chain[{i}]", report.passed,
                        f"measured {report.measured:.3e} bounds {report.bounds}"))

    for i in range(instances):
        m = int(rng.integers(2, 6))
        dim = int(rng.integers(2, 33))
        ps = [detectability.random_projector(rng, dim, int(rng.integers(1, dim)))
              for _ in range(m)]
        check = detectability.union_gap_check(ps)
        results.append((f"union-gap[{i}]", check.passed,
                        f"gap {check.gap:.3e} rhs {check.rhs:.3e}"))

    if instances > 0:
        h = aklt.aklt_hamiltonian(graphs.chain(4, closed=True))
        protocol = proto.build_protocol(h, graphs.edge_coloring(h.graph),
                                        aklt.design_catalog("icosahedron"))
        report = proto.gap_report(protocol)
        results.append(("aklt-chain-4", report.passed,
                        f"nu {report.nu_measured:.4f} >= {report.thm1_strong:.4f}"))
        for name, order in aklt.CATALOG_ORDERS.items():
            mu = aklt.design_catalog(name)
            ok = aklt.is_design(mu, order) and not aklt.is_design(mu, order + 2)
            results.append((f"design-{name}", ok, f"order {order}"))
    return results


def cmd_check_bounds(args) -> int:
    results = _check_bound_suite(args.seed, args.instances)
    failures = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += 0 if ok else 1
    print(f"{len(results) - failures}/{len(results)} checks passed")
    if failures:
        raise InvariantViolation(f"{failures} checks failed")
    return 0


def cmd_simulate(args) -> int:
    g = _build_graph(args)
    h = aklt.aklt_hamiltonian(g)
    _check_dim(h)
    mu = _load_design(args.design)
    cover = graphs.trivial_cover(g) if args.coloring == "trivial" else graphs.edge_coloring(g)
    if args.p == "proportional":
        cover = cover.with_proportional_probabilities()
    protocol = proto.build_protocol(h, cover, mu)
    spec = sims.NoiseSpec(args.noise, args.noise_epsilon)
    state = sims.prepare_state(protocol, spec)

    exact = sims.acceptance_probability(protocol, state)
    nu = proto.measured_gap(protocol)
    n_tests = args.tests or proto.sample_count(nu, args.epsilon, args.delta)
    rate, stderr = sims.estimate_pass_rate(protocol, state, args.pass_draws, args.seed)
    runs = sims.run_many(protocol, state, n_tests, args.runs, args.seed)
    if args.format == "csv":
        text = sims.runs_to_csv(runs)
    else:
        summary = sims.aggregate(runs)
        out = {
            "nu": nu,
            "exact_pass_probability": exact,
            "empirical_pass_rate": rate,
            "pass_rate_stderr": stderr,
            "n_tests": n_tests,
            "delta": args.delta,
            **summary,
            "per_run": json.loads(sims.runs_to_json(runs))["runs"],
        }
        text = json.dumps(out, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text)
    return 0


def _add_graph_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--chain", type=int, metavar="N", help="chain on N vertices")
    p.add_argument("--closed", action="store_true", help="close the chain into a cycle")
    p.add_argument("--honeycomb", metavar="WxH", help="honeycomb patch of WxH cells")
    p.add_argument("--square", metavar="WxH", help="square-lattice patch")
    p.add_argument("--periodic", action="store_true", help="periodic lattice patches")
    p.add_argument("--graph", metavar="FILE", help="graph JSON file")
    p.add_argument("--design", default="icosahedron",
                   help="design name, design JSON file, or 'isotropic'")
    p.add_argument("--coloring", choices=("auto", "trivial"), default="auto")
    p.add_argument("--p", choices=("uniform", "proportional"), default="uniform")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out", metavar="FILE", help="write output to FILE")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ffv",
        description="Construct and analyze verification protocols for ground "
                    "states of frustration-free Hamiltonians.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gap", help="measure a protocol gap and its lower bounds")
    _add_graph_flags(p)
    _add_common_flags(p)
    p.add_argument("--gamma", type=float, help="override the Hamiltonian gap "
                   "instead of diagonalizing")
    p.add_argument("--optimize-ordering", action="store_true",
                   help="minimize the ordering-dependent zeta bound")
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("samples", help="closed-form sample counts")
    _add_common_flags(p)
    p.add_argument("--nu", type=float, help="known verification gap")
    p.add_argument("--m", type=int, help="number of matchings")
    p.add_argument("--nu-e", dest="nu_e", type=float, help="minimum bond gap")
    p.add_argument("--gamma", type=float, default=DEFAULT_GAMMA_CHAIN,
                   help=f"Hamiltonian gap (default {DEFAULT_GAMMA_CHAIN} for chains; "
                        f"use {DEFAULT_GAMMA_HONEYCOMB} for honeycomb lattices)")
    p.add_argument("--s", type=float, help="largest nonunit pair singular value")
    p.add_argument("--g", type=int, help="max number of noncommuting neighbors")
    p.set_defaults(func=cmd_samples)

    p = sub.add_parser("compare", help="sample-cost comparison table on even closed chains")
    _add_common_flags(p)
    p.add_argument("--gamma", type=float, default=DEFAULT_GAMMA_CHAIN)
    p.add_argument("--kappa", type=int, default=2)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--n-min", type=int, default=20)
    p.add_argument("--n-max", type=int, default=200)
    p.add_argument("--n-step", type=int, default=20)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("check-bounds", help="run the invariant suites")
    _add_common_flags(p)
    p.add_argument("--instances", type=int, default=25)
    p.set_defaults(func=cmd_check_bounds)

    p = sub.add_parser("simulate", help="Monte-Carlo verification runs")
    _add_graph_flags(p)
    _add_common_flags(p)
    p.add_argument("--noise", choices=sims.NOISE_MODES, default="worst_case")
    p.add_argument("--noise-epsilon", type=float, default=0.05,
                   help="infidelity of the prepared state")
    p.add_argument("--tests", type=int, help="tests per run (default: from the gap)")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--pass-draws", type=int, default=10000,
                   help="draws for the single-test pass-rate estimate")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return 3
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
