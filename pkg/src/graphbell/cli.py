"""Command-line interface: build inequalities, compute bounds, simulate, certify.

Subcommands
    bell        construct an inequality (preset or spec file) and report bounds
    robustness  fidelity-bound coefficients (s, mu) and the bound curve
    simulate    noisy finite-statistics counts for every required setting
    certify     turn a Bell value (given or estimated from counts) into a certificate
    fidelity    direct fidelity estimators (GHZ population/coherence, cluster stabilizers)

Exit codes: 0 success (certificate: genuine entanglement), 2 certificate
inconclusive, 1 any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bell import (
    ConstructionSpec,
    PRESET_NAMES,
    build_inequality,
    experimental_frame,
    preset_construction,
    preset_family,
    preset_inequality,
    required_correlators,
    search_quantum_bound,
)
from .graphs import Graph
from .robustness import (
    DEFAULT_MARGIN_GRID,
    VERDICT_GENUINE,
    bound_curve,
    certify,
    format_uncertainty,
    preset_coefficients,
)
from .simulate import (
    CountsRecord,
    bell_value_from_counts,
    cluster_fidelity,
    estimate_correlator,
    ghz_fidelity_from_counts,
    ghz_fidelity_from_values,
    simulate_bell_records,
)

_CANONICAL_STATES = ("ghz4", "cluster4")


# ---------------------------------------------------------------------------
# Output plumbing: reports are JSON with 6 significant digits; every report
# embeds the flag set that produced it.


def _sig(value: float) -> float:
    return float(f"{value:.6g}")


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, (float, np.floating)):
        return _sig(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__} in a report")


def _emit(report: dict, output: str | None) -> None:
    text = json.dumps(_jsonify(report), indent=2)
    if output:
        Path(output).write_text(text + "\n")
        print(f"report written to {output}")
    else:
        print(text)


def _load_json(path: str) -> dict:
    return json.loads(Path(path).read_text())


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; 2 means 'inconclusive' here."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


# ---------------------------------------------------------------------------
# bell


def _load_inequality(args) -> "tuple":
    """(inequality, config dict) from --preset or --spec."""
    if args.preset:
        graph, spec = preset_construction(args.preset)
        ineq = preset_inequality(args.preset)
        origin = {"preset": args.preset}
    else:
        obj = _load_json(args.spec)
        if "graph" not in obj:
            raise ValueError(f"spec file {args.spec} needs a 'graph' entry ({{'n': N, 'edges': [[i, j], ...]}})")
        graph = Graph.from_json(obj["graph"])
        spec = ConstructionSpec.from_json(obj)
        ineq = build_inequality(graph, spec, name=Path(args.spec).stem)
        origin = {"spec": args.spec}
    return ineq, graph, spec, origin


def cmd_bell(args) -> int:
    ineq, graph, spec, origin = _load_inequality(args)
    print(str(ineq))
    report = {
        "command": "bell",
        "config": {**origin, "search_grid": args.search_grid},
        "inequality": {
            "name": ineq.name,
            "n_parties": ineq.n_parties,
            "ac": sorted(ineq.ac),
            "terms": [str(t) for t in ineq.terms],
            "beta_c": ineq.classical_bound_value,
            "beta_q": ineq.quantum_bound_value,
        },
        "construction": {"graph": graph.to_json(), **spec.to_json()},
        "required_settings": [
            {"setting": req.setting_label, "weight": req.weight} for req in required_correlators(ineq)
        ],
    }
    if ineq.name in PRESET_NAMES:
        frame = experimental_frame(ineq, preset_family(ineq.name))
        report["experimental_frame"] = {
            "family": frame.family,
            "state": frame.state_name,
            "hadamard_sites": list(frame.hadamard_sites),
            "settings": [{"party": i, "A": a, "B": b} for i, (a, b) in enumerate(frame.labels, start=1)],
        }
        print(f"experimental frame: state {frame.state_name}, "
              + ", ".join(f"A{i}={a} B{i}={b}" for i, (a, b) in enumerate(frame.labels, start=1)))
    if args.search_grid:
        found, angles = search_quantum_bound(ineq, grid_resolution=args.search_grid)
        report["grid_search"] = {"resolution": args.search_grid, "value": found, "thetas": list(angles.thetas)}
        print(f"grid search (resolution {args.search_grid}): {found:.6f} at theta = "
              + ", ".join(f"{t:.4f}" for t in angles.thetas))
    _emit(report, args.output)
    return 0


# ---------------------------------------------------------------------------
# robustness


def cmd_robustness(args) -> int:
    coeffs = preset_coefficients(args.preset, recompute=args.recompute, grid_resolution=args.grid)
    points, crossing = bound_curve(coeffs, n_points=args.curve_points)
    print(f"{coeffs.inequality}: F >= {coeffs.slope:.4f} * <B> + ({coeffs.offset:.4f})   "
          f"[beta_c = {coeffs.beta_c:g}, beta_q = {coeffs.beta_q:.6f}, grid = {coeffs.grid_resolution}]")
    if crossing is not None:
        print(f"bound reaches F = 1/2 at <B> = {crossing:.4f}")
    report = {
        "command": "robustness",
        "config": {
            "preset": args.preset,
            "grid": args.grid,
            "recompute": args.recompute,
            "curve_points": args.curve_points,
        },
        "coefficients": coeffs.to_json(),
        "fidelity_at_beta_q": coeffs.fidelity_bound(coeffs.beta_q),
        "fidelity_at_beta_c": coeffs.fidelity_bound(coeffs.beta_c),
        "crossing_half": crossing,
    }
    if args.curve:
        lines = ["bell_value,fidelity_bound"]
        lines += [f"{_sig(b)},{_sig(f)}" for b, f in points]
        Path(args.curve).write_text("\n".join(lines) + "\n")
        print(f"bound curve ({len(points)} points) written to {args.curve}")
        report["curve_file"] = args.curve
    _emit(report, args.output)
    return 0


# ---------------------------------------------------------------------------
# simulate


def _load_state_vector(path: str) -> np.ndarray:
    """Read a state vector from JSON: {'amplitudes': [re, im] pairs or reals}."""
    obj = _load_json(path)
    amps = obj["amplitudes"] if isinstance(obj, dict) else obj
    out = []
    for a in amps:
        if isinstance(a, (list, tuple)):
            re, im = a
            out.append(complex(re, im))
        else:
            out.append(complex(a))
    return np.array(out, dtype=complex)


def cmd_simulate(args) -> int:
    ineq = preset_inequality(args.preset)
    family = preset_family(args.preset)
    expected_state = "ghz4" if family == "ghz" else "cluster4"
    state = None
    if args.state != "auto":
        if args.state in _CANONICAL_STATES:
            if args.state != expected_state:
                raise ValueError(
                    f"preset {args.preset} certifies the {expected_state} state; "
                    f"--state {args.state} does not match"
                )
        else:
            state = _load_state_vector(args.state)
    records = simulate_bell_records(
        ineq,
        noise_p=args.noise_p,
        events_per_setting=args.events,
        seed=args.seed,
        dephased=args.dephased,
        state=state,
    )
    value, sigma = bell_value_from_counts(records, ineq)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    config = {
        "preset": args.preset,
        "state": args.state,
        "noise_p": args.noise_p,
        "events_per_setting": args.events,
        "seed": args.seed,
        "dephased": args.dephased,
    }
    settings_report = []
    files = []
    for record in records:
        est = estimate_correlator(record)
        fname = f"{args.preset}_counts_{record.setting.replace(' ', '')}.json"
        path = outdir / fname
        path.write_text(json.dumps(record.to_json(), indent=2) + "\n")
        files.append(str(path))
        settings_report.append({
            "setting": record.setting,
            "file": fname,
            "total_events": record.total(),
            "correlator": est.value,
            "sigma": est.sigma,
        })
        print(f"  {record.setting:<16} {format_uncertainty(est.value, est.sigma):>12}   ({record.total()} events)")
    print(f"{args.preset}: <B> = {format_uncertainty(value, sigma)}   (beta_q = {ineq.quantum_bound_value:.4f})")
    summary = {
        "command": "simulate",
        "config": config,
        "bell_value": value,
        "bell_sigma": sigma,
        "beta_c": ineq.classical_bound_value,
        "beta_q": ineq.quantum_bound_value,
        "settings": settings_report,
        "counts_files": files,
    }
    summary_path = outdir / f"{args.preset}_summary.json"
    _emit(summary, str(summary_path) if args.output is None else args.output)
    return 0


# ---------------------------------------------------------------------------
# certify


def cmd_certify(args) -> int:
    if (args.bell_value is None) == (not args.counts):
        raise ValueError("provide either --bell-value or --counts files, not both")
    coeffs = preset_coefficients(args.preset, recompute=args.recompute, grid_resolution=args.grid)
    if args.bell_value is not None:
        value, sigma = args.bell_value, args.sigma
        source = {"bell_value": value, "sigma": sigma}
    else:
        ineq = preset_inequality(args.preset)
        records = [CountsRecord.from_json(_load_json(path)) for path in args.counts]
        value, sigma = bell_value_from_counts(records, ineq)
        source = {"counts": list(args.counts)}
    cert = certify(value, sigma, coeffs)
    print(cert.display())
    report = {
        "command": "certify",
        "config": {"preset": args.preset, "grid": args.grid, "recompute": args.recompute, **source},
        "coefficients": coeffs.to_json(),
        **cert.to_json(),
        "display": cert.display(),
    }
    _emit(report, args.output)
    return 0 if cert.verdict == VERDICT_GENUINE else 2


# ---------------------------------------------------------------------------
# fidelity


def cmd_fidelity(args) -> int:
    chosen = [opt for opt in (args.ghz_counts, args.ghz_values, args.cluster_values) if opt]
    if len(chosen) != 1:
        raise ValueError("provide exactly one of --ghz-counts, --ghz-values, --cluster-values")
    if args.ghz_counts:
        population, *coherence = [CountsRecord.from_json(_load_json(p)) for p in args.ghz_counts]
        fidelity, sigma = ghz_fidelity_from_counts(population, coherence)
        estimator = "ghz_population_coherence"
        source = {"ghz_counts": list(args.ghz_counts)}
    elif args.ghz_values:
        obj = _load_json(args.ghz_values)
        fidelity, sigma = ghz_fidelity_from_values(
            float(obj["population"]),
            [float(c) for c in obj["coherence"]],
            float(obj.get("population_sigma", 0.0)),
            [float(s) for s in obj["coherence_sigmas"]] if "coherence_sigmas" in obj else None,
        )
        estimator = "ghz_population_coherence"
        source = {"ghz_values": args.ghz_values}
    else:
        obj = _load_json(args.cluster_values)
        sigmas = [float(s) for s in obj["sigmas"]] if "sigmas" in obj else None
        fidelity, sigma = cluster_fidelity([float(v) for v in obj["expectations"]], sigmas)
        estimator = "cluster_stabilizers"
        source = {"cluster_values": args.cluster_values}
    print(f"F = {format_uncertainty(fidelity, sigma)}   ({estimator})")
    report = {
        "command": "fidelity",
        "config": source,
        "estimator": estimator,
        "fidelity": fidelity,
        "sigma": sigma,
        "display": format_uncertainty(fidelity, sigma),
    }
    _emit(report, args.output)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="graphbell", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_bell = sub.add_parser("bell", help="construct a Bell inequality and report its bounds")
    group = p_bell.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", choices=PRESET_NAMES, help="one of the six canonical inequalities")
    group.add_argument("--spec", help="ConstructionSpec JSON file (with a 'graph' entry)")
    p_bell.add_argument("--search-grid", type=int, default=0,
                        help="also run the angle grid search at this resolution")
    p_bell.add_argument("--output", help="write the JSON report here instead of stdout")
    p_bell.set_defaults(func=cmd_bell)

    p_rob = sub.add_parser("robustness", help="fidelity-bound coefficients and bound curve")
    p_rob.add_argument("--preset", choices=PRESET_NAMES, required=True)
    p_rob.add_argument("--grid", type=int, default=DEFAULT_MARGIN_GRID,
                       help=f"angle grid resolution per party (default {DEFAULT_MARGIN_GRID})")
    p_rob.add_argument("--recompute", action="store_true",
                       help="ignore the shipped coefficients and rerun the optimization")
    p_rob.add_argument("--curve", help="write the (bell value, fidelity bound) CSV here")
    p_rob.add_argument("--curve-points", type=int, default=101)
    p_rob.add_argument("--output", help="write the JSON report here instead of stdout")
    p_rob.set_defaults(func=cmd_robustness)

    p_sim = sub.add_parser("simulate", help="generate noisy finite-statistics counts")
    p_sim.add_argument("--preset", choices=PRESET_NAMES, required=True)
    p_sim.add_argument("--state", default="auto",
                       help="'auto', a canonical state name, or a state-vector JSON file")
    p_sim.add_argument("--noise-p", type=float, default=0.0, help="noisy proportion p")
    p_sim.add_argument("--events", type=float, default=100_000, help="mean events per setting")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--dephased", action="store_true",
                       help="use the computational-basis-dephased leakage state")
    p_sim.add_argument("--outdir", default=".", help="directory for counts files and the summary")
    p_sim.add_argument("--output", help="write the summary JSON here instead of <outdir>/<preset>_summary.json")
    p_sim.set_defaults(func=cmd_simulate)

    p_cert = sub.add_parser("certify", help="fidelity certificate from a Bell value or counts files")
    p_cert.add_argument("--preset", choices=PRESET_NAMES, required=True)
    p_cert.add_argument("--bell-value", type=float, help="measured Bell value")
    p_cert.add_argument("--sigma", type=float, default=0.0, help="uncertainty of --bell-value")
    p_cert.add_argument("--counts", nargs="+", help="counts JSON files covering every required setting")
    p_cert.add_argument("--grid", type=int, default=DEFAULT_MARGIN_GRID)
    p_cert.add_argument("--recompute", action="store_true")
    p_cert.add_argument("--output", help="write the certificate JSON here instead of stdout")
    p_cert.set_defaults(func=cmd_certify)

    p_fid = sub.add_parser("fidelity", help="direct fidelity estimators")
    p_fid.add_argument("--ghz-counts", nargs=5, metavar=("POPULATION", "M0", "M1", "M2", "M3"),
                       help="five counts files: computational basis plus the four coherence bases")
    p_fid.add_argument("--ghz-values", help="JSON file {'population': P, 'coherence': [c0..c3], ...}")
    p_fid.add_argument("--cluster-values", help="JSON file {'expectations': [16 values], 'sigmas': [...]}")
    p_fid.add_argument("--output", help="write the JSON report here instead of stdout")
    p_fid.set_defaults(func=cmd_fidelity)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        detail = f"missing key {exc}" if isinstance(exc, KeyError) else str(exc)
        print(f"error: {detail}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
