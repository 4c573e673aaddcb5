"""Command-line harness: ``ccistat {pdf,kl,capacity,validate}``.

Outputs are CSV with ``#`` metadata lines (tool version, configuration
digest, seed) ahead of the header row. Floats are written with ``repr`` so
they round-trip exactly, and sweep rows always come out in sweep order.

Exit status: 0 success, 2 configuration error, 3 numerical failure,
4 validation failure.
"""

import argparse
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy import stats

from . import __version__
from .capacity import CapacityReport, capacity_report
from .cci import (
    InterferenceCf,
    invert_cf,
    pdf_equal_power,
    pdf_single_cci,
    pdf_three_pair,
)
from .config import PRESETS, RunConfig
from .errors import ConfigError, InvalidArgumentError
from .montecarlo import (
    aligned_grid,
    empirical_pdf,
    gaussian_bin_masses,
    kl_distance,
    sample_components,
    symmetric_edges,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VALIDATION = 4

log = logging.getLogger("ccistat")


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(stream, command, config, columns, rows, notes=()):
    stream.write(f"# ccistat {__version__}\n")
    stream.write(f"# command={command}\n")
    stream.write(f"# config_sha256={config.digest}\n")
    stream.write(f"# seed={config['seed']}\n")
    for note in notes:
        stream.write(f"# {note}\n")
    stream.write(",".join(columns) + "\n")
    for row in rows:
        stream.write(",".join(_fmt(v) for v in row) + "\n")


def _map(func, items, workers):
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


# --- pdf --------------------------------------------------------------------

def closed_form_law(point, grid):
    """Closed-form interference law for the point, when one exists.

    Returns ``(label, NumericPdf)`` or ``(None, None)``.
    """
    powers = point.interferer_powers[point.interferer_powers > 0]
    m = powers.size
    if m == 0:
        return None, None
    if m == 1:
        return "single", pdf_single_cci(float(powers[0]), point.p, grid)
    if point.p != 1.0:
        return None, None
    ordered = np.sort(powers)[::-1]
    if m in (2, 4, 6) and np.allclose(ordered, ordered[0], rtol=1e-12, atol=0):
        return f"equal_power_M{m}", pdf_equal_power(m, float(ordered[0]), grid)
    if m == 6 and np.allclose(ordered[0::2], ordered[1::2], rtol=1e-12, atol=0):
        return "three_pair", pdf_three_pair(*ordered[0::2], grid=grid)
    return None, None


def _pdf_point(args):
    point, config = args
    noise = point.noise_variance if config["component"] == "Z" else 0.0
    cf = InterferenceCf(point.interferer_powers, point.p, noise)
    if not cf.variance > 0:
        raise ConfigError(f"{point.name}: the law is a point mass at zero; nothing to tabulate")
    sd = math.sqrt(cf.variance)
    edges = symmetric_edges(sd, config["bins"], config["span"])
    grid = aligned_grid(cf, edges)
    law = invert_cf(cf, grid)
    centers = 0.5 * (edges[1:] + edges[:-1])
    width = edges[1] - edges[0]
    analytic = law.evaluate(centers)
    analytic_bin = law.bin_masses(edges) / width
    label, closed = (None, None) if noise else closed_form_law(point, grid)
    closed_col = closed.evaluate(centers) if closed is not None else np.full(centers.size, np.nan)
    batch = sample_components(point.interferer_powers, point.p, noise, 0.0,
                              config["component"], config["samples"], config["seed"])
    hist = empirical_pdf(batch, edges)
    gaussian = stats.norm.pdf(centers, scale=sd)
    rows = [(point.name, x, a, ab, c, e, g)
            for x, a, ab, c, e, g in zip(centers, analytic, analytic_bin, closed_col, hist.density, gaussian)]
    note = (f"case={point.name} atom_mass={law.atom_mass!r} variance={cf.variance!r} "
            f"closed_form={label or 'none'} out_of_range={hist.out_of_range!r}")
    return rows, note


def run_pdf(config, stream, workers=1):
    """Tabulate analytic, closed-form, empirical and matched-Gaussian densities."""
    results = _map(_pdf_point, [(p, config) for p in config.points()], workers)
    rows = [r for rows, _ in results for r in rows]
    notes = [f"component={config['component']} samples={config['samples']}"] + [n for _, n in results]
    columns = ("case", "x", "analytic", "analytic_bin", "closed_form", "empirical", "gaussian")
    write_csv(stream, "pdf", config, columns, rows, notes)


# --- kl ---------------------------------------------------------------------

def _binned_kl(cf, config):
    from .montecarlo import analytic_bin_masses

    edges = symmetric_edges(math.sqrt(cf.variance), config["bins"], config["span"])
    return kl_distance(analytic_bin_masses(cf, edges), gaussian_bin_masses(edges, cf.variance)), edges


def _kl_point(args):
    point, config = args
    cf = InterferenceCf(point.interferer_powers, point.p)
    if not cf.variance > 0:
        raise ConfigError(f"{point.name}: no interference; the distance is undefined")
    kl, edges = _binned_kl(cf, config)
    kl_noise = _binned_kl(cf.with_gaussian(point.noise_variance), config)[0] if point.noise_variance > 0 else kl
    batch = sample_components(point.interferer_powers, point.p, tag="I",
                              n=config["samples"], seed=config["seed"])
    kl_emp = kl_distance(empirical_pdf(batch, edges), gaussian_bin_masses(edges, cf.variance))
    m = int(np.count_nonzero(point.interferer_powers))
    return (point.name, m, point.d_over_R, point.p, kl, kl_noise, kl_emp)


def run_kl(config, stream, workers=1):
    """KL distance (nats) of the binned interference law from its matched Gaussian."""
    rows = _map(_kl_point, [(p, config) for p in config.points()], workers)
    columns = ("case", "M", "d_over_R", "p", "kl_nats", "kl_noise_nats", "kl_empirical_nats")
    notes = [f"bins={config['bins']} span={config['span']!r} samples={config['samples']}"]
    write_csv(stream, "kl", config, columns, rows, notes)


# --- capacity ---------------------------------------------------------------

def _capacity_point(args):
    point, config = args
    from .geometry import LinkBudget

    budget = LinkBudget.from_powers(point.desired_power, point.interferer_powers)
    report = capacity_report(budget, point.p, point.noise_variance, point.d_over_R, point.p,
                             config["mc_draws"], config["seed"], config["ga_method"], config["refine_check"])
    return report.row()


def run_capacity(config, stream, workers=1):
    """Spectral-efficiency estimates and difference factors over the sweep."""
    rows = _map(_capacity_point, [(p, config) for p in config.points()], workers)
    notes = [f"mc_draws={config['mc_draws']} ga_method={config['ga_method']} units=bits_per_real_channel_use"]
    write_csv(stream, "capacity", config, CapacityReport.COLUMNS, rows, notes)


COMMANDS = {"pdf": run_pdf, "kl": run_kl, "capacity": run_capacity}


def run_command(command, config, stream, workers=1):
    COMMANDS[command](config, stream, workers)


# --- validate ---------------------------------------------------------------

def run_validate(stream, seed=0, samples=1_000_000, mc_draws=100_000, workers=1, faults=()):
    """Run the invariant suite; returns True when every check passes."""
    from .validation import run_checks

    start = time.perf_counter()
    results = run_checks(seed, samples, mc_draws, workers, faults)
    stream.write(f"# ccistat {__version__} validate seed={seed} samples={samples} mc_draws={mc_draws}\n")
    if faults:
        stream.write(f"# injected_faults={','.join(faults)}\n")
    stream.write("check,status,measured,tolerance\n")
    for result in results:
        stream.write(result.line() + "\n")
    failed = [r.name for r in results if not r.passed]
    stream.write(f"# summary passed={len(results) - len(failed)} failed={len(failed)} "
                 f"seconds={time.perf_counter() - start:.1f}\n")
    return not failed


# --- entry point ------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="ccistat", description="Co-channel interference statistics and downlink spectral efficiency.")
    parser.add_argument("--version", action="version", version=f"ccistat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("pdf", "tabulate interference densities"),
                           ("kl", "KL distance from the matched Gaussian over a sweep"),
                           ("capacity", "spectral efficiency over a sweep"),
                           ("validate", "run the invariant suite")):
        p = sub.add_parser(name, help=helptext)
        if name != "validate":
            p.add_argument("--config", metavar="PATH", help="JSON configuration file")
            p.add_argument("--preset", choices=PRESETS, help="shipped figure preset")
        else:
            p.add_argument("--inject-fault", action="append", default=[], metavar="NAME",
                           help="deliberately break a component (e.g. three-pair-coefficients)")
            p.add_argument("--mc-draws", type=int, default=100_000, help="Monte Carlo draws per capacity point")
        p.add_argument("--seed", type=int, help="random seed (default: config value, else 0)")
        p.add_argument("--samples", type=int,
                       help="Monte Carlo samples (density samples; draws per point for capacity)")
        p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv",), default="csv")
        p.add_argument("--workers", type=int, default=1, help="parallel workers")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _open_out(path):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "validate":
            stream, close = _open_out(args.out)
            try:
                ok = run_validate(stream, args.seed or 0, args.samples or 1_000_000, args.mc_draws,
                                  args.workers, tuple(args.inject_fault))
            finally:
                if close:
                    stream.close()
            return EXIT_OK if ok else EXIT_VALIDATION
        overrides = {"seed": args.seed}
        if args.samples is not None:
            overrides["mc_draws" if args.command == "capacity" else "samples"] = args.samples
        config = RunConfig.build(args.config, args.preset, overrides)
        stream, close = _open_out(args.out)
        try:
            run_command(args.command, config, stream, args.workers)
        finally:
            if close:
                stream.close()
    except (ConfigError, InvalidArgumentError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
