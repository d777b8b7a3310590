"""Command-line front end: ``hypqec build | verify | search | simulate | export``.

Exit codes: 0 success, 2 verification failure, 3 resource cap, 4 parse error.
"""

from __future__ import annotations

import json
import logging
import math
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import __version__, kernels
from .construct import ConstructionDescriptor, build, verify_report
from .css import rate_bound, read_bundle, random_logical_search, write_bundle
from .errors import HypqecError, ParseError, VerificationError
from .gf2 import write_alist, write_parity_check
from .sim import CSV_HEADER, ProtocolConfig, sweep, to_csv, to_json

log = logging.getLogger("hypqec")


def parse_grid(text: str) -> list[float]:
    """``0.01,0.02`` or an inclusive range ``start:stop:step``."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(count)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ParseError(f"cannot parse probability grid {text!r}") from exc


def _dump(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


@click.group()
@click.version_option(__version__, prog_name="hypqec")
@click.option("-v", "--verbose", count=True, help="More logging on stderr.")
def cli(verbose):
    """Quantum codes from hyperbolic 4-manifolds."""
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


@cli.command("build")
@click.option("--symbol", default="5,3,3,5", show_default=True, help="Schläfli symbol.")
@click.option("--method", help="ideal(p[,root]) | ideal-sqrt5 | rotation-ideal(p) | word(r1;r2) | covering(base|w1;w2)")
@click.option("--descriptor", help="Full descriptor 'symbol/method'; overrides --symbol/--method.")
@click.option("--qubit-dim", type=int, help="Cell dimension carrying qubits (default: middle).")
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path), help="Bundle file to write.")
@click.option("--report", type=click.Path(dir_okay=False, path_type=Path), help="Report path (default: OUT.report.json).")
@click.option("--complex-out", type=click.Path(dir_okay=False, path_type=Path), help="Also export the cell complex.")
@click.option("--cache-dir", type=click.Path(file_okay=False, path_type=Path), help="Group cache directory.")
@click.option("--large", is_flag=True, help="Allow enumerations beyond 2.5 million elements.")
def cmd_build(symbol, method, descriptor, qubit_dim, out, report, complex_out, cache_dir, large):
    """Construct a code and write it with a verification report."""
    if descriptor is None:
        if not method:
            raise ParseError("give --method or --descriptor")
        descriptor = f"{symbol}/{method}"
    desc = ConstructionDescriptor.parse(descriptor)
    t0 = time.perf_counter()
    res = build(desc, qubit_dim, cache_dir, large)
    log.info("built %s in %.1f s", desc, time.perf_counter() - t0)
    rep = dict(res.report)
    rep["version"] = __version__
    rep["failed_checks"] = verify_report(rep)
    write_bundle(res.code, out)
    _dump(report or out.with_name(out.name + ".report.json"), _json(rep))
    if complex_out is not None:
        from .complex import export_text

        _dump(complex_out, export_text(res.complex))
    click.echo(f"{desc}: n={res.code.n} k={res.code.k} counts={list(res.complex.counts)} "
               f"chi={rep['chi']} proper={rep['proper']}")
    if rep["failed_checks"]:
        raise VerificationError("failed checks: " + ", ".join(rep["failed_checks"]))


@cli.command("verify")
@click.argument("bundle", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def cmd_verify(bundle):
    """Re-check a stored bundle; exit 0 only if every check passes."""
    code = read_bundle(bundle, verify=False)
    meta = code.meta
    header = json.loads(bundle.read_text().splitlines()[1])
    checks = {"css_condition": code.css_condition()}
    checks["n_matches_header"] = header.get("n") == code.n
    if checks["css_condition"]:
        checks["k_matches_header"] = header.get("k") == code.k
    counts = meta.get("cell_counts")
    if counts:
        chi = sum((-1) ** i * c for i, c in enumerate(counts))
        checks["chi_matches_counts"] = meta.get("chi") == chi
        i = meta.get("qubit_dim")
        if i is not None:
            checks["shape_matches_counts"] = (code.n == counts[i] and code.hx.rows == counts[i - 1]
                                              and code.hz.rows == counts[i + 1])
    if meta.get("symbol") == "5,3,3,5" and checks["css_condition"]:
        checks["rate_bound"] = code.k >= rate_bound(code.n)
    for name, ok in checks.items():
        click.echo(f"{'PASS' if ok else 'FAIL'} {name}")
    failed = [k for k, v in checks.items() if not v]
    if failed:
        raise VerificationError("failed checks: " + ", ".join(failed))


@cli.command("search")
@click.argument("bundle", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--side", type=click.Choice(["X", "Z"]), default="Z", show_default=True)
@click.option("--iterations", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--target", type=int, help="Stop once a logical of this weight or less is found.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), help="JSON result file.")
def cmd_search(bundle, side, iterations, seed, target, out):
    """Randomised search for low-weight logical operators."""
    code = read_bundle(bundle)
    r = random_logical_search(code, side, iterations, seed, target=target)
    doc = {
        "version": __version__,
        "descriptor": code.meta.get("descriptor", code.meta.get("construction", "")),
        "seed": seed,
        "side": side,
        "iterations": r.iterations,
        "weight": r.weight,
        "support": [] if r.vector is None else np.flatnonzero(r.vector).tolist(),
        "history": r.history,
    }
    if out is not None:
        _dump(out, _json(doc))
    click.echo(f"best {side} logical weight: {r.weight} after {r.iterations} iterations")


@cli.command("simulate")
@click.argument("bundle", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--decoder", type=click.Choice(["bp", "ca"]), default="bp", show_default=True)
@click.option("--p", "p_grid", required=True, help="Qubit error rates: 'a,b,c' or 'start:stop:step'.")
@click.option("--q", type=float, help="Syndrome error rate (default: equal to p).")
@click.option("--T", "T", type=int, default=1, show_default=True, help="Rounds per trial.")
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--side", type=click.Choice(["Z", "X", "both"]), default="Z", show_default=True)
@click.option("--max-rounds", type=int, default=100, show_default=True)
@click.option("--bp-prior", type=float, help="Fixed BP prior instead of the channel p.")
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path), help="CSV output.")
@click.option("--json", "json_out", type=click.Path(dir_okay=False, path_type=Path), help="Also write JSON.")
@click.option("--plot-script", type=click.Path(dir_okay=False, path_type=Path),
              help="Write a matplotlib script that plots the CSV.")
def cmd_simulate(bundle, decoder, p_grid, q, T, trials, seed, side, max_rounds, bp_prior, threads,
                 out, json_out, plot_script):
    """Monte Carlo logical failure rates over a grid of p."""
    code = read_bundle(bundle)
    try:
        cfg = ProtocolConfig(T=T, trials=trials, seed=seed, decoder=decoder, side=side,
                             max_rounds=max_rounds, bp_prior=bp_prior, threads=threads)
        grid = parse_grid(p_grid)
        descriptor = code.meta.get("descriptor", code.meta.get("construction", ""))
        res = sweep(code, grid, cfg, q, code_name=bundle.stem, descriptor=descriptor)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    _dump(out, to_csv(res))
    if json_out is not None:
        _dump(json_out, to_json(res))
    if plot_script is not None:
        _dump(plot_script, PLOT_SCRIPT.format(csv=out.name))
    for pt in res.points:
        click.echo(f"p={pt.p:g} failures={pt.failures}/{pt.trials} rate={pt.rate:.4g} "
                   f"[{pt.ci_lo:.4g}, {pt.ci_hi:.4g}] ({pt.wall_time:.1f} s)")


@cli.command("export")
@click.argument("bundle", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--matrix", type=click.Choice(["H_X", "H_Z"]), default="H_X", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["alist", "pc"]), default="alist", show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False, path_type=Path))
def cmd_export(bundle, matrix, fmt, out):
    """Write one parity-check matrix as alist or plain index lists."""
    code = read_bundle(bundle)
    M = code.hx if matrix == "H_X" else code.hz
    out.parent.mkdir(parents=True, exist_ok=True)
    (write_alist if fmt == "alist" else write_parity_check)(M, out)


@cli.command("info")
def cmd_info():
    """Show the version and the active kernel backend."""
    click.echo(f"hypqec {__version__}, kernels: {kernels.BACKEND}")


PLOT_SCRIPT = '''"""Plot logical failure rate against p from {csv}.

Columns: {columns}.
"""
import csv
import sys

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "{csv}"
rows = list(csv.DictReader(open(path)))
p = [float(r["p"]) for r in rows]
rate = [float(r["rate"]) for r in rows]
err = [[float(r["rate"]) - float(r["ci_lo"]) for r in rows],
       [float(r["ci_hi"]) - float(r["rate"]) for r in rows]]
plt.errorbar(p, rate, yerr=err, marker="o", capsize=3, label=rows[0]["code"] if rows else "")
plt.xlabel("physical error rate p")
plt.ylabel("logical failure rate")
plt.yscale("log")
plt.legend()
plt.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
'''.replace("{columns}", ", ".join(CSV_HEADER))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="hypqec", standalone_mode=False)
    except HypqecError as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:  # bad flags are parse errors
        exc.show()
        return ParseError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
