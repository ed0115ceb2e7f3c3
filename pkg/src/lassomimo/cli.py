"""Command-line front end: run BER campaigns and write CSV results.

Flag values override config-file values, which override the built-in
defaults (lam=10, mu=1e6, rho=10, tau=0.6, eps=1e-4,
max_iter=5000). The config file is a flat
``key = value`` text file whose keys are the long flag names; ``#``
starts a comment.

The output CSV carries a commented metadata block (full configuration,
seed, and the SNR convention) followed by one row per (snr, detector)
point, so any result file documents how to reproduce itself.
"""

import argparse
import sys
import time
from dataclasses import asdict, dataclass, fields

from .constellation import MODULATION_NAMES
from .detectors import DETECTORS
from .simulate import Campaign, run_campaign

CSV_COLUMNS = (
    "snr_db,detector,nt,nr,mod,bits,bit_errors,ber,ci95,avg_iters,avg_ms,nonconverged"
)

SNR_CONVENTION = "snr_db = 10*log10(Nt*Es/sigma2), Es = 2*mean(alphabet^2)"



@dataclass
class CliConfig:
    """Flat mirror of the command-line flags."""

    nt: int = 16
    nr: int = 16
    mod: str = "qpsk"
    snr: str = "0:2:16"
    detectors: str = "lasso,2lasso,mmse"
    lam: float = 10.0
    mu: float = 1e6
    rho: float = 10.0
    tau: float = 0.6
    eps: float = 1e-4
    max_iter: int = 5000
    min_bits: int = 20000
    max_trials: int = 10000
    seed: int = 1
    workers: int = None
    out: str = "ber_results.csv"
    config: str = None


def parse_snr_grid(spec):
    """Expand 'start:step:stop' (inclusive stop) or a comma list of dB values."""
    spec = str(spec)
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"--snr expects start:step:stop, got {spec!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("--snr step must be positive")
        n = int(round((stop - start) / step))
        grid = tuple(start + step * i for i in range(n + 1) if start + step * i <= stop + 1e-9)
        if not grid:
            raise ValueError(f"--snr grid {spec!r} is empty")
        return grid
    return tuple(float(p) for p in spec.split(",") if p.strip())


def _build_parser():
    p = argparse.ArgumentParser(
        prog="lassomimo",
        description="Monte Carlo BER simulation of sparse-coding MIMO detectors",
    )
    p.add_argument("--nt", type=int, help="transmit antennas")
    p.add_argument("--nr", type=int, help="receive antennas")
    p.add_argument("--mod", choices=sorted(MODULATION_NAMES), help="modulation")
    p.add_argument("--snr", help="SNR grid in dB, start:step:stop or comma list")
    p.add_argument("--detectors", help=f"comma list from {sorted(DETECTORS)}")
    p.add_argument("--lambda", dest="lam", type=float,
                   help="sparsity penalty of the relaxed detection objective")
    p.add_argument("--mu", type=float, help="block-sum constraint weight")
    p.add_argument("--rho", type=float, help="ADMM quadratic coupling")
    p.add_argument("--tau", type=float, help="stage-one reliability radius")
    p.add_argument("--eps", type=float, help="ADMM stopping tolerance")
    p.add_argument("--max-iter", dest="max_iter", type=int, help="ADMM iteration cap")
    p.add_argument("--min-bits", dest="min_bits", type=int, help="bits per SNR point")
    p.add_argument("--max-trials", dest="max_trials", type=int, help="trial cap per point")
    p.add_argument("--seed", type=int, help="campaign RNG seed")
    p.add_argument("--workers", type=int,
                   help="parallel worker processes (default $LASSOMIMO_WORKERS or 1)")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--config", help="flat key = value config file")
    return p


def load_config_file(path):
    """Parse a flat key = value file into a dict of raw strings."""
    values = {}
    valid = {f.name for f in fields(CliConfig)}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in valid:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = value
    return values


def _coerce(name, raw):
    if not isinstance(raw, str):
        return raw
    ftype = {f.name: f.type for f in fields(CliConfig)}[name]
    if isinstance(ftype, str):  # annotations stored as strings
        ftype = {"int": int, "float": float}.get(ftype, str)
    try:
        return ftype(raw)
    except ValueError as exc:
        raise ValueError(f"config value {name} = {raw!r}: {exc}") from None


def parse_args(argv):
    """Resolve flags, config file and defaults into a CliConfig."""
    ns = _build_parser().parse_args(argv)
    cfg = CliConfig()
    if ns.config:
        cfg.config = ns.config
        for key, raw in load_config_file(ns.config).items():
            setattr(cfg, key, _coerce(key, raw))
    for key, value in vars(ns).items():
        if key != "config" and value is not None:
            setattr(cfg, key, value)
    if cfg.tau >= 1.0:
        print(
            f"warning: tau={cfg.tau:g} >= half the symbol spacing; "
            "no symbol can be deferred and stage two is degenerate",
            file=sys.stderr,
        )
    return cfg


def campaign_from_config(cfg):
    detectors = tuple(d.strip() for d in cfg.detectors.split(",") if d.strip())
    unknown = [d for d in detectors if d not in DETECTORS]
    if unknown:
        raise ValueError(f"unknown detectors: {unknown}; expected {sorted(DETECTORS)}")
    return Campaign(
        n_tx=cfg.nt,
        n_rx=cfg.nr,
        modulation=MODULATION_NAMES[cfg.mod],
        detectors=detectors,
        snr_db=parse_snr_grid(cfg.snr),
        min_bits=cfg.min_bits,
        max_trials=cfg.max_trials,
        seed=cfg.seed,
        params={
            "lam": cfg.lam, "mu": cfg.mu, "rho": cfg.rho, "tau": cfg.tau,
            "eps": cfg.eps, "max_iter": cfg.max_iter,
        },
    )


def emit_results(points, path, cfg, timestamp=None):
    """Write points as CSV with a self-describing commented metadata block.

    Floats are written with repr so parsing the file recovers them
    exactly.
    """
    lines = ["# lassomimo BER results"]
    lines.append(f"# generated: {timestamp or time.strftime('%Y-%m-%dT%H:%M:%S')}")
    lines.append(f"# snr convention: {SNR_CONVENTION}")
    for key, value in asdict(cfg).items():
        if key == "config" or value is None:
            continue
        lines.append(f"# cfg {key} = {value}")
    lines.append(CSV_COLUMNS)
    for pt in points:
        row = [
            repr(pt.snr_db), pt.detector, str(cfg.nt), str(cfg.nr), cfg.mod,
            str(pt.bits_sent), str(pt.bit_errors), repr(pt.ber), repr(pt.ci95),
            repr(pt.avg_admm_iters), repr(pt.avg_solve_ms), str(pt.nonconverged_count),
        ]
        lines.append(",".join(row))
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def read_results(path):
    """Parse an emitted CSV back into (metadata dict, list of row dicts)."""
    meta = {}
    rows = []
    header = None
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if line.startswith("# cfg "):
                key, value = line[len("# cfg "):].split(" = ", 1)
                meta[key] = value
            elif line.startswith("#") or not line:
                continue
            elif header is None:
                header = line.split(",")
            else:
                rows.append(dict(zip(header, line.split(","))))
    return meta, rows


def main(argv=None):
    try:
        cfg = parse_args(argv if argv is not None else sys.argv[1:])
        campaign = campaign_from_config(cfg)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    finished = []

    def progress(point):
        finished.append(point)
        print(
            f"snr={point.snr_db:6.2f} dB  {point.detector:<6s} "
            f"ber={point.ber:.6g} (+-{point.ci95:.2g})  "
            f"bits={point.bits_sent}  errs={point.bit_errors}"
        )

    try:
        run_campaign(campaign, workers=cfg.workers, on_point=progress)
    except KeyboardInterrupt:
        print("interrupted; flushing partial results", file=sys.stderr)
        emit_results(finished, cfg.out, cfg)
        return 130
    emit_results(finished, cfg.out, cfg)
    expected = len(campaign.snr_db) * len(campaign.detectors)
    print(f"wrote {len(finished)} points to {cfg.out}")
    return 0 if len(finished) == expected else 1


def console_main():
    raise SystemExit(main())
