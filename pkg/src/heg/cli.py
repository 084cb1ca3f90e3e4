"""Command-line interface.

Exit codes: 0 success, 2 input or geometry error, 3 epsilon outside the
theorem range, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .config import TOL
from .counterexample import Certificate, EpsilonOutOfRange, VerificationFailed, \
    find_inadmissible, k_beta, verify_certificate
from .disk import classify_disk, disk_contact
from .geometry import Beta, ContactData, GeometryError, Shape, contact_data
from .germs import Germ, classify_certified, classify_local, grazing_basis, \
    min_grazing_eigenvalue
from .scattering import MassInertia, apply_scatter, build_scatter

EXIT_OK, EXIT_INPUT, EXIT_RANGE, EXIT_VERIFY = 0, 2, 3, 4
CERT_VERSION = 1
DEFAULT_OUT = Path("out")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


# --- certificate serialisation -------------------------------------------

def _num(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite number {x} cannot be serialised")
    return format(x, ".17g")


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    return json.dumps(obj)


def certificate_to_dict(cert: Certificate, seed: int = 0) -> dict:
    c = cert.contact
    return {
        "version": CERT_VERSION,
        "epsilon": cert.epsilon,
        "beta": {"theta": cert.beta.theta, "psi": cert.beta.psi},
        "contact": {"d": c.d, "p": list(c.p), "q": list(c.q), "n": list(c.n), "u": c.u},
        "Ustar": list(cert.Ustar),
        "a1": cert.a1,
        "a2": cert.a2,
        "K": cert.K,
        "delta": cert.delta,
        "overlapSamples": [{"t": t, "area": a} for t, a in cert.overlap_samples],
        "toolVersion": __version__,
        "seed": int(seed),
    }


def certificate_from_dict(data: dict) -> Certificate:
    try:
        if data["version"] != CERT_VERSION:
            raise CliError(f"unsupported certificate version {data['version']!r}")
        beta = Beta(data["beta"]["theta"], data["beta"]["psi"])
        c = data["contact"]
        contact = ContactData(float(c["d"]), np.array(c["p"], float), np.array(c["q"], float),
                              np.array(c["n"], float), float(c["u"]))
        samples = tuple((float(s["t"]), float(s["area"])) for s in data["overlapSamples"])
        return Certificate(float(data["epsilon"]), contact.u, beta.theta, beta, contact,
                           np.array(data["Ustar"], float), float(data["a1"]),
                           float(data["a2"]), float(data["K"]), float(data["delta"]), samples)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"malformed certificate: {exc}") from exc


def certificate_report(cert: Certificate) -> str:
    """Human-readable summary, including the frictionless fixed-point check."""
    shape = Shape.ellipse(cert.epsilon)
    op = build_scatter(cert.contact, MassInertia.of(shape))
    moved = float(np.linalg.norm(apply_scatter(op, cert.Ustar) - cert.Ustar))
    lines = [
        f"epsilon      {cert.epsilon:.17g}",
        f"beta         theta={cert.beta.theta:.17g} psi={cert.beta.psi:.17g}",
        f"contact      d={cert.contact.d:.17g} u={cert.contact.u:.17g}",
        f"U*           {' '.join(format(x, '.17g') for x in cert.Ustar)}",
        f"Psi'(0)      {cert.a1:.6e}",
        f"Psi''(0)     {cert.a2:.17g}  (-2K = {-2 * cert.K:.17g})",
        f"K            {cert.K:.17g}",
        f"delta        {cert.delta:.6e}",
        f"|s U* - U*|  {moved:.3e}  (U* is grazing: every frictionless scattering map fixes it)",
    ]
    lines += [f"overlap      t={t:+.6e} area={a:.6e}" for t, a in cert.overlap_samples]
    lines.append("the bodies interpenetrate on both sides of t=0, so no local-in-time "
                 "physical weak solution starts from this datum")
    return "\n".join(lines)


# --- scans ---------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    epsilon: float | None
    n_theta: int
    n_psi: int
    samples: int
    seed: int
    output: Path
    format: str

    def __post_init__(self):
        if self.n_theta < 1 or self.n_psi < 1 or self.samples < 1:
            raise CliError("grid sizes and sample counts must be at least 1")
        if self.epsilon is not None and not 0.0 < self.epsilon < 1.0:
            raise CliError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0 <= self.seed < 2**64:
            raise CliError("seed must be a 64-bit unsigned integer")
        if self.format not in ("csv", "json"):
            raise CliError(f"unknown format {self.format!r}")

    @property
    def shape(self) -> Shape:
        return Shape.disk() if self.epsilon is None else Shape.ellipse(self.epsilon)


SCAN_COLUMNS = ["theta", "psi", "u", "d", "K", "min_eig", "n_pre", "n_post", "n_grazing",
                "n_inadmissible", "n_undetermined"]
LABEL_ORDER = [Germ.PRE, Germ.POST, Germ.GRAZING, Germ.INADMISSIBLE, Germ.UNDETERMINED]


def _scan_cell(args):
    shape, theta, psi, samples, seed_seq = args
    beta = Beta(theta, psi)
    contact = disk_contact(beta) if shape.is_disk else contact_data(shape, beta)
    rng = np.random.default_rng(seed_seq)
    # off the grazing hyperplane the class is always Pre or Post; sample on it
    N = grazing_basis(contact)
    counts = dict.fromkeys(LABEL_ORDER, 0)
    for _ in range(samples):
        U = N @ rng.uniform(-1.0, 1.0, N.shape[1])
        if shape.is_disk:
            label = classify_disk(beta, U, tol=TOL.class_).label
        else:
            label = classify_local(shape, contact, U).label
        counts[label] += 1
    K = None if shape.is_disk else k_beta(shape.epsilon, contact.u)
    return [beta.theta, beta.psi, contact.u, contact.d, K, min_grazing_eigenvalue(shape, contact)] \
        + [counts[label] for label in LABEL_ORDER]


def run_scan(cfg: RunConfig) -> list[list]:
    cells = [(cfg.shape, 2 * math.pi * i / cfg.n_theta, 2 * math.pi * j / cfg.n_psi)
             for i in range(cfg.n_theta) for j in range(cfg.n_psi)]
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(cells))
    jobs = [(shape, th, ps, cfg.samples, ss) for (shape, th, ps), ss in zip(cells, seeds)]
    threads = int(os.environ.get("HEG_THREADS", "1") or 1)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_scan_cell, jobs, chunksize=8))
    return [_scan_cell(job) for job in jobs]


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return _num(x)


def format_scan(cfg: RunConfig, rows: list[list]) -> str:
    header = {
        "tool": f"heg {__version__}",
        "shape": cfg.shape.label(),
        "grid": f"{cfg.n_theta}x{cfg.n_psi}",
        "samples": cfg.samples,
        "seed": cfg.seed,
        "velocities": "uniform in [-1,1]^5 on the grazing hyperplane",
    }
    if cfg.format == "json":
        body = {"header": header, "columns": SCAN_COLUMNS,
                "rows": [[None if x is None else x for x in row] for row in rows]}
        return dumps(body) + "\n"
    buf = io.StringIO()
    for key, value in header.items():
        buf.write(f"# {key}: {value}\n")
    buf.write("# columns: theta psi (rad), u contact parameter, d closest approach, "
              "K margin (blank for disks), min_eig of the second Taylor form on the grazing "
              "hyperplane, label counts\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SCAN_COLUMNS)
    for row in rows:
        writer.writerow([_cell(x) for x in row])
    return buf.getvalue()


# --- commands ------------------------------------------------------------

def _shape(args) -> Shape:
    if args.disk:
        return Shape.disk()
    if args.eps is None:
        raise CliError("give --eps or --disk")
    try:
        return Shape.ellipse(args.eps)
    except GeometryError as exc:
        raise CliError(str(exc)) from exc


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_geometry(args) -> int:
    shape = _shape(args)
    beta = Beta(args.theta, args.psi)
    contact = contact_data(shape, beta)
    fmt = lambda w: f"({w[0]:.12g}, {w[1]:.12g})"
    print(f"shape {shape.label()}  theta={beta.theta:.12g} psi={beta.psi:.12g}")
    print(f"d={contact.d:.12g}")
    print(f"p={fmt(contact.p)}")
    print(f"q={fmt(contact.q)}")
    print(f"n={fmt(contact.n)}")
    print(f"u={contact.u:.12g}")
    return EXIT_OK


def cmd_classify(args) -> int:
    shape = _shape(args)
    beta = Beta(args.theta, args.psi)
    U = np.array(args.U, dtype=float)
    if shape.is_disk:
        contact = disk_contact(beta)
        result = classify_disk(beta, U)
    else:
        contact = contact_data(shape, beta)
        result = classify_local(shape, contact, U)
    if args.certified:
        cert = classify_certified(shape, beta, U, args.horizon, args.samples, contact=contact)
        print(f"{result}  certified: {cert.label.value} (horizon={cert.horizon:.3g})")
    else:
        print(result)
    return EXIT_OK


def cmd_search(args) -> int:
    try:
        cert = find_inadmissible(args.eps, args.u, args.theta, research=args.research)
    except EpsilonOutOfRange as exc:
        raise CliError(f"epsilon out of theorem range: {exc} (use --research)", EXIT_RANGE)
    except VerificationFailed as exc:
        raise CliError(f"verification failed: {exc}", EXIT_VERIFY)
    out = Path(args.out) if args.out else DEFAULT_OUT / f"certificate-eps{args.eps:g}.json"
    _write(out, dumps(certificate_to_dict(cert, args.seed)) + "\n")
    print(certificate_report(cert))
    print(f"Valid certificate written to {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        data = json.loads(Path(args.certificate).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read certificate: {exc}")
    cert = certificate_from_dict(data)
    verdict = verify_certificate(cert)
    print(verdict)
    return EXIT_OK if verdict else EXIT_VERIFY


def cmd_scan(args) -> int:
    if not args.disk and args.eps is None:
        raise CliError("give --eps or --disk")
    cfg = RunConfig(None if args.disk else args.eps, args.n_theta, args.n_psi, args.samples,
                    args.seed, Path(args.out) if args.out else DEFAULT_OUT / f"scan.{args.format}",
                    args.format)
    text = format_scan(cfg, run_scan(cfg))
    if str(cfg.output) == "-":
        sys.stdout.write(text)
    else:
        _write(cfg.output, text)
        print(f"wrote {cfg.n_theta * cfg.n_psi} rows to {cfg.output}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heg", description="Hard disk / ellipse collision germs.")
    parser.add_argument("--version", action="version", version=f"heg {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def shape_args(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--eps", type=float, help="ellipse parameter, semi-axes (1/eps, 1)")
        g.add_argument("--disk", action="store_true", help="disks of radius 1/2")

    p = sub.add_parser("geometry", help="contact data of a configuration")
    shape_args(p)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--psi", type=float, default=0.0)
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("classify", help="germ class of a constant velocity")
    shape_args(p)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--psi", type=float, default=0.0)
    p.add_argument("--U", type=float, nargs=6, required=True,
                   metavar=("V1", "V2", "VBAR1", "VBAR2", "OMEGA", "OMEGABAR"))
    p.add_argument("--certified", action="store_true", help="confirm with an overlap scan")
    p.add_argument("--horizon", type=float, default=1e-2)
    p.add_argument("--samples", type=int, default=64)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("search", help="build an inadmissible-velocity certificate")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--u", type=float, default=math.pi / 2, help="contact boundary parameter")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--research", action="store_true", help="allow 1/2 <= eps < 1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="re-check a certificate file")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", help="tabulate contact data and K over a (theta, psi) grid")
    shape_args(p)
    p.add_argument("--n-theta", type=int, default=16)
    p.add_argument("--n-psi", type=int, default=16)
    p.add_argument("--samples", type=int, default=32, help="random grazing velocities per cell")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output path, '-' for stdout")
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (GeometryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
