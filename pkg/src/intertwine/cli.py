"""``spectral`` command-line driver.

Exit codes: 0 all checks pass, 1 a verification row failed, 2 bad input,
3 numerical failure.  Reports are JSON, function samples CSV.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .discrete import sym_eigendecomposition, transition_operator
from .dots import dot_intertwiner, dot_spectrum, dot_verify, load_dot_model, write_bound_states_csv
from .errors import InputError, IntertwineError, NumericalError
from .gamma import gamma_apply, write_samples_csv
from .graph import builtin_graph, load_graph
from .intertwiner import (
    default_interval,
    phi_eigen_sum,
    sigma_excluded,
    stieltjes_report,
    verify_interval,
    weyl_report,
)
from .oracle import convergence_table, krein_check, oracle_compare
from .report import VerificationReport
from .weyl import band_inverse

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

ORACLE_EIG_TOL = 1e-4
ORACLE_ANGLE_TOL = 1e-3
KREIN_TOL = 1e-4
CONVERGENCE_BAND = (3.0, 5.0)
FAULTS = ("asymmetric",)


@dataclass
class RunConfig:
    command: str
    graph: str | None = None
    builtin: str | None = None
    dots: str | None = None
    bands: list[int] = field(default_factory=list)
    interval: tuple[float, float] | None = None
    nodes: int = 200
    samples: int = 101
    out: str | None = None
    csv: str | None = None
    z: list[float] = field(default_factory=lambda: [-1.0, -9.0, -25.0])
    seed: int = 0
    fault: str | None = None

    def validate(self):
        if self.command == "dots":
            if not self.dots:
                raise InputError("dots needs --dots FILE")
        elif (self.graph is None) == (self.builtin is None):
            raise InputError("give exactly one of --graph FILE or --builtin FAMILY:N")
        if self.nodes < 8:
            raise InputError(f"--nodes must be at least 8, got {self.nodes}")
        if self.samples < 2:
            raise InputError(f"--samples must be at least 2, got {self.samples}")
        if any(k < 0 for k in self.bands):
            raise InputError("--band must be non-negative")
        if self.interval is not None and not all(math.isfinite(x) for x in self.interval):
            raise InputError("--interval must be finite")
        if self.fault is not None and self.fault not in FAULTS:
            raise InputError(f"unknown fault {self.fault!r}")
        return self


def _interval(text):
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected A,B") from None
    return a, b


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated numbers") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectral", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "verify", "oracle", "dots", "stieltjes"):
        p = sub.add_parser(name)
        src = p.add_mutually_exclusive_group()
        src.add_argument("--graph", metavar="FILE")
        src.add_argument("--builtin", metavar="FAMILY:N", help="cycle, star, path or complete")
        src.add_argument("--dots", metavar="FILE", help="coupling matrix JSON {\"T\": [[...]]}")
        p.add_argument("--band", type=int, action="append", dest="bands", metavar="K")
        p.add_argument("--interval", type=_interval, metavar="A,B")
        p.add_argument("--nodes", type=int, default=200, metavar="N")
        p.add_argument("--samples", type=int, default=101, metavar="N")
        p.add_argument("--out", metavar="FILE")
        p.add_argument("--csv", metavar="FILE", help="write function samples")
        p.add_argument("--z", type=_floats, default=[-1.0, -9.0, -25.0], metavar="Z1,Z2,..")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--inject-fault", dest="fault", help=argparse.SUPPRESS)
    return parser


def _load_graph(cfg: RunConfig):
    if cfg.builtin is not None:
        family, _, n = cfg.builtin.partition(":")
        try:
            return builtin_graph(family, int(n))
        except ValueError as exc:
            raise InputError(f"bad --builtin {cfg.builtin!r}: {exc}") from None
    try:
        text = Path(cfg.graph).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {cfg.graph}: {exc.strerror}") from None
    return load_graph(text, name=Path(cfg.graph).stem)


def _setup(cfg):
    g = _load_graph(cfg)
    p = transition_operator(g)
    return g, p, sym_eigendecomposition(p, g)


def _band_interval(cfg):
    k = cfg.bands[0] if cfg.bands else 0
    return k, cfg.interval if cfg.interval is not None else default_interval(k)


def cmd_spectrum(cfg: RunConfig):
    g, _, e = _setup(cfg)
    bands = []
    for k in cfg.bands or [0, 1]:
        excluded = sigma_excluded(e, k)
        bad = {mu for mu, _ in excluded}
        eigs = [
            {"lambda": band_inverse(k, mu), "mu": mu, "mult": len(idx)}
            for mu, idx in e.clusters()
            if mu not in bad
        ]
        eigs.sort(key=lambda r: r["lambda"])
        bands.append({
            "k": k,
            "eigenvalues": eigs,
            "sigma_excluded": [{"mu": mu, "mult": m} for mu, m in excluded],
        })
    out = {
        "graph": g.name,
        "P_spectrum": [mu for mu, idx in e.clusters() for _ in idx],
        "bands": bands,
    }
    return out, EXIT_OK


def _parameter(cfg, p):
    if cfg.fault == "asymmetric":
        t = p.copy()
        t[0, -1] += 1e-3
        return t
    return None


def cmd_verify(cfg: RunConfig):
    g, p, e = _setup(cfg)
    k, interval = _band_interval(cfg)
    rng = np.random.default_rng(cfg.seed)
    rep = verify_interval(g, e, k, interval, rng=rng, parameter=_parameter(cfg, p))
    rep.extend(weyl_report(g, p, rng))
    rows, ratios, srep = stieltjes_report(g, e, k, interval)
    rep.extend(srep)
    phi = phi_eigen_sum(g, e, k, interval)
    if cfg.csv:
        waves = [
            (f"lambda={atom.lam!r}/{j}", f)
            for atom in phi.atoms
            for j, f in enumerate(phi.images(atom))
        ]
        Path(cfg.csv).write_text(write_samples_csv(waves, cfg.samples))
    out = {
        "graph": g.name,
        "band": k,
        "interval": list(phi.interval),
        "rank": phi.rank,
        "atoms": [{"lambda": a.lam, "mult": a.mult, "coef": a.coef} for a in phi.atoms],
        "stieltjes": _stieltjes_rows(rows, ratios),
        **rep.to_dict(),
    }
    return out, EXIT_OK if rep.passed else EXIT_FAIL


def _stieltjes_rows(rows, ratios):
    return {
        "rows": [{"h": h, "defect": d, "anchored_defect": a} for h, d, a in rows],
        "ratios": ratios,
    }


def _krein_rhs(g):
    xi = np.cos(np.arange(1, g.n_vertices + 1, dtype=float))
    return gamma_apply(g, complex(-4.0, 1.0), xi)


def cmd_oracle(cfg: RunConfig):
    g, _, e = _setup(cfg)
    k, interval = _band_interval(cfg)
    rep = VerificationReport()
    cmp = oracle_compare(g, e, k, interval, cfg.nodes)
    scale = (200.0 / cfg.nodes) ** 2
    rep.add("oracle_eigenvalues", "spec L minus Sigma = {z : cos sqrt z in spec P}",
            cmp["max_rel_err"], ORACLE_EIG_TOL * scale)
    rep.add("oracle_eigenspaces", "ran Phi({lambda}) = ker(H - lambda)",
            cmp["max_sin_angle"], ORACLE_ANGLE_TOL * scale)
    rhs = _krein_rhs(g)
    krein = [krein_check(g, e, z, rhs, cfg.nodes) for z in cfg.z]
    rep.add("krein_resolvent", "(H - z)^-1 - (H0 - z)^-1 = -gamma(z) M(z)^-1 gamma(conj z)*",
            max((r["rel_err"] for r in krein), default=0.0), KREIN_TOL * scale)
    conv = convergence_table(g, e, k, interval)
    lo, hi = CONVERGENCE_BAND
    if any(x > 0 for x in conv["max_abs_err"]):
        dev = max(abs(r - 0.5 * (lo + hi)) for r in conv["ratios"])
    else:
        dev = 0.0
    rep.add("oracle_convergence", "O(h^2) eigenvalue error under mesh halving", dev, 0.5 * (hi - lo))
    out = {
        "graph": g.name,
        "band": k,
        "interval": list(interval),
        "eigenvalues": cmp["eigenvalues"],
        "angles": cmp["angles"],
        "krein": krein,
        "convergence": conv,
        **rep.to_dict(),
    }
    return out, EXIT_OK if rep.passed else EXIT_FAIL


def cmd_stieltjes(cfg: RunConfig):
    g, _, e = _setup(cfg)
    k, interval = _band_interval(cfg)
    rows, ratios, rep = stieltjes_report(g, e, k, interval)
    out = {"graph": g.name, "band": k, "interval": list(interval),
           **_stieltjes_rows(rows, ratios), **rep.to_dict()}
    return out, EXIT_OK if rep.passed else EXIT_FAIL


def cmd_dots(cfg: RunConfig):
    try:
        text = Path(cfg.dots).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {cfg.dots}: {exc.strerror}") from None
    model = load_dot_model(text)
    rep = dot_verify(model)
    phi = dot_intertwiner(model)
    if cfg.csv:
        Path(cfg.csv).write_text(write_bound_states_csv(phi))
    out = {
        "sites": model.sites,
        "bound_states": [
            {"lambda": lam, "kappa": math.sqrt(-lam), "mult": mult}
            for lam, mult in dot_spectrum(model)
        ],
        "essential_spectrum": [0.0, None],
        **rep.to_dict(),
    }
    return out, EXIT_OK if rep.passed else EXIT_FAIL


COMMANDS = {
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "stieltjes": cmd_stieltjes,
    "dots": cmd_dots,
}


def _emit(payload, cfg):
    text = json.dumps(payload, indent=2, allow_nan=True) + "\n"
    if cfg is not None and cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = None
    try:
        cfg = RunConfig(
            command=args.command,
            graph=args.graph,
            builtin=args.builtin,
            dots=args.dots,
            bands=args.bands or [],
            interval=args.interval,
            nodes=args.nodes,
            samples=args.samples,
            out=args.out,
            csv=args.csv,
            z=args.z,
            seed=args.seed,
            fault=args.fault,
        ).validate()
        payload, code = COMMANDS[cfg.command](cfg)
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        # LinAlgError derives from ValueError, so it must be caught first
        print(f"spectral: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ValueError) as exc:
        print(f"spectral: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except IntertwineError as exc:  # pragma: no cover - every subclass is handled above
        print(f"spectral: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(payload, cfg)
    if code == EXIT_FAIL:
        failing = ", ".join(payload_failing(payload))
        print(f"spectral: verification failed: {failing}", file=sys.stderr)
    return code


def payload_failing(payload) -> list[str]:
    return [c["name"] for c in payload.get("checks", []) if not c["pass"]]


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
