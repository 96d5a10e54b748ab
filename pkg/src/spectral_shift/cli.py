"""Batch command-line interface.

Examples::

    spectral-shift spectrum --input kind=character,n=8,alpha=3 --out run/
    spectral-shift shift --input table.csv --m 16 --out run/
    spectral-shift gamma-prime --input kind=planted_sparse,n=12,k=2,seed=1 --m 16 --epsilon 0.2
    spectral-shift verify-bounds --n 12 --m 16
    spectral-shift recover --input kind=planted_sparse,n=100,k=2,seed=7 --tau 0.5
    spectral-shift corpus --input kind=alternating_sign,n=63 --out corpus/

Exit codes: 0 ok, 2 invalid config, 3 precondition rejected,
4 verification failed, 5 iteration limit reached.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import core_dft
from .concentration import gamma_prime_general, sparse_radius, gamma_prime_size_bound
from .core_dft import FunctionTable, IndexSet, Spectrum, dft, norm2_sq, tail_energy
from .domain_shift import (
    TransportKernel,
    coeff_lower_bound,
    coeff_upper_bound,
    is_exact_image,
    nearest_image,
    tilde,
)
from .errors import ConfigError, IterationLimitError, SpectralShiftError, VerificationError
from .recovery import RecoveryConfig, recover_heavy
from .testfuncs import FunctionSpec, make

log = logging.getLogger("spectral_shift")

COMMANDS = ("spectrum", "shift", "gamma-prime", "verify-bounds", "recover", "corpus")
REQUIRED = {
    "spectrum": ("input",),
    "shift": ("input", "m"),
    "gamma-prime": ("input", "m", "epsilon"),
    "verify-bounds": ("n", "m"),
    "recover": ("input", "tau"),
    "corpus": ("input",),
}


# -- tables on disk ---------------------------------------------------------


def write_table_csv(f: FunctionTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "re", "im"])
    for x, v in enumerate(f.values):
        w.writerow([x, repr(float(v.real)), repr(float(v.imag))])
    return buf.getvalue()


def read_table_csv(text: str) -> FunctionTable:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or set(rows[0]) != {"x", "re", "im"}:
        raise ConfigError("table CSV needs header x,re,im and at least one row")
    try:
        xs = [int(r["x"]) for r in rows]
        values = [complex(float(r["re"]), float(r["im"])) for r in rows]
    except ValueError as exc:
        raise ConfigError(f"bad table CSV row: {exc}") from exc
    if xs != list(range(len(rows))):
        raise ConfigError("table CSV rows must list x = 0, 1, ..., n-1 in order")
    return FunctionTable(np.array(values))


def write_spectrum_csv(s: Spectrum) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "re", "im", "sq_magnitude"])
    for a, c in enumerate(s.coeffs):
        w.writerow([a, repr(float(c.real)), repr(float(c.imag)), repr(float(abs(c) ** 2))])
    return buf.getvalue()


# -- configuration ----------------------------------------------------------


@dataclass
class JobConfig:
    command: str
    input: str | None = None
    n: int | None = None
    m: int | None = None
    epsilon: float | None = None
    tau: float | None = None
    seed: int = 0
    backend: str = "exact"
    out: str | None = None
    max_iters: int | None = None
    scaling: str = "off"
    timing: bool = False
    tolerance: float = field(default_factory=lambda: core_dft.TOLERANCE)

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        missing = [k for k in REQUIRED[self.command] if getattr(self, k) is None]
        if missing:
            raise ConfigError(f"{self.command} needs --{', --'.join(missing)}")
        for name in ("n", "m", "max_iters"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigError(f"--{name.replace('_', '-')} must be >= 1, got {v}")
        for name in ("epsilon", "tau"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"--{name} must be positive, got {v}")
        if self.backend != "exact":
            raise ConfigError(f"unknown backend {self.backend!r}; only 'exact' is available")
        if self.scaling not in ("on", "off"):
            raise ConfigError("--scaling must be 'on' or 'off'")

    def resolved(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k not in ("out", "timing")}


def load_input(source: str):
    """Return ``(table, spec_or_None)`` for a CSV path, spec file or inline spec."""
    path = Path(source)
    if path.is_file():
        text = path.read_text()
        if path.suffix == ".csv":
            return read_table_csv(text), None
        spec = FunctionSpec.from_text(text)
        return make(spec), spec
    if "=" in source:
        spec = FunctionSpec.from_text(source)
        return make(spec), spec
    raise ConfigError(f"--input {source!r} is neither a file nor a key=value spec")


# -- commands ---------------------------------------------------------------


def _cplx(z):
    return [float(z.real), float(z.imag)]


def cmd_spectrum(cfg, f, spec, files):
    s = dft(f)
    files["spectrum.csv"] = write_spectrum_csv(s)
    top = np.argsort(-s.sq_magnitudes, kind="stable")[: min(10, f.modulus)]
    return {
        "n": f.modulus,
        "norm2_sq": norm2_sq(f),
        "parseval_gap": abs(norm2_sq(f) - float(s.sq_magnitudes.sum())),
        "largest": [{"alpha": int(a), "value": _cplx(s[a]), "sq_magnitude": float(s.sq_magnitudes[a])} for a in top],
    }


def cmd_shift(cfg, f, spec, files):
    g = tilde(f, cfg.m)
    s = dft(g)
    files["table.csv"] = write_table_csv(g)
    files["spectrum.csv"] = write_spectrum_csv(s)
    return {
        "n": f.modulus,
        "m": cfg.m,
        "norm2_sq_source": norm2_sq(f),
        "norm2_sq_shifted": norm2_sq(g),
        "norm_ratio_bound": f.modulus / cfg.m,
    }


def cmd_gamma_prime(cfg, f, spec, files):
    n, m, eps_prime = f.modulus, cfg.m, cfg.epsilon
    s = dft(f)
    if cfg.tau is not None:
        support = np.flatnonzero(s.sq_magnitudes > cfg.tau)
    else:
        support = np.flatnonzero(np.abs(s.coeffs) > cfg.tolerance)
    gamma = IndexSet(n, tuple(support.tolist()))
    normsq = norm2_sq(f)
    source_tail = tail_energy(s, gamma)
    gamma_prime, bound = gamma_prime_general(gamma, n, m, eps_prime, normsq, source_tail)
    measured = tail_energy(dft(tilde(f, m)), gamma_prime)
    r = sparse_radius(len(gamma), normsq, eps_prime)
    report = {
        "n": n,
        "m": m,
        "eps_prime": eps_prime,
        "gamma": list(gamma),
        "gamma_prime": list(gamma_prime),
        "gamma_prime_size": len(gamma_prime),
        "size_bound": gamma_prime_size_bound(len(gamma), r),
        "r": float(r),
        "source_tail": source_tail,
        "bound": bound,
        "measured_tail": measured,
    }
    if measured > bound + cfg.tolerance * max(1.0, bound):
        raise VerificationError(f"transported tail {measured} exceeds bound {bound}", report)
    return report


def verify_bounds(n: int, m: int, tol: float) -> dict:
    """Worst violation of the 1-sparse upper and lower coefficient bounds on (n, m)."""
    W = np.abs(TransportKernel(n, m).matrix())
    ell = min(n, m)
    worst_upper = 0.0
    worst_lower = 0.0
    exact_gap = 0.0
    for a in range(n):
        for b in range(m):
            if is_exact_image(a, n, b, m):
                exact_gap = max(exact_gap, abs(W[a, b] - ell / m))
            else:
                worst_upper = max(worst_upper, W[a, b] - coeff_upper_bound(a, n, b, m))
        worst_lower = max(worst_lower, coeff_lower_bound(a, n, m) - W[a, nearest_image(a, n, m)])
    return {
        "n": n,
        "m": m,
        "max_upper_violation": float(max(0.0, worst_upper)),
        "max_lower_violation": float(max(0.0, worst_lower)),
        "max_exact_image_gap": float(exact_gap),
        "pairs_checked": n * m,
        "ok": bool(worst_upper <= tol and worst_lower <= tol and exact_gap <= tol),
    }


def cmd_verify_bounds(cfg, f, spec, files):
    report = verify_bounds(cfg.n, cfg.m, cfg.tolerance)
    if not report["ok"]:
        raise VerificationError("coefficient bounds violated", report)
    return report


def cmd_recover(cfg, f, spec, files):
    rc = RecoveryConfig(
        residual=True,
        scaling=cfg.scaling == "on",
        max_iters=cfg.max_iters,
        seed=cfg.seed,
    )
    result = recover_heavy(f, cfg.tau, rc)
    p = result.params
    report = {
        "n": p.n,
        "m": p.m,
        "tau": p.tau,
        "normsq": p.normsq,
        "eps_prime": p.eps_prime,
        "tau_prime": p.tau_prime,
        "radius": p.radius,
        "gamma_prime_bound": p.gamma_bound,
        "iterations": result.iterations,
        "converged": result.converged,
        "scaling_unit": result.scaling_unit,
        "found": [
            {
                "alpha": hc.frequency,
                "value": _cplx(hc.estimated_value),
                "sq_magnitude": hc.estimated_sq_magnitude,
                "beta": hc.provenance[0],
                "iteration": hc.provenance[1],
            }
            for hc in result.coeffs
        ],
    }
    if not result.converged:
        raise IterationLimitError(f"no convergence within {result.iterations} iterations", report)
    return report


def cmd_corpus(cfg, f, spec, files):
    files["table.csv"] = write_table_csv(f)
    files["spectrum.csv"] = write_spectrum_csv(dft(f))
    if spec is not None:
        files["function.spec"] = spec.to_text()
    return {"n": f.modulus, "norm2_sq": norm2_sq(f)}


HANDLERS = {
    "spectrum": cmd_spectrum,
    "shift": cmd_shift,
    "gamma-prime": cmd_gamma_prime,
    "verify-bounds": cmd_verify_bounds,
    "recover": cmd_recover,
    "corpus": cmd_corpus,
}


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _dump(report) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"


def run(cfg: JobConfig, stdout=None) -> int:
    """Execute one job, write its report files, and return the exit status."""
    stdout = stdout or sys.stdout
    files: dict[str, str] = {}
    report = {"command": cfg.command, "config": None}
    started = time.perf_counter()
    status = 0
    try:
        cfg.validate()
        report["config"] = cfg.resolved()
        f, spec = (None, None)
        if cfg.input is not None:
            f, spec = load_input(cfg.input)
            report["input_spec"] = spec.to_text() if spec else None
        report["result"] = HANDLERS[cfg.command](cfg, f, spec, files)
        report["status"] = "ok"
    except SpectralShiftError as exc:
        status = exc.exit_code
        report["status"] = type(exc).__name__
        report["error"] = str(exc.args[0]) if exc.args else str(exc)
        if len(exc.args) > 1 and isinstance(exc.args[1], dict):
            report["result"] = exc.args[1]
        elif getattr(exc, "partial", None):
            report["result"] = exc.partial
        log.error("%s: %s", report["status"], report["error"])
    if cfg.timing:
        report["elapsed_s"] = time.perf_counter() - started
    files["report.json"] = _dump(report)
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out / name).write_text(text)
    else:
        stdout.write(files["report.json"])
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spectral-shift", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", help="table CSV, spec file, or inline key=value spec")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", default="exact")
    p.add_argument("--out", help="output directory (report.json is printed when omitted)")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--scaling", default="off")
    p.add_argument("--timing", action="store_true", help="add wall-clock time to the report")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    kwargs = {k: v for k, v in vars(args).items() if k != "verbose"}
    return run(JobConfig(**kwargs))


if __name__ == "__main__":
    sys.exit(main())
