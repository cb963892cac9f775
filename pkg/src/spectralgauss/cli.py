"""Command-line front end for sampling, eigen-decompositions and checks.

Every stochastic subcommand requires a seed, either through --seed or
the SPECTRALGAUSS_SEED environment variable (the variable wins), and
its outputs are a pure function of the written config.  Subcommands
that produce delimited output also render a matplotlib figure next to
it unless --no-plot is given.

Exit codes: 0 success, 2 configuration error, 3 gate failure,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import chain as ch
from . import martingales as mg
from . import processes as pr
from . import series as se
from . import verify as vf
from .martingales import SamplePath
from .specfun import bessel_zeros

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GATE = 3
EXIT_NUMERIC = 4


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one CLI run bit for bit."""

    subcommand: str
    params: dict
    r: float | None = None
    terms: int | None = None
    grid_size: int | None = None
    paths: int | None = None
    seed: int | None = None
    out: str = "."
    fmt: str = "csv"
    jobs: int = 1

    def manifest(self, files: list[str]) -> str:
        doc = asdict(self)
        # the manifest sits inside the output directory; recording that
        # directory would make otherwise identical runs differ byte-wise
        del doc["out"]
        doc["files"] = files
        return json.dumps(doc, indent=2, sort_keys=True)


def _positive_int(name: str, value: int, minimum: int = 1) -> int:
    value = int(value)
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return value


def _positive_float(name: str, value: float) -> float:
    value = float(value)
    if not value > 0.0 or not np.isfinite(value):
        raise ConfigError(f"{name} must be a positive finite number, got {value}")
    return value


def _resolve_seed(args, required: bool) -> int | None:
    env = os.environ.get("SPECTRALGAUSS_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"SPECTRALGAUSS_SEED must be an integer, got {env!r}") from None
    if getattr(args, "seed", None) is not None:
        return int(args.seed)
    if required:
        raise ConfigError("a seed is required: pass --seed or set SPECTRALGAUSS_SEED")
    return None


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _parse_floats(text: str, name: str) -> tuple:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"{name} must be comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ConfigError(f"{name} must not be empty")
    return vals


def _save_figure(fig, path: Path) -> None:
    # fixed metadata keeps PNG bytes reproducible across identical runs
    fig.savefig(path, dpi=110, metadata={"Software": "spectralgauss"})
    import matplotlib.pyplot as plt

    plt.close(fig)


def _new_figure(*args, **kwargs):
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt.subplots(*args, **kwargs)


# ---------------------------------------------------------------------------
# sample


def _sampling_object(args):
    """(expansion/basis, grid) for the sample subcommand."""
    r = _positive_float("--r", args.r)
    terms = _positive_int("--terms", args.terms)
    n_grid = _positive_int("--grid-size", args.grid_size, minimum=2)
    proc = args.process
    if proc == "fbm":
        if args.hurst is None:
            raise ConfigError("--process fbm requires --hurst")
        exp = se.pw_fbm(float(args.hurst), r, terms, basis=args.basis or "increment")
        grid = np.linspace(-r, r, n_grid)
        params = {"process": "fbm", "hurst": float(args.hurst), "basis": exp.basis}
    elif proc == "ou":
        spec = pr.OU(theta=_positive_float("--theta", args.theta),
                     sigma2=_positive_float("--sigma2", args.sigma2))
        exp = se.pw_stationary(spec, r, terms)
        grid = np.linspace(0.0, 2.0 * r, n_grid)
        params = {"process": "ou", "theta": spec.theta, "sigma2": spec.sigma2}
    elif proc == "ar":
        if args.phi is None:
            raise ConfigError("--process ar requires --phi")
        spec = pr.AR(phi=_parse_floats(args.phi, "--phi"),
                     sigma2=_positive_float("--sigma2", args.sigma2))
        exp = se.pw_stationary(spec, r, terms)
        grid = np.linspace(0.0, 2.0 * r, n_grid)
        params = {"process": "ar", "phi": list(spec.phi), "sigma2": spec.sigma2}
    elif proc == "bm":
        exp = se.kl_basis(se.BM(), r, terms)
        grid = np.linspace(0.0, r, n_grid)
        params = {"process": "bm"}
    else:
        raise ConfigError(f"unknown process {proc!r}")
    return exp, grid, params


def cmd_sample(args) -> int:
    seed = _resolve_seed(args, required=True)
    exp, grid, params = _sampling_object(args)
    paths = _positive_int("--paths", args.paths)
    jobs = _positive_int("--jobs", args.jobs)
    out = _outdir(args)
    children = np.random.SeedSequence(seed).spawn(paths)

    def one(i: int) -> SamplePath:
        rng = np.random.default_rng(children[i])
        draw = se.sample_coefficients(exp, rng)
        return se.evaluate_path(exp, draw, grid)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            sampled = list(pool.map(one, range(paths)))
    else:
        sampled = [one(i) for i in range(paths)]

    files = []
    for i, path in enumerate(sampled):
        name = f"path_{i:03d}.csv"
        (out / name).write_text(path.to_csv())
        files.append(name)
    if not args.no_plot:
        fig, ax = _new_figure(figsize=(7.0, 4.0))
        for path in sampled:
            ax.plot(path.grid, path.values, lw=0.9)
        ax.set_xlabel("t")
        ax.set_ylabel("X(t)")
        ax.set_title(f"{params['process']} sample paths ({paths})")
        _save_figure(fig, out / "sample.png")
        files.append("sample.png")
    cfg = RunConfig("sample", params, r=float(args.r), terms=int(args.terms),
                    grid_size=int(args.grid_size), paths=paths, seed=seed,
                    out=str(args.out), jobs=jobs)
    (out / "manifest.json").write_text(cfg.manifest(files))
    print(f"wrote {len(files)} file(s) and manifest.json to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# kl


_KL_TAGS = ("bm", "bm-bridge", "ou", "ar", "even-mart", "odd-mart",
            "even-bridge", "odd-bridge", "ext-even", "ext-odd")


def _kl_spec(args):
    tag = args.kernel
    if tag == "bm":
        return se.BM()
    if tag == "bm-bridge":
        return se.BMBridge()
    if tag == "ou":
        return pr.OU(theta=_positive_float("--theta", args.theta),
                     sigma2=_positive_float("--sigma2", args.sigma2))
    if tag == "ar":
        if args.phi is None:
            raise ConfigError("--kernel ar requires --phi")
        return pr.AR(phi=_parse_floats(args.phi, "--phi"),
                     sigma2=_positive_float("--sigma2", args.sigma2))
    if tag in ("even-mart", "odd-mart", "even-bridge", "odd-bridge", "ext-even", "ext-odd"):
        if args.hurst is None:
            raise ConfigError(f"--kernel {tag} requires --hurst")
        H = float(args.hurst)
        return {
            "even-mart": se.FBMEvenMartingale,
            "odd-mart": se.FBMOddMartingale,
            "even-bridge": se.FBMEvenBridge,
            "odd-bridge": se.FBMOddBridge,
            "ext-even": se.ExtendedEvenBridge,
            "ext-odd": se.ExtendedOddBridge,
        }[tag](H)
    raise ConfigError(f"unknown kernel {tag!r}")


def cmd_kl(args) -> int:
    r = _positive_float("--r", args.r)
    count = _positive_int("--count", args.count)
    n = _positive_int("--nystrom-n", args.nystrom_n, minimum=16)
    spec = _kl_spec(args)
    gate = args.gate
    if gate is None:
        gate = 1e-3 if args.kernel.startswith("ext") else 1e-4
    gate = _positive_float("--gate", gate)
    out = _outdir(args)

    basis = se.kl_basis(spec, r, count)
    rep = vf.nystrom_eig(se.kl_kernel(spec, r), r, n, count, kernel_tag=args.kernel)
    rel = np.abs(rep.eigenvalues - basis.eigenvalues) / basis.eigenvalues
    (out / "eigentable.csv").write_text(rep.table_csv(closed_form=basis.eigenvalues))
    (out / "basis.json").write_text(se.to_json(basis))
    files = ["eigentable.csv", "basis.json"]
    if not args.no_plot:
        fig, (ax1, ax2) = _new_figure(1, 2, figsize=(10.0, 4.0))
        idx = np.arange(1, count + 1)
        ax1.loglog(idx, basis.eigenvalues, "o-", label="closed form", ms=4)
        ax1.loglog(idx, rep.eigenvalues, "x", label=f"Nystrom n={n}")
        ax1.set_xlabel("n")
        ax1.set_ylabel("eigenvalue")
        ax1.legend()
        tt = np.linspace(0.0, r, 400)
        phi = se.kl_eigenfunctions(basis, tt)
        for k in range(min(3, count)):
            ax2.plot(tt, phi[k], lw=1.0, label=f"n={k + 1}")
        ax2.set_xlabel("t")
        ax2.set_ylabel("eigenfunction")
        ax2.legend()
        fig.suptitle(f"{args.kernel} Karhunen-Loeve check")
        _save_figure(fig, out / "kl.png")
        files.append("kl.png")
    cfg = RunConfig("kl", {"kernel": args.kernel, "nystrom_n": n, "gate": gate},
                    r=r, terms=count, out=str(args.out))
    (out / "manifest.json").write_text(cfg.manifest(files))
    worst = float(rel.max())
    print(f"max relative eigenvalue error: {worst:.3e} (gate {gate:g})")
    if worst > gate:
        print("gate FAILED", file=sys.stderr)
        return EXIT_GATE
    return EXIT_OK


# ---------------------------------------------------------------------------
# pw / zeros


def cmd_pw(args) -> int:
    r = _positive_float("--r", args.r)
    terms = _positive_int("--terms", args.terms)
    proc = args.process
    if proc == "fbm":
        if args.hurst is None:
            raise ConfigError("--process fbm requires --hurst")
        exp = se.pw_fbm(float(args.hurst), r, terms, basis=args.basis or "increment")
    elif proc in ("ou", "ar"):
        if proc == "ou":
            spec = pr.OU(theta=_positive_float("--theta", args.theta),
                         sigma2=_positive_float("--sigma2", args.sigma2))
        else:
            if args.phi is None:
                raise ConfigError("--process ar requires --phi")
            spec = pr.AR(phi=_parse_floats(args.phi, "--phi"),
                         sigma2=_positive_float("--sigma2", args.sigma2))
        exp = se.pw_stationary(spec, r, terms)
    else:
        raise ConfigError(f"unknown process {proc!r}")
    out = _outdir(args)
    (out / "pw.json").write_text(se.to_json(exp))
    files = ["pw.json"]
    if not args.no_plot:
        fig, ax = _new_figure(figsize=(7.0, 4.0))
        lam = exp.frequencies
        pos = lam > 0.0
        ax.semilogy(lam[pos], exp.variances[pos], "o", ms=3)
        if not pos.all():
            ax.semilogy([lam[0]], [exp.variances[0]], "s", ms=5)
        ax.set_xlabel("frequency")
        ax.set_ylabel("coefficient variance")
        ax.set_title(f"{proc} sampling expansion ({terms} terms)")
        _save_figure(fig, out / "pw.png")
        files.append("pw.png")
    cfg = RunConfig("pw", {"process": proc, "basis": exp.basis}, r=r,
                    terms=terms, out=str(args.out))
    (out / "manifest.json").write_text(cfg.manifest(files))
    print(f"wrote expansion with {len(exp)} stored frequencies to {out}")
    return EXIT_OK


def cmd_zeros(args) -> int:
    r = _positive_float("--r", args.r)
    count = _positive_int("--count", args.count)
    order = float(args.order)
    zl = bessel_zeros(order, r, count)
    out = _outdir(args)
    lines = ["n,root,residual"]
    lines += [f"{i},{z:.17g},{res:.3e}" for i, (z, res) in
              enumerate(zip(zl.roots, zl.residuals), start=1)]
    (out / "zeros.csv").write_text("\n".join(lines) + "\n")
    files = ["zeros.csv"]
    if not args.no_plot:
        fig, ax = _new_figure(figsize=(7.0, 4.0))
        gaps = np.diff(zl.roots)
        ax.plot(np.arange(2, count + 1), gaps, "o-", ms=3, label="spacing")
        ax.axhline(np.pi / r, color="k", ls="--", lw=0.8, label="pi/r")
        ax.set_xlabel("n")
        ax.set_ylabel("root spacing")
        ax.set_title(f"zeros of J_{order:g}(r z), r={r:g}")
        ax.legend()
        _save_figure(fig, out / "zeros.png")
        files.append("zeros.png")
    cfg = RunConfig("zeros", {"order": order}, r=r, terms=count, out=str(args.out))
    (out / "manifest.json").write_text(cfg.manifest(files))
    print(f"wrote {count} zeros to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# rate


def cmd_rate(args) -> int:
    H = float(args.hurst)
    r = _positive_float("--r", args.r)
    if args.ns:
        Ns = [int(x) for x in args.ns.split(",")]
    else:
        Ns = [2**k for k in range(5, 13)]
    pool = _positive_int("--pool", args.pool)
    rep = vf.truncation_rate(H, r, Ns, pool=pool)
    out = _outdir(args)
    (out / "rate.json").write_text(rep.to_json())
    files = ["rate.json"]
    if not args.no_plot:
        fig, ax = _new_figure(figsize=(6.0, 4.5))
        ax.loglog(rep.Ns, rep.sup_mean_square, "o-", label="sup tail variance")
        ref = rep.sup_mean_square[0] * (rep.Ns / rep.Ns[0]) ** (-2.0 * H)
        ax.loglog(rep.Ns, ref, "k--", lw=0.8, label=f"slope -2H = {-2 * H:g}")
        ax.set_xlabel("N")
        ax.set_ylabel("sup_t E|R_N(t)|^2")
        ax.set_title(f"H={H:g}: fitted slope {rep.slope:.3f} +/- {rep.slope_ci:.3f}")
        ax.legend()
        _save_figure(fig, out / "rate.png")
        files.append("rate.png")
    cfg = RunConfig("rate", {"hurst": H, "Ns": [int(n) for n in rep.Ns], "pool": pool},
                    r=r, out=str(args.out))
    (out / "manifest.json").write_text(cfg.manifest(files))
    print(f"fitted slope {rep.slope:.4f} (2H = {2 * H:g}, CI +/- {rep.slope_ci:.4f})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# martingale


_DIRECTIONS = ("fwd-even", "fwd-odd", "single-sided", "bridge-even", "bridge-odd")


def cmd_martingale(args) -> int:
    seed = _resolve_seed(args, required=True)
    H = float(args.hurst)
    r = _positive_float("--r", args.r)
    n_grid = _positive_int("--grid-size", args.grid_size, minimum=3)
    paths = _positive_int("--paths", args.paths)
    direction = args.direction
    if direction not in _DIRECTIONS:
        raise ConfigError(f"unknown direction {direction!r}")
    grid = np.linspace(0.0, r, n_grid)
    if direction in ("fwd-even", "bridge-even"):
        spec = pr.FBMEven(H, "chain")
    elif direction in ("fwd-odd", "bridge-odd"):
        spec = pr.FBMOdd(H, "chain")
    else:
        spec = pr.FBM(H, "chain")
    cov = pr.covariance_matrix(spec, grid[1:])
    rng = np.random.default_rng(seed)
    X = vf.cholesky_sample(cov, rng, paths=paths)
    X = np.concatenate([np.zeros((paths, 1)), X], axis=1)
    st = ch.fbm_structure(H)
    out = _outdir(args)
    files = []
    rendered = []
    for i in range(paths):
        xp = SamplePath(grid, X[i])
        if direction in ("fwd-even", "bridge-even"):
            mp = mg.fwd_even(H, xp)
            if direction == "bridge-even":
                mp = mg.bridge(mp, st, "even")
        elif direction in ("fwd-odd", "bridge-odd"):
            mp = mg.fwd_odd(H, xp)
            if direction == "bridge-odd":
                mp = mg.bridge(mp, st, "odd")
        else:
            mp = mg.fwd_single_sided(H, xp)
        for tag, p in (("input", xp), ("output", mp)):
            name = f"{tag}_{i:03d}.csv"
            (out / name).write_text(p.to_csv())
            files.append(name)
        rendered.append((xp, mp))
    if not args.no_plot:
        fig, (ax1, ax2) = _new_figure(1, 2, figsize=(10.0, 4.0), sharex=False)
        for xp, mp in rendered:
            ax1.plot(xp.grid, xp.values, lw=0.8)
            ax2.plot(mp.grid, mp.values, lw=0.8)
        ax1.set_title("input paths")
        ax2.set_title(f"{direction} transform")
        for ax in (ax1, ax2):
            ax.set_xlabel("t")
        _save_figure(fig, out / "martingale.png")
        files.append("martingale.png")
    cfg = RunConfig("martingale", {"hurst": H, "direction": direction},
                    r=r, grid_size=n_grid, paths=paths, seed=seed, out=str(args.out))
    (out / "manifest.json").write_text(cfg.manifest(files))
    print(f"wrote {len(files)} file(s) to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _load_overrides(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read tolerance config {path!r}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("tolerance config must be a JSON object")
    known = {"bessel_residual_tol"}
    out = {}
    for key, val in doc.items():
        if key not in known:
            raise ConfigError(f"unknown tolerance key {key!r} (known: {sorted(known)})")
        if not isinstance(val, (int, float)) or isinstance(val, bool) or not val > 0:
            raise ConfigError(f"tolerance {key!r} must be a positive number, got {val!r}")
        out[key] = float(val)
    return out


def cmd_verify(args) -> int:
    overrides = _load_overrides(args.config)
    indices = None
    if args.criteria:
        indices = {int(x) for x in args.criteria.split(",")}
    results = vf.run_acceptance(quick=args.quick, indices=indices, overrides=overrides)
    width = max(len(r.name) for r in results)
    for res in results:
        mark = "PASS" if res.passed else "FAIL"
        print(f"[{mark}] {res.index:>2} {res.name:<{width}}  {res.detail}  ({res.seconds:.1f}s)")
    report = [asdict(r) for r in results]
    out = _outdir(args)
    (out / "verify_report.json").write_text(json.dumps(report, indent=2))
    if any(r.detail.startswith("error:") for r in results):
        return EXIT_NUMERIC
    if not all(r.passed for r in results):
        return EXIT_GATE
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectralgauss",
        description="Series expansions, KL bases and martingale transforms "
                    "for Gaussian processes, with built-in verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=False):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--no-plot", action="store_true", help="skip figure rendering")
        p.add_argument("--jobs", type=int, default=1, help="worker threads")
        if seed:
            p.add_argument("--seed", type=int, default=None,
                           help="RNG seed (SPECTRALGAUSS_SEED overrides)")

    p = sub.add_parser("sample", help="draw series-expansion sample paths")
    p.add_argument("--process", required=True, choices=("fbm", "ou", "ar", "bm"))
    p.add_argument("--hurst", type=float)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--phi", type=str, default=None, help="AR roots, comma separated")
    p.add_argument("--basis", type=str, default=None)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--terms", type=int, required=True)
    p.add_argument("--paths", type=int, default=1)
    p.add_argument("--grid-size", type=int, default=257)
    common(p, seed=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("kl", help="closed-form KL basis vs Nystrom oracle")
    p.add_argument("--kernel", required=True, choices=_KL_TAGS)
    p.add_argument("--hurst", type=float)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=2.0)
    p.add_argument("--phi", type=str, default=None)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--nystrom-n", type=int, default=2000)
    p.add_argument("--gate", type=float, default=None,
                   help="relative-error gate (default 1e-4, 1e-3 extended)")
    common(p)
    p.set_defaults(func=cmd_kl)

    p = sub.add_parser("pw", help="export a sampling expansion")
    p.add_argument("--process", required=True, choices=("fbm", "ou", "ar"))
    p.add_argument("--hurst", type=float)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--phi", type=str, default=None)
    p.add_argument("--basis", type=str, default=None)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--terms", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_pw)

    p = sub.add_parser("zeros", help="zeros of a Bessel function J_nu(r z)")
    p.add_argument("--order", type=float, required=True)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--count", type=int, default=50)
    common(p)
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("rate", help="truncation-rate study for the FBM series")
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--ns", type=str, default=None, help="comma-separated N values")
    p.add_argument("--pool", type=int, default=2**14)
    common(p)
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("martingale", help="apply path transforms to sampled inputs")
    p.add_argument("--hurst", type=float, required=True)
    p.add_argument("--direction", required=True, choices=_DIRECTIONS)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--grid-size", type=int, default=1025)
    p.add_argument("--paths", type=int, default=1)
    common(p, seed=True)
    p.set_defaults(func=cmd_martingale)

    p = sub.add_parser("verify", help="run the acceptance battery")
    p.add_argument("--quick", action="store_true", help="reduced sizes, smoke gates")
    p.add_argument("--criteria", type=str, default=None,
                   help="comma-separated criterion numbers to run")
    p.add_argument("--config", type=str, default=None,
                   help="JSON file with tolerance overrides")
    common(p)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    # LinAlgError subclasses ValueError, so the numeric clause must come first
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
