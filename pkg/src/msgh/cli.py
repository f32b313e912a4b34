"""
Command-line interface.

Subcommands: ``fit``, ``sample``, ``density-grid``, ``classify``, ``taildep``
and ``marginal``. Exit status is 0 on success, 2 for usage errors, 3 for data
or model-file errors and 4 when ``fit --strict`` did not converge.
"""

import argparse
import sys

import numpy as np
from scipy.special import logsumexp

from . import __version__
from .diagnostics import chi_q
from .distributions import marginal_pdf, msgh_cov, msgh_mean, gh_cov, gh_mean
from .em import EmConfig, fit_mixture, fit_nig_baseline
from .exceptions import DegenerateDataError, DomainError, UnsupportedOrderError
from .io import DataFileError, ModelFileError, load_model, read_csv, save_model, write_csv

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NOT_CONVERGED = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _split_cols(text):
    return None if text is None else [c.strip() for c in text.split(",") if c.strip()]


def _dims(text):
    try:
        dims = [int(d) for d in text.split(",")]
    except ValueError:
        raise UsageError(f"--dims expects comma-separated integers, got {text!r}") from None
    if len(dims) not in (1, 2):
        raise UsageError("--dims takes one or two coordinates")
    return dims


def _read(args):
    ds = read_csv(args.input, _split_cols(getattr(args, "cols", None)), header=not args.no_header)
    if ds.n_dropped:
        print(f"dropped {ds.n_dropped} malformed row(s) from {ds.path}", file=sys.stderr)
    return ds


def _fmt(a):
    return np.array2string(np.asarray(a), precision=4, suppress_small=True, separator=", ")


def _summary(report, columns, kind):
    lines = [
        f"model: {kind}  K: {report.model.K}  N: {report.n_samples}  columns: {', '.join(columns)}",
        f"loglik: {report.loglik:.6f}",
        f"BIC: {report.bic:.6f}",
        f"iterations: {report.n_iter}  converged: {report.converged}",
    ]
    for k, (pi, c) in enumerate(zip(report.model.pi, report.model.components)):
        lines.append(f"component {k}: pi = {pi:.4f}")
        lines.append(f"  mu    = {_fmt(c.mu)}")
        lines.append(f"  beta  = {_fmt(c.beta)}")
        if kind == "msnig":
            lines.append(f"  D     = {_fmt(c.D)}".replace("\n", "\n          "))
            lines.append(f"  A     = {_fmt(c.A)}")
        else:
            lines.append(f"  Sigma = {_fmt(c.Sigma)}".replace("\n", "\n          "))
        lines.append(f"  gamma = {_fmt(c.gamma)}")
        lines.append(f"  delta = {float(c.delta):.4f}")
    return "\n".join(lines)


def cmd_fit(args):
    ds = _read(args)
    config = EmConfig(
        tol=args.tol, max_iter=args.max_iter, restarts=args.restarts, init=args.init,
        trim_fraction=args.trim, gamma_constraint=args.gamma, seed=args.seed,
    )
    fit = fit_mixture if args.model == "msnig" else fit_nig_baseline
    report = fit(ds.X, args.K, config)
    meta = {
        "columns": list(ds.columns),
        "n_samples": report.n_samples,
        "n_dropped": ds.n_dropped,
        "loglik": report.loglik,
        "bic": report.bic,
        "n_iter": report.n_iter,
        "converged": report.converged,
        "seed": args.seed,
        "config": config.as_dict(),
    }
    if args.out:
        save_model(args.out, report.model, meta)
    print(_summary(report, ds.columns, args.model))
    if args.strict and not report.converged:
        print("EM stopped at --max-iter without converging", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def _column_names(meta, M):
    cols = meta.get("columns")
    return list(cols) if cols and len(cols) == M else [f"y{j + 1}" for j in range(M)]


def cmd_sample(args):
    model, meta = load_model(args.model_file)
    if args.n < 0:
        raise UsageError("-n must be non-negative")
    X, _ = model.sample(args.n, args.seed)
    write_csv(args.out, _column_names(meta, model.dim), X.tolist())
    return EXIT_OK


def _moments(model):
    mean_f, cov_f = (msgh_mean, msgh_cov) if model.kind == "msnig" else (gh_mean, gh_cov)
    means = np.array([mean_f(c) for c in model.components])
    sds = np.array([np.sqrt(np.diag(cov_f(c))) for c in model.components])
    return means, sds


def _axis(args, model, dims, j, width=4.0):
    if args.bounds is not None:
        lo, hi = args.bounds[2 * j], args.bounds[2 * j + 1]
    else:
        means, sds = _moments(model)
        d = dims[j]
        lo = float(np.min(means[:, d] - width * sds[:, d]))
        hi = float(np.max(means[:, d] + width * sds[:, d]))
    if not hi > lo:
        raise UsageError("upper bound must exceed lower bound")
    return np.linspace(lo, hi, args.resolution)


def _marginal_mixture(model, dims, pts):
    if model.kind != "msnig":
        raise UsageError("marginals by inversion need an msnig model")
    return sum(pi * marginal_pdf(c, dims, pts) for pi, c in zip(model.pi, model.components))


def cmd_density_grid(args):
    model, _ = load_model(args.model_file)
    dims = _dims(args.dims) if args.dims else None
    if dims is None:
        if model.dim != 2:
            raise UsageError(f"model has dimension {model.dim}; pick two with --dims")
        dims = [0, 1]
    if len(dims) != 2:
        raise UsageError("density-grid needs two dimensions")
    if args.bounds is not None and len(args.bounds) != 4:
        raise UsageError("--bounds takes XMIN XMAX YMIN YMAX")
    gx, gy = _axis(args, model, dims, 0), _axis(args, model, dims, 1)
    xx, yy = np.meshgrid(gx, gy, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    if model.dim == 2 and dims == [0, 1]:
        logd = model.log_density(pts)
    else:
        with np.errstate(divide="ignore"):
            logd = np.log(_marginal_mixture(model, dims, pts))
    rows = np.column_stack([pts, logd]).tolist()
    write_csv(args.out, ["x", "y", "log_density"], rows)
    return EXIT_OK


def cmd_classify(args):
    model, meta = load_model(args.model_file)
    ds = _read(args)
    if ds.X.shape[1] != model.dim:
        raise DataFileError(f"data has {ds.X.shape[1]} columns but the model has dimension {model.dim}")
    logw = model.weighted_log_densities(ds.X)
    tau = np.exp(logw - logsumexp(logw, axis=1, keepdims=True))
    labels = tau.argmax(axis=1)
    header = ["label"] + [f"tau_{k}" for k in range(model.K)]
    write_csv(args.out, header, [[int(l)] + list(r) for l, r in zip(labels, tau)])
    return EXIT_OK


def cmd_taildep(args):
    cols = _split_cols(args.cols)
    if cols is None or len(cols) != 2:
        raise UsageError("--cols must name exactly two columns")
    ds = _read(args)
    if ds.X.shape[0] < 50:
        raise DataFileError(f"need at least 50 rows, got {ds.X.shape[0]}")
    q = np.linspace(args.q_min, args.q_max, args.q_num)
    if not (0 < args.q_min < args.q_max < 1):
        raise UsageError("need 0 < --q-min < --q-max < 1")
    curve = chi_q(ds.X[:, 0], ds.X[:, 1], q, n_boot=args.n_boot, seed=args.seed)
    rows = np.column_stack([curve.q, curve.chi_hat, curve.lower, curve.upper,
                            curve.bound_lower, curve.bound_upper]).tolist()
    write_csv(args.out, ["q", "chi", "band_lower", "band_upper", "bound_lower", "bound_upper"], rows)
    return EXIT_OK


def cmd_marginal(args):
    model, _ = load_model(args.model_file)
    dims = _dims(args.dims)
    if max(dims) >= model.dim or min(dims) < 0:
        raise UsageError(f"--dims out of range for dimension {model.dim}")
    n_bounds = 2 * len(dims)
    if args.bounds is not None and len(args.bounds) != n_bounds:
        raise UsageError(f"--bounds needs {n_bounds} numbers for {len(dims)} dimension(s)")
    axes = [_axis(args, model, dims, j, width=8.0) for j in range(len(dims))]
    if len(dims) == 1:
        pts = axes[0][:, None]
        header = ["x", "density"]
    else:
        xx, yy = np.meshgrid(*axes, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        header = ["x", "y", "density"]
    dens = _marginal_mixture(model, dims, pts)
    write_csv(args.out, header, np.column_stack([pts, dens]).tolist())
    return EXIT_OK


def _add_data_args(p, cols=True):
    p.add_argument("input", help="CSV file")
    if cols:
        p.add_argument("--cols", help="comma-separated column names or 0-based indices")
    p.add_argument("--no-header", action="store_true", help="first row is data, not names")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="msgh", description="Multiple scaled NIG distributions and mixtures."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model to CSV data by EM")
    _add_data_args(p)
    p.add_argument("--model", choices=["msnig", "nig"], default="msnig")
    p.add_argument("-K", type=int, default=1, help="number of components")
    p.add_argument("--init", choices=["random", "random-partition", "kmeans", "trimmed-kmeans"],
                   default="trimmed-kmeans")
    p.add_argument("--trim", type=float, default=0.1, help="trimmed k-means fraction")
    p.add_argument("--gamma", choices=["free", "shared"], default="free")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=2000)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="model file to write")
    p.add_argument("--strict", action="store_true", help="exit 4 if EM did not converge")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sample", help="draw from a fitted model")
    p.add_argument("model_file")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    for name, func, help_ in (
        ("density-grid", cmd_density_grid, "log density on a 2-D grid"),
        ("marginal", cmd_marginal, "marginal density of one or two coordinates"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("model_file")
        p.add_argument("--dims", required=name == "marginal", help="e.g. 0 or 0,2")
        p.add_argument("--bounds", type=float, nargs="+", metavar="B",
                       help="lower/upper pairs per dimension")
        p.add_argument("--resolution", type=int, default=101)
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("classify", help="MAP labels and responsibilities")
    p.add_argument("model_file")
    _add_data_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("taildep", help="empirical chi(q) for two columns")
    _add_data_args(p)
    p.add_argument("--q-min", type=float, default=0.5)
    p.add_argument("--q-max", type=float, default=0.99)
    p.add_argument("--q-num", type=int, default=50)
    p.add_argument("--n-boot", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_taildep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "resolution", 2) < 2:
        parser.error("--resolution must be at least 2")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"msgh {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFileError, ModelFileError, DegenerateDataError, DomainError,
            UnsupportedOrderError, ValueError) as exc:
        print(f"msgh {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
