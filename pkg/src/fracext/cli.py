"""Command-line front end.

Subcommands ``oracle``, ``psi``, ``truncation``, ``solve`` and ``study`` write
CSV tables (17 significant digits) and JSON summaries into ``--out``. Options
come from a flat ``key = value`` file given with ``--config``; command-line
flags override it.

Exit codes: 0 success, 2 precondition violated, 3 numeric failure, 4 parse
or validation failure.
"""

from dataclasses import asdict, dataclass, fields
import argparse
import csv
import io
import itertools
import json
import math
from pathlib import Path
import platform
import sys
import warnings

import numpy as np
import scipy

from . import __version__
from .analysis import StudyPoint, X_SPACES, default_K, record_dict, run_study, solve_problem
from .errors import DomainError, NumericError, SmallTruncationWarning
from .extension import kernel_ode_residual, psi, truncation_report
from .hermite import dump_coo
from .spectral import eigen_interval, eigen_square, hs_norm, make_frac_order, oracle_solve, parse_spectral

EXIT_OK, EXIT_PRECONDITION, EXIT_NUMERIC, EXIT_PARSE = 0, 2, 3, 4

SWEEP_KEYS = ("s", "Y", "gamma", "Nx", "M")


class ConfigError(ValueError):
    """Malformed configuration, flag value or data specification."""


class PreconditionError(RuntimeError):
    pass


def _fmt(x):
    return f"{x:.17g}"


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on.

    ``s``, ``Y``, ``gamma``, ``Nx`` and ``M`` are tuples so that one config
    describes a study grid; single-run commands require one value each.
    """

    s: tuple = (1.5,)
    domain: str = "interval"
    f: str = "1:1"
    Y: tuple = (1.5,)
    gamma: tuple = (2.0,)
    Nx: tuple = (16,)
    M: tuple = (16,)
    K: int = None
    x_bc: str = "hinged"
    out: str = "."
    dump_matrices: bool = False
    allow_small_Y: bool = False
    workers: int = 1
    zmax: float = 10.0
    nz: int = 100

    def single(self, key):
        vals = getattr(self, key)
        if len(vals) != 1:
            raise ConfigError(f"{key} takes a single value for this command, got {len(vals)}")
        return vals[0]

    def basis(self):
        return eigen_square() if self.domain == "square" else eigen_interval()

    def data(self):
        try:
            return parse_spectral(self.f, self.basis())
        except (ValueError, DomainError) as exc:
            raise ConfigError(f"f: {exc}") from None

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        raw = json.loads(text)
        return _build_config(raw)


_SCALAR_TYPES = {
    "domain": str, "f": str, "K": int, "x_bc": str, "out": str,
    "dump_matrices": bool, "allow_small_Y": bool, "workers": int, "zmax": float, "nz": int,
}
_SWEEP_TYPES = {"s": float, "Y": float, "gamma": float, "Nx": int, "M": int}


def _convert(key, value, kind):
    if kind is bool:
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    if value is None:
        return None
    try:
        if kind is int:
            as_float = float(value)
            if as_float != int(as_float):
                raise ValueError
            return int(as_float)
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot read {value!r} as {kind.__name__}") from None


def _sweep(key, value):
    if isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [v for v in str(value).split(",")]
    if not items or any(str(v).strip() == "" for v in items):
        raise ConfigError(f"{key}: empty entry in {value!r}")
    return tuple(_convert(key, str(v).strip() if isinstance(v, str) else v, _SWEEP_TYPES[key]) for v in items)


def _build_config(raw):
    names = {f.name for f in fields(RunConfig)}
    kwargs = {}
    for key, value in raw.items():
        if key not in names:
            raise ConfigError(f"unknown option {key!r}")
        if key in _SWEEP_TYPES:
            kwargs[key] = _sweep(key, value)
        else:
            kwargs[key] = _convert(key, value, _SCALAR_TYPES[key])
    cfg = RunConfig(**kwargs)
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg.domain not in ("interval", "square"):
        raise ConfigError(f"domain must be 'interval' or 'square', got {cfg.domain!r}")
    if cfg.x_bc not in X_SPACES:
        raise ConfigError(f"x_bc must be one of {sorted(X_SPACES)}, got {cfg.x_bc!r}")
    for s in cfg.s:
        if not 1.0 < s < 2.0:
            raise ConfigError(f"s must satisfy 1 < s < 2, got {s!r}")
    for y in cfg.Y:
        if not y > 0:
            raise ConfigError(f"Y must be positive, got {y!r}")
    for g in cfg.gamma:
        if not g >= 1.0:
            raise ConfigError(f"gamma must be >= 1, got {g!r}")
    for n in cfg.Nx + cfg.M:
        if n < 1:
            raise ConfigError(f"cell counts must be positive, got {n}")
    if cfg.K is not None and cfg.K < 1:
        raise ConfigError(f"K must be positive, got {cfg.K}")
    if cfg.workers < 1:
        raise ConfigError("workers must be positive")
    if not (cfg.zmax > 0 and cfg.nz >= 1):
        raise ConfigError("zmax must be positive and nz at least 1")


def read_config_file(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    raw = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        raw[key.replace("-", "_")] = value
    return raw


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--s", help="fractional order in (1, 2); comma list for study")
    common.add_argument("--f", help="data as 'k:c' entries (interval) or 'k,l:c' (square)")
    common.add_argument("--domain", choices=["interval", "square"])
    common.add_argument("--Y", help="truncation height; comma list for study")
    common.add_argument("--gamma", help="y grading exponent; comma list for study")
    common.add_argument("--Nx", help="x cells; comma list for study")
    common.add_argument("--M", help="y cells; comma list for study")
    common.add_argument("--K", help="modes in the H^s error norm")
    common.add_argument("--x-bc", dest="x_bc", choices=sorted(X_SPACES))
    common.add_argument("--out", help="output directory")
    common.add_argument("--dump-matrices", dest="dump_matrices", action="store_const", const=True)
    common.add_argument("--allow-small-Y", dest="allow_small_Y", action="store_const", const=True)
    common.add_argument("--workers", help="concurrent study points")
    common.add_argument("--zmax", help="psi table range")
    common.add_argument("--nz", help="psi table size")

    parser = _Parser(prog="fracext", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"fracext {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("oracle", parents=[common], help="exact coefficients U_k = lambda_k^-s F_k")
    sub.add_parser("psi", parents=[common], help="tabulate the kernel and its ODE residual")
    sub.add_parser("truncation", parents=[common], help="per-mode tail integrals beyond Y")
    sub.add_parser("solve", parents=[common], help="finite element solve on the cylinder")
    st = sub.add_parser("study", parents=[common], help="convergence study over a parameter grid")
    st.add_argument("--no-timing", dest="no_timing", action="store_true", help="leave wall_ms empty")
    return parser


def config_from_args(args):
    raw = read_config_file(args.config) if args.config else {}
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            raw[f.name] = value
    return _build_config(raw)


def _check_Y(cfg, basis):
    lam1 = basis.eigenvalue(1)
    small = [y for y in cfg.Y if y < 1.0 / math.sqrt(lam1)]
    if small and not cfg.allow_small_Y:
        raise PreconditionError(
            f"Y = {small[0]} is below 1/sqrt(lambda_1) = {1.0 / math.sqrt(lam1):.6g}; pass --allow-small-Y to proceed"
        )


def _require_interval(cfg, command):
    if cfg.domain != "interval":
        raise ConfigError(f"'{command}' is implemented on the interval only")


def _write(out, name, text):
    path = Path(out) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_oracle(cfg):
    order = make_frac_order(cfg.single("s"))
    f = cfg.data()
    u = oracle_solve(f, order)
    rows = [
        [k, _fmt(fk), _fmt(uk), _fmt(lam)]
        for (k, fk), uk, lam in zip(f.coeffs.items(), u.values, u.eigenvalues())
    ]
    _write(cfg.out, "oracle.csv", _csv(["k", "F_k", "U_k", "lambda"], rows))
    summary = {
        "s": order.s,
        "domain": cfg.domain,
        "f_norm_minus_s": hs_norm(f, -order.s),
        "u_norm_s": hs_norm(u, order.s),
        "u_norm_l2": hs_norm(u, 0.0),
    }
    _write(cfg.out, "oracle.json", _json(summary))
    return summary


def cmd_psi(cfg):
    order = make_frac_order(cfg.single("s"))
    z = cfg.zmax * np.arange(1, cfg.nz + 1) / cfg.nz
    vals = psi(order, z)
    res = kernel_ode_residual(order, z)
    rows = [[_fmt(zi), _fmt(v), _fmt(r)] for zi, v, r in zip(z, vals, res)]
    _write(cfg.out, "psi.csv", _csv(["z", "psi", "residual"], [["0", "1", ""]] + rows))
    return {"s": order.s, "max_abs_residual": float(np.max(np.abs(res)))}


def cmd_truncation(cfg):
    order = make_frac_order(cfg.single("s"))
    f = cfg.data()
    Y = cfg.single("Y")
    _check_Y(cfg, f.basis)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallTruncationWarning)
        table = truncation_report(f, order, Y)
    _write(cfg.out, "truncation.csv", table.to_csv())
    summary = {
        "s": order.s, "Y": Y,
        "sup_integral": table.sup_integral,
        "tail_norm": table.tail_norm,
        "bound": table.bound,
    }
    _write(cfg.out, "truncation.json", _json(summary))
    return summary


def cmd_solve(cfg):
    _require_interval(cfg, "solve")
    f = cfg.data()
    _check_Y(cfg, f.basis)
    s, Y, gamma = cfg.single("s"), cfg.single("Y"), cfg.single("gamma")
    nx, m = cfg.single("Nx"), cfg.single("M")
    sol, rec = solve_problem(f, s, Y, gamma, nx, m, K=cfg.K, x_bc=cfg.x_bc)
    system = sol.system
    x = np.linspace(0.0, 1.0, 4 * nx + 1)
    y = system.y_space.partition.nodes
    _write(cfg.out, "solution.csv", sol.to_csv(np.linspace(0.0, 1.0, 2 * nx + 1), y))
    _write(cfg.out, "trace.csv", sol.trace().to_csv(x))
    if cfg.dump_matrices:
        xf, yf = system.x_factors, system.y_factors
        for name, mat in (
            ("A", system.matrix), ("Mx", xf.mass), ("Kx", xf.stiffness), ("Dx", xf.bending),
            ("My", yf.mass), ("Cy", yf.coupling), ("By", yf.bilaplace),
        ):
            dump_coo(mat, Path(cfg.out) / f"{name}.coo")
    summary = {
        "record": record_dict(rec),
        "K": cfg.K or default_K(f),
        "mesh": system.mesh.summary(),
        "dofs": int(system.matrix.shape[0]),
        "config": json.loads(cfg.to_json()),
    }
    _write(cfg.out, "summary.json", _json(summary))
    return summary


def study_points(cfg):
    """Grid in the order s, Y, gamma, mesh.

    ``Nx`` and ``M`` lists of equal length are paired; a single value is
    broadcast; otherwise all combinations are taken.
    """
    if len(cfg.Nx) == len(cfg.M):
        meshes = list(zip(cfg.Nx, cfg.M))
    elif len(cfg.Nx) == 1 or len(cfg.M) == 1:
        meshes = [(nx, m) for nx in cfg.Nx for m in cfg.M]
    else:
        meshes = list(itertools.product(cfg.Nx, cfg.M))
    return [
        StudyPoint(s, Y, g, nx, m)
        for s in cfg.s for Y in cfg.Y for g in cfg.gamma for nx, m in meshes
    ]


def cmd_study(cfg, timing=True):
    _require_interval(cfg, "study")
    f = cfg.data()
    _check_Y(cfg, f.basis)
    study = run_study(f, study_points(cfg), K=cfg.K, workers=cfg.workers)
    _write(cfg.out, "study.csv", study.to_csv(timing=timing))
    meta = {
        "versions": {
            "fracext": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "seeds": None,
        "config": json.loads(cfg.to_json()),
        "y_slopes": study.y_slopes,
        "failures": [
            {"params": list(r.params), "error": r.error} for r in study.records if r.error
        ],
    }
    _write(cfg.out, "study.json", _json(meta))
    return meta


COMMANDS = {
    "oracle": cmd_oracle,
    "psi": cmd_psi,
    "truncation": cmd_truncation,
    "solve": cmd_solve,
    "study": cmd_study,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command != "study":
            for key in SWEEP_KEYS:
                cfg.single(key)
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        if args.command == "study":
            cmd_study(cfg, timing=not args.no_timing)
        else:
            COMMANDS[args.command](cfg)
    except (ConfigError, DomainError) as exc:
        print(f"fracext: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"fracext: warning: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except NumericError as exc:
        print(f"fracext: numeric failure: {exc} (residual {exc.residual:.3e})", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
