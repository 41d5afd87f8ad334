"""Command line front end.

    calibrix verify model --kind opposite --x0 1 --eps 0.025 --delta auto
    calibrix verify general --coeffs 1,1,1 --kind opposite
    calibrix counterexample --eps 0.001,0.01,0.1,0.5,1
    calibrix section --figure 1 --out figs/

Exit codes: 0 verified, 1 a condition failed, 2 a parameter constraint or
hypothesis failed, 3 a numerical routine did not converge.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConstraintViolation, DomainError, HypothesisError, NoConvergence, QuadratureFailure
from .fields import Kind
from .verifier import DEFAULT_TOLERANCES

log = logging.getLogger("calibrix")

EXIT_OK, EXIT_FAILED, EXIT_CONSTRAINT, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_SWEEP = "0.001,0.01,0.05,0.1,0.2,0.3,0.4,0.5,0.6,0.7,1.0"
COMMANDS = {"verify": 2, "counterexample": 1, "section": 1}


@dataclass
class RunConfig:
    """Everything a run depends on; round-trips through the flat config format."""

    command: str = ""
    kind: str = "opposite"
    x0: float = 1.0
    eps: str = "auto"
    delta: str = "auto"
    coeffs: str = "1,1,1"
    lam: float | None = None
    mu: float | None = None
    a: float | None = None
    view: str = "chart"
    figure: int = 1
    eps_list: str = DEFAULT_SWEEP
    zeta_scale: float = 0.5
    seed: int = 0
    out: str = ""
    format: str = "json"
    plot: bool = False
    tolerances: dict = field(default_factory=dict)

    def to_text(self):
        lines = []
        for f in fields(self):
            if f.name == "tolerances":
                continue
            v = getattr(self, f.name)
            if v is None:
                continue
            lines.append(f"{f.name} = {v!r}" if isinstance(v, float) else f"{f.name} = {v}")
        for k in sorted(self.tolerances):
            lines.append(f"tol.{k} = {self.tolerances[k]!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_args(cls, args):
        cfg = cls(command=args.command + (f" {args.target}" if getattr(args, "target", None) else ""))
        for f in fields(cls):
            if f.name in ("command", "tolerances") or not hasattr(args, f.name):
                continue
            v = getattr(args, f.name)
            setattr(cfg, f.name, str(v) if f.name in ("eps", "delta") else v)
        cfg.tolerances = _tol_overrides(args)
        return cfg

    def echo(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name not in ("out", "format", "plot")}

    @classmethod
    def from_text(cls, text):
        types = {f.name: f.type for f in fields(cls)}
        cfg = cls()
        for key, value in parse_config_text(text).items():
            if key.startswith("tol."):
                cfg.tolerances[key[4:]] = float(value)
                continue
            if key not in types:
                raise ValueError(f"unknown config key {key!r}")
            setattr(cfg, key, _coerce(types[key], value))
        return cfg


def _coerce(type_name, value):
    t = str(type_name)
    if t.startswith("float"):
        return None if value in ("", "None") else float(value)
    if t.startswith("int"):
        return int(value)
    if t.startswith("bool"):
        return value.lower() in ("1", "true", "yes")
    return value


def parse_config_text(text):
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_") if not k.startswith("tol.") else k] = v
    return out


# key in the config file -> command line flag
_FLAG = {"lam": "--lambda", "eps_list": "--eps-list", "zeta_scale": "--zeta-scale"}


def _config_tokens(path):
    tokens = []
    for k, v in parse_config_text(Path(path).read_text()).items():
        if k == "command":
            continue
        flag = _FLAG.get(k, "--" + k)
        if k == "plot":
            if v.lower() in ("1", "true", "yes"):
                tokens.append(flag)
            continue
        tokens += [flag, v]
    return tokens


def _splice_config(argv):
    """Insert config-file options right after the subcommand so CLI flags win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    path = argv[i + 1]
    argv = argv[:i] + argv[i + 2 :]
    for j, tok in enumerate(argv):
        if tok in COMMANDS:
            cut = j + COMMANDS[tok]
            return argv[:cut] + _config_tokens(path) + argv[cut:]
    return argv


def _common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="", help="output file (verify, counterexample) or directory (section)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--config", help="flat key = value file; command line flags take precedence")
    p.add_argument("--plot", action="store_true", help="also render a matplotlib figure next to --out")


def _tolerances(p):
    for name, default in DEFAULT_TOLERANCES.items():
        p.add_argument(f"--tol.{name}", dest=f"tol_{name}", type=float, default=None, help=f"default {default:g}")


def build_parser():
    parser = argparse.ArgumentParser(prog="calibrix", description="Build calibration fields and verify them numerically.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="build and verify a calibration")
    vsub = verify.add_subparsers(dest="target", required=True)

    m = vsub.add_parser("model", help="w = x | -x or x + 1 | x near (x0, 0)")
    m.add_argument("--kind", choices=[k.value for k in Kind], default="opposite")
    m.add_argument("--x0", type=float, default=1.0)
    m.add_argument("--eps", type=float, default=0.025)
    m.add_argument("--delta", default="auto")
    _common(m)
    _tolerances(m)

    g = vsub.add_parser("general", help="w built from a harmonic polynomial u")
    g.add_argument("--coeffs", default="1,1,1", help="a0,a1,...: u = sum a_n Re((x+iy)^n)")
    g.add_argument("--kind", choices=[k.value for k in Kind], default="opposite")
    g.add_argument("--eps", default="auto")
    g.add_argument("--delta", default="auto")
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--mu", type=float)
    g.add_argument("--a", type=float)
    g.add_argument("--view", choices=("chart", "physical"), default="chart")
    _common(g)
    _tolerances(g)

    c = sub.add_parser("counterexample", help="MS energy of w versus a cheaper competitor")
    c.add_argument("--eps", dest="eps_list", default=DEFAULT_SWEEP, help="comma separated list")
    c.add_argument("--eps-list", dest="eps_list")
    c.add_argument("--zeta-scale", type=float, default=0.5)
    _common(c)

    s = sub.add_parser("section", help="figure data (CSV) and matplotlib renderings")
    s.add_argument("--figure", type=int, default=1)
    s.add_argument("--kind", choices=[k.value for k in Kind], default="opposite")
    s.add_argument("--x0", type=float, default=1.0)
    s.add_argument("--eps", type=float, default=0.025)
    s.add_argument("--delta", default="auto")
    _common(s)
    return parser


def _tol_overrides(args):
    return {k: getattr(args, f"tol_{k}") for k in DEFAULT_TOLERANCES if getattr(args, f"tol_{k}", None) is not None}


def _delta(text):
    return text if text == "auto" else float(text)


def _write(text, out):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_report(command, config, report, args, parameters=None, hessian=None):
    from . import report as rep

    env = rep.build_envelope(command, config, report, parameters, hessian)
    rep.validate(env)
    _write(rep.dumps(env) if args.format == "json" else rep.conditions_csv(env), args.out)
    print(report.verdict, file=sys.stderr)
    return EXIT_OK if report.verified else EXIT_FAILED


def cmd_verify_model(args):
    from .model_calibration import ModelField
    from .params import derive_model_params, derive_shifted_params
    from .verifier import verify

    kind = Kind(args.kind)
    derive = derive_model_params if kind is Kind.OPPOSITE else derive_shifted_params
    params = derive(args.x0, args.eps, _delta(args.delta))
    fld = ModelField(params, kind)
    report = verify(fld, _tol_overrides(args), seed=args.seed)
    config = RunConfig.from_args(args).echo()
    params_out = {**params.as_dict(), "constraint_margins": params.residuals}
    return _emit_report("verify model", config, report, args, params_out)


def cmd_verify_general(args):
    from .general_calibration import build_general, hessian_check
    from .harmonic_frame import parse_coeffs
    from .verifier import verify

    coeffs = parse_coeffs(args.coeffs)
    eps = None if args.eps == "auto" else float(args.eps)
    delta = None if args.delta == "auto" else float(args.delta)
    gf = build_general(coeffs, args.kind, eps=eps, delta=delta, lam=args.lam, mu=args.mu, a=args.a)
    hess = hessian_check(gf)
    fld = gf if args.view == "chart" else gf.physical()
    report = verify(fld, _tol_overrides(args), seed=args.seed)
    config = RunConfig.from_args(args).echo()
    params_out = {**gf.describe(), "constraint_margins": gf.gp.residuals}
    if args.plot and args.out:
        from .plotting import plot_d_landscape

        plot_d_landscape(gf, Path(args.out).with_suffix(".d_landscape.png"))
    return _emit_report("verify general", config, report, args, params_out, hess.as_dict())


def cmd_counterexample(args):
    from . import report as rep
    from .ms_energy import counterexample_sweep

    eps_list = [float(t) for t in str(args.eps_list).split(",") if t.strip()]
    sweep = counterexample_sweep(eps_list, zeta_scale=args.zeta_scale)
    if args.format == "csv":
        text = rep.table_csv(["eps", "ms_w", "ms_psi", "margin"], sweep.csv_rows())
    else:
        text = rep.dumps(
            rep.plain(
                {
                    "rows": [r.__dict__ for r in sweep.rows],
                    "competitor_energy": sweep.energy.extrapolated,
                    "energy_levels": dict(zip(map(str, sweep.energy.ns), sweep.energy.values)),
                    "convergence_order": sweep.energy.order,
                    "eps_star": sweep.eps_star,
                    "threshold": sweep.threshold,
                }
            )
        )
    _write(text, args.out)
    if args.plot and args.out:
        from .plotting import plot_margin

        plot_margin(sweep, Path(args.out).with_suffix(".margin.png"))
    print(f"eps* = {sweep.eps_star!r} (threshold 1/(E-4) = {sweep.threshold:.6g})", file=sys.stderr)
    return EXIT_OK if sweep.eps_star > 0 else EXIT_FAILED


def cmd_section(args):
    from . import report as rep
    from .params import derive_model_params, derive_shifted_params
    from .plotting import plot_section
    from .sections import FIGURES, section_data

    if args.figure not in FIGURES:
        print(f"unknown figure {args.figure}; choose from {FIGURES}", file=sys.stderr)
        return EXIT_CONSTRAINT
    kind = Kind(args.kind)
    derive = derive_model_params if kind is Kind.OPPOSITE else derive_shifted_params
    params = derive(args.x0, args.eps, _delta(args.delta))
    cols, rows, meta = section_data(args.figure, params, kind)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    stem = out / f"figure{args.figure}"
    Path(f"{stem}.csv").write_text(rep.table_csv(cols, rows))
    Path(f"{stem}.json").write_text(rep.dumps(rep.plain(meta)))
    plot_section(args.figure, cols, rows, meta, f"{stem}.png")
    print(f"wrote {stem}.csv, {stem}.json, {stem}.png", file=sys.stderr)
    return EXIT_OK


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_splice_config(argv))
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    handlers = {"counterexample": cmd_counterexample, "section": cmd_section}
    if args.command == "verify":
        handler = cmd_verify_model if args.target == "model" else cmd_verify_general
    else:
        handler = handlers[args.command]
    try:
        return handler(args)
    except (ConstraintViolation, HypothesisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except (NoConvergence, QuadratureFailure, DomainError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
