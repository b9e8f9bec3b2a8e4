"""Command-line front end.

Each subcommand writes one artifact, CSV (default) or JSON, to stdout or to
``--output``. Floats are printed with 17 significant digits so a re-parse
recovers the stored doubles exactly, and the same configuration always
produces the same bytes.

Exit status: 0 on success, 2 for invalid flags or configuration, 1 when a
computation fails. Errors are a single ``rabi-bo: error[kind]: message``
line on stderr.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np
import scipy

from . import __version__, analysis, kernels, model
from .analysis import (
    COEFFICIENTS,
    PROJECTED,
    classify_population,
    fit_distribution,
    photon_number_bo,
    population_from_bo,
    population_from_ed,
    sweep_coupling,
    total_variation,
)
from .bo import default_grid, solve_bo, wavefunctions_on_grid
from .ed import EDParams, photon_number_ed, solve_ed
from .linalg import EigenSolverError
from .model import Branch, ModelParams, critical_coupling_of

PROG = "rabi-bo"
COMMANDS = ("spectrum", "sweep", "potential", "wavefunction", "population", "fit",
            "convergence", "compare")
# the population record (fits, selected family) is nested, so it defaults to JSON
DEFAULT_FORMAT = {"population": "json"}


class UsageError(Exception):
    pass


class ComputeError(Exception):
    pass


# --- parsing -------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_values(text, name="value"):
    """Parse ``start:stop:count``, a comma list, or a single number."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise ValueError
            if count == 1:
                return [start]
            return [float(v) for v in np.linspace(start, stop, count)]
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad {name} {text!r}; expected start:stop:count, a list or a number") from None
    if not values:
        raise UsageError(f"empty {name}")
    if not all(math.isfinite(v) for v in values):
        raise UsageError(f"non-finite {name} in {text!r}")
    return values


def _common(p):
    p.add_argument("--config", help="key=value file; flags given on the command line win")
    p.add_argument("--delta", type=float, help="two-level splitting (required)")
    p.add_argument("--g", help="coupling; a number, list or start:stop:count")
    p.add_argument("--g-over-gc", dest="g_over_gc", help="coupling in units of g_c")
    p.add_argument("--n-max", dest="n_max", type=int, default=200, help="Fock truncation")
    p.add_argument("--quad-order", dest="quad_order", type=int, default=None)
    p.add_argument("--levels", type=int, default=10, help="number of eigenpairs")
    p.add_argument("--solver", choices=("bo", "ed", "both"), default="both")
    p.add_argument("--branch", choices=("minus", "plus"), default="minus")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("-o", "--output", default="-", help="output path, '-' for stdout")


def _grid(p):
    p.add_argument("--xi-min", dest="xi_min", type=float, default=-8.0)
    p.add_argument("--xi-max", dest="xi_max", type=float, default=8.0)
    p.add_argument("--points", type=int, default=801)


def _fit_opts(p, fit_default):
    p.add_argument("--state", type=int, default=0, help="eigenstate index")
    p.add_argument("--mode", choices=(PROJECTED, COEFFICIENTS), default=PROJECTED,
                   help="BO population definition")
    p.add_argument("--fit", choices=("all", "even", "odd", "none"), default=fit_default,
                   help="Fock subset to fit")
    p.add_argument("--pin-shift", dest="pin_shift", action="store_true",
                   help="fix n0 = 0 in the fits")


def build_parser():
    parser = _Parser(prog=PROG, description="Quantum Rabi model by two successive diagonalizations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("spectrum", help="lowest energies and parities at one coupling")
    _common(p)

    p = sub.add_parser("sweep", help="energies and photon numbers over a coupling grid")
    _common(p)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("potential", help="adiabatic surfaces and effective potentials")
    _common(p)
    _grid(p)

    p = sub.add_parser("wavefunction", help="BO wavefunctions on a position grid")
    _common(p)
    _grid(p)
    p.add_argument("--states", default="0", help="comma list of state indices")

    p = sub.add_parser("population", help="photon population with distribution fits")
    _common(p)
    _fit_opts(p, "all")

    p = sub.add_parser("fit", help="fit one or all families to a population")
    _common(p)
    _fit_opts(p, "all")
    p.add_argument("--family", choices=analysis.FAMILIES + ("all",), default="all")

    p = sub.add_parser("convergence", help="energies against the Fock truncation")
    _common(p)
    p.add_argument("--n-values", dest="n_values", default="50,100,150,200,250")

    p = sub.add_parser("compare", help="BO against ED level by level")
    _common(p)
    p.add_argument("--mode", choices=(PROJECTED, COEFFICIENTS), default=PROJECTED)
    return parser


def read_config(path):
    """``key=value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (t.strip() for t in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _flag_args(argv):
    """Destinations given explicitly on the command line."""
    given = set()
    for tok in argv:
        if tok.startswith("--"):
            given.add(tok[2:].split("=", 1)[0].replace("-", "_"))
        elif tok == "-o":
            given.add("output")
    return given


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        given = _flag_args(argv)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        actions = {a.dest: a for a in sub._actions}
        for key, value in cfg.items():
            if key in ("config", "command", "help"):
                raise UsageError(f"key {key!r} not allowed in a config file")
            if key not in actions:
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            if key in given:
                continue
            act = actions[key]
            if isinstance(act, argparse._StoreTrueAction):
                low = value.lower()
                if low not in ("1", "0", "true", "false", "yes", "no"):
                    raise UsageError(f"config key {key!r} expects a boolean, got {value!r}")
                setattr(args, key, low in ("1", "true", "yes"))
                continue
            try:
                conv = act.type(value) if act.type else value
            except ValueError:
                raise UsageError(f"config key {key!r}: bad value {value!r}") from None
            if act.choices is not None and conv not in act.choices:
                raise UsageError(f"config key {key!r}: {value!r} not in {list(act.choices)}")
            setattr(args, key, conv)
    return args


# --- configuration -------------------------------------------------------


def resolve(args):
    """Validate ``args`` and return the fully resolved configuration dict."""
    cmd = args.command
    if args.delta is None:
        raise UsageError("--delta is required")
    if not math.isfinite(args.delta) or args.delta < 0:
        raise UsageError(f"--delta must be finite and >= 0, got {args.delta}")
    if (args.g is None) == (args.g_over_gc is None):
        raise UsageError("give exactly one of --g and --g-over-gc")
    solver = args.solver
    if cmd in ("potential", "wavefunction"):
        solver = "bo"
    elif cmd == "compare":
        solver = "both"
    elif cmd in ("population", "fit") and solver == "both":
        solver = "bo"
    if args.delta == 0 and solver != "ed":
        raise UsageError("delta = 0 is only supported with --solver ed")
    if args.n_max < 1:
        raise UsageError("--n-max must be >= 1")
    if args.levels < 1:
        raise UsageError("--levels must be >= 1")
    limit = 2 * args.n_max if solver == "ed" else args.n_max
    if args.levels > limit:
        raise UsageError(f"--levels {args.levels} exceeds {limit} for n_max={args.n_max}")
    if args.quad_order is not None and args.quad_order < 2 * args.n_max + 1:
        raise UsageError(f"--quad-order must be >= {2 * args.n_max + 1} for n_max={args.n_max}")

    g_c = critical_coupling_of(args.delta)
    if args.g is not None:
        gs = parse_values(args.g, "--g")
    else:
        gs = [r * g_c for r in parse_values(args.g_over_gc, "--g-over-gc")]
    if any(g < 0 for g in gs):
        raise UsageError("couplings must be >= 0")
    multi = cmd in ("sweep", "potential")
    if not multi and len(gs) != 1:
        raise UsageError(f"{cmd} takes a single coupling, got {len(gs)}")
    if cmd == "sweep" and any(b < a for a, b in zip(gs, gs[1:])):
        raise UsageError("sweep couplings must be ascending")

    cfg = {
        "command": cmd,
        "delta": float(args.delta),
        "g_c": g_c,
        "g": gs if multi else gs[0],
        "g_over_gc": [g / g_c for g in gs] if multi else gs[0] / g_c,
        "n_max": int(args.n_max),
        "quad_order": args.quad_order,
        "levels": int(args.levels),
        "solver": solver,
        "branch": args.branch,
        "format": args.format or DEFAULT_FORMAT.get(cmd, "csv"),
        "output": args.output,
    }
    if cmd in ("potential", "wavefunction"):
        if args.points < 2 or not args.xi_max > args.xi_min:
            raise UsageError("grid needs --points >= 2 and --xi-max > --xi-min")
        cfg.update(xi_min=args.xi_min, xi_max=args.xi_max, points=int(args.points))
    if cmd == "sweep":
        cfg["workers"] = max(1, int(args.workers))
    if cmd == "wavefunction":
        states = [int(v) for v in parse_values(args.states, "--states")]
        if any(k < 0 or k >= args.n_max for k in states):
            raise UsageError(f"--states must lie in [0, {args.n_max})")
        cfg["states"] = states
        cfg["levels"] = max(states) + 1
    if cmd in ("population", "fit"):
        if args.state < 0:
            raise UsageError("--state must be >= 0")
        cfg.update(state=int(args.state), mode=args.mode, fit=args.fit, pin_shift=bool(args.pin_shift))
        cfg["levels"] = max(cfg["levels"], args.state + 1)
        if cfg["levels"] > limit:
            raise UsageError(f"--state {args.state} needs more than {limit} levels")
        if cmd == "fit":
            if args.fit == "none":
                raise UsageError("fit needs a subset, not 'none'")
            cfg["family"] = args.family
    if cmd == "compare":
        cfg["mode"] = args.mode
    if cmd == "convergence":
        ns = [int(v) for v in parse_values(args.n_values, "--n-values")]
        if any(n < args.levels for n in ns):
            raise UsageError("every --n-values entry must be >= --levels")
        cfg["n_values"] = ns
    return cfg


# --- commands ------------------------------------------------------------


def _params(cfg, g):
    if cfg["delta"] == 0:
        return EDParams(0.0, g)
    return ModelParams(cfg["delta"], g)


def _bo(cfg, g, n_levels=None, n_max=None):
    return solve_bo(_params(cfg, g), cfg["branch"], n_max or cfg["n_max"],
                    n_levels or cfg["levels"], cfg["quad_order"])


def _ed(cfg, g, n_levels=None, n_max=None):
    return solve_ed(_params(cfg, g), n_max or cfg["n_max"], n_levels or cfg["levels"])


def _level_table(cfg, bo, ed, n):
    cols = ["index"]
    if bo is not None:
        cols += ["energy_bo", "parity_bo"]
    if ed is not None:
        cols += ["energy_ed", "parity_ed"]
    rows = []
    for k in range(n):
        row = {"index": k}
        if bo is not None:
            row.update(energy_bo=float(bo.energies[k]), parity_bo=bo.fock_parity[k])
        if ed is not None:
            row.update(energy_ed=float(ed.energies[k]), parity_ed=int(ed.parity[k]))
        rows.append(row)
    order = [c for c in ("index", "energy_bo", "energy_ed", "parity_bo", "parity_ed") if c in cols]
    return order, rows


def cmd_spectrum(cfg):
    g = cfg["g"]
    bo = _bo(cfg, g) if cfg["solver"] in ("bo", "both") else None
    ed = _ed(cfg, g) if cfg["solver"] in ("ed", "both") else None
    return _level_table(cfg, bo, ed, cfg["levels"])


def cmd_sweep(cfg):
    pts = sweep_coupling(cfg["delta"], cfg["g"], cfg["levels"], cfg["solver"], cfg["n_max"],
                         photon_states=cfg["levels"], branch=cfg["branch"],
                         quad_order=cfg["quad_order"], workers=cfg["workers"])
    has_bo = cfg["solver"] in ("bo", "both")
    has_ed = cfg["solver"] in ("ed", "both")
    cols = ["g_over_gc", "g", "index"]
    for key in ("energy", "parity", "photons"):
        cols += ([f"{key}_bo"] if has_bo else []) + ([f"{key}_ed"] if has_ed else [])
    rows = []
    for pt in pts:
        for k in range(cfg["levels"]):
            row = {"g_over_gc": pt.g_over_gc, "g": pt.g, "index": k}
            if has_bo:
                row.update(energy_bo=float(pt.energies_bo[k]), parity_bo=pt.parity_bo[k],
                           photons_bo=float(pt.photons_bo[k]))
            if has_ed:
                row.update(energy_ed=float(pt.energies_ed[k]), parity_ed=int(pt.parity_ed[k]),
                           photons_ed=float(pt.photons_ed[k]))
            rows.append(row)
    return cols, rows


def cmd_potential(cfg):
    xi = np.linspace(cfg["xi_min"], cfg["xi_max"], cfg["points"])
    cols = ["g_over_gc", "g", "xi", "eps_minus", "eps_plus", "v_minus", "v_plus", "gamma"]
    rows, minima = [], []
    for g in cfg["g"]:
        p = ModelParams(cfg["delta"], g)
        em = model.adiabatic_energy(p, Branch.MINUS, xi)
        ep = model.adiabatic_energy(p, Branch.PLUS, xi)
        vm = model.effective_potential(p, Branch.MINUS, xi)
        vp = model.effective_potential(p, Branch.PLUS, xi)
        gam = model.mixing_angle_gamma(p, xi)
        for i in range(xi.size):
            rows.append({"g_over_gc": p.g_over_gc, "g": g, "xi": float(xi[i]),
                         "eps_minus": float(em[i]), "eps_plus": float(ep[i]),
                         "v_minus": float(vm[i]), "v_plus": float(vp[i]), "gamma": float(gam[i])})
        minima.append({"g": g, "g_over_gc": p.g_over_gc, "minima": model.potential_minima(p),
                       "double_well": model.has_double_well(p)})
    return cols, rows, {"minima": minima}


def cmd_wavefunction(cfg):
    spec = _bo(cfg, cfg["g"])
    grid = wavefunctions_on_grid(spec, default_grid(cfg["xi_min"], cfg["xi_max"], cfg["points"]))
    cols = ["index", "energy", "xi", "psi", "phi_up", "phi_down"]
    rows = []
    for k in cfg["states"]:
        e = float(spec.energies[k])
        for i in range(grid.xi.size):
            rows.append({"index": k, "energy": e, "xi": float(grid.xi[i]),
                         "psi": float(grid.psi[k, i]),
                         "phi_up": float(grid.components[k, i, 0]),
                         "phi_down": float(grid.components[k, i, 1])})
    return cols, rows


def _population(cfg):
    g = cfg["g"]
    if cfg["solver"] == "ed":
        spec = _ed(cfg, g)
        return population_from_ed(spec, cfg["state"]), float(spec.energies[cfg["state"]])
    spec = _bo(cfg, g)
    return population_from_bo(spec, cfg["state"], cfg["mode"]), float(spec.energies[cfg["state"]])


def cmd_population(cfg):
    pop, energy = _population(cfg)
    n = pop.n
    cols = ["n", "parity", "p"]
    extra = {"energy": energy, "mean_n": pop.mean_n, "even_mass": pop.even_mass,
             "odd_mass": pop.odd_mass, "source": pop.source, "deficit": pop.deficit}
    cls = None
    if cfg["fit"] != "none":
        cls = classify_population(pop, cfg["fit"], cfg["pin_shift"])
        cols += [f"fit_{f.lower()}" for f in analysis.FAMILIES]
        extra["selected"] = cls.family
        extra["tie_rule"] = cls.tie_rule
        extra["fits"] = [cls.fits[f].as_dict() for f in analysis.FAMILIES]
    rows = []
    for i in range(n.size):
        row = {"n": int(n[i]), "parity": "even" if n[i] % 2 == 0 else "odd", "p": float(pop.p[i])}
        if cls is not None:
            for f in analysis.FAMILIES:
                row[f"fit_{f.lower()}"] = float(cls.fits[f].curve(n[i]))
        rows.append(row)
    return cols, rows, extra


def cmd_fit(cfg):
    pop, _ = _population(cfg)
    families = analysis.FAMILIES if cfg["family"] == "all" else (cfg["family"],)
    if cfg["family"] == "all":
        cls = classify_population(pop, cfg["fit"], cfg["pin_shift"])
        fits, selected = [cls.fits[f] for f in families], cls.family
    else:
        fits = [fit_distribution(pop, families[0], cfg["fit"], cfg["pin_shift"])]
        selected = families[0]
    cols = ["family", "amplitude", "scale", "shift", "rss", "points_used", "subset",
            "pinned_shift", "selected"]
    rows = []
    for f in fits:
        d = f.as_dict()
        d["pinned_shift"] = int(d["pinned_shift"])
        d["selected"] = int(f.family == selected)
        rows.append(d)
    return cols, rows


def cmd_convergence(cfg):
    g = cfg["g"]
    has_bo = cfg["solver"] in ("bo", "both")
    has_ed = cfg["solver"] in ("ed", "both")
    cols = ["n_max", "index"] + (["energy_bo"] if has_bo else []) + (["energy_ed"] if has_ed else [])
    rows = []
    for n_max in cfg["n_values"]:
        bo = solve_bo(_params(cfg, g), cfg["branch"], n_max, cfg["levels"]) if has_bo else None
        ed = _ed(cfg, g, n_max=n_max) if has_ed else None
        for k in range(cfg["levels"]):
            row = {"n_max": n_max, "index": k}
            if has_bo:
                row["energy_bo"] = float(bo.energies[k])
            if has_ed:
                row["energy_ed"] = float(ed.energies[k])
            rows.append(row)
    return cols, rows


def cmd_compare(cfg):
    g = cfg["g"]
    bo, ed = _bo(cfg, g), _ed(cfg, g)
    cols = ["index", "energy_bo", "energy_ed", "abs_diff", "photons_bo", "photons_ed",
            "population_tv"]
    rows = []
    for k in range(cfg["levels"]):
        pb = population_from_bo(bo, k, cfg["mode"])
        pe = population_from_ed(ed, k)
        rows.append({
            "index": k,
            "energy_bo": float(bo.energies[k]),
            "energy_ed": float(ed.energies[k]),
            "abs_diff": abs(float(bo.energies[k] - ed.energies[k])),
            "photons_bo": photon_number_bo(bo, k, cfg["mode"]),
            "photons_ed": photon_number_ed(ed.state(k)),
            "population_tv": total_variation(pb.p, pe.p),
        })
    return cols, rows


HANDLERS = {
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "potential": cmd_potential,
    "wavefunction": cmd_wavefunction,
    "population": cmd_population,
    "fit": cmd_fit,
    "convergence": cmd_convergence,
    "compare": cmd_compare,
}


# --- serialization -------------------------------------------------------


def fmt_float(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ComputeError(f"non-finite value {x!r} in output")
    return format(x, ".17g")


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    return str(v)


def to_csv(cols, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_cell(row[c]) for c in cols])
    return buf.getvalue()


def _json(v, indent, level=0):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(x, indent, level + 1)}" for k, x in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        seq = list(v)
        if not seq:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in seq):
            return "[" + ", ".join(_json(x, indent, level + 1) for x in seq) + "]"
        return "[\n" + ",\n".join(pad + _json(x, indent, level + 1) for x in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def to_json(obj) -> str:
    """JSON text with every float at 17 significant digits; NaN is an error."""
    return _json(obj, 2) + "\n"


def meta(cfg):
    return {
        "program": PROG,
        "config": {k: v for k, v in cfg.items() if k != "output"},
        "versions": {
            PROG: __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "kernels": kernels.BACKEND,
        },
    }


def render(cfg, result) -> str:
    cols, rows = result[0], result[1]
    extra = result[2] if len(result) > 2 else {}
    if cfg["format"] == "csv":
        return to_csv(cols, rows)
    data = {"columns": list(cols), "rows": [[row[c] for c in cols] for row in rows]}
    data.update(extra)
    return to_json({"meta": meta(cfg), "data": data})


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file in the same directory."""
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".rabi-bo-", suffix=".tmp", dir=folder)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- entry point ---------------------------------------------------------


def _fail(kind, message, code):
    msg = " ".join(str(message).split())
    print(f"{PROG}: error[{kind}]: {msg}", file=sys.stderr)
    return code


def run(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        cfg = resolve(args)
    except UsageError as exc:
        return _fail("usage", exc, 2)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        text = render(cfg, HANDLERS[cfg["command"]](cfg))
    except (EigenSolverError, ComputeError, ValueError, ArithmeticError) as exc:
        return _fail("compute", exc, 1)
    try:
        if cfg["output"] in ("-", ""):
            stdout.write(text)
            stdout.flush()
        else:
            write_atomic(cfg["output"], text)
    except OSError as exc:
        return _fail("io", f"{cfg['output']}: {exc.strerror or exc}", 1)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
