"""Command line front end: ``qbell gen | classify | sweep``.

Exit codes: 0 success, 1 usage or input error, 2 numerical assertion failure.
``QBELL_MAX_DIM`` overrides the cap on the dense dimension d² (default 64).
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__, belldiag, circulant, families, matcore, witness
from .belldiag import BellProbabilities
from .documents import (
    DocumentError,
    LoadedState,
    bell_document,
    circulant_document,
    dense_document,
    read_document,
    resolve,
)
from .errors import ConvergenceError

log = logging.getLogger("qbell")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
DEFAULT_MAX_DIM2 = 64


class UsageError(Exception):
    pass


class NumericalAssertionError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def max_dim2() -> int:
    raw = os.environ.get("QBELL_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM2
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"QBELL_MAX_DIM must be an integer, got {raw!r}") from None
    if value < 1:
        raise UsageError("QBELL_MAX_DIM must be positive")
    return value


def _check_dim(d: int) -> None:
    cap = max_dim2()
    if d * d > cap:
        raise UsageError(f"d^2 = {d * d} exceeds the dense cap {cap} (set QBELL_MAX_DIM to raise it)")


def _floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def fmt(x) -> str:
    """CSV cell: 15 significant digits, scientific."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.14e}"


# -- witness battery ----------------------------------------------------------


def parse_witness(spec: str, d: int):
    """``reduction``, ``flip``, ``choi:a,b,c``, ``lambda-mu:l,m``, ``wdk:k`` or ``file:path``."""
    name, _, arg = spec.partition(":")
    try:
        if name == "reduction":
            return "reduction", witness.reduction_witness(d)
        if name == "flip":
            return "flip", witness.flip(d)
        if name == "choi":
            a, b, c = _floats(arg)
            _need_d(d, 3, spec)
            return f"choi[{a:g},{b:g},{c:g}]", witness.choi_witness(a, b, c)
        if name == "lambda-mu":
            lam, mu = _floats(arg)
            _need_d(d, 3, spec)
            return f"lambda_mu[{lam:g},{mu:g}]", witness.w_lambda_mu(lam, mu)
        if name == "wdk":
            k = int(arg)
            return f"wdk[{d},{k}]", witness.w_dk(d, k)
        if name == "file":
            loaded = resolve(read_document(arg))
            if loaded.doc.d != d:
                raise UsageError(f"witness file {arg} has d={loaded.doc.d}, state has d={d}")
            return loaded.doc.metadata.get("id", arg), loaded.dense
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"bad witness spec {spec!r}: {exc}") from None
    raise UsageError(f"unknown witness {spec!r}")


def _need_d(d, want, spec):
    if d != want:
        raise UsageError(f"witness {spec!r} needs d={want}, state has d={d}")


def default_battery(d: int) -> List[str]:
    specs = ["reduction"]
    if d == 2:
        specs.append("flip")
    if d == 3:
        specs += ["choi:1,1,0", "choi:1,0,1"]
    if d >= 4:
        specs += [f"wdk:{k}" for k in range(1, d - 1)]
    return specs


# -- classification -----------------------------------------------------------


@dataclass
class ClassificationReport:
    d: int
    kind: str
    hermitian: bool
    unit_trace: bool
    psd: bool
    ppt_closed_form: bool
    ppt_oracle: bool
    ccnr_value: float
    min_pt_eigenvalue: float
    witness_results: List[dict] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    version: str = __version__


def classify(loaded: LoadedState, witness_specs: Optional[Sequence[str]] = None, tol: float = matcore.PSD_TOL):
    """Run every criterion on a resolved state document.

    Raises :class:`NumericalAssertionError` if the closed-form PPT verdict
    disagrees with the dense partial-transpose oracle.
    """
    d = loaded.doc.d
    _check_dim(d)
    rho = loaded.dense
    cs = loaded.circulant
    notes = []

    hermitian = matcore.hermiticity_defect(rho) <= matcore.HERMITIAN_TOL
    unit_trace = abs(np.trace(rho) - 1.0) <= 1e-10
    if not hermitian:
        raise UsageError("state is not Hermitian; nothing to classify")
    psd = matcore.is_psd(rho, tol)

    if loaded.bell is not None:
        ppt_closed = belldiag.is_ppt_bell(loaded.bell, tol)
        notes.append("closed-form PPT: orbit-representative tilde blocks (Bell diagonal)")
    else:
        ppt_closed = circulant.is_ppt(cs, tol)
        notes.append("closed-form PPT: all tilde blocks (circulant)")
    pt = matcore.brute_partial_transpose(rho, d)
    pt_min = matcore.min_eigenvalue(pt)
    ppt_oracle = matcore.is_psd(pt, tol)
    if ppt_closed != ppt_oracle:
        raise NumericalAssertionError(
            f"closed-form PPT verdict {ppt_closed} disagrees with dense oracle {ppt_oracle} "
            f"(min PT eigenvalue {pt_min:.3e})"
        )
    ccnr = circulant.ccnr_value(cs)
    if ccnr > 1 + 1e-10:
        notes.append("CCNR value exceeds 1: entangled")
    if ppt_oracle and ccnr > 1 + 1e-10:
        notes.append("PPT and entangled: bound entangled")

    results = []
    state_id = loaded.doc.metadata.get("id", loaded.doc.kind)
    for spec in witness_specs if witness_specs is not None else default_battery(d):
        wid, W = parse_witness(spec, d)
        v = witness.evaluate(W, rho, witness_id=wid, state_id=state_id)
        results.append(asdict(v))

    family = loaded.doc.metadata.get("family") or (
        loaded.doc.payload.get("name") if loaded.doc.kind == "family" else None
    )
    notes += _family_notes(loaded, family)
    return ClassificationReport(
        d=d,
        kind=loaded.doc.kind,
        hermitian=bool(hermitian),
        unit_trace=bool(unit_trace),
        psd=bool(psd),
        ppt_closed_form=bool(ppt_closed),
        ppt_oracle=bool(ppt_oracle),
        ccnr_value=ccnr,
        min_pt_eigenvalue=pt_min,
        witness_results=results,
        notes=notes,
    )


def _family_notes(loaded: LoadedState, family: Optional[str]) -> List[str]:
    bp = loaded.bell
    if bp is None or family is None:
        return []
    if family == "epsilon":
        return ["epsilon family: PPT for every eps > 0; claimed separable only at eps = 1"]
    if family == "delta":
        row = int(np.argmax(bp.p.sum(axis=1)))
        return families.delta_evidence(bp.p[row], row).notes
    if family == "product":
        q = bp.p.sum(axis=1)
        p = bp.p.sum(axis=0)
        return families.product_evidence(q, p).notes
    return []


def report_rows(report: ClassificationReport) -> List[Dict[str, object]]:
    row = {k: v for k, v in asdict(report).items() if k not in ("witness_results", "notes")}
    for r in report.witness_results:
        row[f"w:{r['witness_id']}"] = r["value"]
    return [row]


# -- sweeps -------------------------------------------------------------------


def _grid(start, stop, num, spacing):
    if num < 1:
        raise UsageError("--num must be >= 1")
    if spacing == "log":
        if start <= 0 or stop <= 0:
            raise UsageError("log spacing needs positive endpoints")
        return np.geomspace(start, stop, num)
    return np.linspace(start, stop, num)


def sweep_epsilon(args) -> List[Dict[str, object]]:
    rows = []
    W110 = witness.choi_witness(1, 1, 0)
    W101 = witness.choi_witness(1, 0, 1)
    Wr = witness.reduction_witness(3)
    for eps in _grid(args.start, args.stop, args.num, args.spacing or "log"):
        if eps <= 0:
            raise UsageError("eps must be positive")
        bp = families.rho_epsilon(float(eps))
        cs = belldiag.to_circulant(bp)
        rho = circulant.assemble_dense(cs)
        rows.append({
            "eps": float(eps),
            "ppt": belldiag.is_ppt_bell(bp, args.tol),
            "min_pt_eigenvalue": min(matcore.min_eigenvalue(t) for t in circulant.tilde_blocks(cs).blocks),
            "ccnr": circulant.ccnr_value(cs),
            "w_choi_1_1_0": witness.evaluate(W110, rho).value,
            "w_choi_1_0_1": witness.evaluate(W101, rho).value,
            "w_reduction": witness.evaluate(Wr, rho).value,
        })
    return rows


def sweep_gamma(args) -> List[Dict[str, object]]:
    rows = []
    W = witness.w_lambda_mu(args.lam, args.mu)
    for gamma in _grid(args.start, args.stop, args.num, args.spacing or "linear"):
        if gamma <= 0:
            raise UsageError("gamma must be positive")
        bp = families.rho_gamma(3, float(gamma))
        cs = belldiag.to_circulant(bp)
        rho = circulant.assemble_dense(cs)
        rows.append({
            "gamma": float(gamma),
            "lambda": args.lam,
            "mu": args.mu,
            "in_region": witness.in_detection_region(gamma, args.lam, args.mu),
            "min_pt_eigenvalue": min(matcore.min_eigenvalue(t) for t in circulant.tilde_blocks(cs).blocks),
            "ccnr": circulant.ccnr_value(cs),
            "w_lambda_mu": witness.evaluate(W, rho).value,
        })
    return rows


def sweep_choi(args) -> List[Dict[str, object]]:
    rows = []
    axis = _grid(args.start, args.stop, args.num, args.spacing or "linear")
    if axis.min() < 0:
        raise UsageError("choi parameters must be nonnegative")
    for i, a in enumerate(axis):
        for j, b in enumerate(axis):
            for k, c in enumerate(axis):
                W = witness.choi_witness(a, b, c)
                seed = args.seed + (i * args.num + j) * args.num + k
                rows.append({
                    "a": float(a),
                    "b": float(b),
                    "c": float(c),
                    "valid": witness.is_choi_ew(a, b, c),
                    "min_eigenvalue": matcore.min_eigenvalue(W),
                    "sampled_block_min": witness.block_positivity_sample(W, args.trials, seed),
                })
    return rows


SWEEPS: Dict[str, Callable] = {"epsilon": sweep_epsilon, "gamma": sweep_gamma, "choi": sweep_choi}


def rows_to_csv(rows: List[Dict[str, object]]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0].keys())
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(row[h]) for h in header])
    return buf.getvalue()


# -- gen ----------------------------------------------------------------------


def _gen(args):
    what = args.what
    if what == "bell":
        if args.p is None:
            raise UsageError("gen bell needs --p")
        bp = belldiag.parse_probabilities(args.p, args.d)
        return bell_document(bp)
    if what == "random-bell":
        rng = np.random.default_rng(args.seed)
        p = rng.dirichlet(np.ones(args.d * args.d)).reshape(args.d, args.d)
        return bell_document(BellProbabilities(p / p.sum()), {"seed": args.seed})
    if what == "random-circulant":
        _check_dim(args.d)
        cs = circulant.random_circulant(args.d, np.random.default_rng(args.seed))
        return circulant_document(cs, {"seed": args.seed})
    if what == "family":
        return _gen_family(args)
    if what == "witness":
        return _gen_witness(args)
    raise UsageError(f"unknown generator {what!r}")


def _gen_family(args):
    name = args.name
    if name == "epsilon":
        _need(args, "eps")
        bp = families.rho_epsilon(args.eps)
        params = {"eps": args.eps}
    elif name == "gamma":
        _need(args, "gamma")
        bp = families.rho_gamma(args.d, args.gamma)
        params = {"d": args.d, "gamma": args.gamma}
    elif name == "delta":
        _need(args, "pi")
        bp = families.delta_distribution(len(args.pi), args.k, args.pi)
        params = {"k": args.k, "pi": args.pi}
    elif name == "product":
        _need(args, "q")
        _need(args, "p")
        bp = families.product_distribution(len(args.p), args.q, args.p)
        params = {"q": args.q, "p": args.p}
    else:
        raise UsageError(f"unknown family {name!r}")
    return bell_document(bp, {"family": name, **params})


def _gen_witness(args):
    name = args.name
    spec = {
        "reduction": "reduction",
        "flip": "flip",
        "choi": f"choi:{args.a},{args.b},{args.c}",
        "lambda-mu": f"lambda-mu:{args.lam},{args.mu}",
        "wdk": f"wdk:{args.k}",
    }.get(name)
    if spec is None:
        raise UsageError(f"unknown witness {name!r}")
    d = 3 if name in ("choi", "lambda-mu") else args.d
    _check_dim(d)
    wid, W = parse_witness(spec, d)
    return dense_document(W, d, {"role": "witness", "id": wid})


def _need(args, name):
    if getattr(args, name, None) is None:
        raise UsageError(f"missing --{name}")


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (unsigned 64-bit)")
    common.add_argument("--tol", type=float, default=matcore.PSD_TOL, help="PSD tolerance (default 1e-10)")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), help="output format")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="qbell", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", parents=[common], help="write a state or witness document")
    gen.add_argument("what", choices=("bell", "random-bell", "random-circulant", "family", "witness"))
    gen.add_argument("name", nargs="?", help="family or witness name")
    gen.add_argument("--d", type=int, default=3)
    gen.add_argument("--p", type=_floats)
    gen.add_argument("--q", type=_floats)
    gen.add_argument("--pi", type=_floats)
    gen.add_argument("--k", type=int, default=0)
    gen.add_argument("--eps", type=float)
    gen.add_argument("--gamma", type=float)
    gen.add_argument("--a", type=float, default=1.0)
    gen.add_argument("--b", type=float, default=1.0)
    gen.add_argument("--c", type=float, default=0.0)
    gen.add_argument("--lam", type=float, default=0.0)
    gen.add_argument("--mu", type=float, default=0.0)

    cl = sub.add_parser("classify", parents=[common], help="classify a state document")
    cl.add_argument("state")
    cl.add_argument(
        "--witness", action="append", dest="witnesses",
        help="reduction | flip | choi:a,b,c | lambda-mu:l,m | wdk:k | file:path (repeatable)",
    )

    sw = sub.add_parser("sweep", parents=[common], help="tabulate criteria over a parameter grid")
    sw.add_argument("family", choices=sorted(SWEEPS))
    sw.add_argument("--start", type=float, required=True)
    sw.add_argument("--stop", type=float, required=True)
    sw.add_argument("--num", type=int, default=50)
    sw.add_argument("--spacing", choices=("linear", "log"))
    sw.add_argument("--lam", type=float, default=0.1)
    sw.add_argument("--mu", type=float, default=0.05)
    sw.add_argument("--trials", type=int, default=2000, help="product samples per choi grid point")
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(args) -> None:
    if args.seed < 0 or args.seed >= 2**64:
        raise UsageError("--seed must be an unsigned 64-bit integer")
    if args.command == "gen":
        if args.format == "csv":
            raise UsageError("gen writes JSON documents only")
        _emit(_gen(args).dumps(), args.out)
    elif args.command == "classify":
        report = classify(resolve(read_document(args.state)), args.witnesses, args.tol)
        if args.format == "csv":
            _emit(rows_to_csv(report_rows(report)), args.out)
        else:
            _emit(json.dumps(asdict(report), indent=2) + "\n", args.out)
    else:
        rows = SWEEPS[args.family](args)
        if args.format == "json":
            _emit(json.dumps({"version": __version__, "rows": rows}, indent=2) + "\n", args.out)
        else:
            _emit(rows_to_csv(rows), args.out)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version, usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        run(args)
    except (NumericalAssertionError, ConvergenceError) as exc:
        print(f"qbell: numerical assertion failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, DocumentError, ValueError, OSError) as exc:
        print(f"qbell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK
