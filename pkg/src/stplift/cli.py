"""Command-line front end.

    stplift bounds example3.json --k 8
    stplift gripenberg example3.json --delta 0.02
    stplift lift example3.json --edge-lift --out lifted.json
    stplift tproduct example3.json --t 2
    stplift accepts example2.json 231 22
    stplift report example1.json --schedule 1,2,4,7

Exit status: 0 on success, 2 when a result is certified but truncated by the
product cap, 1 on any error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import __version__
from .automaton import accepts
from .io import Document, LoadError, dumps, load_document, system_to_dict
from .radius import (
    DEFAULT_PRODUCT_CAP,
    BoundsResult,
    cjsr_bounds,
    cjsr_bounds_via_lift,
    gripenberg,
    jsr_bounds,
    markovian_bounds,
)
from .spectra import NormKind
from .systems import edge_lift, omega_lift, stp_lift, t_product_lift
from .tensor import Word

COMMANDS = ("bounds", "lift", "gripenberg", "tproduct", "accepts", "report")
NORM_CHOICES = ("one", "inf", "fro", "two")


@dataclass
class RunConfig:
    command: str
    input_path: str
    k: Optional[int] = None
    delta: Optional[float] = None
    norm: str = "two"
    cap: int = DEFAULT_PRODUCT_CAP
    output: str = "text"
    threads: int = 1
    out: Optional[str] = None
    t: Optional[int] = None
    words: list = field(default_factory=list)
    schedule: Optional[list] = None
    method: str = "direct"
    edge_lift: bool = False
    omega_lift: bool = False
    timing: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.k is not None and self.k < 1:
            raise ValueError("--k must be positive")
        if self.delta is not None and self.delta <= 0:
            raise ValueError("--delta must be positive")
        if self.command == "gripenberg" and self.k is not None:
            raise ValueError("gripenberg takes --delta, not --k")
        if self.command in ("bounds", "report") and self.delta is not None:
            raise ValueError(f"{self.command} takes --k, not --delta")
        if self.threads < 1:
            raise ValueError("--threads must be positive")


def _fmt(x: float) -> str:
    return format(x, ".12g")


def _norm_for(doc: Document, name: str) -> NormKind:
    base = NormKind.parse(name)
    return NormKind.block(base, doc.block) if doc.block else base


def _bounds(doc: Document, cfg: RunConfig, k: int) -> BoundsResult:
    if doc.system is None:
        raise LoadError(f"{cfg.input_path}: file describes a DFA, not a system")
    if doc.dfa is not None:
        fn = cjsr_bounds_via_lift if cfg.method == "lift" else cjsr_bounds
        return fn(doc.constrained, k, NormKind.parse(cfg.norm), cap=cfg.cap, threads=cfg.threads)
    if doc.omega is not None:
        return markovian_bounds(doc.system, doc.omega, k, NormKind.parse(cfg.norm), cap=cfg.cap, threads=cfg.threads)
    return jsr_bounds(doc.system, k, _norm_for(doc, cfg.norm), cap=cfg.cap, threads=cfg.threads)


def _gripenberg(doc: Document, cfg: RunConfig) -> BoundsResult:
    if doc.system is None:
        raise LoadError(f"{cfg.input_path}: file describes a DFA, not a system")
    delta = 0.05 if cfg.delta is None else cfg.delta
    base = NormKind.parse(cfg.norm)
    if doc.dfa is not None:
        lifted = stp_lift(doc.constrained)
        system, kind = lifted.as_system(), NormKind.block(base, lifted.ell)
    elif doc.omega is not None:
        system, kind = omega_lift(doc.system, doc.omega), NormKind.block(base, doc.system.arity)
    else:
        system, kind = doc.system, _norm_for(doc, cfg.norm)
    return gripenberg(system, delta, kind, cfg.cap, threads=cfg.threads)


def _result_text(res: BoundsResult, norm: str, timing: bool) -> str:
    label = "delta" if res.method == "gripenberg" else "k"
    horizon = _fmt(res.horizon_or_delta) if res.method == "gripenberg" else str(res.horizon_or_delta)
    lines = [
        f"method      {res.method}",
        f"norm        {norm}",
        f"{label:<12}{horizon}",
        f"lower       {_fmt(res.lower)}",
        f"upper       {_fmt(res.upper)}",
        f"witness     {res.lower_witness if res.lower_witness is not None else '-'}",
        f"products    {res.products_evaluated}",
        f"truncated   {'yes' if res.truncated else 'no'}",
        f"verdict     {res.verdict}",
    ]
    if timing:
        lines.append(f"wall_time   {res.wall_time:.3f}s")
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute one command and return ``(exit code, report text)``."""
    doc = load_document(cfg.input_path)
    code = 0
    if cfg.command in ("bounds", "gripenberg"):
        res = _bounds(doc, cfg, cfg.k or 6) if cfg.command == "bounds" else _gripenberg(doc, cfg)
        code = 2 if res.truncated else 0
        if cfg.output == "json":
            data = res.to_dict(timing=cfg.timing)
            data["norm"] = cfg.norm
            return code, dumps(data)
        return code, _result_text(res, cfg.norm, cfg.timing)

    if cfg.command == "report":
        schedule = cfg.schedule or list(range(1, (cfg.k or 6) + 1))
        rows = []
        for k in schedule:
            res = _bounds(doc, cfg, k)
            code = max(code, 2 if res.truncated else 0)
            rows.append({"k": k, **res.to_dict(timing=cfg.timing)})
        return code, dumps({"input": str(cfg.input_path), "norm": cfg.norm, "rows": rows})

    if cfg.command == "accepts":
        if doc.dfa is None:
            raise LoadError(f"{cfg.input_path}: no DFA found")
        results = []
        for text in cfg.words:
            w = Word.parse(text, doc.dfa.num_labels)
            results.append((str(w), accepts(doc.dfa, w)))
        if cfg.output == "json":
            return 0, dumps([{"word": w, "accepted": ok} for w, ok in results])
        return 0, "".join(f"{w} {'accept' if ok else 'reject'}\n" for w, ok in results)

    if doc.system is None:
        raise LoadError(f"{cfg.input_path}: file describes a DFA, not a system")

    if cfg.command == "lift":
        if doc.dfa is not None:
            lifted = stp_lift(doc.constrained)
            data = system_to_dict(lifted.as_system(), block=lifted.ell)
            if cfg.edge_lift:
                data["edge_lift"] = {
                    "edges": [list(e) for e in doc.dfa.edges],
                    "matrices": [a.tolist() for a in edge_lift(doc.constrained)],
                }
            if cfg.omega_lift and doc.omega is not None:
                data["omega_lift"] = system_to_dict(omega_lift(doc.system, doc.omega), block=doc.system.arity)
        elif doc.omega is not None:
            data = system_to_dict(omega_lift(doc.system, doc.omega), block=doc.system.arity)
        else:
            raise LoadError(f"{cfg.input_path}: nothing to lift (no 'dfa' or 'omega')")
        return 0, dumps(data)

    # tproduct
    if doc.dfa is None:
        raise LoadError(f"{cfg.input_path}: the T-product lift needs a 'dfa'")
    lifted = t_product_lift(doc.constrained, cfg.t or 2, limit=cfg.cap)
    return 0, dumps(system_to_dict(lifted.system, dfa=lifted.dfa, label_words=lifted.label_words))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stplift", description="JSR / constrained JSR bounds via the STP lift.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, numeric=True):
        p.add_argument("input", help="system or DFA JSON file")
        p.add_argument("--output", choices=("text", "json"), default="text")
        p.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
        if numeric:
            p.add_argument("--norm", choices=NORM_CHOICES, default="two")
            p.add_argument("--cap", type=int, default=DEFAULT_PRODUCT_CAP, help="product budget")
            p.add_argument("--threads", type=int, default=1)
            p.add_argument("--timing", action="store_true", help="include wall-clock time")

    p = sub.add_parser("bounds", help="fixed-horizon lower/upper bounds")
    common(p)
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--method", choices=("direct", "lift"), default="direct",
                   help="constrained systems: enumerate accepted words, or bound the STP lift")

    p = sub.add_parser("gripenberg", help="branch-and-bound bracket of width delta")
    common(p)
    p.add_argument("--delta", type=float, default=0.05)

    p = sub.add_parser("report", help="bounds over a schedule of horizons, as JSON")
    common(p)
    p.add_argument("--k", type=int, default=6)
    p.add_argument("--schedule", help="comma-separated horizons (default 1..k)")
    p.add_argument("--method", choices=("direct", "lift"), default="direct")

    p = sub.add_parser("lift", help="write the lifted matrices {F_i ⊗ A_i} as JSON")
    common(p, numeric=False)
    p.add_argument("--edge-lift", action="store_true", help="also write one matrix per DFA edge")
    p.add_argument("--omega-lift", action="store_true", help="also write the Ω-lift when 'omega' is given")

    p = sub.add_parser("tproduct", help="write the T-product system as JSON")
    common(p, numeric=False)
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--cap", type=int, default=DEFAULT_PRODUCT_CAP, help="maximum number of new labels")

    p = sub.add_parser("accepts", help="check words against the DFA")
    common(p, numeric=False)
    p.add_argument("words", nargs="+", help="words such as 231 or 2,3,1")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    schedule = None
    if getattr(args, "schedule", None):
        schedule = [int(x) for x in args.schedule.split(",") if x.strip()]
    return RunConfig(
        command=args.command,
        input_path=args.input,
        k=getattr(args, "k", None),
        delta=getattr(args, "delta", None),
        norm=getattr(args, "norm", "two"),
        cap=getattr(args, "cap", DEFAULT_PRODUCT_CAP),
        output=args.output if args.command != "report" else "json",
        threads=getattr(args, "threads", 1),
        out=args.out,
        t=getattr(args, "t", None),
        words=getattr(args, "words", []),
        schedule=schedule,
        method=getattr(args, "method", "direct"),
        edge_lift=getattr(args, "edge_lift", False),
        omega_lift=getattr(args, "omega_lift", False),
        timing=getattr(args, "timing", False),
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        code, text = run(cfg)
    except (ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
