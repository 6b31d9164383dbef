"""Command-line interface.

Exit codes: 0 ok, 1 validation failure, 2 usage error, 3 internal
consistency error.  ``--report`` adds ``#key=value`` lines on stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile
import time

from .field import FieldError
from .gen import GenSpec, random_block_twd, random_twd
from .matprod import (DenseMatrix, MatrixError, decode_matrix, dump_fqm,
                      multiply_naive, multiply_twd, parse_fqm, split_blocks)
from .minors import (GuardrailError, LatinError, MinorError, apply_script,
                     division_stats, dump_msc, extract_from_latin,
                     is_minor_bruteforce, parse_msc)
from .square import CertificateError, distance_square_twd, modular_square_twd
from .trigraph import (Trigraph, TrigraphError, dump_ctr, parse_ctr,
                       validate_sequence)
from .twindec import (DecompositionError, dump_twd, entry_query, lift_up,
                      materialize, parse_twd, seq_to_twd, twd_to_seq,
                      validate_twd)

OK, INVALID, USAGE, INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _write_atomic(path: str, text: str) -> None:
    target = os.path.abspath(path)
    folder = os.path.dirname(target)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=folder)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _header(text: str) -> str:
    for ln in text.splitlines():
        toks = ln.split()
        if toks and not toks[0].startswith("#"):
            return toks[0]
    return ""


def _load_twd(path):
    return parse_twd(_read(path))


def _load_fqm(path):
    return parse_fqm(_read(path))


def _load_matrix(path) -> DenseMatrix:
    """An FQM matrix, or the A block of a TWD for a bipartite structure."""
    text = _read(path)
    if _header(text) == "TWD":
        return decode_matrix(parse_twd(text))
    return parse_fqm(text)


def _graph(path) -> Trigraph:
    M = _load_fqm(path)
    if M.rows != M.cols:
        raise MatrixError("a graph file must hold a square matrix")
    return Trigraph.from_dense(M.entries, M.field)


class _Out:
    def __init__(self, report: bool):
        self.report = report

    def info(self, msg: str):
        print(msg, file=sys.stderr)

    def kv(self, **items):
        if self.report:
            for k, v in items.items():
                print(f"#{k}={v}")


# ---------------------------------------------------------------------------
# commands

def cmd_validate(a, out: _Out) -> int:
    if a.twd:
        D = _load_twd(a.twd)
        width = validate_twd(D)
        out.info(f"twin-decomposition on {D.n} leaves, {len(D.bedges)} bedges, width {width}")
        out.kv(kind="twd", n=D.n, bedges=len(D.bedges), width=width)
    else:
        if not (a.ctr and a.graph):
            raise UsageError("validate needs --twd F or both --ctr F and --graph F")
        G = _graph(a.graph)
        S = parse_ctr(_read(a.ctr))
        width = validate_sequence(G, S).maxRedDegree
        out.info(f"contraction sequence on {len(G)} vertices, width {width}")
        out.kv(kind="ctr", n=len(G), width=width)
    print(width)
    if a.max_width is not None and width > a.max_width:
        out.info(f"width {width} exceeds {a.max_width}")
        return INVALID
    return OK


def cmd_convert(a, out: _Out) -> int:
    if (a.src, a.dst) == ("ctr", "twd"):
        if not a.graph:
            raise UsageError("convert --from ctr needs --graph F")
        G = _graph(a.graph)
        S = parse_ctr(_read(a.input))
        validate_sequence(G, S)
        D = seq_to_twd(G, S)
        _write_atomic(a.out, dump_twd(D))
        out.kv(n=D.n, bedges=len(D.bedges))
    elif (a.src, a.dst) == ("twd", "ctr"):
        D = _load_twd(a.input)
        validate_twd(D)
        S = twd_to_seq(D)
        _write_atomic(a.out, dump_ctr(S))
        if a.graph:
            _write_atomic(a.graph, dump_fqm(DenseMatrix(D.field, materialize(D))))
        out.kv(n=D.n, steps=len(S.triples))
    else:
        raise UsageError("convert supports --from ctr --to twd and --from twd --to ctr")
    return OK


def cmd_liftup(a, out: _Out) -> int:
    D = _load_twd(a.twd)
    validate_twd(D)
    L = lift_up(D)
    text = dump_twd(L)
    if a.out:
        _write_atomic(a.out, text)
    else:
        sys.stdout.write(text)
    out.info(f"bedges {len(D.bedges)} -> {len(L.bedges)}")
    out.kv(before=len(D.bedges), after=len(L.bedges))
    return OK


def cmd_query(a, out: _Out) -> int:
    D = _load_twd(a.twd)
    print(entry_query(D, a.u, a.v))
    return OK


def cmd_square(a, out: _Out) -> int:
    D = _load_twd(a.twd)
    d = validate_twd(D)
    t = time.perf_counter()
    S = distance_square_twd(D) if a.mode == "distance" else modular_square_twd(D)
    dt = time.perf_counter() - t
    _write_atomic(a.out, dump_twd(S))
    width = validate_twd(S) if a.report else None
    out.info(f"squared {D.n} leaves in {dt:.3f}s, {len(S.bedges)} bedges")
    out.kv(n=D.n, inWidth=d, mode=a.mode, seconds=f"{dt:.6f}", bedges=len(S.bedges),
           outWidth=width)
    return OK


def cmd_multiply(a, out: _Out) -> int:
    A, B = _load_matrix(a.a), _load_matrix(a.b)
    if A.field != B.field:
        raise MatrixError(f"A is over F_{A.field.p}, B over F_{B.field.p}")
    if a.naive:
        P = multiply_naive(A, B)
        route = "naive"
    else:
        try:
            P = multiply_twd(A, B, budget=a.budget, seed=a.seed).product()
            route = "twd"
        except MatrixError as e:
            if not a.dense_fallback or "no decomposition" not in str(e):
                raise
            out.info(f"{e}; using the dense product")
            P = multiply_naive(A, B)
            route = "dense-fallback"
    _write_atomic(a.out, dump_fqm(P))
    out.kv(route=route, rows=P.rows, cols=P.cols)
    return OK


def cmd_gen(a, out: _Out) -> int:
    if a.block:
        D = random_block_twd(a.n, a.d, a.p, a.density, a.seed)
    else:
        D, _ = random_twd(GenSpec(a.n, a.d, a.p, a.density, a.seed, a.directed), with_graph=False)
    M = DenseMatrix(D.field, materialize(D, check=False))
    files = {".twd": dump_twd(D), ".fqm": dump_fqm(M), ".ctr": dump_ctr(twd_to_seq(D))}
    if a.block:
        A, B = split_blocks(D)
        files[".a.fqm"] = dump_fqm(A)
        files[".b.fqm"] = dump_fqm(B)
    for ext, text in files.items():
        _write_atomic(a.out_prefix + ext, text)
    out.info(f"wrote {', '.join(a.out_prefix + e for e in files)}")
    out.kv(n=D.n, bedges=len(D.bedges), width=validate_twd(D))
    return OK


def cmd_minor(a, out: _Out) -> int:
    if a.action == "apply":
        M = _load_fqm(a.m)
        S = parse_msc(_read(a.script))
        N = apply_script(M, S)
        text = dump_fqm(N)
        if a.out:
            _write_atomic(a.out, text)
        else:
            sys.stdout.write(text)
        out.kv(rows=N.rows, cols=N.cols, ops=len(S))
        return OK
    if a.action == "check":
        N, M = _load_fqm(a.n), _load_fqm(a.m)
        found = is_minor_bruteforce(N, M, a.mode)
        print("true" if found else "false")
        out.kv(mode=a.mode, minor=int(found))
        return OK if found else INVALID
    M, N = _load_fqm(a.m), _load_fqm(a.n)
    S = extract_from_latin(M, N)
    text = dump_msc(S)
    if a.out:
        _write_atomic(a.out, text)
    else:
        sys.stdout.write(text)
    if apply_script(M, S) != N:
        raise CertificateError("extracted script does not reproduce the target")
    out.kv(ops=len(S))
    return OK


def cmd_stats(a, out: _Out) -> int:
    M = _load_fqm(a.fqm)
    g, m, r = division_stats(M, rank_variant=a.rank_variant)
    print(f"{g} {m} {r}")
    out.kv(gridNumber=g, mixedNumber=m, gridRank=r)
    return OK


def _sweep(spec: str) -> list[int]:
    try:
        lo, hi = (int(x) for x in spec.split(".."))
    except ValueError:
        raise UsageError(f"--sweep expects n0..n1, got {spec!r}") from None
    if lo < 1 or hi < lo:
        raise UsageError("--sweep needs 1 <= n0 <= n1")
    sizes = []
    n = lo
    while n <= hi:
        sizes.append(n)
        n *= 2
    return sizes


def bench_rows(op: str, sizes, d: int, p: int, seed: int = 0, reps: int = 1):
    for n in sizes:
        if op == "square":
            D, _ = random_twd(GenSpec(n, d, p, seed=seed), with_graph=False)
        else:
            D = random_block_twd(max(n // 2, 1), d, p, seed=seed)
        best = float("inf")
        for _ in range(reps):
            t = time.perf_counter()
            R = modular_square_twd(D) if op == "square" else multiply_twd(D).decomposition
            best = min(best, time.perf_counter() - t)
        yield {"n": D.n, "d": d, "p": p, "op": op, "seconds": f"{best:.6f}",
               "outWidth": validate_twd(R), "bedgeCount": len(R.bedges)}


def cmd_bench(a, out: _Out) -> int:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["n", "d", "p", "op", "seconds", "outWidth", "bedgeCount"],
                       lineterminator="\n")
    w.writeheader()
    for row in bench_rows(a.op, _sweep(a.sweep), a.d, a.p, a.seed, a.reps):
        w.writerow(row)
        out.info(f"n={row['n']} {row['seconds']}s")
    if a.out:
        _write_atomic(a.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    P = _Parser(prog="twinmul", description="Twin-decomposition squaring and products.")
    P.add_argument("--report", action="store_true", help="print #key=value summary lines")
    sub = P.add_subparsers(dest="cmd", parser_class=_Parser)
    sub.required = True

    def add(name, fn, help):
        s = sub.add_parser(name, help=help)
        s.add_argument("--report", action="store_true", default=argparse.SUPPRESS)
        s.set_defaults(fn=fn)
        return s

    s = add("validate", cmd_validate, "width of a TWD or of a CTR sequence on a graph")
    s.add_argument("--twd")
    s.add_argument("--ctr")
    s.add_argument("--graph", help="FQM adjacency matrix")
    s.add_argument("--max-width", type=int)

    s = add("convert", cmd_convert, "CTR <-> TWD")
    s.add_argument("--from", dest="src", required=True, choices=["ctr", "twd"])
    s.add_argument("--to", dest="dst", required=True, choices=["ctr", "twd"])
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--graph", help="FQM graph (input for ctr, optional output for twd)")
    s.add_argument("--out", required=True)

    s = add("liftup", cmd_liftup, "normalize bedges")
    s.add_argument("--twd", required=True)
    s.add_argument("--out")

    s = add("query", cmd_query, "one entry of the materialized structure")
    s.add_argument("--twd", required=True)
    s.add_argument("--u", type=int, required=True)
    s.add_argument("--v", type=int, required=True)

    s = add("square", cmd_square, "square a TWD")
    s.add_argument("--twd", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--mode", choices=["modular", "distance"], default="modular")

    s = add("multiply", cmd_multiply, "matrix product AB")
    s.add_argument("--a", required=True, help="FQM matrix or TWD of a bipartite structure")
    s.add_argument("--b", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--naive", action="store_true")
    s.add_argument("--dense-fallback", action="store_true")
    s.add_argument("--budget", type=int, default=16)
    s.add_argument("--seed", type=int, default=0)

    s = add("gen", cmd_gen, "random certified inputs")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--p", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--density", type=float, default=0.5)
    s.add_argument("--directed", action="store_true")
    s.add_argument("--block", action="store_true", help="[[0,A],[B,0]] on 2n leaves")
    s.add_argument("--out-prefix", required=True)

    s = add("minor", cmd_minor, "parity and linear minors")
    s.add_argument("action", choices=["apply", "check", "extract"])
    s.add_argument("--m", required=True, help="host FQM")
    s.add_argument("--n", help="target FQM (check, extract)")
    s.add_argument("--script", help="MSC script (apply)")
    s.add_argument("--mode", choices=["parity", "linear"], default="parity")
    s.add_argument("--out")

    s = add("stats", cmd_stats, "grid number, mixed number, grid rank")
    s.add_argument("--fqm", required=True)
    s.add_argument("--rank-variant", action="store_true")

    s = add("bench", cmd_bench, "CSV timings over a doubling sweep")
    s.add_argument("op", choices=["square", "multiply"])
    s.add_argument("--sweep", required=True, help="n0..n1, doubling")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--p", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--reps", type=int, default=1)
    s.add_argument("--out")
    return P


def run(argv=None) -> int:
    try:
        a = build_parser().parse_args(argv)
        if a.cmd == "minor":
            need = {"apply": ["script"], "check": ["n"], "extract": ["n"]}[a.action]
            for k in need:
                if getattr(a, k) is None:
                    raise UsageError(f"minor {a.action} needs --{k}")
        return a.fn(a, _Out(getattr(a, "report", False)))
    except UsageError as e:
        print(e, file=sys.stderr)
        return USAGE
    except CertificateError as e:
        print(f"internal consistency error: {e}", file=sys.stderr)
        return INTERNAL
    except GuardrailError as e:
        print(e, file=sys.stderr)
        return USAGE
    except (DecompositionError, TrigraphError, MatrixError, FieldError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return INVALID


def main() -> None:
    sys.exit(run())
