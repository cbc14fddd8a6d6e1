"""Command-line front end: ``tnn norm | decompose | verify | table``.

Documents are JSON objects tagged ``"schema": "tnn/1"``. A tensor document
holds ``order``, ``dim``, ``field`` and exactly one of

``dense``       nested array (complex arrays as ``{"re": ..., "im": ...}``),
``sparse``      list of ``{"index": [i1, ..., im], "re": x, "im": y}`` with
                1-based indices; each entry stands for its whole orbit,
``polynomial``  a homogeneous form in ``x1..xn`` with real coefficients.

A dense order-3 array may set ``"symmetric": false`` to request the
nonsymmetric norm.
"""

from __future__ import annotations

import os

_threads = os.environ.get("TNN_THREADS")
if _threads:  # must happen before numpy loads its BLAS
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse  # noqa: E402
import json  # noqa: E402
import logging  # noqa: E402
import sys  # noqa: E402
import time  # noqa: E402
from typing import Any  # noqa: E402

import numpy as np  # noqa: E402

from . import __version__, conic  # noqa: E402
from .fixtures import cosine_sum, index_sum  # noqa: E402
from .norms import (CERTIFIED, NonsymDecomposition, NonsymTerm, NormReport, Options, SolverFailure,  # noqa: E402
                    nuclear_norm, nuclear_norm_nonsym3, verify, verify_nonsym)
from .tensor import COMPLEX, REAL, NuclearDecomposition, SymmetryError, SymTensor, Term  # noqa: E402

SCHEMA = "tnn/1"
EXIT_CERTIFIED, EXIT_ERROR, EXIT_LOWER = 0, 1, 2
FORMS = ("dense", "sparse", "polynomial")
FAMILIES = ("example-6.4", "example-6.5-family", "soep")

log = logging.getLogger("tnn")


class DocumentError(ValueError):
    """A document failed to parse or validate; the message names the field."""


# ------------------------------------------------------------------- reading

def _load_json(path: str) -> Any:
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise DocumentError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _require(doc: dict, key: str, kind, where: str):
    if key not in doc:
        raise DocumentError(f"{where}: missing field '{key}'")
    val = doc[key]
    if kind is int and (isinstance(val, bool) or not isinstance(val, int)):
        raise DocumentError(f"{where}.{key}: expected an integer, got {val!r}")
    if kind is not int and not isinstance(val, kind):
        raise DocumentError(f"{where}.{key}: expected {kind.__name__}, got {type(val).__name__}")
    return val


def _check_schema(doc, where: str):
    if not isinstance(doc, dict):
        raise DocumentError(f"{where}: top level must be an object")
    if doc.get("schema") != SCHEMA:
        raise DocumentError(f"{where}.schema: expected {SCHEMA!r}, got {doc.get('schema')!r}")


def _num(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise DocumentError(f"{where}: expected a number, got {v!r}")
    return float(v)


def _dense_array(doc, order: int, dim: int, where: str) -> np.ndarray:
    raw = doc["dense"]
    try:
        if isinstance(raw, dict):
            arr = np.asarray(raw["re"], dtype=float) + 1j * np.asarray(raw["im"], dtype=float)
        else:
            arr = np.asarray(raw, dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"{where}.dense: not a rectangular numeric array ({exc})") from exc
    return arr


def tensor_from_document(doc, where: str = "tensor"):
    """Return a :class:`SymTensor`, or a real order-3 array when ``symmetric`` is false."""
    _check_schema(doc, where)
    order = _require(doc, "order", int, where)
    dim = _require(doc, "dim", int, where)
    if order < 1 or dim < 1:
        raise DocumentError(f"{where}: order and dim must be positive")
    field = doc.get("field", REAL)
    if field not in (REAL, COMPLEX):
        raise DocumentError(f"{where}.field: expected 'real' or 'complex', got {field!r}")
    present = [f for f in FORMS if f in doc]
    if len(present) != 1:
        raise DocumentError(f"{where}: exactly one of {FORMS} must be present, found {present or 'none'}")
    form = present[0]
    symmetric = doc.get("symmetric", True)
    if form == "dense":
        arr = _dense_array(doc, order, dim, where)
        if arr.shape != (dim,) * order:
            raise DocumentError(f"{where}.dense: shape {arr.shape} does not match order {order}, dim {dim}")
        if not symmetric:
            if order != 3 or np.iscomplexobj(arr) and np.any(arr.imag):
                raise DocumentError(f"{where}.symmetric: nonsymmetric input must be a real order-3 array")
            return arr.real.astype(float)
        try:
            A = SymTensor.from_dense(arr if np.any(np.imag(arr)) else np.real(arr), field)
        except SymmetryError as exc:
            raise DocumentError(f"{where}.dense: {exc}") from exc
    elif not symmetric:
        raise DocumentError(f"{where}.symmetric: nonsymmetric input needs the dense form")
    elif form == "sparse":
        A = _from_sparse(doc["sparse"], order, dim, field, where)
    else:
        A = _from_polynomial(doc["polynomial"], order, dim, field, where)
    if A.field == COMPLEX and field == REAL:
        raise DocumentError(f"{where}.field: declared real but entries have imaginary parts")
    return A


def _from_sparse(entries, order, dim, field, where) -> SymTensor:
    if not isinstance(entries, list):
        raise DocumentError(f"{where}.sparse: expected a list")
    from .mindex import EXACT, enumerate_indices
    pos = {a: i for i, a in enumerate(enumerate_indices(dim, order, EXACT))}
    re = np.zeros(len(pos))
    im = np.zeros(len(pos))
    seen = {}
    for j, e in enumerate(entries):
        here = f"{where}.sparse[{j}]"
        if not isinstance(e, dict):
            raise DocumentError(f"{here}: expected an object")
        idx = _require(e, "index", list, here)
        if len(idx) != order or any(isinstance(i, bool) or not isinstance(i, int) or not 1 <= i <= dim for i in idx):
            raise DocumentError(f"{here}.index: expected {order} integers in 1..{dim}, got {idx}")
        alpha = [0] * dim
        for i in idx:
            alpha[i - 1] += 1
        alpha = tuple(alpha)
        val = (_num(e.get("re", 0.0), f"{here}.re"), _num(e.get("im", 0.0), f"{here}.im"))
        if alpha in seen and seen[alpha][1] != val:
            raise DocumentError(f"{here}: conflicts with sparse[{seen[alpha][0]}], a permutation of the same index")
        seen[alpha] = (j, val)
        re[pos[alpha]], im[pos[alpha]] = val
    if field == REAL and np.any(im):
        raise DocumentError(f"{where}.field: declared real but sparse entries have imaginary parts")
    return SymTensor(order, dim, field, re, im if field == COMPLEX else None)


def _from_polynomial(text, order, dim, field, where) -> SymTensor:
    import sympy

    if not isinstance(text, str):
        raise DocumentError(f"{where}.polynomial: expected a string")
    xs = sympy.symbols(f"x1:{dim + 1}")
    names = {str(x): x for x in xs}
    try:
        expr = sympy.parse_expr(text.replace("^", "**"), local_dict=names, evaluate=True)
        poly = sympy.Poly(sympy.expand(expr), *xs)
    except (sympy.SympifyError, sympy.PolynomialError, SyntaxError, TypeError) as exc:
        raise DocumentError(f"{where}.polynomial: cannot parse {text!r} as a polynomial in x1..x{dim} ({exc})") from exc
    coeffs = {}
    for alpha, c in poly.terms():
        if sum(alpha) != order:
            raise DocumentError(f"{where}.polynomial: term of degree {sum(alpha)} in a degree-{order} form")
        if not c.is_real:
            raise DocumentError(f"{where}.polynomial: only real coefficients are accepted (got {c}); "
                                "use the sparse form for complex tensors")
        coeffs[tuple(int(a) for a in alpha)] = float(c)
    return SymTensor.from_poly(coeffs, order, dim, REAL if field == REAL else COMPLEX)


# ------------------------------------------------------------------- writing

def _arr(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def tensor_to_document(A: SymTensor, form: str = "sparse") -> dict:
    """Tensor document in ``sparse`` or ``dense`` form; reading it back is exact."""
    doc = {"schema": SCHEMA, "kind": "tensor", "order": A.order, "dim": A.dim, "field": A.field}
    if form == "sparse":
        from .tensor import _alpha_to_index
        out = []
        for alpha, re, im in zip(A.monomials, A.a_re, A.a_im):
            e = {"index": [i + 1 for i in _alpha_to_index(alpha)], "re": float(re)}
            if A.field == COMPLEX:
                e["im"] = float(im)
            out.append(e)
        doc["sparse"] = out
    elif form == "dense":
        D = A.to_dense()
        doc["dense"] = {"re": _arr(D.real), "im": _arr(D.imag)} if A.field == COMPLEX else _arr(D.real)
    else:
        raise ValueError(f"writable forms are 'sparse' and 'dense', got {form!r}")
    return doc


def _decomposition_doc(d, columns: bool) -> dict | None:
    if d is None:
        return None
    if isinstance(d, NonsymDecomposition):
        return {"weights": [t.lam for t in d.terms], "dims": list(d.dims),
                "factors": [[_arr(f) for f in t.factors] for t in d.terms]}
    out = {"weights": [t.lam for t in d.terms], "signs": [t.sign for t in d.terms],
           "atoms_re": [_arr(t.atom_re) for t in d.terms], "atoms_im": [_arr(t.atom_im) for t in d.terms]}
    if columns:
        C = d.columns()
        out["columns_re"] = _arr(np.real(C).T)
        out["columns_im"] = _arr(np.imag(C).T)
    return out


def _dual_doc(rep: NormReport) -> dict | None:
    if rep.dual is None:
        return None
    p = np.asarray(rep.dual, dtype=float)
    if rep.kind == "complex":
        half = len(p) // 2
        return {"p1": _arr(p[:half]), "p2": _arr(p[half:])}
    return {"p": _arr(p)}


def report_to_document(rep: NormReport, seed: int, opts: Options, columns: bool = False) -> dict:
    """Result document. Wall-clock timings are left out so equal seeds give equal documents."""
    return {
        "schema": SCHEMA, "kind": "result", "tool": f"tnn {__version__}", "seed": seed,
        "field": rep.field, "relaxation": rep.kind, "norm": rep.value, "status": rep.status,
        "order": rep.order, "method": rep.method,
        "trace": [[k, v] for k, v in rep.trace],
        "decomposition": _decomposition_doc(rep.decomposition, columns),
        "residual": None if np.isnan(rep.residual) else rep.residual,
        "dual": _dual_doc(rep), "solver": rep.solver,
        "options": {"k_max": opts.k_max, "sector_variant": opts.variant,
                    "tol": (opts.settings or conic.Settings()).feas_tol},
    }


def decomposition_from_document(doc, where: str = "result"):
    """Nonsymmetric decomposition, or the list of symmetric :class:`Term` objects."""
    d = doc.get("decomposition")
    if d is None:
        raise DocumentError(f"{where}.decomposition: the result carries no decomposition")
    try:
        if "factors" in d:
            terms = [NonsymTerm(float(w), tuple(np.asarray(f, dtype=float) for f in fs))
                     for w, fs in zip(d["weights"], d["factors"])]
            return NonsymDecomposition(terms, tuple(d["dims"]))
        terms = [Term(float(w), np.asarray(re, dtype=float), np.asarray(im, dtype=float), int(s))
                 for w, s, re, im in zip(d["weights"], d["signs"], d["atoms_re"], d["atoms_im"])]
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"{where}.decomposition: malformed ({exc})") from exc
    return terms


# ----------------------------------------------------------------- commands

def _options(args) -> Options:
    settings = conic.Settings(feas_tol=args.tol, gap_tol=args.tol)
    return Options(k_max=args.kmax, seed=args.seed, settings=settings, variant=args.sector_variant)


def _emit(doc: dict, out: str | None):
    text = json.dumps(doc, indent=2)
    if out and out != "-":
        with open(out, "w", encoding="utf-8") as fp:
            fp.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def cmd_norm(args, require_decomposition: bool = False) -> int:
    A = tensor_from_document(_load_json(args.input), args.input)
    opts = _options(args)
    if isinstance(A, np.ndarray):
        if args.field not in (None, REAL):
            raise DocumentError("nonsymmetric tensors support only --field real")
        rep = nuclear_norm_nonsym3(A, opts=opts)
    else:
        field = args.field or A.field
        if field == REAL and A.field == COMPLEX:
            raise DocumentError(f"{args.input}: a complex tensor has no real nuclear norm; use --field complex")
        rep = nuclear_norm(A, field, opts)
    _emit(report_to_document(rep, args.seed, opts, columns=require_decomposition or args.columns), args.output)
    if rep.status == CERTIFIED:
        return EXIT_CERTIFIED
    if require_decomposition:
        log.error("no certified decomposition up to order %s", rep.order)
    return EXIT_LOWER


def cmd_verify(args) -> int:
    A = tensor_from_document(_load_json(args.tensor), args.tensor)
    doc = _load_json(args.result)
    _check_schema(doc, args.result)
    norm = _num(doc.get("norm"), f"{args.result}.norm")
    dec = doc.get("decomposition")
    if dec is None:
        raise DocumentError(f"{args.result}.decomposition: the result carries no decomposition")
    if isinstance(A, np.ndarray):
        d = decomposition_from_document(doc, args.result)
        if not isinstance(d, NonsymDecomposition):
            raise DocumentError(f"{args.result}: symmetric decomposition for a nonsymmetric tensor")
        residual, mass = verify_nonsym(A, d)
    else:
        got = decomposition_from_document(doc, args.result)
        if isinstance(got, NonsymDecomposition):
            raise DocumentError(f"{args.result}: nonsymmetric decomposition for a symmetric tensor")
        terms, field = got, doc.get("field", REAL)
        if any(len(t.atom_re) != A.dim for t in terms):
            raise DocumentError(f"{args.result}.decomposition: atoms have the wrong length for dim {A.dim}")
        try:
            d = NuclearDecomposition(terms, field, A.order, A.dim)
        except ValueError as exc:
            raise DocumentError(f"{args.result}.decomposition: {exc}") from exc
        residual, mass = verify(A, d)
    ok_res = residual <= 1e-5
    ok_mass = abs(mass - norm) <= 1e-5 * max(abs(norm), 1e-300) or mass == norm
    report = {"schema": SCHEMA, "kind": "verification", "residual": residual, "mass": mass, "norm": norm,
              "residual_ok": ok_res, "mass_ok": ok_mass}
    _emit(report, None)
    if not ok_res:
        log.error("residual %.3e exceeds 1e-5", residual)
    if not ok_mass:
        log.error("mass %.12g does not match the recorded norm %.12g", mass, norm)
    return EXIT_CERTIFIED if ok_res and ok_mass else EXIT_ERROR


def soep_family(n: int) -> tuple[SymTensor, float]:
    """``sum_i (e + e_i)^4 + (e - e_i)^4`` in dimension ``n`` and its nuclear norm."""
    e = np.ones(n)
    vecs = []
    for i in range(n):
        u = np.zeros(n)
        u[i] = 1.0
        vecs += [e + u, e - u]
    dense = sum(np.einsum("i,j,k,l->ijkl", v, v, v, v) for v in vecs)
    expected = float(sum(np.dot(v, v) ** 2 for v in vecs))
    return SymTensor.from_dense(dense), expected


def _parse_range(text: str) -> list[int]:
    try:
        if ":" in text:
            lo, hi = (int(t) for t in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(t) for t in text.split(",")]
    except ValueError as exc:
        raise DocumentError(f"--range: expected 'lo:hi' or a comma list, got {text!r}") from exc


def cmd_table(args) -> int:
    if args.family not in FAMILIES:
        raise DocumentError(f"unknown family {args.family!r}; available: {', '.join(FAMILIES)}")
    fields = (REAL, COMPLEX) if args.field in (None, "both") else (args.field,)
    opts = _options(args)
    rows = []
    for n in _parse_range(args.range):
        if n < 1:
            raise DocumentError(f"--range: dimensions must be positive, got {n}")
        expected = None
        if args.family == "example-6.4":
            A = index_sum(n)
        elif args.family == "example-6.5-family":
            A = cosine_sum(n)
        else:
            A, expected = soep_family(n)
        for f in fields:
            t0 = time.perf_counter()
            rep = nuclear_norm(A, f, opts)
            secs = time.perf_counter() - t0
            length = len(rep.decomposition) if rep.decomposition is not None else None
            rows.append((n, f, rep.value, rep.order, length, secs, rep.status, expected))
    head = ["n", "field", "norm", "k", "length", "seconds", "status"] + (["expected"] if args.family == "soep" else [])
    lines = [head]
    for n, f, v, k, length, secs, status, expected in rows:
        line = [str(n), f, f"{v:.4f}", str(k), "-" if length is None else str(length), f"{secs:.2f}", status]
        if args.family == "soep":
            line.append(f"{expected:.4f}")
        lines.append(line)
    widths = [max(len(r[j]) for r in lines) for j in range(len(head))]
    for r in lines:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    return EXIT_CERTIFIED if all(r[6] == CERTIFIED for r in rows) else EXIT_LOWER


# --------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kmax", type=int, default=None, help="largest relaxation order (default ceil(m/2)+3)")
    common.add_argument("--tol", type=float, default=1e-8, help="solver feasibility and gap tolerance")
    common.add_argument("--seed", type=int, default=0, help="seed for random objectives and extraction")
    common.add_argument("--sector-variant", choices=("lemma51", "eq510"), default="lemma51",
                        help="definition of the second sector inequality for complex norms")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="tnn", description="Nuclear norms of symmetric tensors via moment relaxations.")
    p.add_argument("--version", action="version", version=f"tnn {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, hlp in (("norm", "compute the nuclear norm of a tensor document"),
                      ("decompose", "like norm, but a certified decomposition is required")):
        q = sub.add_parser(name, parents=[common], help=hlp)
        q.add_argument("input", help="tensor document path, or - for standard input")
        q.add_argument("--field", choices=(REAL, COMPLEX), default=None)
        q.add_argument("-o", "--output", default=None, help="write the result document here")
        q.add_argument("--columns", action="store_true", help="also render unnormalized columns")
    q = sub.add_parser("verify", help="check a result document against its tensor")
    q.add_argument("tensor")
    q.add_argument("result")
    q.add_argument("-v", "--verbose", action="store_true")
    q = sub.add_parser("table", parents=[common], help="reproduce a family of norms as a table")
    q.add_argument("family", help=f"one of {', '.join(FAMILIES)}")
    q.add_argument("--range", default="2:4", help="dimensions as lo:hi or a comma list")
    q.add_argument("--field", choices=(REAL, COMPLEX, "both"), default="both")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="tnn: %(message)s")
    try:
        if args.command == "norm":
            return cmd_norm(args)
        if args.command == "decompose":
            return cmd_norm(args, require_decomposition=True)
        if args.command == "verify":
            return cmd_verify(args)
        return cmd_table(args)
    except (DocumentError, SolverFailure, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
