"""Command-line front end.

    orbitlab <decompose|analyze|witness|gallery|lemma> --config <path>
             [--out <dir>] [--seed <u64>] [--target orbit|diff] [--m <int>]

Exit codes: 0 success, 1 config, 2 not power-bounded, 3 tolerance-ambiguous,
4 precondition, 5 exhausted, 6 parity failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np

from . import report
from . import seqspace as ss
from .compactness import AnalysisConfig, diff_family, orbit_family, verdict
from .errors import ConfigError, Exhausted, NoSeparation, OrbitLabError, ProjectionUnavailable
from .gallery import GalleryConfig, random_power_bounded, run_diagonal_c, run_example1, run_matrix_suite, run_mth_root
from .jdlg import split_for
from .operators import DiagonalOperator, Example1Operator, ExplicitRule, MatrixOperator
from .witness import SubsetCheck, WitnessConfig, pbig_extract, run_pipeline, telescope_check

COMMANDS = ("decompose", "analyze", "witness", "gallery", "lemma")
U64_MAX = 2**64 - 1

_complex = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_pos_int = {"type": "integer", "minimum": 1}

OPERATOR_SCHEMA = {
    "oneOf": [
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "rule"],
            "properties": {
                "kind": {"const": "diagonal"},
                "rule": {"const": "dyadic"},
                "num": {"type": "integer", "not": {"const": 0}},
                "sign_flip": {"type": "boolean"},
                "root_order": _pos_int,
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "rule", "entries", "limit"],
            "properties": {
                "kind": {"const": "diagonal"},
                "rule": {"const": "explicit"},
                "entries": {"type": "array", "items": _complex, "minItems": 1},
                "limit": _complex,
                "tail_sup": {"type": "number", "minimum": 0},
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind", "entries"],
            "properties": {
                "kind": {"const": "matrix"},
                "entries": {
                    "type": "array", "minItems": 1, "maxItems": 64,
                    "items": {"type": "array", "minItems": 1, "maxItems": 64, "items": _complex},
                },
            },
        },
        {
            "type": "object",
            "additionalProperties": False,
            "required": ["kind"],
            "properties": {"kind": {"const": "example1"}, "a": {"type": "number", "exclusiveMinimum": 0}},
        },
    ]
}

VECTOR_SCHEMA = {
    "oneOf": [
        {"type": "object", "additionalProperties": False, "required": ["kind"],
         "properties": {"kind": {"const": "ones"}}},
        {"type": "object", "additionalProperties": False, "required": ["kind", "index"],
         "properties": {"kind": {"const": "basis"}, "index": {"type": "integer", "minimum": 0}}},
        {"type": "object", "additionalProperties": False, "required": ["kind", "values"],
         "properties": {
             "kind": {"const": "coords"},
             "values": {"type": "array", "items": _complex, "minItems": 1},
             "tail": {
                 "type": "object", "additionalProperties": False, "required": ["kind"],
                 "properties": {
                     "kind": {"enum": ["null", "limit"]},
                     "limit": _complex,
                     "bound": {"type": "number", "minimum": 0},
                 },
             },
         }},
    ]
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "operator": OPERATOR_SCHEMA,
        "vector": VECTOR_SCHEMA,
        "head_length": {"type": "integer", "minimum": 1, "maximum": 4096},
        "analysis": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "eps_grid": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 1},
                "horizons": {"type": "array", "items": _pos_int, "minItems": 1},
                "K_min": _pos_int,
                "delta_search": {"type": "boolean"},
            },
        },
        "witness": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "horizon": {"type": "integer", "minimum": 2},
                "m_target": {"type": "integer", "minimum": 1, "maximum": 16},
                "delta_floor": {"type": "number", "minimum": 0},
                "margin": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                "subset_check": {
                    "type": "object", "additionalProperties": False,
                    "properties": {
                        "exhaustive_up_to": {"type": "integer", "minimum": 0},
                        "random_samples": {"type": "integer", "minimum": 0},
                        "seed": {"type": "integer", "minimum": 0},
                    },
                },
            },
        },
        "gallery": {
            "type": "object", "additionalProperties": False, "required": ["id"],
            "properties": {
                "id": {"enum": ["example1", "diagonal-c", "mth-root", "matrix-suite"]},
                "a": {"type": "number", "exclusiveMinimum": 0},
                "m": {"type": "integer"},
                "trials": {"type": "integer", "minimum": 1, "maximum": 10000},
                "run_witness": {"type": "boolean"},
                "oracle_pairs": _pos_int,
            },
        },
        "lemma": {
            "type": "object", "additionalProperties": False, "required": ["name"],
            "properties": {
                "name": {"enum": ["telescoping", "multap", "pbig"]},
                "trials": _pos_int,
            },
        },
        "target": {"enum": ["orbit", "diff"]},
        "m": _pos_int,
        "seed": {"type": "integer", "minimum": 0, "maximum": U64_MAX},
        "out_dir": {"type": "string"},
    },
}


# -- config loading -----------------------------------------------------------------------

def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path=str(path)) from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                          line=exc.lineno, column=exc.colno) from None
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config error at {where}: {err.message}", path=where)


def _cx(pair) -> complex:
    return complex(pair[0], pair[1])


def build_operator(desc: dict):
    kind = desc["kind"]
    try:
        if kind == "diagonal" and desc["rule"] == "dyadic":
            root = desc.get("root_order", 1)
            base = Fraction(1, root) if root > 1 else Fraction(0)
            return DiagonalOperator.dyadic(desc.get("num", 1), desc.get("sign_flip", False), base)
        if kind == "diagonal":
            rule = ExplicitRule(tuple(_cx(z) for z in desc["entries"]), _cx(desc["limit"]),
                                desc.get("tail_sup", 0.0))
            return DiagonalOperator(rule)
        if kind == "matrix":
            rows = desc["entries"]
            if any(len(r) != len(rows) for r in rows):
                raise ConfigError("matrix entries must form a square array", path="operator/entries")
            return MatrixOperator(np.array([[_cx(z) for z in r] for r in rows]))
        return Example1Operator(float(desc.get("a", 1.0)))
    except ValueError as exc:
        raise ConfigError(f"invalid operator: {exc}", path="operator") from None


def build_vector(desc: dict | None, op, d: int):
    if isinstance(op, Example1Operator):
        if desc is not None:
            raise ConfigError("the Example-1 shift has a fixed starting function; omit 'vector'", path="vector")
        return None
    if isinstance(op, MatrixOperator):
        if desc is None:
            raise ConfigError("matrix operators need a 'vector'", path="vector")
        if desc["kind"] == "ones":
            return np.ones(op.dim, dtype=complex)
        if desc["kind"] == "basis":
            if desc["index"] >= op.dim:
                raise ConfigError("basis index out of range", path="vector/index")
            v = np.zeros(op.dim, dtype=complex)
            v[desc["index"]] = 1.0
            return v
        if "tail" in desc:
            raise ConfigError("finite-dimensional vectors take no tail", path="vector/tail")
        if len(desc["values"]) != op.dim:
            raise ConfigError(f"vector needs {op.dim} coordinates", path="vector/values")
        return np.array([_cx(z) for z in desc["values"]])
    desc = desc or {"kind": "ones"}
    if desc["kind"] == "ones":
        return ss.ones(d)
    if desc["kind"] == "basis":
        return ss.basis(desc["index"], d)
    tail = desc.get("tail", {"kind": "null"})
    try:
        if tail["kind"] == "null":
            if "limit" in tail:
                raise ConfigError("null tails take no limit", path="vector/tail/limit")
            td = ss.TailDescriptor.null(tail.get("bound", 0.0))
        else:
            td = ss.TailDescriptor.converging(_cx(tail.get("limit", [0.0, 0.0])), tail.get("bound", 0.0))
        values = [_cx(z) for z in desc["values"]]
        head = np.full(max(d, len(values)), td.center, dtype=complex)
        head[: len(values)] = values
        if td.bound != 0.0 and len(values) < d:
            head = head[: len(values)]
        return ss.SeqVec(head, td)
    except ValueError as exc:
        raise ConfigError(f"invalid vector: {exc}", path="vector") from None


def analysis_config(cfg: dict) -> AnalysisConfig:
    a = cfg.get("analysis", {})
    base = AnalysisConfig()
    out = AnalysisConfig(
        tuple(float(e) for e in a.get("eps_grid", base.eps_grid)),
        tuple(int(h) for h in a.get("horizons", base.horizons)),
        int(a.get("K_min", base.K_min)),
        bool(a.get("delta_search", base.delta_search)),
    )
    e, h = out.eps_grid, out.horizons
    if any(x <= y for x, y in zip(e, e[1:])):
        raise ConfigError("eps_grid must be strictly descending", path="analysis/eps_grid")
    if any(x >= y for x, y in zip(h, h[1:])):
        raise ConfigError("horizons must be strictly ascending", path="analysis/horizons")
    if h[-1] > 2**20:
        raise ConfigError("horizons are capped at 2^20", path="analysis/horizons")
    return out


def witness_config(cfg: dict, seed: int) -> WitnessConfig:
    w = cfg.get("witness", {})
    sc = w.get("subset_check", {})
    try:
        return WitnessConfig(
            horizon=w.get("horizon"),
            m_target=w.get("m_target", 8),
            delta_floor=w.get("delta_floor", 0.0),
            margin=w.get("margin", 0.1),
            subset_check=SubsetCheck(sc.get("exhaustive_up_to", 12), sc.get("random_samples", 256),
                                     sc.get("seed", seed)),
            analysis=analysis_config(cfg),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid witness config: {exc}", path="witness") from None


# -- commands -----------------------------------------------------------------------------------

def _out_dir(args, cfg) -> Path:
    return Path(args.out or cfg.get("out_dir") or ".")


def _seed(args, cfg) -> int:
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    if not 0 <= seed <= U64_MAX:
        raise ConfigError("seed must be an unsigned 64-bit integer", path="seed")
    return int(seed)


def cmd_decompose(cfg, args) -> int:
    op = build_operator(_require(cfg, "operator"))
    split = split_for(op)
    report.write_json(_out_dir(args, cfg) / "report.json",
                      {"operator": op.describe(), "split": split.to_dict()})
    return 0


def cmd_analyze(cfg, args) -> int:
    op = build_operator(_require(cfg, "operator"))
    d = cfg.get("head_length", ss.DEFAULT_HEAD)
    x = build_vector(cfg.get("vector"), op, d)
    acfg = analysis_config(cfg)
    target = args.target or cfg.get("target", "orbit")
    m = args.m if args.m is not None else cfg.get("m", 1)
    if m < 1:
        raise ConfigError("m must be >= 1", path="m")
    H = acfg.horizons[-1]
    family = orbit_family(op, x, H) if target == "orbit" else diff_family(op, x, m, H)
    v = verdict(family, acfg)
    out = _out_dir(args, cfg)
    body = v.to_dict()
    body.update({"operator": op.describe(), "target": target, "m": m if target == "diff" else None})
    report.write_json(out / "verdict.json", body)
    report.write_entropy_csv(out / "entropy.csv", v)
    report.write_packing_csv(out / "packing.csv", v)
    return 0


def cmd_witness(cfg, args) -> int:
    op = build_operator(_require(cfg, "operator"))
    wcfg = witness_config(cfg, _seed(args, cfg))
    d = cfg.get("head_length", ss.DEFAULT_HEAD)
    x = build_vector(cfg.get("vector"), op, d)
    out = _out_dir(args, cfg)
    try:
        _, state, cert = run_pipeline(op, x, wcfg)
    except Exhausted as exc:
        body = {"status": exc.tag, "error": exc.to_dict()}
        if exc.partial is not None:
            body["partial"] = exc.partial.to_dict()
        report.write_json(out / "certificate.json", body)
        raise
    body = cert.to_dict()
    body["status"] = "OK"
    body["state"] = state.to_dict()
    report.write_json(out / "certificate.json", body)
    return 0


def cmd_gallery(cfg, args) -> int:
    g = _require(cfg, "gallery")
    seed = _seed(args, cfg)
    gcfg = GalleryConfig(
        analysis=analysis_config(cfg),
        witness=witness_config(cfg, seed),
        oracle_pairs=g.get("oracle_pairs", 1000),
        run_witness=g.get("run_witness", True),
        seed=seed,
    )
    gid = g["id"]
    if gid == "example1":
        rep = run_example1(float(g.get("a", 1.0)), gcfg)
    elif gid == "diagonal-c":
        rep = run_diagonal_c(gcfg)
    elif gid == "mth-root":
        m = args.m if args.m is not None else g.get("m", 2)
        if m < 2:
            raise ConfigError("mth-root needs m >= 2", path="gallery/m")
        rep = run_mth_root(int(m), gcfg)
    else:
        rep = run_matrix_suite(seed, int(g.get("trials", 100)))
    out = _out_dir(args, cfg)
    report.write_json(out / "report.json", rep.to_dict())
    for name, v in sorted(rep.verdicts.items()):
        report.write_entropy_csv(out / f"entropy_{name}.csv", v)
        report.write_packing_csv(out / f"packing_{name}.csv", v)
    return 0 if rep.passed else 6


def _lemma_telescoping(rng, trials):
    results = []
    dy = DiagonalOperator.dyadic()
    for i in range(trials):
        case = random_power_bounded(rng)
        x = rng.normal(size=case.T.dim) + 1j * rng.normal(size=case.T.dim)
        n, m = int(rng.integers(0, 17)), int(rng.integers(1, 7))
        r = telescope_check(case.T, x, n, m)
        nd, md = int(rng.integers(0, 1025)), int(rng.integers(1, 1025))
        rd = telescope_check(dy, ss.ones(), nd, md)
        results.append({"trial": i, "dim": case.T.dim, "n": n, "m": m, "residual": r,
                        "dyadic_n": nd, "dyadic_m": md, "dyadic_residual": rd,
                        "ok": r <= 1e-12 and rd == 0.0})
    return results


def _lemma_multap(rng, trials):
    from .witness import _LagMetric, _subset_vectors, multap_refine

    results = []
    op = DiagonalOperator.dyadic()
    H = 2**12
    for i in range(trials):
        zero = i % 2 == 0
        if zero:
            vecs = [ss.zeros(48)]
            ks = []
        else:
            ks = sorted({int(k) for k in rng.integers(1, 64, size=int(rng.integers(1, 3)))})
            vecs = _subset_vectors(op, ss.ones(48), ks)
        tol = float(2.0 ** -int(rng.integers(1, 4)))
        gap = int(rng.integers(1, 65))
        _, hi = _LagMetric(op, vecs).dense(H)
        valid = np.flatnonzero(hi[gap:] <= tol)
        try:
            ref = multap_refine(op, vecs, range(H), tol, gap)
            gaps_ok = all(b - a >= gap for a, b in zip(ref.subsequence, ref.subsequence[1:]))
            ok = gaps_ok and ref.residual <= tol and valid.size > 0
            outcome = "FOUND"
            sub = ref.subsequence[:2]
        except Exhausted:
            ok, outcome, sub = valid.size == 0, "EXHAUSTED", []
        results.append({"trial": i, "zero_vectors": zero, "ks": ks, "tol": tol, "gap_min": gap,
                        "outcome": outcome, "pair": sub, "scan_has_solution": bool(valid.size), "ok": ok})
    return results


def _lemma_pbig(rng, trials):
    results = []
    cases = [
        ("dyadic", lambda: (DiagonalOperator.dyadic(int(rng.choice([1, 3, 5, -1]))), ss.ones()), None),
        ("identity", lambda: (MatrixOperator(np.eye(3)), np.ones(3)), NoSeparation),
        ("c0_vector", lambda: (DiagonalOperator.dyadic(1), ss.basis(2)), NoSeparation),
        ("sign_flip", lambda: (DiagonalOperator.dyadic(1, True), ss.ones()), (NoSeparation, ProjectionUnavailable)),
    ]
    wcfg = WitnessConfig(analysis=AnalysisConfig(horizons=(64, 128, 256, 512, 1024)))
    for i in range(trials):
        name, make, expected = cases[i % len(cases)]
        op, x = make()
        try:
            split = split_for(op) if not isinstance(op, MatrixOperator) else None
            delta, kept, delta0, _ = pbig_extract(op, split, x, wcfg)
            outcome = "SEPARATED"
            ok = expected is None and delta > 0 and len(kept) >= 2
            info = {"delta": delta, "delta0": delta0, "count": len(kept)}
        except OrbitLabError as exc:
            outcome = exc.tag
            ok = expected is not None and isinstance(exc, expected)
            info = {}
        results.append({"trial": i, "case": name, "outcome": outcome, "ok": ok, **info})
    return results


def cmd_lemma(cfg, args) -> int:
    desc = _require(cfg, "lemma")
    seed = _seed(args, cfg)
    trials = int(desc.get("trials", 10))
    rng = np.random.default_rng(seed)
    runner = {"telescoping": _lemma_telescoping, "multap": _lemma_multap, "pbig": _lemma_pbig}[desc["name"]]
    results = runner(rng, trials)
    ok = all(r["ok"] for r in results)
    report.write_json(_out_dir(args, cfg) / "results.json",
                      {"lemma": desc["name"], "seed": seed, "trials": trials, "all_ok": ok, "results": results})
    return 0 if ok else 6


def _require(cfg, key):
    if key not in cfg:
        raise ConfigError(f"config needs '{key}'", path=key)
    return cfg[key]


HANDLERS = {
    "decompose": cmd_decompose,
    "analyze": cmd_analyze,
    "witness": cmd_witness,
    "gallery": cmd_gallery,
    "lemma": cmd_lemma,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="orbitlab", description="Orbit compactness and c0-witness laboratory")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--out", help="output directory (default: config out_dir or '.')")
    p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    p.add_argument("--target", choices=("orbit", "diff"), help="analyze: family to analyse")
    p.add_argument("--m", type=int, help="difference step (analyze) or root order (gallery mth-root)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        code = HANDLERS[args.command](cfg, args)
    except OrbitLabError as exc:
        print(report.dumps(exc.to_dict()), end="", file=sys.stderr)
        return exc.code
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
