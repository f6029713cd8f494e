"""Command line driver: ``check``, ``generate`` and ``verify`` a project.

A project is described by a plain ``key = value`` file::

    # lines starting with '#' are comments
    dsl_dir   = dsl              # directory holding the *.gmac role files
    targets   = src/*.cs src/**/*.c
    dialect   = csharp
    function.sqrt = MathF.Sqrt   # per-function name overrides
    strict    = false            # unbound input coefficients are errors
    emit_zeros = false           # declare unbound output coefficients as 0
    verify    = false            # run the oracle check after generate
    samples   = 1000
    seed      = 0
    mirror    =                  # write results under this directory instead

Relative paths are resolved against the directory of the config file.
``dsl_dir = @stdlib`` selects the shipped fixture pack.

Diagnostics and verification reports go to stdout as JSON lines; the
run summary (with timings) goes to stderr.
"""

from __future__ import annotations

import argparse
import glob
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .compiler import CompiledProject, compile_project
from .dsl import FILE_NAMES, parse_project
from .errors import ConfigError, DiagnosticsError, GAMacroError

log = logging.getLogger("gamacro")

EXIT_OK, EXIT_DIAGNOSTICS, EXIT_INTERNAL = 0, 1, 2
_BOOL = {"true": True, "yes": True, "on": True, "1": True,
         "false": False, "no": False, "off": False, "0": False}


@dataclass
class ProjectConfig:
    dsl_dir: Path
    targets: List[str] = field(default_factory=list)
    dialect: str = "neutral"
    functions: Dict[str, str] = field(default_factory=dict)
    strict: bool = False
    emit_zeros: bool = False
    verify: bool = False
    samples: int = 1000
    seed: int = 0
    mirror: Optional[Path] = None
    root: Path = Path(".")

    def dialect_obj(self):
        from .codegen import get_dialect

        d = get_dialect(self.dialect)
        return d.with_functions(self.functions) if self.functions else d


def parse_config(text: str, root: Path = Path(".")) -> ProjectConfig:
    """Read the key-value project format described in the module docstring."""
    values: Dict[str, str] = {}
    functions: Dict[str, str] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {n}: expected 'key = value', got {raw.strip()!r}")
        key, value = key.strip(), value.strip()
        if key.startswith("function."):
            functions[key[len("function."):]] = value
        else:
            values[key] = value
    known = {"dsl_dir", "targets", "dialect", "strict", "emit_zeros", "verify", "samples", "seed", "mirror"}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if "dsl_dir" not in values:
        raise ConfigError("config needs a dsl_dir entry")

    def flag(k):
        v = values.get(k, "false").lower()
        if v not in _BOOL:
            raise ConfigError(f"{k} must be true or false, got {values[k]!r}")
        return _BOOL[v]

    def integer(k, default):
        try:
            return int(values.get(k, default))
        except ValueError:
            raise ConfigError(f"{k} must be an integer, got {values[k]!r}") from None

    mirror = values.get("mirror") or None
    cfg = ProjectConfig(
        dsl_dir=_resolve_dsl(values["dsl_dir"], root),
        targets=values.get("targets", "").split(),
        dialect=values.get("dialect", "neutral"),
        functions=functions,
        strict=flag("strict"),
        emit_zeros=flag("emit_zeros"),
        verify=flag("verify"),
        samples=integer("samples", 1000),
        seed=integer("seed", 0),
        mirror=(root / mirror) if mirror else None,
        root=root,
    )
    cfg.dialect_obj()  # validates the dialect and the function map
    return cfg


def load_config(path: str) -> ProjectConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read project file {path!r}: {e.strerror}") from None
    return parse_config(text, p.parent)


def _resolve_dsl(value: str, root: Path) -> Path:
    if value == "@stdlib":
        from .stdlib import PACK_DIR

        return PACK_DIR
    return root / value


# ---------------------------------------------------------------------------
# stages
# ---------------------------------------------------------------------------

def read_dsl(dsl_dir: Path) -> Dict[str, Tuple[str, str]]:
    """Role -> (file name, text); each file is read exactly once."""
    if not dsl_dir.is_dir():
        raise ConfigError(f"DSL directory {str(dsl_dir)!r} does not exist")
    out = {}
    for role, fname in FILE_NAMES.items():
        path = dsl_dir / fname
        if path.is_file():
            out[role] = (str(path), path.read_text(encoding="utf-8"))
    return out


def compile_dsl(sources: Dict[str, Tuple[str, str]]) -> CompiledProject:
    ast = parse_project({r: t for r, (_, t) in sources.items()}, {r: f for r, (f, _) in sources.items()})
    return compile_project(ast)


def target_files(cfg: ProjectConfig) -> List[Path]:
    found = set()
    for pattern in cfg.targets:
        full = pattern if os.path.isabs(pattern) else str(cfg.root / pattern)
        found.update(Path(p) for p in glob.glob(full, recursive=True) if os.path.isfile(p))
    return sorted(found)


def _diagnostics(err: GAMacroError) -> List[dict]:
    errs = err.errors if isinstance(err, DiagnosticsError) else [err]
    return [e.to_dict() for e in errs]


def _emit(record: dict, out):
    out.write(json.dumps(record, sort_keys=True) + "\n")


# worker state: each process compiles the project once from in-memory text
_WORKER: Dict[str, object] = {}


def _init_worker(sources, cfg):
    from .symbolic import SymbolicCache

    _WORKER["project"] = compile_dsl(sources)
    _WORKER["cfg"] = cfg
    _WORKER["cache"] = SymbolicCache()


def _generate_one(bp):
    """Generate one binding point; returns (text, assignments, hits, misses, diagnostics)."""
    from .codegen import Assignment, generate

    cfg: ProjectConfig = _WORKER["cfg"]
    cache = _WORKER["cache"]
    h0, m0 = cache.hits, cache.misses
    try:
        g = generate(_WORKER["project"], bp, cfg.dialect_obj(), cfg.strict, cfg.emit_zeros, cache)
    except GAMacroError as e:
        return None, 0, cache.hits - h0, cache.misses - m0, _diagnostics(e)
    n = sum(1 for it in g.sequence.items if isinstance(it, Assignment))
    warnings = [{"file": bp.file, "span": [bp.open_line + 1, 1, bp.close_line + 1, 1],
                 "code": "Warning", "message": w} for w in g.evaluation.warnings]
    return g.text, n, cache.hits - h0, cache.misses - m0, warnings


def _verify_one(args):
    from .codegen import verify_block

    bp, block, seed = args
    cfg: ProjectConfig = _WORKER["cfg"]
    try:
        rep = verify_block(_WORKER["project"], bp, block, cfg.dialect_obj(), cfg.samples,
                           np.random.default_rng(seed))
    except GAMacroError as e:
        return None, _diagnostics(e)
    return rep.to_dict(), []


class _Pool:
    """A process pool, or inline execution for a single job."""

    def __init__(self, jobs: int, sources, cfg):
        self.jobs = jobs
        if jobs > 1:
            self.ex = ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(sources, cfg))
        else:
            _init_worker(sources, cfg)
            self.ex = None

    def map(self, fn, items):
        if self.ex is None:
            return [fn(x) for x in items]
        return list(self.ex.map(fn, items))

    def close(self):
        if self.ex is not None:
            self.ex.shutdown()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_check(cfg: ProjectConfig, out=None) -> int:
    out = out or sys.stdout
    try:
        compile_dsl(read_dsl(cfg.dsl_dir))
    except GAMacroError as e:
        for d in _diagnostics(e):
            _emit(d, out)
        return EXIT_DIAGNOSTICS
    return EXIT_OK


def _scan(files, cfg, out):
    """Read every target once and find its binding points."""
    from .codegen import scan_source

    texts, points, status = {}, {}, EXIT_OK
    for path in files:
        text = path.read_text(encoding="utf-8")
        texts[path] = text
        try:
            points[path] = scan_source(text, cfg.dialect, str(path))
        except GAMacroError as e:
            for d in _diagnostics(e):
                _emit(d, out)
            status = EXIT_DIAGNOSTICS
    return texts, points, status


def _dest(cfg: ProjectConfig, path: Path) -> Path:
    if cfg.mirror is None:
        return path
    try:
        rel = path.resolve().relative_to(cfg.root.resolve())
    except ValueError:
        rel = Path(path.name)
    return cfg.mirror / rel


def _seed(cfg: ProjectConfig, file_index: int, bp_index: int) -> List[int]:
    return [cfg.seed, file_index, bp_index]


def cmd_generate(cfg: ProjectConfig, jobs: int = 1, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    from .codegen import extract_block, splice_all

    t0 = time.perf_counter()
    try:
        sources = read_dsl(cfg.dsl_dir)
        compile_dsl(sources)
    except GAMacroError as e:
        for d in _diagnostics(e):
            _emit(d, out)
        return EXIT_DIAGNOSTICS
    if not cfg.targets:
        raise ConfigError("generate needs at least one target glob")
    files = target_files(cfg)
    texts, points, status = _scan(files, cfg, out)
    work = [(p, i, bp) for p in files for i, bp in enumerate(points.get(p, []))]
    pool = _Pool(jobs, sources, cfg)
    try:
        results = pool.map(_generate_one, [bp for _, _, bp in work])
        stats = {"binding_points": len(work), "assignments": 0, "files_written": 0}
        hits = misses = 0
        per_file: Dict[Path, list] = {}
        failed = set()
        for (path, _, bp), (text, n, h, m, diags) in zip(work, results):
            hits += h
            misses += m
            for d in diags:
                _emit(d, out)
            if text is None:
                failed.add(path)
                status = EXIT_DIAGNOSTICS
                continue
            stats["assignments"] += n
            per_file.setdefault(path, []).append((bp, text))
        new_texts = {}
        for path in files:
            if path in failed or path not in per_file:
                continue
            new = splice_all(texts[path], per_file[path])
            new_texts[path] = new
            dest = _dest(cfg, path)
            if dest != path or new != texts[path]:
                dest.parent.mkdir(parents=True, exist_ok=True)
                dest.write_text(new, encoding="utf-8")
                stats["files_written"] += 1
        if cfg.verify:
            from .codegen import scan_source

            jobs_v = []
            for fi, path in enumerate(files):
                if path not in new_texts:
                    continue
                for bi, bp in enumerate(scan_source(new_texts[path], cfg.dialect, str(path))):
                    jobs_v.append((bp, extract_block(new_texts[path], bp), _seed(cfg, fi, bi)))
            if _report_verify(pool.map(_verify_one, jobs_v), out):
                status = EXIT_DIAGNOSTICS
    finally:
        pool.close()
    total = hits + misses
    stats["cache_hit_rate"] = round(hits / total, 4) if total else 0.0
    stats["wall_time_s"] = round(time.perf_counter() - t0, 3)
    err.write("gamacro generate: " + json.dumps(stats, sort_keys=True) + "\n")
    return status


def _report_verify(results, out) -> bool:
    failed = False
    for rep, diags in results:
        for d in diags:
            _emit(d, out)
        if rep is None:
            failed = True
            continue
        _emit({"kind": "verify", **rep}, out)
        failed |= not rep["ok"]
    return failed


def cmd_verify(cfg: ProjectConfig, jobs: int = 1, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    """Check every binding point's generated block against the oracle.

    Binding points without a generated block are generated in memory first.
    """
    from .codegen import extract_block

    t0 = time.perf_counter()
    try:
        sources = read_dsl(cfg.dsl_dir)
        compile_dsl(sources)
    except GAMacroError as e:
        for d in _diagnostics(e):
            _emit(d, out)
        return EXIT_DIAGNOSTICS
    files = target_files(cfg)
    texts, points, status = _scan(files, cfg, out)
    pool = _Pool(jobs, sources, cfg)
    try:
        missing = [(p, i, bp) for p in files for i, bp in enumerate(points.get(p, [])) if bp.block is None]
        fresh = dict(zip([(p, i) for p, i, _ in missing], pool.map(_generate_one, [bp for *_, bp in missing])))
        jobs_v, pre = [], []
        for fi, path in enumerate(files):
            for bi, bp in enumerate(points.get(path, [])):
                if bp.block is not None:
                    block = extract_block(texts[path], bp)
                else:
                    text, _, _, _, diags = fresh[(path, bi)]
                    if text is None:
                        pre.append((None, diags))
                        continue
                    block = text
                jobs_v.append((bp, block, _seed(cfg, fi, bi)))
        results = pre + pool.map(_verify_one, jobs_v)
    finally:
        pool.close()
    if _report_verify(results, out):
        status = EXIT_DIAGNOSTICS
    n_ok = sum(1 for r, _ in results if r is not None and r["ok"])
    summary = {"binding_points": len(results), "passed": n_ok,
               "wall_time_s": round(time.perf_counter() - t0, 3)}
    err.write("gamacro verify: " + json.dumps(summary, sort_keys=True) + "\n")
    return status


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gamacro", description="Geometric algebra macro code generator.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("check", "parse and compile the DSL files"),
                        ("generate", "fill binding points in the target files"),
                        ("verify", "compare generated code with the numeric oracle")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--project", required=True, help="key = value project file")
        p.add_argument("--dsl", help="override dsl_dir ('@stdlib' for the shipped pack)")
        p.add_argument("--dialect", help="override the target dialect")
        p.add_argument("--strict", action="store_true", default=None, help="unbound inputs are errors")
        p.add_argument("--emit-zeros", action="store_true", default=None, help="declare unbound outputs as 0")
        p.add_argument("--seed", type=int, help="seed for verification sampling")
        p.add_argument("--samples", type=int, help="random samples per binding point")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")
        p.add_argument("--mirror", help="write results under this directory")
        if name == "generate":
            p.add_argument("--verify", action="store_true", default=None, help="verify after generating")
    return ap


def _apply_flags(cfg: ProjectConfig, a) -> ProjectConfig:
    changes = {}
    if a.dsl:
        changes["dsl_dir"] = _resolve_dsl(a.dsl, Path("."))
    if a.dialect:
        changes["dialect"] = a.dialect
    for k in ("strict", "emit_zeros", "seed", "samples"):
        v = getattr(a, k)
        if v is not None:
            changes[k] = v
    if getattr(a, "verify", None):
        changes["verify"] = True
    if a.mirror:
        changes["mirror"] = Path(a.mirror)
    cfg = replace(cfg, **changes)
    cfg.dialect_obj()
    return cfg


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=os.environ.get("GAMACRO_LOG", "WARNING").upper(),
                        format="%(name)s %(levelname)s: %(message)s")
    a = build_parser().parse_args(argv)
    try:
        cfg = _apply_flags(load_config(a.project), a)
        jobs = max(1, a.jobs)
        log.info("project %s: dsl_dir=%s dialect=%s jobs=%d", a.project, cfg.dsl_dir, cfg.dialect, jobs)
        if a.command == "check":
            return cmd_check(cfg)
        if a.command == "generate":
            return cmd_generate(cfg, jobs)
        return cmd_verify(cfg, jobs)
    except GAMacroError as e:
        for d in _diagnostics(e):
            _emit(d, sys.stdout)
        return EXIT_DIAGNOSTICS
    except Exception as e:  # noqa: BLE001 - anything else is a bug
        log.exception("internal error")
        sys.stderr.write(f"gamacro: internal error: {type(e).__name__}: {e}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
