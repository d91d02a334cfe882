"""Batch command line: ``tilecocycle <command> --config <path> [--out dir] [--workers n] [--seed s]``.

Work items fan out to a process pool; every worker rebuilds the same tower
from the configuration and seed, and results come back in submission order,
so outputs do not depend on the worker count.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
import platform
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import click
import jsonschema
import numpy as np

from . import __version__, kernels
from .config import COMMANDS, ConfigError, RunConfig, parse_config, parse_real_like
from .hierarchy import Tower, sample_tiling, supertile_decomposition, window_patch
from .symbolic import best_split, parse_word, sample_sequence, word_check

MANIFEST_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["command", "status", "config_hash", "seed", "workers", "versions", "wall_time_s", "outputs"],
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "status": {"enum": ["ok", "failed"]},
        "config_path": {"type": "string"},
        "config_hash": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "seed": {"type": "integer"},
        "workers": {"type": "integer", "minimum": 1},
        "versions": {"type": "object", "required": ["tilecocycle", "python", "numpy", "backend"],
                     "additionalProperties": {"type": "string"}},
        "wall_time_s": {"type": "number", "minimum": 0},
        "outputs": {"type": "array", "items": {
            "type": "object", "required": ["path", "sha256", "bytes"],
            "properties": {"path": {"type": "string"}, "sha256": {"type": "string"}, "bytes": {"type": "integer"}}}},
    },
    "additionalProperties": False,
}


class CommandFailed(Exception):
    """Domain failure with a machine-readable payload."""

    def __init__(self, payload: dict):
        super().__init__(payload.get("message", payload.get("error", "failed")))
        self.payload = payload


# output ------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if np.isfinite(v) else str(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, complex):
        return [v.real, v.imag]
    return v


class Outputs:
    """Atomic writer that remembers what it wrote for the manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.written: list[dict] = []

    def write_bytes(self, name: str, data: bytes) -> Path:
        import hashlib

        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / name
        fd, tmp = tempfile.mkstemp(prefix=f".{name}.", dir=self.root)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        self.written = [w for w in self.written if w["path"] != name]
        self.written.append({"path": name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)})
        return path

    def write_json(self, name: str, obj) -> Path:
        text = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
        return self.write_bytes(name, text.encode())

    def write_csv(self, name: str, header: list[str], rows) -> Path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row[h]) for h in header])
        return self.write_bytes(name, buf.getvalue().encode())


# worker context ----------------------------------------------------------

_CTX: dict = {}


def _init_worker(doc_text: str) -> None:
    _CTX.clear()
    _CTX["cfg"] = parse_config(doc_text)


def _cfg() -> RunConfig:
    return _CTX["cfg"]


def _memo(key, build):
    if key not in _CTX:
        _CTX[key] = build()
    return _CTX[key]


def _rng(*tags) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([_cfg().seed, *map(int, tags)]))


def _sequence(horizon: int | None = None):
    cfg = _cfg()
    n = horizon or cfg.horizon
    return _memo(("x", n), lambda: sample_sequence(cfg.sampler, n))


def _tower():
    return _memo("tower", lambda: Tower(_cfg().system, _sequence()))


def _function(sys_=None):
    from .twisted import TLCFunction

    cfg = _cfg()
    sys_ = sys_ or cfg.system
    section = cfg.doc.get("function")
    if section is None:
        raise CommandFailed({"error": "config", "message": "this command needs a 'function' section"})
    index = {lab: i for i, lab in enumerate(cfg.system.labels)}
    if section["kind"] == "indicator":
        w = [0.0] * sys_.n_types
        for lab, c in section["weights"].items():
            w[index[lab]] = c
        return TLCFunction.indicator(sys_, w)
    boxes = {}
    for lab, items in section["boxes"].items():
        boxes[index[lab]] = [([float(parse_real_like(c)) for c in it[0]], [float(parse_real_like(c)) for c in it[1]],
                              it[2] if len(it) > 2 else 1.0) for it in items]
    return TLCFunction.from_boxes(sys_, boxes)


def _grid(section: dict) -> np.ndarray:
    from .twisted import log_grid

    return log_grid(section["lo"], section["hi"], section["count"])


def _pool_map(fn, items: list, workers: int, doc_text: str) -> list:
    if workers <= 1 or len(items) <= 1:
        _init_worker(doc_text)
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(doc_text,)) as ex:
        return list(ex.map(fn, items))


# validate ----------------------------------------------------------------

def _cmd_validate(cfg: RunConfig, out: Outputs, workers: int, doc_text: str) -> int:
    from .substitution import validate_system

    n_max = cfg.experiment("validate").get("n_max", 8)
    report = validate_system(cfg.system, cfg.sampler.realizable_words, n_max)
    payload = {"system": cfg.system.name, "passed": report.passed, **report.as_dict(),
               "config_hash": cfg.config_hash, "seed": cfg.seed}
    out.write_json("validation.json", payload)
    if not report.passed:
        failures = []
        for c in report.checks:
            if c.passed:
                continue
            details = c.failures or [{}]
            for f in details:
                item = {"check": c.name, "message": c.detail}
                item.update(f)
                if "rule" in item:
                    item["rule_name"] = cfg.system.rules[item["rule"]].name
                failures.append(item)
        raise CommandFailed({"error": "validation", "system": cfg.system.name, "failures": failures})
    return 0


# exponents ---------------------------------------------------------------

def _exponent_trial(trial: int) -> list[dict]:
    from .cocycles import lyapunov_spectrum, lyapunov_top, trace_stream, g_stream
    from .returns import InclusionFailure, g_matrix, tower_group

    cfg = _cfg()
    section = cfg.experiment("exponents")
    n = section.get("n_steps", 10000)
    n_seg = section.get("n_segments", 10)
    k_max = section.get("k_max", 6)
    seed = cfg.seed if trial == 0 else int(np.random.SeedSequence([cfg.seed, 2, trial]).generate_state(1)[0])
    sampler = dataclasses.replace(cfg.sampler, seed=seed)
    x = sample_sequence(sampler, max(n, cfg.horizon))
    sys_ = cfg.system
    recs = lyapunov_top(trace_stream(sys_, x), n, n_seg).records("trace_top")
    recs += lyapunov_spectrum(trace_stream(sys_, x), n, n_seg).records("trace_spectrum")
    logs = np.log([sys_.theta(int(r)) for r in x.plus[:n]])
    recs.append({"name": "d_log_expansion", "value": float(sys_.dim * logs.mean()),
                 "stderr": float(sys_.dim * logs.std(ddof=1) / np.sqrt(n)), "n": n})
    try:
        tower = Tower(sys_, sample_sequence(sampler, max(cfg.horizon, k_max + 8)))
        group = tower_group(tower, k_max)
        G = [g_matrix(sys_, r, group, group).matrix for r in range(sys_.n_rules)]
        recs += lyapunov_spectrum(g_stream(G, x), n, n_seg).records("G_spectrum")
    except (InclusionFailure, ValueError) as exc:
        recs.append({"name": "G_spectrum", "value": None, "stderr": None, "n": n, "error": str(exc)})
    return recs


def _cmd_exponents(cfg: RunConfig, out: Outputs, workers: int, doc_text: str) -> int:
    trials = cfg.experiment("exponents").get("trials", 1)
    per_trial = _pool_map(_exponent_trial, list(range(trials)), workers, doc_text)
    if trials == 1:
        records = per_trial[0]
    else:
        records = []
        for i, rec in enumerate(per_trial[0]):
            vals = [t[i]["value"] for t in per_trial]
            if any(v is None for v in vals):
                records.append(rec)
                continue
            records.append({"name": rec["name"], "value": float(np.mean(vals)),
                            "stderr": float(np.std(vals, ddof=1) / np.sqrt(trials)),
                            "n": rec["n"] * trials})
    for r in records:
        r.update(config_hash=cfg.config_hash, seed=cfg.seed)
    out.write_json("exponents.json", records)
    return 0


# twist -------------------------------------------------------------------

def _twist_item(index: int) -> tuple[list, dict]:
    from .twisted import growth_fit, twisted_series

    cfg = _cfg()
    section = cfg.experiment("twist")
    lam = [float(v) for v in cfg.lambdas("twist")[index]]
    R = _grid(section["R_grid"])
    tiling = _memo("twist_tiling", lambda: sample_tiling(_tower(), R[-1], _rng(1)))
    f = _memo("function", _function)
    series = twisted_series(tiling, f, lam, R, section.get("method", "cocycle"), seed={"seed": cfg.seed})
    fit = {"lambda": lam}
    try:
        fit.update(growth_fit(series).as_dict())
    except ValueError as exc:
        fit["error"] = str(exc)
    fit.update(config_hash=cfg.config_hash, seed=cfg.seed)
    return series.rows(), fit


def _cmd_twist(cfg: RunConfig, out: Outputs, workers: int, doc_text: str) -> int:
    n = len(cfg.lambdas("twist"))
    results = _pool_map(_twist_item, list(range(n)), workers, doc_text)
    d = cfg.system.dim
    header = [f"lambda_{i + 1}" for i in range(d)] + ["R", "re", "im", "abs", "method", "seed"]
    out.write_csv("twist.csv", header, [row for rows, _ in results for row in rows])
    out.write_json("twist_fit.json", [fit for _, fit in results])
    return 0


# veech -------------------------------------------------------------------

def _exact_generators(sys_, group):
    """d x r generator matrix with exact rationals when the basis allows it."""
    ex = sys_.basis.exact_embedding
    if ex is None:
        return group.embedding.tolist()
    d = sys_.dim
    return [[sum((Fraction(ex[b][a]) * c for b, c in enumerate(g.coords)), Fraction(0)) for g in group.generators]
            for a in range(d)]


def _veech_item(index: int) -> dict:
    from .deformation import apply_deformation, lengths_deformation, lift_to_counts
    from .returns import g_matrix, postal_check, tower_group
    from .twisted import veech_density

    cfg = _cfg()
    section = cfg.experiment("veech")
    lam = list(cfg.lambdas("veech")[index])
    word = parse_word(section["word"])
    sys_ = cfg.system
    check = word_check(sys_, word, section["split"]) if "split" in section else best_split(sys_, word)
    x = _sequence(max(cfg.horizon, section["N"] + len(word) + 1))
    if "lengths" in section:
        lifted = lift_to_counts(sys_)
        tower = Tower(lifted, x)
        group = tower_group(tower)
        param = lengths_deformation(lifted, group, [parse_real_like(v) for v in section["lengths"]])
        apply_deformation(tower, param, group)
        V = param.exact_V if param.exact_V is not None else param.V.tolist()
        work_sys = lifted
    else:
        tower = Tower(sys_, x)
        group = tower_group(tower)
        V = _exact_generators(sys_, group)
        work_sys = sys_
    G = [g_matrix(work_sys, r, group, group).matrix for r in range(work_sys.n_rules)]
    rho = parse_real_like(section["rho"])
    series = veech_density(x, G, V, [v if isinstance(v, Fraction) else v for v in lam], word, check.split, rho,
                           section["N"])
    rows = [{"j": j + 1, "k_j": k, "dist": dd, "indicator": int(ind), "D_N": D}
            for j, (k, dd, ind, D) in enumerate(zip(series.returns, series.dist, series.indicator, series.density))]
    try:
        postal = dataclasses.asdict(postal_check(work_sys, word, check.split, group, check.positively_simple))
    except Exception as exc:  # a word whose supertiles leave the group is reported, not fatal
        postal = {"error": str(exc)}
    summary = {"lambda": [str(v) if isinstance(v, Fraction) else v for v in lam], "word": section["word"],
               "split": check.split, "simple": check.simple, "positively_simple": check.positively_simple,
               "Q_minus": check.Q_minus, "Q_plus": check.Q_plus, "postal": postal, "exact": series.exact,
               "rho": str(series.rho) if series.exact else series.rho, "n_returns": len(series.returns),
               "D_N": str(series.density[-1]) if series.exact else series.final, "group_rank": group.rank,
               "G": G, "config_hash": cfg.config_hash, "seed": cfg.seed}
    return {"rows": rows, "summary": summary}


def _cmd_veech(cfg: RunConfig, out: Outputs, workers: int, doc_text: str) -> int:
    n = len(cfg.lambdas("veech"))
    results = _pool_map(_veech_item, list(range(n)), workers, doc_text)
    for i, res in enumerate(results):
        name = "veech.csv" if n == 1 else f"veech-{i}.csv"
        out.write_csv(name, ["j", "k_j", "dist", "indicator", "D_N"], res["rows"])
        res["summary"]["csv"] = name
    out.write_json("veech.json", [r["summary"] for r in results])
    return 0


# spectral-bound ----------------------------------------------------------

def _bound_item(item: tuple) -> dict:
    from .twisted import spectral_bound

    li, ri = item
    cfg = _cfg()
    section = cfg.experiment("spectral-bound")
    lam = [float(v) for v in cfg.lambdas("spectral-bound")[li]]
    r = section["r"][ri]
    b = spectral_bound(_tower(), _memo("function", _function), lam, r, section.get("n_samples", 64), _rng(3, li, ri))
    return b.as_dict()


def _cmd_spectral_bound(cfg: RunConfig, out: Outputs, workers: int, doc_text: str) -> int:
    from .twisted import KERNEL_C2, SpectralBound, decay_slope

    section = cfg.experiment("spectral-bound")
    lams = cfg.lambdas("spectral-bound")
    items = [(li, ri) for li in range(len(lams)) for ri in range(len(section["r"]))]
    results = _pool_map(_bound_item, items, workers, doc_text)
    report = []
    for li in range(len(lams)):
        rows = [res for (l_, _), res in zip(items, results) if l_ == li]
        entry = {"lambda": rows[0]["lambda"], "bounds": rows, "kernel_constant": KERNEL_C2,
                 "config_hash": cfg.config_hash, "seed": cfg.seed}
        if len(rows) >= 2:
            objs = [SpectralBound(np.asarray(b["lambda"]), b["r"], b["R"], b["bound"], b["l2"], b["stderr"],
                                  b["n_samples"]) for b in rows]
            entry["decay_slope"] = decay_slope(objs)
        report.append(entry)
    out.write_json("spectral_bound.json", report)
    return 0


# deform ------------------------------------------------------------------

def _deform_item(index: int) -> dict:
    from .deformation import (apply_deformation, asymptotic_cycle, combinatorial_fingerprint, deformed_tower,
                              global_linear, lengths_deformation, lift_to_counts)
    from .returns import g_matrix, tower_group
    from .twisted import growth_fit, twisted_series

    cfg = _cfg()
    section = cfg.experiment("deform")
    sys_ = cfg.system
    R = _grid(section["R_grid"])
    levels = section.get("levels", 8)
    lams = [[float(v) for v in lam] for lam in cfg.lambdas("deform")]
    result = {"index": index, "config_hash": cfg.config_hash, "seed": cfg.seed}
    if "lengths" in section:
        raw = [parse_real_like(v) for v in section["lengths"][index]]
        base = lift_to_counts(sys_)
        result["lengths"] = [str(v) if isinstance(v, Fraction) else v for v in raw]
    else:
        base = sys_
        raw = [[float(parse_real_like(c)) for c in row] for row in section["linear"][index]]
        result["linear"] = raw
    tower = Tower(base, _sequence())
    group = tower_group(tower)
    G = [g_matrix(base, r, group, group).matrix for r in range(base.n_rules)]
    param = lengths_deformation(base, group, raw) if "lengths" in section else global_linear(group, raw)
    cyc = asymptotic_cycle(tower, param, group)
    result["asymptotic_cycle"] = {"matrix": cyc.matrix, "det": cyc.det, "invertible": cyc.invertible}
    if not cyc.invertible:
        result["error"] = "asymptotic cycle is singular; deformation rejected"
        return result
    res = apply_deformation(tower, param, group, levels=levels)
    result["gamma_extended"] = res.extended
    result["offending"] = res.offending
    k = min(levels, 6)
    result["fingerprint"] = combinatorial_fingerprint(tower, group, G, k)
    if "lengths" not in section:
        result["series"] = []
        result["note"] = "twisted integrals on deformed tilings are computed for length deformations only"
        return result
    dt = deformed_tower(tower, raw)
    f = _function(dt.sys)
    tiling = sample_tiling(dt, R[-1], _rng(4, index))
    series_rows, fits = [], []
    for lam in lams:
        s = twisted_series(tiling, f, lam, R, seed={"seed": cfg.seed})
        series_rows += s.rows()
        fit = {"lambda": lam}
        try:
            fit.update(growth_fit(s).as_dict())
        except ValueError as exc:
            fit["error"] = str(exc)
        fits.append(fit)
    result["fits"] = fits
    result["series"] = series_rows
    return result


def _cmd_deform(cfg: RunConfig, out: Outputs, workers: int, doc_text: str) -> int:
    section = cfg.experiment("deform")
    n = len(section["lengths"]) if "lengths" in section else len(section["linear"])
    results = _pool_map(_deform_item, list(range(n)), workers, doc_text)
    d = cfg.system.dim
    header = [f"lambda_{i + 1}" for i in range(d)] + ["R", "re", "im", "abs", "method", "seed"]
    for i, res in enumerate(results):
        rows = res.pop("series")
        if rows:
            name = f"deform-{i}.csv"
            out.write_csv(name, header, rows)
            res["csv"] = name
    out.write_json("deform.json", results)
    bad = [r["index"] for r in results if "error" in r]
    if bad:
        raise CommandFailed({"error": "deformation", "message": "singular asymptotic cycle", "indices": bad})
    return 0


# decompose ---------------------------------------------------------------

def _decompose_item(item: tuple) -> dict:
    ri, s = item
    cfg = _cfg()
    section = cfg.experiment("decompose")
    R = float(section["R"][ri])
    tower = _tower()
    tiling = sample_tiling(tower, R, _rng(5, ri, s))
    dec = supertile_decomposition(tiling, R)
    rows = []
    for level, t, pos in dec.placements:
        size = sum(tower.level(level).counts[t])
        rows.append({"R": R, "sample": s, "level": level, "type": cfg.system.labels[t],
                     "translation": " ".join(_fmt(v) for v in pos), "count": size})
    summary = {"R": R, "sample": s, "tile_total": dec.tile_total, "boundary_tiles": len(dec.remainder),
               "top_level": dec.top_level, "Y": dec.Y, "H": dec.H,
               "boundary_ratio": {str(k): v for k, v in sorted(dec.boundary_ratio.items())},
               "counts": {str(k): v for k, v in sorted(dec.counts.items())}}
    if tower.exact:
        summary["conserved"] = dec.tile_total + len(dec.remainder) == len(window_patch(tiling, R).tiles)
    return {"rows": rows, "summary": summary}


def _cmd_decompose(cfg: RunConfig, out: Outputs, workers: int, doc_text: str) -> int:
    section = cfg.experiment("decompose")
    items = [(ri, s) for ri in range(len(section["R"])) for s in range(section.get("n_tilings", 1))]
    results = _pool_map(_decompose_item, items, workers, doc_text)
    out.write_csv("decompose.csv", ["R", "sample", "level", "type", "translation", "count"],
                  [row for res in results for row in res["rows"]])
    summaries = [res["summary"] for res in results]
    out.write_json("decompose.json", {"config_hash": cfg.config_hash, "seed": cfg.seed, "windows": summaries})
    if any(s.get("conserved") is False for s in summaries):
        raise CommandFailed({"error": "decompose", "message": "tile count not conserved"})
    return 0


_HANDLERS = {
    "validate": _cmd_validate,
    "exponents": _cmd_exponents,
    "twist": _cmd_twist,
    "veech": _cmd_veech,
    "spectral-bound": _cmd_spectral_bound,
    "deform": _cmd_deform,
    "decompose": _cmd_decompose,
}


def _versions() -> dict:
    return {"tilecocycle": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "backend": kernels.BACKEND}


def run_command(cfg: RunConfig, command: str, out_dir: str | os.PathLike, workers: int = 1,
                config_path: str = "") -> int:
    """Run one command, write its outputs and manifest; returns the exit status."""
    if command not in _HANDLERS:
        raise ValueError(f"unknown command {command!r}")
    out = Outputs(Path(out_dir))
    doc_text = json.dumps(cfg.doc, sort_keys=True)
    t0 = time.perf_counter()
    status, error = 0, None
    try:
        if command not in ("validate", "exponents") and command not in cfg.experiments:
            raise CommandFailed({"error": "config", "message": f"no '{command}' section under /experiments"})
        status = _HANDLERS[command](cfg, out, workers, doc_text)
    except CommandFailed as exc:
        status, error = 1, exc.payload
    except Exception as exc:
        status, error = 1, {"error": type(exc).__name__, "message": str(exc)}
    if error is not None:
        error.update(command=command, config_hash=cfg.config_hash, seed=cfg.seed)
        out.write_json("error.json", error)
    manifest = {"command": command, "status": "ok" if status == 0 else "failed", "config_path": str(config_path),
                "config_hash": cfg.config_hash, "seed": cfg.seed, "workers": workers, "versions": _versions(),
                "wall_time_s": time.perf_counter() - t0, "outputs": list(out.written)}
    jsonschema.validate(manifest, MANIFEST_SCHEMA)
    out.write_json("manifest.json", manifest)
    if error is not None:
        click.echo(json.dumps(_jsonable(error), sort_keys=True), err=True)
    return status


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get("TILECOCYCLE_WORKERS", "1")))
    except ValueError:
        return 1


def _common(fn):
    fn = click.option("--seed", type=int, default=None, help="Override the configured seed.")(fn)
    fn = click.option("--workers", type=click.IntRange(min=1), default=None,
                      help="Worker processes (default: $TILECOCYCLE_WORKERS or 1).")(fn)
    fn = click.option("--out", "out_dir", type=click.Path(file_okay=False), default="tilecocycle-out",
                      show_default=True, help="Output directory.")(fn)
    fn = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True,
                      help="JSON run configuration.")(fn)
    return fn


def _invoke(command: str, config_path: str, out_dir: str, workers: int | None, seed: int | None) -> None:
    try:
        with open(config_path, "rb") as fh:
            text = fh.read()
        cfg = parse_config(text)
        if seed is not None:
            cfg = cfg.with_seed(seed)
    except ConfigError as exc:
        payload = {"command": command, **exc.as_dict()}
        click.echo(json.dumps(payload, sort_keys=True), err=True)
        sys.exit(2)
    status = run_command(cfg, command, out_dir, workers or _default_workers(), config_path)
    sys.exit(status)


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="tilecocycle")
def main():
    """Renormalization cocycles and weak-mixing diagnostics for random substitution tilings."""


def _register(name: str, help_text: str):
    @_common
    def cmd(config_path, out_dir, workers, seed):
        _invoke(name, config_path, out_dir, workers, seed)

    cmd.__doc__ = help_text
    main.command(name=name, help=help_text)(cmd)


for _name, _help in [
    ("validate", "Check the substitution system; exit 1 naming the failing rule and parent."),
    ("exponents", "Lyapunov exponents of the trace and return-vector cocycles."),
    ("twist", "Twisted ergodic integrals over a lambda grid and R grid, with growth fits."),
    ("veech", "Veech density of return times for each spectral parameter."),
    ("spectral-bound", "Upper bounds on spectral measure of small balls."),
    ("deform", "Deform tile shapes and recompute twisted integrals."),
    ("decompose", "Greedy supertile decomposition of large windows."),
]:
    _register(_name, _help)


if __name__ == "__main__":
    main()
