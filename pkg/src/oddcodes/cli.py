"""Command-line front end.

Usage: ``oddcodes GROUP ACTION [--key value ...] [--config FILE] [--out PATH]``.
Parameters come from defaults, then the key=value config file, then flags.
Every run writes one JSON document (config echo, version, result, a
self-verification block recomputed from the result, and a reproducibility
hash).  Exit codes: 0 ok, 1 inconclusive search, 2 bad config (nothing
written), 3 failed verification.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import boxcomplex as bx
from . import caratheodory as cr
from . import codes as cd
from . import masspartition as mp
from . import thickening as th
from .geom import set_diameter
from .io import (ConfigError, code_to_dict, content_hash, dumps, measure_to_dict,
                 read_code, read_config, read_graph, read_map, read_mass,
                 read_measure, write_csv)
from .oddmaps import sm_curve
from .options import SearchOptions

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2, 3

REQUIRED = object()


def _bool(s):
    if isinstance(s, bool):
        return s
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _floats(s):
    if isinstance(s, (list, tuple)):
        return [float(v) for v in s]
    return [float(v) for v in str(s).replace(",", " ").split()]


def _paths(s):
    return [p.strip() for p in str(s).split(",") if p.strip()]


class _Path(str):
    """Marker type: an input path that must exist."""


class _PathList(str):
    """Marker type: comma-separated input paths."""


COMMON = {"seed": (int, None), "restarts": (int, None),
          "max_iterations": (int, None)}


class Command:
    def __init__(self, name, func, params, randomized=False, help=""):
        self.name, self.func, self.params = name, func, params
        self.randomized, self.help = randomized, help


def _options(cfg) -> SearchOptions:
    kw = {"seed": cfg["seed"]}
    if cfg.get("restarts") is not None:
        kw["restarts"] = cfg["restarts"]
    if cfg.get("max_iterations") is not None:
        kw["max_iterations"] = cfg["max_iterations"]
    return SearchOptions(**kw)


# --- handlers: each returns (result, checks, status) ----------------------

def _code_checks(code: cd.ProjectiveCode, claimed: float) -> dict:
    # brute force over pairs with the plain arccos formula
    L = np.asarray(code.lines)
    best = math.inf
    for i in range(L.shape[0]):
        for j in range(i + 1, L.shape[0]):
            c = min(1.0, abs(float(L[i] @ L[j])) / (np.linalg.norm(L[i]) * np.linalg.norm(L[j])))
            best = min(best, math.acos(c))
    tol = 1e-7 if best < 1e-3 else 1e-9
    return {"recomputed_min_distance": best,
            "min_distance_matches": abs(best - claimed) <= tol}


def cmd_code_build(cfg):
    kind = cfg["kind"]
    d, n = cfg.get("d"), cfg.get("n")
    try:
        if kind == "hypercube":
            code = cd.hypercube_code(d)
        elif kind == "lattice":
            code = cd.lattice_code(d, n)
        elif kind == "600cell":
            code = cd.cell600_code()
        elif kind == "icosahedron":
            code = cd.icosahedron_code()
        elif kind == "circle":
            code = cd.circle_code(n)
        elif kind == "orthonormal":
            code = cd.orthonormal_code(d)
        else:
            raise ConfigError(f"unknown code kind {kind!r}")
    except TypeError:
        raise ConfigError(f"code kind {kind!r} needs its size parameters (d, n)") from None
    res = code_to_dict(code)
    res.update(size=code.size, thickening_scale=cd.thickening_scale(code), info=code.info)
    return res, _code_checks(code, code.min_distance), "ok"


def cmd_code_search(cfg):
    code = cd.search_code(cfg["d"], cfg["n"], _options(cfg))
    res = code_to_dict(code)
    res.update(size=code.size, thickening_scale=cd.thickening_scale(code),
               degenerate=code.degenerate, info=code.info)
    return res, _code_checks(code, code.min_distance), "ok"


def cmd_code_verify(cfg):
    code, data = read_code(cfg["code"])
    claimed = float(data.get("min_distance", code.min_distance))
    checks = _code_checks(code, claimed)
    res = {"d": code.d, "size": code.size, "claimed_min_distance": claimed,
           "min_distance": code.min_distance}
    return res, checks, "ok"


def cmd_thicken_wasserstein(cfg):
    mu, nu = read_measure(cfg["mu"]), read_measure(cfg["nu"])
    w, plan = th.wasserstein1(mu, nu)
    C = th.pairwise_geodesic(mu.atoms, nu.atoms)
    checks = {"plan_feasibility_error": plan.feasibility_error(mu, nu),
              "plan_cost_matches": abs(float(np.sum(plan.flows * C)) - w) <= 1e-9}
    if plan.source_potential is not None:
        u, v = plan.source_potential, plan.target_potential
        dual = float(u @ mu.weights + v @ nu.weights)
        checks["dual_gap"] = abs(dual - w)
        checks["dual_feasible"] = bool(np.all(u[:, None] + v[None, :] <= C + 1e-9))
    checks["plan_feasible"] = checks["plan_feasibility_error"] <= 1e-9
    checks["dual_gap_ok"] = checks.get("dual_gap", 0.0) <= 1e-9
    return {"distance": w, "flows": plan.flows}, checks, "ok"


def cmd_thicken_crosspoly(cfg):
    code, _ = read_code(cfg["code"])
    u = np.array(_floats(cfg["u"]))
    if cfg.get("normalize"):
        u = u / np.abs(u).sum()
    mu = th.crosspolytope_map(code, u)
    neg = th.crosspolytope_map(code, -u)
    bound = math.pi - code.min_distance
    checks = {"diameter_within_bound": mu.support_diameter <= bound + 1e-9,
              "antipodal": bool(np.allclose(np.sort(neg.atoms, axis=0),
                                            np.sort(-mu.atoms, axis=0), atol=0))}
    res = measure_to_dict(mu)
    res.update(support_diameter=mu.support_diameter, bound=bound)
    return res, checks, "ok"


def cmd_thicken_covermap(cfg):
    mu = read_measure(cfg["measure"])
    centers, _ = read_code(cfg["centers"])
    delta = cfg["delta"]
    v = th.covering_map(mu, centers.lines, delta)
    w = th.covering_map(-mu, centers.lines, delta)
    checks = {"unit_norm": abs(np.linalg.norm(v) - 1) <= 1e-12,
              "odd": float(np.max(np.abs(v + w))) <= 1e-12}
    return {"value": v, "delta": delta, "support_diameter": mu.support_diameter}, checks, "ok"


def _certificate(cap: cr.CapturedSet) -> dict:
    return {"atoms": cap.atoms, "weights": cap.weights, "diameter": cap.diameter,
            "residual": cap.residual, "delta": cap.delta, "success": cap.success,
            "restarts_used": cap.restarts_used}


def _replay_checks(f, cap, tol=cr.RESIDUAL_TOL):
    res, diam = cap.replay(f)
    w = cap.weights
    return {"replayed_residual": res, "replayed_diameter": diam,
            "weights_on_simplex": bool(np.all(w >= 0) and abs(w.sum() - 1) <= 1e-12),
            "residual_ok": (res <= tol) if cap.success else True,
            "diameter_ok": (diam <= cap.delta + cr.DIAMETER_TOL) if cap.success else True}


def cmd_capture_find(cfg):
    f = read_map(cfg["map"])
    delta = cfg["delta"]
    if cfg.get("matching"):
        cap = cr.find_matching_measure(f, delta, _options(cfg))
        g = cr.AntipodalDifference(f)
    else:
        cap, g = cr.find_zero_capture(f, delta, _options(cfg)), f
    res = _certificate(cap)
    if "common_point" in cap.info:
        res["common_point"] = cap.info["common_point"]
    return res, _replay_checks(g, cap), "ok" if cap.success else "inconclusive"


def cmd_capture_sm_verify(cfg):
    k, diam = cfg["k"], cfg["diam"]
    cert = cr.verify_sm_lemma(k, diam, cfg["samples"], cfg["offset"])
    t = cfg["offset"] + np.linspace(0.0, diam, cfg["samples"])
    P = sm_curve(k, t)
    poly = cr.sm_polygon(k)
    res = {"k": k, "diameter": diam, "arc": "inside" if cert.inside else "outside",
           "arc_distance": cert.distance, "threshold": cr.sm_threshold(k),
           "polygon_diameter": set_diameter(np.column_stack([np.cos(poly), np.sin(poly)]))}
    verdict = cert.inside
    if cfg.get("search"):
        if cfg.get("seed") is None:
            raise ConfigError("search = true needs a seed")
        cap = cr.find_zero_capture(cr.SMMap(k), diam, _options(cfg))
        res["capture"] = _certificate(cap)
        verdict = verdict or cap.success
    res["result"] = "inside" if verdict else "outside"
    checks = {"arc_certificate_verifies": cert.verify(P)}
    if "capture" in res:
        checks.update(_replay_checks(cr.SMMap(k), cap))
    return res, checks, "ok"


def _read_cover(path):
    from .io import _load_json
    data = _load_json(path)
    try:
        d = int(data["d"])
        if "arcs" in data:
            sets = [cr.ArcSet(float(s), float(length)) for s, length in data["arcs"]]
        else:
            sets = [cr.CapSet(c["center"], float(c["radius"])) for c in data["caps"]]
    except (KeyError, TypeError, ValueError) as err:
        raise ConfigError(f"bad cover file {path}: {err}") from None
    return d, sets


def cmd_capture_lsb(cfg):
    d, cover = _read_cover(cfg["cover"])
    out = cr.lsb_witness(cover, d, _options(cfg), grid=cfg["grid"])
    res = {"kind": out.kind, "delta": out.delta, "phase": out.phase}
    checks = {}
    if out.kind == "witness":
        A = cover[out.index]
        res.update(index=out.index, point=out.point)
        checks["point_in_set"] = bool(A.contains(out.point)[0])
        checks["antipode_in_set"] = bool(A.contains(-out.point)[0])
    elif out.kind == "violation":
        S = out.violating_set
        res["violating_set"] = S
        checks["set_diameter_ok"] = set_diameter(S) <= out.delta + 1e-9
        checks["uncovered"] = not any(np.all(A.contains(S)) for A in cover)
    return res, checks, "inconclusive" if out.kind == "inconclusive" else "ok"


def _masses(cfg, disk=False):
    paths = _paths(cfg["masses"])
    if not paths:
        raise ConfigError("no mass files given")
    return [read_mass(p, disk=disk) for p in paths]


def _exact_residuals(masses, P):
    return np.array([[mp.bisection_residual(m, p) for m in masses] for p in np.atleast_2d(P)])


def cmd_partition_ham(cfg):
    masses = _masses(cfg)
    out = mp.solve_ham_sandwich(masses, _options(cfg), cfg.get("tol"))
    R = _exact_residuals(masses, out.direction)[0]
    checks = {"replayed_residuals": R,
              "within_tol": bool(np.all(np.abs(R) <= out.tol)) if out.success else True}
    res = {"direction": out.direction, "residuals": out.residuals, "tol": out.tol,
           "success": out.success}
    return res, checks, "ok" if out.success else "inconclusive"


def cmd_partition_halving(cfg):
    masses = _masses(cfg)
    out = mp.halving_directions(masses, cfg["delta"], _options(cfg), cfg.get("tol"))
    R = _exact_residuals(masses, out.directions)
    checks = {"diameter_ok": set_diameter(out.directions) <= cfg["delta"] + cr.DIAMETER_TOL}
    if out.success:
        checks["witnesses_ok"] = all(
            R[a, i] <= out.tol and R[b, i] >= -out.tol
            for i, (a, b) in enumerate(zip(out.negative_witness, out.positive_witness)))
    res = {"directions": out.directions, "negative_witness": out.negative_witness,
           "positive_witness": out.positive_witness, "residuals": out.residuals,
           "tol": out.tol, "success": out.success}
    return res, checks, "ok" if out.success else "inconclusive"


def _partition_result(part: mp.LogPartition) -> dict:
    return {"times": part.times, "directions": part.directions, "residuals": part.residuals,
            "delta": part.delta, "k": part.k, "affine": part.affine,
            "max_angle": part.max_angle(), "success": part.success}


def cmd_partition_logs(cfg):
    masses = _masses(cfg, disk=True)
    part = mp.solve_log_bundle(masses, cfg["delta"], _options(cfg), cfg.get("tol"),
                               affine=bool(cfg.get("affine")))
    replay = mp.verify_partition(masses, part)
    checks = {"replay_matches": float(np.max(np.abs(replay - part.residuals))) <= 1e-9,
              "k_at_most_n": part.k <= len(masses)}
    if not part.affine:
        checks["last_coordinate_zero"] = bool(np.all(np.abs(part.directions[:, -1]) <= 1e-12))
    return _partition_result(part), checks, "ok" if part.success else "inconclusive"


def cmd_partition_verify(cfg):
    masses = _masses(cfg, disk=True)
    from .io import _load_json
    data = _load_json(cfg["partition"])
    data = data.get("result", data)
    try:
        part = mp.LogPartition(np.asarray(data["times"], dtype=float),
                               np.asarray(data["directions"], dtype=float),
                               np.zeros(len(masses)), float(data.get("delta", math.pi)),
                               affine=bool(data.get("affine", False)))
        R = mp.verify_partition(masses, part)
    except (KeyError, ValueError, TypeError) as err:
        raise ConfigError(f"bad partition file: {err}") from None
    tol = cfg.get("tol")
    if tol is None:
        tol = max(m.max_weight for m in masses)
    checks = {"residuals_within_tol": bool(np.all(np.abs(R) <= tol)),
              "angles_within_delta": part.max_angle() <= part.delta + 1e-6}
    return {"residuals": R, "tol": tol, "max_angle": part.max_angle()}, checks, "ok"


def _face_ok(G, face):
    P = [v for v in face if v > 0]
    N = [-v for v in face if v < 0]
    return all((min(p, q), max(p, q)) in G.edges for p in P for q in N)


def cmd_boxc_build(cfg):
    G = read_graph(cfg["graph"])
    K = bx.box_complex(G)
    checks = {"symmetric": K.is_symmetric(),
              "faces_bipartite": all(_face_ok(G, f) for f in K.maximal_faces)}
    res = {"n": K.n, "maximal_faces": K.to_json(), "dimension": K.dimension()}
    return res, checks, "ok"


def cmd_boxc_suspcheck(cfg):
    G = read_graph(cfg["graph"])
    A = bx.box_complex(bx.cone_graph(G))
    B = bx.suspension(bx.box_complex(G))
    eq = bx.complexes_equal(A, B)
    res = {"equal": eq, "cone_faces": len(A.maximal_faces),
           "suspension_faces": len(B.maximal_faces)}
    return res, {"equal": eq, "symmetric": A.is_symmetric() and B.is_symmetric()}, "ok"


def _coloring_checks(col: bx.CircularColoring) -> dict:
    G, x = col.graph, col.positions
    q = min((float(bx.rp1_distance(x[u - 1], x[v - 1])) for u, v in G.edges),
            default=math.inf)
    return {"recomputed_quality": q,
            "valid_at_rate": q >= math.pi / col.rate - bx.COLORING_TOL}


def _coloring_result(col):
    return {"positions": col.positions, "quality": col.quality, "rate": col.rate}


def cmd_boxc_chromatic(cfg):
    G = read_graph(cfg["graph"])
    col = bx.circular_chromatic_estimate(G, _options(cfg))
    return _coloring_result(col), _coloring_checks(col), "ok"


def cmd_boxc_cone_extend(cfg):
    G = read_graph(cfg["graph"])
    if cfg.get("positions") is not None:
        col = bx.CircularColoring(G, np.array(_floats(cfg["positions"])), cfg.get("rate"))
    else:
        if cfg.get("seed") is None:
            raise ConfigError("cone-extend needs positions or a seed for the estimate")
        col = bx.circular_chromatic_estimate(G, _options(cfg))
    res = {"input": _coloring_result(col)}
    try:
        g = bx.extend_coloring_to_cone(col)
    except bx.ColoringError as err:
        res["error"] = str(err)
        return res, {"extension_valid": False}, "ok"
    res["output"] = _coloring_result(g)
    checks = _coloring_checks(g)
    checks["extension_valid"] = checks["valid_at_rate"]
    return res, checks, "ok"


def cmd_boxc_st_bound(cfg):
    b = bx.simonyi_tardos_bound(cfg["coindex"], bool(cfg.get("cone")))
    return {"bound": b, "bound_float": float(b)}, {}, "ok"


COMMANDS = {
    "code build": Command("code build", cmd_code_build,
                          {"kind": (str, REQUIRED), "d": (int, None), "n": (int, None)},
                          help="explicit code (hypercube, lattice, 600cell, icosahedron, circle, orthonormal)"),
    "code search": Command("code search", cmd_code_search,
                           {"d": (int, REQUIRED), "n": (int, REQUIRED)}, randomized=True,
                           help="packing search for n lines in R^{d+1}"),
    "code verify": Command("code verify", cmd_code_verify, {"code": (_Path, REQUIRED)},
                           help="recompute a code file's min distance"),
    "thicken wasserstein": Command("thicken wasserstein", cmd_thicken_wasserstein,
                                   {"mu": (_Path, REQUIRED), "nu": (_Path, REQUIRED)},
                                   help="exact W1 between two measure files"),
    "thicken crosspoly": Command("thicken crosspoly", cmd_thicken_crosspoly,
                                 {"code": (_Path, REQUIRED), "u": (str, REQUIRED),
                                  "normalize": (_bool, False)},
                                 help="crosspolytope map of an l1-sphere point"),
    "thicken covermap": Command("thicken covermap", cmd_thicken_covermap,
                                {"measure": (_Path, REQUIRED), "centers": (_Path, REQUIRED),
                                 "delta": (float, REQUIRED)},
                                help="covering map of a measure"),
    "capture find": Command("capture find", cmd_capture_find,
                            {"map": (_Path, REQUIRED), "delta": (float, REQUIRED),
                             "matching": (_bool, False)}, randomized=True,
                            help="diameter-constrained zero capture"),
    "capture sm-verify": Command("capture sm-verify", cmd_capture_sm_verify,
                                 {"k": (int, REQUIRED), "diam": (float, REQUIRED),
                                  "samples": (int, 200), "offset": (float, 0.0),
                                  "search": (_bool, False)},
                                 help="moment-curve hull check on an arc (optionally with a capture search)"),
    "capture lsb": Command("capture lsb", cmd_capture_lsb,
                           {"cover": (_Path, REQUIRED), "grid": (int, 720)}, randomized=True,
                           help="antipodal witness for a closed cover"),
    "partition ham": Command("partition ham", cmd_partition_ham,
                             {"masses": (_PathList, REQUIRED), "tol": (float, None)},
                             randomized=True, help="classical ham sandwich"),
    "partition halving": Command("partition halving", cmd_partition_halving,
                                 {"masses": (_PathList, REQUIRED), "delta": (float, REQUIRED),
                                  "tol": (float, None)}, randomized=True,
                                 help="halving directions on the sphere"),
    "partition logs": Command("partition logs", cmd_partition_logs,
                              {"masses": (_PathList, REQUIRED), "delta": (float, REQUIRED),
                               "tol": (float, None), "affine": (_bool, False)},
                              randomized=True, help="log-bundle equipartition"),
    "partition verify": Command("partition verify", cmd_partition_verify,
                                {"masses": (_PathList, REQUIRED),
                                 "partition": (_Path, REQUIRED), "tol": (float, None)},
                                help="replay a log-bundle partition"),
    "boxc build": Command("boxc build", cmd_boxc_build, {"graph": (_Path, REQUIRED)},
                          help="maximal faces of the box complex"),
    "boxc suspcheck": Command("boxc suspcheck", cmd_boxc_suspcheck,
                              {"graph": (_Path, REQUIRED)},
                              help="compare B0(cone G) with the suspension of B0(G)"),
    "boxc chromatic": Command("boxc chromatic", cmd_boxc_chromatic,
                              {"graph": (_Path, REQUIRED)}, randomized=True,
                              help="circular coloring estimate"),
    "boxc cone-extend": Command("boxc cone-extend", cmd_boxc_cone_extend,
                                {"graph": (_Path, REQUIRED), "positions": (str, None),
                                 "rate": (float, None)},
                                help="extend a circular coloring to the cone graph"),
    "boxc st-bound": Command("boxc st-bound", cmd_boxc_st_bound,
                             {"coindex": (int, REQUIRED), "cone": (_bool, False)},
                             help="circular chromatic lower bound from a coindex bound"),
}


# --- config resolution ----------------------------------------------------

def _coerce(key, typ, value):
    if typ is _Path:
        if not Path(value).is_file():
            raise ConfigError(f"{key}: input file {value} not found")
        return str(value)
    if typ is _PathList:
        paths = _paths(value)
        missing = [p for p in paths if not Path(p).is_file()]
        if missing:
            raise ConfigError(f"{key}: input files not found: {', '.join(missing)}")
        return ",".join(paths)
    try:
        return typ(value)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{key}: {err}") from None


def resolve(cmd: Command, file_cfg: dict, flags: dict) -> dict:
    spec = {**COMMON, **cmd.params}
    merged = dict(file_cfg)
    merged.update({k: v for k, v in flags.items() if v is not None})
    unknown = sorted(set(merged) - set(spec))
    if unknown:
        raise ConfigError(f"unknown keys for '{cmd.name}': {', '.join(unknown)}")
    cfg = {}
    for key, (typ, default) in spec.items():
        if key in merged:
            cfg[key] = _coerce(key, typ, merged[key])
        elif default is REQUIRED:
            raise ConfigError(f"'{cmd.name}' needs '{key}'")
        else:
            cfg[key] = default
    if cmd.randomized and cfg.get("seed") is None:
        raise ConfigError(f"'{cmd.name}' is randomized and needs an explicit seed")
    if cfg.get("restarts") is not None and cfg["restarts"] < 1:
        raise ConfigError("restarts must be >= 1")
    return cfg


def execute(cmd: Command, cfg: dict) -> tuple[dict, int]:
    """Run a resolved command; returns the output document and exit code."""
    try:
        result, checks, status = cmd.func(cfg)
    except (ValueError, cr.CoveringError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(str(err)) from None
    passed = all(bool(v) for v in checks.values() if isinstance(v, (bool, np.bool_)))
    doc = {"command": cmd.name, "version": __version__, "config": cfg,
           "result": result, "status": status,
           "verification": {"passed": passed, "checks": checks}}
    doc["reproducibility_hash"] = content_hash(doc)
    doc["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    code = EXIT_OK
    if not passed:
        code = EXIT_VERIFY
    elif status == "inconclusive":
        code = EXIT_INCONCLUSIVE
    return doc, code


# --- sweep ----------------------------------------------------------------

def _flatten(prefix, obj, out):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}{k}." if prefix or k else k, v, out)
    elif isinstance(obj, (bool, int, float, str, np.floating, np.integer, np.bool_)):
        out[prefix.rstrip(".")] = obj
    elif obj is None:
        out[prefix.rstrip(".")] = ""


def sweep(cmd: Command, base: dict, param: str, values: list) -> tuple[list[dict], int]:
    if not values:
        raise ConfigError("empty sweep grid")
    if param not in {**COMMON, **cmd.params}:
        raise ConfigError(f"'{cmd.name}' has no parameter '{param}'")
    rows, worst = [], EXIT_OK
    for v in values:
        cfg = resolve(cmd, {}, {**base, param: v})
        doc, code = execute(cmd, cfg)
        row = {param: cfg[param]}
        _flatten("", doc["result"], row)
        row["verification_passed"] = doc["verification"]["passed"]
        row["status"] = doc["status"]
        rows.append(row)
        worst = max(worst, code if code != EXIT_INCONCLUSIVE else 0)
    return rows, worst


def _grid(args) -> list:
    if args.values:
        return _floats(args.values)
    if args.start is None or args.stop is None or args.step is None:
        raise ConfigError("sweep needs --values or --start/--stop/--step")
    if args.step <= 0 or args.stop < args.start:
        return []
    count = int(math.floor((args.stop - args.start) / args.step + 1e-9)) + 1
    return [round(args.start + i * args.step, 12) for i in range(count)]


# --- argument parsing -----------------------------------------------------

def _add_params(p, params):
    for key, (typ, default) in {**COMMON, **params}.items():
        p.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                       metavar=key.upper())


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oddcodes", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"oddcodes {__version__}")
    groups = ap.add_subparsers(dest="group", required=True)
    by_group: dict[str, dict[str, Command]] = {}
    for name, cmd in COMMANDS.items():
        g, a = name.split(" ")
        by_group.setdefault(g, {})[a] = cmd
    for g, actions in by_group.items():
        gp = groups.add_parser(g)
        sub = gp.add_subparsers(dest="action", required=True)
        for a, cmd in actions.items():
            p = sub.add_parser(a, help=cmd.help)
            p.add_argument("--config", default=None)
            p.add_argument("--out", default=None)
            _add_params(p, cmd.params)
    sp = groups.add_parser("sweep", help="run a command over a parameter grid, write CSV")
    sp.add_argument("target", nargs=2, metavar=("GROUP", "ACTION"))
    sp.add_argument("--param", required=True)
    sp.add_argument("--values", default=None)
    sp.add_argument("--start", type=float, default=None)
    sp.add_argument("--stop", type=float, default=None)
    sp.add_argument("--step", type=float, default=None)
    sp.add_argument("--config", default=None)
    sp.add_argument("--out", default=None)
    sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                    help="fixed parameter for every grid point")
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        file_cfg = read_config(args.config) if args.config else {}
        if args.group == "sweep":
            name = " ".join(args.target)
            if name not in COMMANDS:
                raise ConfigError(f"unknown command '{name}'")
            base = dict(file_cfg)
            for item in args.set:
                if "=" not in item:
                    raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
                k, v = item.split("=", 1)
                base[k.strip().replace("-", "_")] = v.strip()
            rows, code = sweep(COMMANDS[name], base, args.param, _grid(args))
            if args.out:
                write_csv(args.out, rows)
            else:
                import csv
                w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]))
                w.writeheader()
                w.writerows(rows)
            return code
        cmd = COMMANDS[f"{args.group} {args.action}"]
        flags = {k: getattr(args, k) for k in {**COMMON, **cmd.params}}
        cfg = resolve(cmd, file_cfg, flags)
        doc, code = execute(cmd, cfg)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    text = dumps(doc) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
