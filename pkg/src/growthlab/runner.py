"""Execute the tasks of a scenario file and collect verdict rows.

Input problems (schema violations, malformed objects, violated
preconditions) raise :class:`UsageError` with a JSON path.  Search guards
tripping during a task give an ``unknown`` row; other library errors give
a ``fail`` row carrying the message.
"""
from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable

import jsonschema

from . import ad, bell, cantor, density, generators, kelley, schemas, slalom
from .errors import (
    DepthGuard,
    GrowthLabError,
    HeightTooLarge,
    InsufficientPrefix,
    SequenceTooLong,
    SupportTooLarge,
)
from .rational import fmt, parse

PASS, FAIL, UNKNOWN = "pass", "fail", "unknown"
GUARDS = (DepthGuard, HeightTooLarge, InsufficientPrefix, SequenceTooLong, SupportTooLarge)
BRUTE_FORCE_COORDS = 16


class UsageError(Exception):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


def json_path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def validate(instance: Any, schema: dict, prefix: tuple = ()) -> None:
    """Raise UsageError for the first violation, ordered by path."""
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(instance),
                    key=lambda e: (len(e.absolute_path), [str(p) for p in e.absolute_path]))
    if errors:
        # the deepest message under the shallowest path is the most specific
        err = errors[0]
        while err.context:
            err = min(err.context, key=lambda e: -len(e.absolute_path))
        raise UsageError(json_path(prefix + tuple(err.absolute_path)), err.message)


class Task:
    """One task plus its path, for localized input errors."""

    def __init__(self, obj: dict, path: str, seed: int):
        self.obj = obj
        self.path = path
        self.seed = seed

    def __contains__(self, key: str) -> bool:
        return key in self.obj

    def get(self, key: str, conv: Callable = lambda v: v, default=None):
        if key not in self.obj:
            return default
        try:
            return conv(self.obj[key])
        except (ValueError, TypeError, KeyError, ZeroDivisionError) as exc:
            raise UsageError(f"{self.path}.{key}", str(exc)) from None

    def rational(self, key: str) -> Fraction | None:
        return self.get(key, parse)

    def each(self, key: str, conv: Callable) -> list:
        return self.get(key, lambda xs: [conv(x) for x in xs], [])

    def expect_ok(self, value) -> bool:
        """True when no ``expect`` is given or it matches ``value``."""
        if "expect" not in self.obj:
            return True
        want = self.obj["expect"]
        if isinstance(value, Fraction):
            return value == self.rational("expect")
        return value == want


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


# -- cantor ---------------------------------------------------------------------------

def _cantor_measure(t: Task) -> dict:
    a = t.get("set", cantor.ClopenSet.from_json)
    m = a.measure()
    supp = cantor.support(a)
    brute = None
    if len(supp) <= BRUTE_FORCE_COORDS:
        brute = cantor.brute_force_measure(a, supp)
    ok = (brute is None or brute == m) and t.expect_ok(m)
    return {"measure": fmt(m), "brute_force": None if brute is None else fmt(brute),
            "support": sorted(supp), "status": _status(ok)}


def _cantor_support(t: Task) -> dict:
    supp = sorted(cantor.support(t.get("set", cantor.ClopenSet.from_json)))
    return {"support": supp, "status": _status(t.expect_ok(supp))}


def _cantor_product(t: Task) -> dict:
    a = t.get("a", cantor.ClopenSet.from_json)
    b = t.get("b", cantor.ClopenSet.from_json)
    try:
        joint = cantor.product_measure_check(a, b)
    except AssertionError as exc:
        return {"status": FAIL, "error": str(exc)}
    return {"measure_a": fmt(a.measure()), "measure_b": fmt(b.measure()), "joint": fmt(joint),
            "status": _status(t.expect_ok(joint))}


# -- density --------------------------------------------------------------------------

def _density_density(t: Task) -> dict:
    d = t.get("set", density.PeriodicSet.from_json).density()
    return {"density": fmt(d), "status": _status(t.expect_ok(d))}


def _density_transfer(t: Task) -> dict:
    a = t.get("a", cantor.ClopenSet.from_json)
    b = t.get("b", cantor.ClopenSet.from_json)
    rep = density.transfer_check(a, b)
    return {"psi0": density.psi0(a).to_json(), "laws": rep["checks"], "status": _status(rep["pass"])}


def _density_buck(t: Task) -> dict:
    chain = t.each("chain", density.PeriodicSet.from_json)
    sup = t.rational("supremum")
    budget = t.get("budget")
    try:
        staged = density.buck_union(density.ChainGenerator(chain, sup), budget)
    except ValueError as exc:
        raise UsageError(f"{t.path}.chain", str(exc)) from None
    rows = []
    for n in t.obj["probes"]:
        c = density.staged_count(staged, n)
        ok = abs(c.estimate - staged.density) <= c.error_bound
        rows.append({"N": n, "count": c.count, "estimate": fmt(c.estimate),
                     "error_bound": fmt(c.error_bound), "pass": ok})
    return {"staged": staged.to_json(), "probes": rows,
            "status": _status(all(r["pass"] for r in rows))}


# -- ad ------------------------------------------------------------------------------

def _scenario(t: Task) -> ad.Scenario:
    return t.get("scenario", ad.Scenario.from_json)


def _labels(t: Task, key: str, s: ad.Scenario) -> list[str]:
    names = t.obj.get(key, [])
    for i, a in enumerate(names):
        if a not in s.family:
            raise UsageError(f"{t.path}.{key}[{i}]", f"no family prefix named {a!r}")
    return list(names)


def _ad_lower_bound(t: Task) -> dict:
    s = _scenario(t)
    alphas = _labels(t, "alphas", s)
    tau = t.get("tau", cantor.PartialAssignment.from_json)
    rep = ad.lower_bound_report(s, alphas, tau)
    return {**rep, "status": _status(rep.pop("pass"))}


def _ad_emptiness(t: Task) -> dict:
    s = _scenario(t)
    verdict = ad.emptiness_decide(t.get("C", cantor.ClopenSet.from_json), _labels(t, "betas", s),
                                  _labels(t, "alphas", s), s, t.get("depth"))
    out = verdict.to_json()
    if "expect" in t:
        status = _status(t.expect_ok(verdict.status))
    else:
        status = UNKNOWN if verdict.status == "unknown" else PASS
    return {"verdict": out, "status": status}


def _ad_contains(t: Task) -> dict:
    s = _scenario(t)
    alpha = t.get("alpha")
    if alpha not in s.family:
        raise UsageError(f"{t.path}.alpha", f"no family prefix named {alpha!r}")
    rep = ad.contains_check(s, alpha, t.get("n"))
    rep.pop("check")
    return {**rep, "status": _status(rep.pop("pass"))}


# -- slalom ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _table(H: int) -> slalom.OmegaTable:
    return slalom.OmegaTable(H)


def _atom_height(e) -> int:
    if isinstance(e, slalom.PosT):
        return e.V.height
    if isinstance(e, slalom.Height):
        return e.n
    return 0


def _slalom_decide(t: Task) -> dict:
    e = t.get("expr", slalom.expr_from_json)
    nf = slalom.normal_form(e)
    verdict = any(not c.finite and slalom.decide_infinite(c) for c in nf)
    H = max([_atom_height(a) for a in slalom.atoms(e)] + [1])
    oracle = _table(H).infinite(e) if H <= slalom.MAX_ENUM_HEIGHT else None
    ok = (oracle is None or oracle == verdict) and t.expect_ok(verdict)
    return {"infinite": verdict, "oracle": oracle,
            "normal_form": [c.to_json() for c in nf], "status": _status(ok)}


def _slalom_w_class(t: Task) -> dict:
    w = t.get("W", slalom.Slalom.from_json)
    delta = t.rational("delta")
    try:
        s, n = slalom.w_delta_class(w, delta)
    except ValueError as exc:
        raise UsageError(f"{t.path}.delta", str(exc)) from None
    return {"S": s.to_json(), "n": n, "tail_weight": fmt(slalom.tail_weight(w, n)),
            "status": _status(t.expect_ok(n))}


def _slalom_a_w(t: Task) -> dict:
    mp = slalom.a_w_measure(t.get("W", slalom.Slalom.from_json), t.get("n"))
    ok = mp.exact >= mp.union_bound and t.expect_ok(mp.exact)
    return {"exact": fmt(mp.exact), "union_bound": fmt(mp.union_bound), "status": _status(ok)}


def _cl2_row(vs, delta, cls=None) -> dict:
    wit = slalom.cl2_witness(vs, delta, cls)
    big = len(wit.indices) >= delta * len(vs)
    inf = slalom.decide_infinite(wit.conjunct(vs))
    atoms_, sets = slalom.atomization(vs, (wit.S, wit.n))
    fam = kelley.FiniteFamily.of([str(a) for a in atoms_], [[str(atoms_[j]) for j in row] for row in sets])
    kappa = kelley.kappa_lp(fam).value
    return {"S": wit.S.to_json(), "n": wit.n, "I": list(wit.indices),
            "f": {str(k): v for k, v in sorted(wit.f.items())}, "expected": fmt(wit.expected),
            "large": big, "infinite": inf, "kappa": fmt(kappa), "kappa_above_delta": kappa > delta,
            "pass": big and inf and kappa > delta}


def _slalom_cl2(t: Task) -> dict:
    vs = t.each("vs", slalom.Slalom.from_json)
    delta = t.rational("delta")
    if not 0 < delta < 1:
        raise UsageError(f"{t.path}.delta", "delta must lie strictly between 0 and 1")
    if len(vs) > 16:
        raise UsageError(f"{t.path}.vs", "at most 16 slaloms")
    row = _cl2_row(vs, delta)
    return {**row, "status": _status(row.pop("pass"))}


def _slalom_cl2_random(t: Task) -> dict:
    delta = t.rational("delta")
    if not 0 < delta < 1:
        raise UsageError(f"{t.path}.delta", "delta must lie strictly between 0 and 1")
    rng = random.Random(f"{t.seed}:{t.path}")
    rows = []
    for _ in range(t.get("count")):
        cls, vs = generators.slalom_class(rng, delta, rng.randint(1, t.get("k", default=6)))
        row = _cl2_row(vs, delta, cls)
        rows.append({"Vs": [v.to_json() for v in vs], **row})
    return {"instances": rows, "status": _status(all(r["pass"] for r in rows))}


def _slalom_diagonal(t: Task) -> dict:
    wns = t.each("wns", slalom.Slalom.from_json)
    H = t.get("H")
    if H < len(wns):
        raise UsageError(f"{t.path}.H", "H must be at least the list length")
    f = slalom.diagonal_escape(wns, H)
    ok = all(not wns[n - 1].level(n) >> f[n] & 1 for n in range(1, len(wns) + 1))
    return {"f": {str(k): v for k, v in sorted(f.items())}, "status": _status(ok)}


# -- kelley --------------------------------------------------------------------------

def _kelley_kappa(t: Task) -> dict:
    fam = t.get("family", kelley.FiniteFamily.from_json)
    cert = kelley.kappa_lp(fam)
    ub = kelley.kappa_upper_bounds(fam, t.get("L", default=12))
    ok = cert.check(fam) and all(cert.value <= u for u in ub) and ub[-1] == cert.value
    return {**cert.to_json(fam), "upper_bounds": [fmt(u) for u in ub],
            "status": _status(ok and t.expect_ok(cert.value))}


def _kelley_fragmentation(t: Task) -> dict:
    fams = t.each("families", kelley.FiniteFamily.from_json)
    delta = t.rational("delta")
    if not 0 < delta < 1:
        raise UsageError(f"{t.path}.delta", "delta must lie strictly between 0 and 1")
    rep = kelley.fragmentation_report(fams, delta)
    return {**rep, "status": _status(rep.pop("pass"))}


# -- bell ------------------------------------------------------------------------------

def _bell_node(x) -> bell.BellNode:
    return bell.node(x)


def _bell_measure(t: Task) -> dict:
    m = bell.BellClopen.from_nodes(t.each("nodes", _bell_node)).measure()
    return {"measure": fmt(m), "status": _status(t.expect_ok(m))}


def _taylor_row(m: int, n: int) -> dict:
    r = bell.taylor_check(m, n)
    return {"m": m, "n": n, "holds": r.holds, "lhs_upper": fmt(r.lhs_upper),
            "lhs_lower": fmt(r.lhs_lower), "rhs": fmt(r.rhs)}


def _bell_taylor(t: Task) -> dict:
    row = _taylor_row(t.get("m"), t.get("n"))
    ok = t.expect_ok(row["holds"]) if "expect" in t else row["holds"]
    return {**row, "status": _status(ok)}


def _bell_taylor_grid(t: Task) -> dict:
    rows = [_taylor_row(m, n) for m in range(1, t.get("m_max") + 1)
            for n in range(3 * m + 1, t.get("n_max") + 1)]
    return {"rows": rows, "status": _status(all(r["holds"] for r in rows))}


def _bell_v_trunc(t: Task) -> dict:
    pi = t.get("pi", bell.PiPrefix.from_json)
    H = t.get("H")
    if H is not None and H > pi.height:
        raise UsageError(f"{t.path}.H", f"prefix has height {pi.height}")
    m = bell.v_trunc(pi, H).measure()
    return {"measure": fmt(m), "status": _status(t.expect_ok(m))}


def _bell_iso(t: Task) -> dict:
    pos = t.each("pos", bell.PiPrefix.from_json)
    neg = t.each("neg", bell.PiPrefix.from_json)
    H = t.get("H")
    for key, pis in (("pos", pos), ("neg", neg)):
        for i, pi in enumerate(pis):
            if pi.height < H:
                raise UsageError(f"{t.path}.{key}[{i}]", f"height {pi.height} is below H = {H}")
    rep = bell.iso_condition_check(pos, neg, H, t.get("s", _bell_node, bell.ROOT))
    return {**rep, "status": _status(rep.pop("pass"))}


def _bell_positivity(t: Task) -> dict:
    s = t.get("s", _bell_node)
    pis = t.each("pis", bell.PiPrefix.from_json)
    try:
        rep = bell.strict_positivity_check(s, pis, t.get("n"))
    except ValueError as exc:
        raise UsageError(t.path, str(exc)) from None
    return {**rep, "status": _status(rep.pop("pass"))}


HANDLERS: dict[str, dict[str, Callable[[Task], dict]]] = {
    "cantor": {"measure": _cantor_measure, "support": _cantor_support, "product": _cantor_product},
    "density": {"density": _density_density, "transfer": _density_transfer,
                "buck_union": _density_buck},
    "ad": {"lower_bound": _ad_lower_bound, "emptiness": _ad_emptiness, "contains": _ad_contains},
    "slalom": {"decide": _slalom_decide, "w_delta_class": _slalom_w_class,
               "a_w_measure": _slalom_a_w, "cl2": _slalom_cl2, "cl2_random": _slalom_cl2_random,
               "diagonal": _slalom_diagonal},
    "kelley": {"kappa": _kelley_kappa, "fragmentation": _kelley_fragmentation},
    "bell": {"measure": _bell_measure, "taylor": _bell_taylor, "taylor_grid": _bell_taylor_grid,
             "v_trunc": _bell_v_trunc, "iso": _bell_iso, "positivity": _bell_positivity},
}
assert {k: set(v) for k, v in HANDLERS.items()} == {k: set(v) for k, v in schemas.OPS.items()}


def run_task(kind: str, obj: dict, path: str, seed: int) -> dict:
    task = Task(obj, path, seed)
    head = {"task": path, "op": obj["op"]}
    if "name" in obj:
        head["name"] = obj["name"]
    try:
        row = HANDLERS[kind][obj["op"]](task)
    except UsageError:
        raise
    except GUARDS as exc:
        row = {"status": UNKNOWN, "error": f"{type(exc).__name__}: {exc}"}
    except GrowthLabError as exc:
        if isinstance(exc, ValueError):
            raise UsageError(path, str(exc)) from None
        row = {"status": FAIL, "error": f"{type(exc).__name__}: {exc}"}
    except ValueError as exc:
        raise UsageError(path, str(exc)) from None
    return {**head, **row}


def run_scenario(doc: Any, seed: int | None = None) -> dict:
    """Validate and execute a scenario document; ``seed`` overrides the file's."""
    validate(doc, schemas.SCENARIO_FILE)
    kind = doc["kind"]
    validate(doc["payload"], schemas.payload_schema(kind), ("payload",))
    seed = doc.get("seed", 0) if seed is None else seed
    rows = [run_task(kind, obj, f"$.payload.tasks[{i}]", seed)
            for i, obj in enumerate(doc["payload"]["tasks"])]
    return {"kind": kind, "seed": seed, "verdicts": rows, "status": overall(r["status"] for r in rows)}


def overall(statuses) -> str:
    statuses = set(statuses)
    if FAIL in statuses:
        return FAIL
    if UNKNOWN in statuses:
        return UNKNOWN
    return PASS
