#!/usr/bin/env python3
"""Generate frozen LP/MILP reference cases solved with scipy's HiGHS backend.

Writes lp_cases.json next to this script. Infinities are encoded as +-1e30.
Regenerating the file changes the test fixtures; commit the result only
together with a note in the test that reads it.
"""

import json
import pathlib

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

INF = 1e30

STATUS = {0: "optimal", 2: "infeasible", 3: "unbounded"}


def enc(v):
    if v == np.inf:
        return INF
    if v == -np.inf:
        return -INF
    return float(v)


def solve(case, integrality_on):
    n = len(case["cols"])
    obj = np.array([c["obj"] for c in case["cols"]])
    sign = -1.0 if case["maximize"] else 1.0
    lb = np.array([c["lb"] for c in case["cols"]])
    ub = np.array([c["ub"] for c in case["cols"]])
    integrality = np.array(
        [1 if (c["binary"] and integrality_on) else 0 for c in case["cols"]]
    )
    constraints = []
    if case["rows"]:
        a = np.zeros((len(case["rows"]), n))
        lo = np.zeros(len(case["rows"]))
        hi = np.zeros(len(case["rows"]))
        for i, row in enumerate(case["rows"]):
            for j, coef in row["terms"]:
                a[i, j] = coef
            lo[i] = row["lo"]
            hi[i] = row["hi"]
        constraints = [LinearConstraint(a, lo, hi)]
    res = milp(
        c=sign * obj,
        constraints=constraints,
        integrality=integrality,
        bounds=Bounds(lb, ub),
    )
    if res.status not in STATUS:
        raise RuntimeError(f"{case['name']}: unexpected scipy status {res.status}")
    out = {"status": STATUS[res.status]}
    if res.status == 0:
        out["objective"] = float(sign * res.fun)
    return out


def decode_bounds(case):
    for c in case["cols"]:
        c["lb"] = -np.inf if c["lb"] <= -INF else c["lb"]
        c["ub"] = np.inf if c["ub"] >= INF else c["ub"]
    for r in case["rows"]:
        r["lo"] = -np.inf if r["lo"] <= -INF else r["lo"]
        r["hi"] = np.inf if r["hi"] >= INF else r["hi"]


def random_case(rng, idx):
    n = int(rng.integers(2, 10))
    n_bin = int(rng.integers(0, min(6, n) + 1))
    cols = []
    x0 = np.zeros(n)
    for j in range(n):
        if j < n_bin:
            cols.append({"lb": 0.0, "ub": 1.0, "obj": 0.0, "binary": True})
            x0[j] = rng.uniform(0.0, 1.0)
        else:
            lo = rng.uniform(-5.0, 0.0)
            hi = lo + rng.uniform(0.5, 8.0)
            cols.append({"lb": lo, "ub": hi, "obj": 0.0, "binary": False})
            x0[j] = rng.uniform(lo, hi)
    for c in cols:
        c["obj"] = float(rng.uniform(-5.0, 5.0))
    rows = []
    for _ in range(int(rng.integers(1, 11))):
        k = int(rng.integers(2, min(4, n) + 1))
        picks = rng.choice(n, size=k, replace=False)
        terms = []
        a0 = 0.0
        for j in picks:
            coef = float(rng.uniform(0.5, 4.0)) * (1 if rng.uniform() < 0.5 else -1)
            terms.append([int(j), coef])
            a0 += coef * x0[j]
        u = rng.uniform()
        if u < 0.15:
            lo, hi = a0, a0
        elif u < 0.60:
            lo, hi = -np.inf, a0 + rng.uniform(0.0, 3.0)
        elif u < 0.85:
            lo, hi = a0 - rng.uniform(0.0, 3.0), np.inf
        else:
            lo, hi = a0 - rng.uniform(0.0, 2.0), a0 + rng.uniform(0.0, 2.0)
        rows.append({"terms": terms, "lo": lo, "hi": hi})
    return {
        "name": f"rand_{idx:03d}",
        "maximize": bool(rng.uniform() < 0.5),
        "cols": cols,
        "rows": rows,
    }


def crafted():
    yield {
        "name": "crafted_infeasible_lp",
        "maximize": True,
        "cols": [
            {"lb": 0.0, "ub": 10.0, "obj": 1.0, "binary": False},
            {"lb": 0.0, "ub": 10.0, "obj": 1.0, "binary": False},
        ],
        "rows": [
            {"terms": [[0, 1.0], [1, 1.0]], "lo": -np.inf, "hi": 1.0},
            {"terms": [[0, 1.0], [1, 1.0]], "lo": 2.0, "hi": np.inf},
        ],
    }
    yield {
        "name": "crafted_unbounded_lp",
        "maximize": True,
        "cols": [
            {"lb": 0.0, "ub": np.inf, "obj": 1.0, "binary": False},
            {"lb": 0.0, "ub": 5.0, "obj": 0.5, "binary": False},
        ],
        "rows": [{"terms": [[0, 1.0], [1, -1.0]], "lo": -1.0, "hi": np.inf}],
    }
    yield {
        "name": "crafted_integrality_infeasible",
        "maximize": True,
        "cols": [
            {"lb": 0.0, "ub": 1.0, "obj": 1.0, "binary": True},
            {"lb": 0.0, "ub": 1.0, "obj": 1.0, "binary": True},
        ],
        "rows": [{"terms": [[0, 2.0], [1, 2.0]], "lo": 1.0, "hi": 1.0}],
    }
    yield {
        "name": "crafted_knapsack",
        "maximize": True,
        "cols": [
            {"lb": 0.0, "ub": 1.0, "obj": 10.0, "binary": True},
            {"lb": 0.0, "ub": 1.0, "obj": 13.0, "binary": True},
            {"lb": 0.0, "ub": 1.0, "obj": 7.0, "binary": True},
            {"lb": 0.0, "ub": 4.0, "obj": 1.0, "binary": False},
        ],
        "rows": [
            {
                "terms": [[0, 4.0], [1, 5.0], [2, 3.0], [3, 1.0]],
                "lo": -np.inf,
                "hi": 9.0,
            }
        ],
    }


def main():
    rng = np.random.default_rng(12345)
    cases = list(crafted()) + [random_case(rng, i) for i in range(60)]
    for case in cases:
        case["lp"] = solve(case, integrality_on=False)
        case["mip"] = solve(case, integrality_on=True)
        for c in case["cols"]:
            c["lb"], c["ub"] = enc(c["lb"]), enc(c["ub"])
        for r in case["rows"]:
            r["lo"], r["hi"] = enc(r["lo"]), enc(r["hi"])
    out = pathlib.Path(__file__).parent / "lp_cases.json"
    out.write_text(json.dumps({"cases": cases}, indent=1) + "\n")
    lp_opt = sum(c["lp"]["status"] == "optimal" for c in cases)
    mip_opt = sum(c["mip"]["status"] == "optimal" for c in cases)
    mip_inf = sum(c["mip"]["status"] == "infeasible" for c in cases)
    print(f"{len(cases)} cases -> {out}")
    print(f"lp optimal {lp_opt}, mip optimal {mip_opt}, mip infeasible {mip_inf}")


if __name__ == "__main__":
    main()
