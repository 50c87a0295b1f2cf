"""Regenerate src/hplab/data/default_suite.json.

Every sweep pairs instances with functions whose supports sit inside the
instance domains, so every row is admissible.
"""

import json
from pathlib import Path

PS = (1.0, 1.5, 2.0, 3.0)
OUT = Path(__file__).resolve().parents[1] / "src" / "hplab" / "data" / "default_suite.json"


def ball(center, radius):
    return {"kind": "ball", "center": center, "radius": radius}


def box(lo, hi):
    return {"kind": "box", "lo": lo, "hi": hi}


def bump(center, radius, **kw):
    return {"kind": "bump", "center": center, "radius": radius, **kw}


def tbump(lo, hi):
    return {"kind": "tensor_bump", "lo": lo, "hi": hi}


def tag(items, prefix):
    for i, it in enumerate(items):
        it["id"] = f"{prefix}-{i:03d}-{it['kind']}"
    return items


def one_d():
    dom = box([-1.0], [1.0])
    out = []
    for p in PS:
        out += [
            {"kind": "DirectionalPoincare", "domain": dom, "p": p, "sigma": [1.0]},
            {"kind": "GeneralWeighted", "domain": dom, "p": p, "weight": {"lambda": 1.0, "alpha": 1.0, "beta": 0.5, "x0": [0.0]}},
            {"kind": "GeneralWeighted", "domain": dom, "p": p, "weight": {"lambda": 0.5, "alpha": 2.0, "beta": -1.0, "x0": [0.2]}, "refined": True},
            {"kind": "GammaHardy", "domain": dom, "p": p, "gamma": 0.5},
            {"kind": "DualHardyGamma", "domain": dom, "p": p, "gamma": 1.0, "x0": [0.1]},
            {"kind": "DualHardyPlain", "domain": dom, "p": p},
            {"kind": "ClassicalPoincare", "domain": dom, "p": p},
            {"kind": "VarExpDirectional", "domain": dom, "exponent": {"kind": "constant", "p": p}, "sigma": [1.0]},
        ]
    out += [
        {"kind": "VarExpRadial", "domain": dom, "exponent": {"kind": "radial", "center": [0.0], "a": 2.0, "b": -0.5}, "sigma": [1.0]},
        {"kind": "VarExpRadial", "domain": dom, "exponent": {"kind": "radial", "center": [0.0], "a": 3.0, "b": -1.5}, "sigma": [1.0], "form": "weighted"},
    ]
    functions = [bump([0.0], 0.9), bump([0.3], 0.5), tbump([-0.8], [0.6]), bump([-0.5], 0.3, scale=2.0)]
    return tag(out, "d1"), functions


def two_d():
    disk = ball([0.0, 0.0], 1.0)
    square = box([-1.0, -1.0], [1.0, 1.0])
    strip = {"kind": "strip", "direction": [0.0, 1.0], "a": -1.0, "b": 1.0}
    out = []
    for p in PS:
        out += [
            {"kind": "DirectionalPoincare", "domain": strip, "p": p, "sigma": [0.0, 1.0]},
            {"kind": "GeneralWeighted", "domain": disk, "p": p, "weight": {"lambda": 1.0, "alpha": 2.0, "beta": 0.5, "x0": [0.0, 0.0]}},
            {"kind": "GeneralWeighted", "domain": disk, "p": p, "weight": {"lambda": 0.5, "alpha": 1.0, "beta": 1.5, "x0": [0.1, 0.0]}},
            {"kind": "GammaHardy", "domain": disk, "p": p, "gamma": 1.0, "x0": [0.2, 0.1]},
            {"kind": "DualHardyGamma", "domain": disk, "p": p, "gamma": 0.5},
            {"kind": "DualHardyPlain", "domain": square, "p": p},
            {"kind": "ClassicalPoincare", "domain": square, "p": p},
        ]
    for p in (1.0, 1.5):
        out.append({"kind": "SharpHardy", "domain": disk, "p": p})
    out += [
        {"kind": "ClassicalPoincare", "domain": square, "p": 2.0, "bound": "diameter"},
        {"kind": "ClassicalPoincare", "domain": disk, "p": 1.5, "bound": "best_direction"},
        {"kind": "GeneralWeighted", "domain": disk, "p": 2.0, "weight": {"lambda": 1.0, "alpha": 2.0, "beta": -1.0, "x0": [0.0, 0.0]}, "refined": True},
        {
            "kind": "VarExpDirectional",
            "domain": square,
            "exponent": {"kind": "along", "direction": [1.0, 0.0], "a": 1.5, "b": 0.5, "p_max": 3.0},
            "sigma": [1.0, 0.0],
        },
        {
            "kind": "VarExpDirectional",
            "domain": strip,
            "exponent": {"kind": "along", "direction": [1.0, 0.0], "a": 2.0, "b": 1.0, "p_max": 3.0},
            "sigma": [1.0, 0.0],
            "x0": [0.0, 0.0],
        },
        {"kind": "VarExpRadial", "domain": disk, "exponent": {"kind": "radial", "center": [0.0, 0.0], "a": 2.0, "b": -0.5}, "sigma": [1.0, 0.0]},
        {
            "kind": "VarExpRadial",
            "domain": disk,
            "exponent": {"kind": "radial", "center": [0.0, 0.0], "a": 1.5, "b": -0.5},
            "sigma": [0.0, 1.0],
            "form": "weighted",
        },
    ]
    functions = [bump([0.0, 0.0], 0.8), bump([0.3, -0.2], 0.5), tbump([-0.5, -0.5], [0.6, 0.4])]
    return tag(out, "d2"), functions


def three_d():
    b3 = ball([0.0, 0.0, 0.0], 1.0)
    out = []
    for p in PS:
        out += [
            {"kind": "GammaHardy", "domain": b3, "p": p, "gamma": 2.0},
            {"kind": "GeneralWeighted", "domain": b3, "p": p, "weight": {"lambda": 1.0, "alpha": 2.0, "beta": 1.0, "x0": [0.0, 0.0, 0.0]}},
            {"kind": "ClassicalPoincare", "domain": b3, "p": p},
        ]
    for p in (1.0, 1.5, 2.0):
        out.append({"kind": "SharpHardy", "domain": b3, "p": p})
    out += [
        {"kind": "DirectionalPoincare", "domain": b3, "p": 2.0, "sigma": [0.0, 0.0, 1.0]},
        {"kind": "DualHardyGamma", "domain": b3, "p": 1.5, "gamma": 1.0},
        {"kind": "DualHardyPlain", "domain": b3, "p": 3.0},
        {
            "kind": "VarExpDirectional",
            "domain": b3,
            "exponent": {"kind": "along", "direction": [0.0, 0.0, 1.0], "a": 1.5, "b": 0.5, "p_max": 2.5},
            "sigma": [0.0, 0.0, 1.0],
        },
        {"kind": "VarExpRadial", "domain": b3, "exponent": {"kind": "radial", "center": [0.0, 0.0, 0.0], "a": 2.0, "b": -0.5}, "sigma": [1.0, 0.0, 0.0]},
    ]
    functions = [bump([0.0, 0.0, 0.0], 0.8), bump([0.2, 0.0, 0.1], 0.5)]
    return tag(out, "d3"), functions


def main():
    jobs = []
    for name, build in (("sweep-1d", one_d), ("sweep-2d", two_d), ("sweep-3d", three_d)):
        instances, functions = build()
        jobs.append({"id": name, "kind": "sweep", "instances": instances, "functions": functions})
    config = {"seed": 0, "out": "hp_out", "jobs": jobs}
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(config, indent=1) + "\n")
    rows = sum(len(j["instances"]) * len(j["functions"]) for j in jobs)
    print(f"wrote {OUT} with {rows} pairs")


if __name__ == "__main__":
    main()
