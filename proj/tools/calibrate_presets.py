#!/usr/bin/env python3
"""Back-solve preset compute times against the simulator's default timing.

Each model gets one target, taken from the evaluated two/four/eight-GPU
runs: a cc-on/cc-off ratio, a set of ratios fitted in log least squares, a
cc-off iteration time, or a host crypto share.
forward:backward is fixed at 1:2 and the total compute time is bisected
until the simulator hits the target.  Prints the solved values as JSON,
suitable for derive_presets.py --calibration.

Usage: tools/calibrate_presets.py [--cli build/teesim] [--write]
"""

import argparse
import json
import math
import pathlib
import subprocess
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent

# (model, n, target kind, value); "fit" takes {n: ratio}
TARGETS = [
    ("resnet50", 2, "ratio", 1.97),
    # host crypto is 6.2% of the cc-on iteration
    ("resnet101", 2, "host_share", 0.062),
    ("bert-base", 2, "t_off", 0.30),
    ("bert-large", 2, "t_off", 0.80),
    ("gpt2-large", 2, "ratio", 16.78),
    # crypto grows linearly in n-1 here, the measured 4 -> 8 GPU step is
    # sublinear; a single compute time cannot hit both, so split the error
    ("gpt2-xl", 0, "fit", {4: 41.64, 8: 81.8}),
]


def run(cli, profile, n, cc):
    out = subprocess.run([cli, "run", "--model", str(profile), "-n", str(n), "--cc", cc],
                         check=True, capture_output=True, text=True).stdout
    return json.loads(out)


def measure(cli, base, compute, n, kind, tmp, target=None):
    if kind == "fit":
        # mean log error; falls as compute grows
        errs = [math.log(measure(cli, base, compute, m, "ratio", tmp) / r) for m, r in target.items()]
        return sum(errs) / len(errs)
    p = dict(base)
    p["forward_time_s"] = compute / 3
    p["backward_time_s"] = compute * 2 / 3
    path = pathlib.Path(tmp) / f"{base['name']}.json"
    path.write_text(json.dumps(p))
    on = run(cli, path, n, "on")
    if kind == "host_share":
        return on["t_host_crypto_s"] / on["t_total_s"]
    off = run(cli, path, n, "off")
    if kind == "t_off":
        return off["t_total_s"]
    return on["t_total_s"] / off["t_total_s"]


def solve(cli, name, n, kind, target):
    base = json.loads((ROOT / "presets" / f"{name}.json").read_text())
    # ratio and host share fall as compute grows; t_off rises
    rising = kind == "t_off"
    lo, hi = math.log(1e-4), math.log(60.0)
    with tempfile.TemporaryDirectory() as tmp:
        for _ in range(40):
            mid = (lo + hi) / 2
            v = measure(cli, base, math.exp(mid), n, kind, tmp, target)
            if (v < (0.0 if kind == "fit" else target)) == rising:
                lo = mid
            else:
                hi = mid
        c = math.exp((lo + hi) / 2)
        got = measure(cli, base, c, n, kind, tmp, target)
    return c, got


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", default=str(ROOT / "build" / "teesim"))
    ap.add_argument("--write", action="store_true", help="patch presets/*.json in place")
    args = ap.parse_args()
    solved = {}
    for name, n, kind, target in TARGETS:
        c, got = solve(args.cli, name, n, kind, target)
        fwd, bwd = round(c / 3, 6), round(c * 2 / 3, 6)
        solved[name] = {"forward": fwd, "backward": bwd}
        print(f"# {name}: n={n or sorted(target)} {kind} target {target} -> compute {c:.6f} s ({kind} {got:.4f})")
        if args.write:
            path = ROOT / "presets" / f"{name}.json"
            lines = path.read_text().splitlines(keepends=True)
            for i, line in enumerate(lines):
                if line.startswith('  "forward_time_s"'):
                    lines[i] = f'  "forward_time_s": {fwd},\n'
                if line.startswith('  "backward_time_s"'):
                    lines[i] = f'  "backward_time_s": {bwd},\n'
            path.write_text("".join(lines))
    print(json.dumps(solved, indent=2))


if __name__ == "__main__":
    main()
