"""Smoke test for the seamstress_py extension module.

Build the module first (see README), e.g.:

    cargo build -p seamstress-py --release
    cp target/release/libseamstress_py.so python/seamstress_py.so
    python3 python/smoke_test.py
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import seamstress_py as sp


def check(name, cond, detail=""):
    status = "PASS" if cond else "FAIL"
    print(f"{status} {name}" + (f": {detail}" if detail and not cond else ""))
    if not cond:
        sys.exit(1)


def main():
    print(f"seamstress_py {sp.__version__}")

    # Golden worked-example witness.
    golden = json.loads(sp.golden())
    check("golden witness", golden["passed"], json.dumps(golden["checks"]))
    check("golden_passed()", sp.golden_passed())

    # The three-defect instance compiles to the six-label rule.
    instance = json.dumps(
        {
            "d": 7,
            "merge": "xx",
            "defective_data": ["A47", "A57", "B41"],
            "defective_ancillas": [],
        }
    )
    report = json.loads(sp.compile_instance(instance))
    check("three-defect compile succeeds", report["success"])
    check("alpha", report["alpha"] == "111", report["alpha"])
    check("beta", report["beta"] == "111111", report["beta"])
    check(
        "rule",
        report["rule"] == ["e1", "g1", "g2", "g3", "g4", "e4"],
        str(report["rule"]),
    )
    check(
        "fused row provenance",
        report["seam_rows"][1]["provenance"] == "fused",
        report["seam_rows"][1]["provenance"],
    )

    # The same instance fails under the standard method.
    std_report = json.loads(sp.compile_instance(instance, toggles="standard"))
    check("standard compile fails", not std_report["success"])
    check(
        "failure layer",
        std_report["failure_layer"] == "compile_failure",
        std_report["failure_layer"],
    )

    # Sample, compile, and check a defect-free baseline.
    sampled = sp.sample_instance(9, 0.0, 0.0, 7)
    clean = json.loads(sp.compile_instance(sampled))
    check("defect-free compiles", clean["success"])
    check("defect-free d_eff", clean["metrics"]["d_eff"] == 9)
    check("defect-free rounds", clean["metrics"]["rounds"] == 45)

    # ZZ merge runs through the transposed pipeline.
    zz = json.loads(sp.compile_instance(sp.sample_instance(7, 0.01, 0.005, 3, merge="zz")))
    check("zz compile runs", zz["merge"] == "zz")

    # Outcome streams reproduce the closed-form flip rate.
    stats = json.loads(
        sp.stream_stats(instance, rounds=9, p_m=0.01, seed=5, shots=20000)
    )
    check("stream beta weight", stats["beta_weight"] == 6)
    drift = abs(stats["per_round_flip_rate"] - stats["expected_flip_rate"])
    check("stream flip rate", drift < 0.005, f"drift {drift}")

    # A tiny scan produces the documented CSV schema.
    csv = sp.scan([5], [0.01], [0.01], instances=40, seed=11)
    header = csv.splitlines()[0]
    check(
        "scan csv header",
        header
        == "d,q_data,q_anc,method,instances,patch_yield,compile_yield,"
        "mean_deff_ratio,se_deff_ratio,mean_extra_rounds,mean_inferred_rows,"
        "mean_enlarged_checks",
        header,
    )
    check("scan rows", len(csv.splitlines()) == 3)

    print("smoke test: all checks passed")


if __name__ == "__main__":
    main()
