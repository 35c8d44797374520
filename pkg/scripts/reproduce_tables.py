"""Predicted vs measured k_L, k_S and l_max for the bundled constructs.

Writes a heuristic table (JSON and CSV) holding both sources and prints
the measured-minus-predicted deltas.
"""
import argparse
from pathlib import Path

from pathsat import suite
from pathsat.campaign import CampaignConfig, StopRule, run_campaign
from pathsat.oracle import max_size_for_dims, measured_entry, predict
from pathsat.subject import load_subject

CASES = [
    ("linear", (3,)), ("linear", (5,)), ("linear", (10,)), ("linear", (20,)),
    ("bubble", (3,)), ("bubble", (4,)), ("bubble", (5,)), ("bubble", (8,)),
    ("matrix", (1, 2, 1)), ("matrix", (2, 2, 2)), ("matrix", (3, 3, 3)), ("matrix", (4, 4, 4)),
    ("merge", (2,)), ("merge", (3,)), ("merge", (4,)),
]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--domain", type=int, default=1000)
    p.add_argument("--batch", type=int, default=100)
    p.add_argument("--window", type=int, default=3)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--k-max", type=int, default=5000)
    p.add_argument("-o", "--out", default="results")
    args = p.parse_args()

    table = suite.HeuristicTable()
    for construct, dims in CASES:
        subject = load_subject(construct)
        config = CampaignConfig(max_size=max_size_for_dims(subject, dims), domain=args.domain,
                                batch=args.batch, seed=args.seed, k_max=args.k_max,
                                stop_rule=StopRule("saturation", args.window))
        report, _ = run_campaign(subject, config)
        table.upsert(predict(construct, dims), "predicted")
        table.upsert(measured_entry(report, construct, dims), "measured")
        print(f"{construct:7s} {str(dims):10s} k_L={report.k_longest} "
              f"k_S={report.k_saturation} l_max={report.l_max}", flush=True)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "heuristics.json").write_bytes(suite.export(table, "json"))
    (out / "heuristics.csv").write_bytes(suite.export(table, "csv"))
    print("\nmeasured - predicted")
    for row in table.diff():
        print(row)


if __name__ == "__main__":
    main()
