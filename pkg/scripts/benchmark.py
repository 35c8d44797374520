"""Interpreter throughput for bubble sort at a few sizes."""
import argparse
import json

from pathsat.bench import throughput


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", default="10,20,40")
    p.add_argument("--seconds", type=float, default=2.0)
    args = p.parse_args()
    for size in (int(s) for s in args.sizes.split(",")):
        r = throughput("bubble", size, min_seconds=args.seconds)
        r["executions_per_second"] = round(r["executions_per_second"], 1)
        print(json.dumps(r))


if __name__ == "__main__":
    main()
