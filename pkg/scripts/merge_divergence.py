"""k_S / k_L for merging two sorted arrays as the array length grows."""
import argparse

from pathsat.campaign import CampaignConfig, StopRule, run_campaign
from pathsat.subject import load_subject


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--max-n", type=int, default=5)
    p.add_argument("--seeds", default="1,2,3")
    p.add_argument("--domain", type=int, default=1000)
    p.add_argument("--window", type=int, default=3)
    args = p.parse_args()
    subject = load_subject("merge")
    print("seed,n,k_l,k_s,ratio,ufp")
    for seed in (int(s) for s in args.seeds.split(",")):
        for n in range(2, args.max_n + 1):
            config = CampaignConfig(max_size=n, domain=args.domain, seed=seed, k_max=20000,
                                    stop_rule=StopRule("saturation", args.window))
            report, paths = run_campaign(subject, config)
            k_l, k_s = report.k_longest, report.k_saturation
            ratio = "" if not (k_l and k_s) else f"{k_s / k_l:.2f}"
            print(f"{seed},{n},{k_l},{k_s},{ratio},{len(paths)}", flush=True)


if __name__ == "__main__":
    main()
