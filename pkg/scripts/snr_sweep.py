"""Large-system SE of every scheme against SNR for one synthetic profile.

    python3 scripts/snr_sweep.py --profile moderate --out snr.csv
"""

import argparse
import csv

import numpy as np

from uplink_se import NetworkConfig
from uplink_se.asymptotic import build_asymptotic_inputs, optimal_zetas, rate_ian_asym, rate_sd_asym, rate_td_asym
from uplink_se.network import PROFILES
from uplink_se.optimizer import optimize_os


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profile", choices=sorted(PROFILES), default="weak")
    ap.add_argument("--snr-db", type=float, nargs=3, default=[-10.0, 30.0, 9], metavar=("FROM", "TO", "STEPS"))
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--with-os", action="store_true", help="also run the exhaustive optimizer (slow)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="optional CSV path")
    args = ap.parse_args()

    rows = []
    for snr in np.linspace(args.snr_db[0], args.snr_db[1], int(args.snr_db[2])):
        cfg = NetworkConfig.from_snr_db(float(snr), cells=5, users_per_cell=40, antennas=200,
                                        coherence_symbols=1000, pilot_symbols=100)
        inp = build_asymptotic_inputs(cfg, PROFILES[args.profile], args.samples, args.seed)
        row = {"snr_db": float(snr), "IAN": rate_ian_asym(inp).se_bits, "SD": rate_sd_asym(inp).se_bits,
               "TD": rate_td_asym(inp).se_bits, "TD_opt": optimal_zetas(inp)[1].se_bits}
        if args.with_os:
            res = optimize_os(inp)
            row["OS"] = res.se_bits
            row["OS_layout"] = f"{res.best.interval_string()} {res.best.cluster_string()}"
        rows.append(row)
        print("  ".join(f"{k}={v:.4f}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
