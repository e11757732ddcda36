"""Print the top layouts of the exhaustive optimizer for one profile and SNR.

    python3 scripts/optimizer_table.py --profile moderate --snr-db 30 --top 10
"""

import argparse

from uplink_se import NetworkConfig
from uplink_se.asymptotic import build_asymptotic_inputs, rate_ian_asym
from uplink_se.network import PROFILES
from uplink_se.optimizer import optimize_os


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profile", choices=sorted(PROFILES), default="moderate")
    ap.add_argument("--snr-db", type=float, default=30.0)
    ap.add_argument("--cells", type=int, default=5)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--top", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-correction", action="store_true", help="drop the sigma^2/N term from the A denominators")
    args = ap.parse_args()

    cfg = NetworkConfig.from_snr_db(args.snr_db, cells=args.cells, users_per_cell=40, antennas=200,
                                    coherence_symbols=1000, pilot_symbols=100)
    inp = build_asymptotic_inputs(cfg, PROFILES[args.profile], args.samples, args.seed, not args.no_correction)
    res = optimize_os(inp)
    print(f"{len(res.table)} layouts; IAN = {rate_ian_asym(inp).se_bits:.4f}")
    for rank, r in enumerate(res.table[: args.top], 1):
        z = ", ".join(f"{x:.3f}" for x in r.configuration.zetas)
        print(f"{rank:>3}  {r.se_bits:.4f} +- {r.std_error:.4f}  {r.configuration.interval_string():<16} "
              f"{r.configuration.cluster_string():<24} zeta=({z})")


if __name__ == "__main__":
    main()
