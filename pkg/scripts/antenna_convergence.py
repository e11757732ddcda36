"""Finite-N Monte Carlo against the large-system values as N grows at fixed beta.

    python3 scripts/antenna_convergence.py --profile weak --trials 500
"""

import argparse

from uplink_se import NetworkConfig
from uplink_se.asymptotic import build_asymptotic_inputs, rate_ian_asym, rate_sd_asym, rate_td_asym
from uplink_se.finite import finite_rates
from uplink_se.network import PROFILES


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profile", choices=sorted(PROFILES), default="weak")
    ap.add_argument("--beta", type=float, default=0.2)
    ap.add_argument("--antennas", type=int, nargs="+", default=[20, 40, 80, 160, 320])
    ap.add_argument("--snr-db", type=float, default=0.0)
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=0)
    args = ap.parse_args()
    scen = PROFILES[args.profile]

    print(f"{'N':>5} {'K':>4}  " + "  ".join(f"{s + ' fin':>9} {s + ' asy':>9}" for s in ("IAN", "SD", "TD")))
    for n in args.antennas:
        k = max(1, int(round(args.beta * n)))
        cfg = NetworkConfig.from_snr_db(args.snr_db, cells=5, users_per_cell=k, antennas=n,
                                        coherence_symbols=1000, pilot_symbols=max(k, 100))
        fin = finite_rates(cfg, scen, args.trials, args.seed, None, args.threads)
        inp = build_asymptotic_inputs(cfg, scen, seed=args.seed)
        asy = {"IAN": rate_ian_asym(inp), "SD": rate_sd_asym(inp), "TD": rate_td_asym(inp)}
        cols = [f"{fin[s].se_bits:9.4f} {asy[s].se_bits:9.4f}" for s in ("IAN", "SD", "TD")]
        print(f"{n:>5} {k:>4}  " + "  ".join(cols))


if __name__ == "__main__":
    main()
