#!/usr/bin/env python3
"""Counts versus jamming intensity at fixed source brightness.

Sweeps the jamming rate with the target toggled in and out. The
coincidence in/out gap persists as the background grows while the singles
in/out curves merge: the jamming floods the receiver but carries no
correlation with the herald channel.

Writes jamming_sweep.csv (standard sweep columns).
"""

import argparse
import os

from qisim.analytics import run_sweep, sweep_to_csv
from qisim.model import paper_default
import dataclasses


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=2)
    ap.add_argument("--mu", type=float, default=5.8e-3)
    ap.add_argument("--dwell-s", type=float, default=30.0)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    cfg = paper_default(seed=args.seed)
    cfg = dataclasses.replace(cfg, source=dataclasses.replace(cfg.source, mu=args.mu))
    rates_cps = [2e3, 5e3, 1e4, 2e4, 5e4, 1e5, 2e5]
    values = [r / cfg.source.rep_rate_hz for r in rates_cps]
    dwell = cfg.pulses_for_seconds(args.dwell_s)

    table = run_sweep(cfg, "background", values, dwell_pulses=dwell)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, "jamming_sweep.csv")
    sweep_to_csv(table, path)
    for row, cps in zip(table.rows, rates_cps):
        if row.counts_in is None:
            print(f"bg={cps:g}/s: {row.error}")
            continue
        note = f"  [{row.error}]" if row.error else ""
        print(
            f"bg={cps:g}/s: coinc {row.counts_in.n_coincidences}/{row.counts_out.n_coincidences}, "
            f"singles {row.counts_in.n_signal_clicks}/{row.counts_out.n_signal_clicks} (in/out){note}"
        )
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
