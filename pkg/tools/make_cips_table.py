"""Regenerate src/fiscalpanel/_cips_tables.py by simulation.

Usage: python tools/make_cips_table.py [reps]
"""

import sys
from pathlib import Path

from fiscalpanel.reference import CIPS_SEED, cips_quantiles

N_GRID = (10, 15, 20, 30, 50, 70, 100, 200)
T_GRID = (10, 15, 20, 30, 50, 70, 100, 200)
LEVELS = (0.01, 0.05, 0.10)


def main(reps: int = 20000) -> None:
    rows = {lvl: [] for lvl in LEVELS}
    for n in N_GRID:
        cells = [cips_quantiles(n, t, reps, LEVELS) for t in T_GRID]
        for k, lvl in enumerate(LEVELS):
            rows[lvl].append(tuple(round(c[k], 2) for c in cells))
        print(f"N={n} done", file=sys.stderr, flush=True)

    lines = [
        '"""Critical values of the CIPS statistic, intercept-only case (no augmentation lags).',
        "",
        "Rows are N, columns are T (series length). Lower-tail quantiles of the mean",
        "CADF t-statistic over independent Gaussian random walks, "
        f"{reps} replications per cell,",
        f"seed {CIPS_SEED}. Generated by tools/make_cips_table.py; do not edit by hand.",
        '"""',
        "",
        f"N_GRID = {N_GRID}",
        f"T_GRID = {T_GRID}",
        f"LEVELS = {LEVELS}",
        "",
        "CIPS_INTERCEPT = (",
    ]
    for lvl in LEVELS:
        lines.append(f"    # {lvl:.0%}")
        body = ",\n     ".join("(" + ", ".join(f"{v:.2f}" for v in r) + ")" for r in rows[lvl])
        lines.append(f"    ({body}),")
    lines.append(")")
    out = Path(__file__).resolve().parents[1] / "src" / "fiscalpanel" / "_cips_tables.py"
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 20000)
