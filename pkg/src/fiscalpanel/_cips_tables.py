"""Critical values of the CIPS statistic, intercept-only case (no augmentation lags).

Rows are N, columns are T (series length). Lower-tail quantiles of the mean
CADF t-statistic over independent Gaussian random walks, 20000 replications per cell,
seed 20070322. Generated by tools/make_cips_table.py; do not edit by hand.
"""

N_GRID = (10, 15, 20, 30, 50, 70, 100, 200)
T_GRID = (10, 15, 20, 30, 50, 70, 100, 200)
LEVELS = (0.01, 0.05, 0.1)

CIPS_INTERCEPT = (
    # 1%
    ((-2.94, -2.67, -2.62, -2.57, -2.54, -2.55, -2.54, -2.54),
     (-2.74, -2.50, -2.48, -2.45, -2.43, -2.43, -2.42, -2.42),
     (-2.63, -2.45, -2.39, -2.37, -2.38, -2.37, -2.35, -2.36),
     (-2.53, -2.34, -2.32, -2.30, -2.29, -2.29, -2.29, -2.29),
     (-2.41, -2.26, -2.25, -2.23, -2.23, -2.23, -2.23, -2.23),
     (-2.37, -2.24, -2.21, -2.20, -2.20, -2.20, -2.19, -2.20),
     (-2.32, -2.19, -2.18, -2.17, -2.16, -2.17, -2.18, -2.18),
     (-2.27, -2.16, -2.13, -2.14, -2.14, -2.15, -2.14, -2.14)),
    # 5%
    ((-2.52, -2.38, -2.34, -2.33, -2.33, -2.33, -2.33, -2.33),
     (-2.40, -2.28, -2.26, -2.25, -2.24, -2.25, -2.25, -2.25),
     (-2.32, -2.22, -2.20, -2.19, -2.21, -2.20, -2.19, -2.20),
     (-2.26, -2.17, -2.15, -2.15, -2.16, -2.16, -2.16, -2.16),
     (-2.19, -2.11, -2.10, -2.11, -2.11, -2.12, -2.11, -2.12),
     (-2.16, -2.09, -2.09, -2.09, -2.09, -2.10, -2.09, -2.10),
     (-2.13, -2.07, -2.07, -2.07, -2.08, -2.08, -2.08, -2.08),
     (-2.10, -2.05, -2.04, -2.05, -2.06, -2.06, -2.07, -2.07)),
    # 10%
    ((-2.31, -2.23, -2.21, -2.21, -2.21, -2.22, -2.21, -2.21),
     (-2.22, -2.15, -2.14, -2.15, -2.14, -2.15, -2.15, -2.15),
     (-2.17, -2.11, -2.10, -2.11, -2.12, -2.11, -2.11, -2.12),
     (-2.13, -2.07, -2.07, -2.07, -2.07, -2.08, -2.08, -2.08),
     (-2.07, -2.03, -2.03, -2.04, -2.04, -2.05, -2.05, -2.05),
     (-2.06, -2.01, -2.02, -2.02, -2.03, -2.03, -2.04, -2.04),
     (-2.03, -2.00, -2.00, -2.01, -2.02, -2.02, -2.02, -2.03),
     (-2.01, -1.98, -1.99, -2.00, -2.01, -2.01, -2.01, -2.02)),
)
