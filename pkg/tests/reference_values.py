"""Reference numbers for the oracle and acceptance tests."""

# ℓ-th roots at μ=5, σ=2, orders 1..10
MOMENT_TABLE = {
    0.4: {
        "lb": [41.49, 55.28, 68.19, 80.69, 92.96, 105.10, 117.16, 129.17, 141.15, 153.12],
        "mom": [46.29, 59.58, 72.27, 84.66, 96.86, 108.96, 120.99, 132.98, 144.95, 156.91],
        "ub": [242.46, 114.25, 94.31, 88.86, 154.15, 144.21, 139.21, 136.92, 194.66, 189.55],
    },
    0.5: {
        "lb": [29.00, 35.68, 41.62, 47.14, 52.39, 57.44, 62.33, 67.10, 71.76, 76.34],
        "mom": [30.92, 37.30, 43.09, 48.52, 53.71, 58.71, 63.56, 68.30, 72.93, 77.49],
        "ub": [32.98, 39.00, 44.62, 49.95, 55.06, 60.00, 64.82, 69.52, 74.13, 78.66],
    },
    0.75: {
        "lb": [15.24, 17.07, 18.61, 19.98, 21.24, 22.41, 23.51, 24.56, 25.56, 26.54],
        "mom": [15.62, 17.36, 18.86, 20.21, 21.44, 22.60, 23.70, 24.73, 25.73, 26.69],
        "ub": [43.61, 52.64, 19.11, 27.45, 35.41, 22.80, 28.70, 34.65, 25.90, 30.77],
    },
    0.95: {
        "lb": [10.76, 11.64, 12.38, 13.02, 13.60, 14.14, 14.65, 15.12, 15.57, 16.00],
        "mom": [10.91, 11.75, 12.47, 13.10, 13.68, 14.21, 14.71, 15.18, 15.63, 16.06],
        "ub": [56.35, 68.49, 21.35, 31.94, 18.48, 25.55, 17.85, 23.30, 17.81, 22.33],
    },
}

MODEL_A = (1.0, 1.0, 3.0)
MODEL_B = (1.0, 0.5, 0.5)
MLE_STD_A = (0.0561, 0.0567, 0.0976)
MLE_STD_B = (0.0208, 0.0206, 0.0668)
QF_STD_A = (0.0748, 0.0814, 0.1382)
QF_STD_B = (0.0274, 0.0266, 0.0913)

LDHO_MEDIAN_CV = {"me": -0.0472, "mae": 0.3254, "rmse": 0.4079, "pearson_r": 0.6055}
