"""Closed-form runtime model cases, expected values worked by hand."""

# (T1, Tinf, P, W, V1, Vinf, D, case, expected)
MODEL_TABLE = [
    (100, 10, 1, 1, 1, 1, 0, "scalar", 110.0),
    (1024, 8, 4, 16, 1, 2, 0, "best", 32.0),
    (1024, 8, 4, 16, 1, 2, 0, "pessimistic", 80.0),
    (1024, 8, 4, 16, 1, 2, 2, "worst", 80.0),
    (1024, 8, 4, 16, 1, 2, 3, "worst", 144.0),
    (1024, 8, 4, 16, 1, 2, 0, "scalar", 272.0),
    (1_000_000, 20, 8, 64, 1.5, 1000, 0, "best", 22929.6875),
    (1_000_000, 20, 8, 64, 1.5, 1000, 0, "pessimistic", 37578.125),
    (1_000_000, 20, 8, 64, 1.5, 1000, 5, "worst", 113750.0),
    (1_000_000, 20, 8, 64, 1.5, 1000, 0, "scalar", 207500.0),
    (3, 0, 1, 2, 1, 0, 0, "pessimistic", 1.5),
    (19, 7, 1, 1, 1, 1, 0, "best", 26.0),
    (19, 7, 1, 1, 1, 1, 0, "pessimistic", 7.0),
    (10, 1, 1, 2, 1, 1, 0, "worst", 6.0),
]
