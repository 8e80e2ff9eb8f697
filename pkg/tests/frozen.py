"""Expected values frozen from independent computations (mpmath at 30 digits,
trial division, hand enumeration)."""

import math

PSI_100 = 94.0453112293573922  # sum of Lambda(n), n <= 100
SINGULAR_SERIES_105 = 1.37029967923234120  # product over p < 2e5, tail < 1e-10
SQRT_2PI = math.sqrt(2 * math.pi)
GAUSS_FOURIER_AT_1 = 6.70595252120745688e-09  # sqrt(2 pi) exp(-2 pi^2)
ETA2_AT_HALF = 4 * math.log(2)
MOEBIUS_RATIO_10 = 1 - 1 / 2 - 1 / 3 - 1 / 5 + 1 / 6 - 1 / 7 + 1 / 10
ORDERED_TRIPLES = {7: 3, 9: 4, 11: 6, 13: 6, 15: 10}
TRIPLET_ALL_TERMS_A1_C1_Q10 = 3 + 40 / math.pi
BINARY_INSTANCE = (4 * 10**18 + 2, 2000000000000001301, 1999999999999998701)
LADDER_100_20 = [3, 17, 37, 41, 61, 79, 97, 113]  # implementation-determined, frozen for regression
