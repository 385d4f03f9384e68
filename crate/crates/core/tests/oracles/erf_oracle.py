"""High-precision reference values for the log-normal CDF and erf.

Run with `python3 erf_oracle.py`; the printed Rust table is pasted into
`tests/allocation_oracle.rs`.
"""
import mpmath as mp

mp.mp.dps = 50

ERF_POINTS = [
    -5.5, -3.2, -2.0, -1.0, -0.5, -1e-3, 0.0, 1e-8, 1e-3, 0.1, 0.3, 0.5,
    0.9, 1.3, 1.9, 2.1, 2.6, 3.3, 4.5, 5.9,
]

# (mu, sigma, x)
CDF_POINTS = [
    (6.94, 1.00, 2000.0),
    (6.94, 1.00, 2.0),
    (6.94, 1.00, 1032.0),
    (6.94, 1.00, 50.0),
    (6.94, 1.00, 1e5),
    (6.43, 0.73, 300.0),
    (5.32, 0.16, 180.0),
    (9.70, 0.47, 40000.0),
    (4.70, 0.98, 1.5),
    (7.26, 0.26, 2500.0),
]


def lognormal_cdf(x, mu, sigma):
    z = (mp.log(x) - mu) / (sigma * mp.sqrt(2))
    return mp.mpf(1) / 2 * mp.erfc(-z)


def main():
    print("const ERF_TABLE: &[(f64, f64, f64)] = &[  // (x, erf, erfc)")
    for x in ERF_POINTS:
        xv = mp.mpf(x)
        print(f"    ({x!r}, {mp.nstr(mp.erf(xv), 20)}, {mp.nstr(mp.erfc(xv), 20)}),")
    print("];")
    print("const CDF_TABLE: &[(f64, f64, f64, f64)] = &[  // (mu, sigma, x, F)")
    for mu, s, x in CDF_POINTS:
        f = lognormal_cdf(mp.mpf(x), mp.mpf(mu), mp.mpf(s))
        print(f"    ({mu!r}, {s!r}, {x!r}, {mp.nstr(f, 20)}),")
    print("];")
    for fee in (2.0, 2000.0):
        f = lognormal_cdf(mp.mpf(fee), mp.mpf(6.94), mp.mpf(1.0))
        print(f"// leaf nodes fee={fee}: F*110 = {mp.nstr(f * 110, 20)} -> ceil {int(mp.ceil(f * 110))}")


if __name__ == "__main__":
    main()
