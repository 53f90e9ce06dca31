#!/usr/bin/env python3
"""Generate frozen extended-precision reference values for the test suite.

Non-dyadic parameters (1.02, 7.3, ...) are converted through Python floats
so the references are taken at the exact f64 parameter values the Rust side
uses. Values are computed with mpmath at 60 significant digits and written to
crates/core/tests/common/refs.rs as f64 literals (shortest round-trip repr
of the correctly rounded double). Re-run after changing any definition:

    python3 scripts/make_refs.py
"""

import mpmath as mp

mp.mp.dps = 60

OUT = "crates/core/tests/common/refs.rs"


def e(x):
    return mp.e ** (2j * mp.pi * x)


def frac(x):
    return x - mp.floor(x)


def lit(x):
    """Emit the f64 nearest to the mpmath value, shortest round-trip form."""
    return repr(float(x))


lines = [
    "// Generated by scripts/make_refs.py (mpmath, 60 significant digits).",
    "// Do not edit by hand; re-run the script instead.",
    "#![allow(dead_code)]",
    "",
]


def emit(name, value, comment=None):
    if comment:
        lines.append(f"/// {comment}")
    lines.append(f"pub const {name}: f64 = {lit(value)};")


# --- plain h evaluations -------------------------------------------------
emit("H_POW102_AT_1000", mp.mpf(1000) ** mp.mpf(1.02), "1000^1.02")
emit(
    "H_ITERLOG2_AT_100",
    mp.mpf(100) ** mp.mpf(1.02) * mp.log(mp.log(100)),
    "100^1.02 * log(log(100))",
)
emit(
    "H_EXPLOG_AT_50",
    mp.mpf(50) ** mp.mpf(1.02)
    * mp.exp(mp.mpf(0.5) * (mp.sqrt(mp.log(50)) - 1)),
    "50^1.02 * exp(0.5*((log 50)^0.5 - 1))",
)

# --- inverse function values ---------------------------------------------
emit("PHI_POW15_AT_5", mp.mpf(5) ** (mp.mpf(2) / 3), "5^(2/3), inverse of x^1.5 at 5")

gamma = mp.mpf(1) / mp.mpf(1.02)
for y in (12345, 99991, 1000000):
    phi = mp.mpf(y) ** gamma
    emit(f"PHI_FRAC_POW102_AT_{y}", frac(phi), f"frac({y}^(1/1.02))")

# powerlog family h(x) = x^1.02 * log(x); solve h(x) = 1e5
h_plog = lambda x: x ** mp.mpf(1.02) * mp.log(x)
root = mp.findroot(lambda x: h_plog(x) - 100000, mp.mpf(100000) ** gamma / 3)
emit("PHI_POWERLOG102_AT_1E5", root, "inverse of x^1.02*log(x) at 1e5")
emit("PHI_FRAC_POWERLOG102_AT_1E5", frac(root))

# --- exponential sums -----------------------------------------------------
s = mp.nsum(lambda n: e(n ** (mp.mpf(2) / 3)), [1, 100], method="direct")
emit("EXP_SUM_POW15_M1_N100_RE", mp.re(s), "re sum_{n<=100} e(n^(2/3))")
emit("EXP_SUM_POW15_M1_N100_IM", mp.im(s), "im of the same sum")

psi = e(mp.mpf(2) ** (mp.mpf(2) / 3) - 1) - 1
emit("PSI_POW15_M1_N1_RE", mp.re(psi), "re of e(2^(2/3)-1) - 1")
emit("PSI_POW15_M1_N1_IM", mp.im(psi), "im of the same")

# --- min-kernel sum, h = x^1.5, M = 4, N = 4, q = 0 ------------------------
total = mp.mpf(0)
for n in range(1, 5):
    x = mp.mpf(n) ** (mp.mpf(2) / 3)
    d = abs(x - mp.nint(x))
    total += 1 if d == 0 else min(mp.mpf(1), 1 / (4 * d))
emit("MIN_KERNEL_SUM_POW15_M4_N4", total, "sum_{n<=4} min(1, 1/(4*||n^(2/3)||))")

# --- sawtooth tail-kernel Fourier coefficients, M = 8 ----------------------
M = 8


def kernel_coeff(m):
    u = mp.mpf(1) / M
    f1 = lambda x: mp.cos(2 * mp.pi * m * x)
    f2 = lambda x: mp.cos(2 * mp.pi * m * x) / (M * x)
    return 2 * (mp.quad(f1, [0, u]) + mp.quad(f2, [u, mp.mpf(1) / 2]))


for m in (0, 1, 7, 50):
    emit(f"TAIL_COEFF_M8_B{m}", kernel_coeff(m), f"b_{m} for min(1,1/(8||x||))")

# --- double-double transcendental spot values ------------------------------
emit("EXP_1_25", mp.exp(mp.mpf(1.25)))
emit("LN_7_3", mp.log(mp.mpf(7.3)))
emit("TWO_POW_2_3", mp.mpf(2) ** (mp.mpf(2) / 3))

# Split high/low pairs so double-double results can be checked beyond f64.
lines.append("")
lines.append("/// (hi, lo) double-double decompositions of reference values.")


def emit_dd(name, value, comment=None):
    hi = float(value)
    lo = float(value - mp.mpf(hi))
    if comment:
        lines.append(f"/// {comment}")
    lines.append(f"pub const {name}: (f64, f64) = ({hi!r}, {lo!r});")


emit_dd("DD_EXP_1_25", mp.exp(mp.mpf(1.25)), "exp(1.25)")
emit_dd("DD_LN_7_3", mp.log(mp.mpf(7.3)), "ln(7.3)")
emit_dd("DD_TWO_POW_2_3", mp.mpf(2) ** mp.mpf(2.0 / 3.0), "2^p at the f64 p nearest 2/3")
emit_dd("DD_H_POW102_AT_1000", mp.mpf(1000) ** mp.mpf(1.02), "1000^1.02")
emit_dd(
    "DD_PHI_FRAC_POW102_AT_1E6",
    frac(mp.mpf(1000000) ** gamma),
    "frac(1e6^(1/1.02))",
)

with open(OUT, "w") as fh:
    fh.write("\n".join(lines) + "\n")

print(f"wrote {OUT}")
