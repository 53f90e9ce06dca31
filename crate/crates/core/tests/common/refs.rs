// Generated by scripts/make_refs.py (mpmath, 60 significant digits).
// Do not edit by hand; re-run the script instead.
#![allow(dead_code)]

/// 1000^1.02
pub const H_POW102_AT_1000: f64 = 1148.1536214968828;
/// 100^1.02 * log(log(100))
pub const H_ITERLOG2_AT_100: f64 = 167.4519161292472;
/// 50^1.02 * exp(0.5*((log 50)^0.5 - 1))
pub const H_EXPLOG_AT_50: f64 = 88.1645714945707;
/// 5^(2/3), inverse of x^1.5 at 5
pub const PHI_POW15_AT_5: f64 = 2.924017738212866;
/// frac(12345^(1/1.02))
pub const PHI_FRAC_POW102_AT_12345: f64 = 0.7979482774539763;
/// frac(99991^(1/1.02))
pub const PHI_FRAC_POW102_AT_99991: f64 = 0.22286317034751466;
/// frac(1000000^(1/1.02))
pub const PHI_FRAC_POW102_AT_1000000: f64 = 0.5859023442365027;
/// inverse of x^1.02*log(x) at 1e5
pub const PHI_POWERLOG102_AT_1E5: f64 = 9136.651793129873;
pub const PHI_FRAC_POWERLOG102_AT_1E5: f64 = 0.6517931298729446;
/// re sum_{n<=100} e(n^(2/3))
pub const EXP_SUM_POW15_M1_N100_RE: f64 = -0.21782241579372752;
/// im of the same sum
pub const EXP_SUM_POW15_M1_N100_IM: f64 = 0.6240339789836689;
/// re of e(2^(2/3)-1) - 1
pub const PSI_POW15_M1_N1_RE: f64 = -1.8529648415170452;
/// im of the same
pub const PSI_POW15_M1_N1_IM: f64 = -0.5219683698614334;
/// sum_{n<=4} min(1, 1/(4*||n^(2/3)||))
pub const MIN_KERNEL_SUM_POW15_M4_N4: f64 = 3.1265773197156577;
/// b_0 for min(1,1/(8||x||))
pub const TAIL_COEFF_M8_B0: f64 = 0.5965735902799727;
/// b_1 for min(1,1/(8||x||))
pub const TAIL_COEFF_M8_B1: f64 = 0.19715897671343385;
/// b_7 for min(1,1/(8||x||))
pub const TAIL_COEFF_M8_B7: f64 = 0.003941075868494085;
/// b_50 for min(1,1/(8||x||))
pub const TAIL_COEFF_M8_B50: f64 = -1.9363036586111456e-06;
pub const EXP_1_25: f64 = 3.4903429574618414;
pub const LN_7_3: f64 = 1.9878743481543455;
pub const TWO_POW_2_3: f64 = 1.5874010519681996;

/// (hi, lo) double-double decompositions of reference values.
/// exp(1.25)
pub const DD_EXP_1_25: (f64, f64) = (3.4903429574618414, -4.604261945372796e-17);
/// ln(7.3)
pub const DD_LN_7_3: (f64, f64) = (1.9878743481543455, -7.33258575199512e-17);
/// 2^p at the f64 p nearest 2/3
pub const DD_TWO_POW_2_3: (f64, f64) = (1.5874010519681994, 7.263514831134263e-17);
/// 1000^1.02
pub const DD_H_POW102_AT_1000: (f64, f64) = (1148.1536214968828, 8.619095639527428e-14);
/// frac(1e6^(1/1.02))
pub const DD_PHI_FRAC_POW102_AT_1E6: (f64, f64) = (0.5859023442365027, 3.638931785082176e-18);
