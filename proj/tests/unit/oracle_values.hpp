#pragma once

// Reference values produced by tests/oracles/oracle.py (mpmath, 20 digits).

namespace oracle {

inline constexpr double lognormal_weak_unnorm_s1_theta01_j0 = 0.53011603628793034;
inline constexpr double lognormal_weak_unnorm_s1_theta01_j1 = 0.35274326480201553;
inline constexpr double lognormal_weak_unnorm_s1_theta01_j2 = 0.33922462601250359;
inline constexpr double lognormal_weak_unnorm_s1_theta01_j3 = 0.42377085231759378;
inline constexpr double lognormal_weak_unnorm_s1_theta01_j4 = 0.64259191258214163;
inline constexpr double lognormal_weak_norm_s05_theta05_08_j0 = 0.10234167942672634;
inline constexpr double lognormal_weak_norm_s05_theta05_08_j1 = 0.061612450191496804;
inline constexpr double lognormal_weak_norm_s05_theta05_08_j2 = 0.044529143924606492;
inline constexpr double lognormal_weak_norm_s05_theta05_08_j3 = 0.037284315333502214;
inline constexpr double lognormal_weak_norm_s05_theta05_08_j4 = 0.035243071368059187;
inline constexpr double cauchy_weak_unnorm_s1_mu07_j0 = 0.46650705546062829;
inline constexpr double cauchy_weak_unnorm_s1_mu07_j1 = 0.15043856659474129;
inline constexpr double cauchy_weak_unnorm_s1_mu07_j2 = 0.31340304139916702;
inline constexpr double cauchy_weak_unnorm_s1_mu07_j3 = 0.21461079373266929;
inline constexpr double cauchy_weak_unnorm_s1_mu07_j4 = 0.63136914034384349;
inline constexpr double cauchy_weak_unnorm_s1_mu0_j12 = 680.32080238777153;
inline constexpr double cauchy_cgf_s1_t10 = 45.837323365309539;
inline constexpr double cauchy_cgf_s1_tm3 = 2.9291904318388595;
inline constexpr double stieltjes_max_weak_gap_norm_s05 = 0.0013861084324847685;
inline constexpr double stieltjes_max_weak_gap_norm_s1 = 0.010663947432262506;
inline constexpr double stieltjes_max_weak_gap_norm_s2 = 0.042158232144027109;
inline constexpr double carleman_tilted_m2 = 0.63990636538347452;
inline constexpr double carleman_tilted_m4 = 1.2121721823052349;
inline constexpr double carleman_tilted_m10 = 158.3132359088552;
inline constexpr double carleman_tilted_m20 = 47980190.409844277;
inline constexpr double stein_shift_mu1_he1 = -0.27534765745159187;
inline constexpr double stein_shift_mu1_he2 = 0.13767382872579594;
inline constexpr double stein_shift_mu1_he3 = 0.34418457181448984;
inline constexpr double stein_sigma_15_he1 = -0.21334622931739582;

}  // namespace oracle
