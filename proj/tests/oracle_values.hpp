#pragma once

// Reference values computed independently with mpmath at 40 digits
// (the script lives outside the repository). Do not regenerate from the
// library under test.

#include <array>

namespace effdim::oracle {

struct ScheduleRow {
  bool exponential;
  double n, rate, beta, eta, scale; // rate = theta or omega, scale = mu or rho
  double r, R, p, exponent;
};

// Profiles have d = 10; none of the p values is truncated.
inline constexpr std::array<ScheduleRow, 5> kSchedule = {{
    {true, 54.598150033144239078, 1.0, 1.0, 0.1, 1.0, 0.40656965974059911188, 4.0, 2.9794415416798359283, 0.45},
    {true, 1000.0, 0.5, 2.0, 0.2, 1.0, 0.48864693554431962899, 6.9077552789821370521, 6.6838139559242770142,
     0.41467309397309616384},
    {true, 1e6, 2.0, 1.5, 0.0, 0.5, 0.085891727078970155312, 13.815510557964274104, 2.5402298389244972412,
     0.53302433226934195054},
    {false, 100.0, 2.0, 1.0, 0.0, 1.0, 0.87200005605016999762, 1.0708823077783634684, 1.5672115122677685971,
     0.059483487151975488594},
    {false, 50.0, 3.0, 2.5, 0.1, 2.0, 0.69353183530445012394, 1.1297383361760849407, 1.867771820125313657,
     0.46773515199617138114},
}};

// sqrt(19) exp(-81/19): chi-square term of the outside bound at p = 1, R = 3.
inline constexpr double kFirstTermP1R3 = 0.06136360296675365449;
// 10 exp(-81/20): tail_bound_chisq(2, 3).
inline constexpr double kChisqP2T3 = 0.17422374639493511387;
inline constexpr double kExpMinus2 = 0.13533528323661269189;
// P(|z| > 2), z ~ N(0, 1).
inline constexpr double kNormalTail2 = 0.045500263896358414401;
// |sin(0.3)/4 - 0.3/4|: first-order Taylor remainder of sin(x)/4 at 0.
inline constexpr double kTaylorSin = 0.0011199483346651062237;

// P(|Z|_2 > t) for Z ~ N(0, I_p), t in {0.5, 1, 2, 3, 4}.
inline constexpr std::array<double, 5> kTailT = {0.5, 1.0, 2.0, 3.0, 4.0};
inline constexpr std::array<std::array<double, 5>, 3> kChiTail = {{
    {0.617075077452, 0.317310507863, 0.0455002638964, 0.00269979606326, 6.33424836662e-5},  // p = 1
    {0.882496902585, 0.606530659713, 0.135335283237, 0.0111089965382, 0.000335462627903},   // p = 2
    {0.998479181447, 0.962565773247, 0.549415951353, 0.10906415795, 0.00684407392242},      // p = 5
}};
inline constexpr std::array<int, 3> kChiTailP = {1, 2, 5};

} // namespace effdim::oracle
