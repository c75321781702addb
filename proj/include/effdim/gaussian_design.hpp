#pragma once

#include "effdim/relu_net.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <string>

namespace effdim {

enum class DecayLaw { kExponential, kPolynomial, kExplicit };

/// Covariance Sigma = Q diag(lambda_i^2) Q^T with lambda_1 >= ... >= lambda_d > 0.
struct EigenProfile {
  DecayLaw law = DecayLaw::kExplicit;
  double mu = 1.0, theta = 1.0;  // exponential: lambda_i = mu exp(-theta i)
  double rho = 1.0, omega = 2.0; // polynomial: lambda_i = rho i^{-omega}
  Vector lambdas;
  Matrix Q; // empty means identity

  std::size_t dim() const { return static_cast<std::size_t>(lambdas.size()); }
  bool rotated() const { return Q.size() != 0; }
};

EigenProfile exponential_profile(std::size_t d, double mu, double theta);
EigenProfile polynomial_profile(std::size_t d, double rho, double omega);
/// Throws ParameterError unless lambdas are positive and nonincreasing.
EigenProfile explicit_profile(const Vector &lambdas);

/// {"decay":"exp","mu":..,"theta":..,"d":..} | {"decay":"poly","rho":..,"omega":..,"d":..}
/// | {"decay":"explicit","lambdas":[..]}. Unknown keys are rejected.
EigenProfile profile_from_json(const nlohmann::json &doc);
nlohmann::json to_json(const EigenProfile &profile);

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
Matrix random_orthogonal(std::size_t d, std::uint64_t seed);

/// n x d matrix of draws Q diag(lambda) z. Row i depends only on (seed, i).
Matrix sample(const EigenProfile &profile, std::size_t n, std::uint64_t seed);

/// S(R, r; p) = {x : z = Q^T x, sum_{i<=p} z_i^2 / lambda_i^2 <= R^2, |z_j| <= r/2 for j > p}.
struct EllipsoidSet {
  EigenProfile profile;
  double R = 1.0;
  double r = 1.0;
  std::size_t p = 0;
};

/// Largest p with lambda_p >= r / (2R); 0 if none.
std::size_t effective_p(const EigenProfile &profile, double R, double r);
EllipsoidSet make_ellipsoid_set(const EigenProfile &profile, double R, double r);

bool membership(const EllipsoidSet &set, const Vector &x);
/// Same test for coordinates already in the eigenbasis.
bool membership_eigen(const EllipsoidSet &set, const double *z);

/// ((2R^2+p)/p)^{p/2} exp(-R^4/(2R^2+p)) + sum_{j>p} exp(-r^2/(8 lambda_j^2)).
/// Throws DomainError when R^2 <= p.
double prob_outside_bound(const EllipsoidSet &set);

/// ((2t^2+p)/p)^{p/2} exp(-t^4/(2t^2+p)); bounds P(|Z|_2 > t) for Z ~ N(0, I_p).
double tail_bound_chisq(std::size_t p, double t);
/// exp(-t^2/2); bounds P(|z| > t) for z ~ N(0, 1).
double tail_bound_scalar(double t);

struct Schedule {
  double n = 0.0;
  double beta = 1.0;
  double eta = 0.0;
  double r = 0.0;
  double R = 0.0;
  double p = 0.0;
  bool p_truncated = false;
  double L = 0.0;
  double B = 0.0;
  double K = 0.0;
  double exponent = 0.0;
};

/// Sample-size schedules of the two decay laws, with all unspecified
/// constants set to one. Throws ParameterError for explicit profiles or n < 3.
Schedule schedule(const EigenProfile &profile, double n, double beta, double eta);

} // namespace effdim
