#include "effdim/gaussian_design.hpp"

#include "effdim/errors.hpp"
#include "effdim/rng.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <set>

namespace effdim {

namespace {

void check_lambdas(const Vector &l) {
  if (l.size() == 0) throw ParameterError("profile: need at least one eigenvalue");
  for (Eigen::Index i = 0; i < l.size(); ++i) {
    if (!(l[i] > 0.0) || !std::isfinite(l[i])) {
      throw ParameterError("profile: lambda_" + std::to_string(i + 1) + " must be positive");
    }
    if (i > 0 && l[i] > l[i - 1]) throw ParameterError("profile: lambdas must be nonincreasing");
  }
}

double get_number(const nlohmann::json &doc, const char *key) {
  if (!doc.contains(key) || !doc[key].is_number()) {
    throw ParameterError(std::string("profile: missing numeric field \"") + key + "\"");
  }
  return doc[key].get<double>();
}

void reject_unknown(const nlohmann::json &doc, std::initializer_list<const char *> keys) {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto &[k, v] : doc.items()) {
    if (!allowed.count(k)) throw ParameterError("profile: unknown key \"" + k + "\"");
  }
}

} // namespace

EigenProfile exponential_profile(std::size_t d, double mu, double theta) {
  if (d == 0 || !(mu > 0.0) || !(theta > 0.0)) {
    throw ParameterError("exponential profile: need d >= 1, mu > 0, theta > 0");
  }
  EigenProfile p;
  p.law = DecayLaw::kExponential;
  p.mu = mu;
  p.theta = theta;
  p.lambdas.resize(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) p.lambdas[i] = mu * std::exp(-theta * static_cast<double>(i + 1));
  return p;
}

EigenProfile polynomial_profile(std::size_t d, double rho, double omega) {
  if (d == 0 || !(rho > 0.0) || !(omega > 1.0)) {
    throw ParameterError("polynomial profile: need d >= 1, rho > 0, omega > 1");
  }
  EigenProfile p;
  p.law = DecayLaw::kPolynomial;
  p.rho = rho;
  p.omega = omega;
  p.lambdas.resize(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) p.lambdas[i] = rho * std::pow(static_cast<double>(i + 1), -omega);
  return p;
}

EigenProfile explicit_profile(const Vector &lambdas) {
  check_lambdas(lambdas);
  EigenProfile p;
  p.law = DecayLaw::kExplicit;
  p.lambdas = lambdas;
  return p;
}

EigenProfile profile_from_json(const nlohmann::json &doc) {
  if (!doc.is_object() || !doc.contains("decay") || !doc["decay"].is_string()) {
    throw ParameterError("profile: expected an object with a \"decay\" string");
  }
  const auto decay = doc["decay"].get<std::string>();
  auto dim = [&] {
    const double d = get_number(doc, "d");
    if (d < 1 || d != std::floor(d)) throw ParameterError("profile: d must be a positive integer");
    return static_cast<std::size_t>(d);
  };
  if (decay == "exp") {
    reject_unknown(doc, {"decay", "mu", "theta", "d"});
    return exponential_profile(dim(), get_number(doc, "mu"), get_number(doc, "theta"));
  }
  if (decay == "poly") {
    reject_unknown(doc, {"decay", "rho", "omega", "d"});
    return polynomial_profile(dim(), get_number(doc, "rho"), get_number(doc, "omega"));
  }
  if (decay == "explicit") {
    reject_unknown(doc, {"decay", "lambdas"});
    if (!doc.contains("lambdas") || !doc["lambdas"].is_array()) {
      throw ParameterError("profile: explicit decay needs a \"lambdas\" array");
    }
    Vector l(static_cast<Eigen::Index>(doc["lambdas"].size()));
    for (Eigen::Index i = 0; i < l.size(); ++i) {
      if (!doc["lambdas"][i].is_number()) throw ParameterError("profile: lambdas must be numbers");
      l[i] = doc["lambdas"][i].get<double>();
    }
    return explicit_profile(l);
  }
  throw ParameterError("profile: unknown decay \"" + decay + "\"");
}

nlohmann::json to_json(const EigenProfile &p) {
  switch (p.law) {
  case DecayLaw::kExponential:
    return {{"decay", "exp"}, {"mu", p.mu}, {"theta", p.theta}, {"d", p.dim()}};
  case DecayLaw::kPolynomial:
    return {{"decay", "poly"}, {"rho", p.rho}, {"omega", p.omega}, {"d", p.dim()}};
  case DecayLaw::kExplicit:
    break;
  }
  std::vector<double> l(p.lambdas.data(), p.lambdas.data() + p.lambdas.size());
  return {{"decay", "explicit"}, {"lambdas", l}};
}

Matrix random_orthogonal(std::size_t d, std::uint64_t seed) {
  const auto n = static_cast<Eigen::Index>(d);
  const CounterRng rng(seed, 0x0a7e);
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal(static_cast<std::uint64_t>(i * n + j));
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Matrix sample(const EigenProfile &profile, std::size_t n, std::uint64_t seed) {
  const auto d = static_cast<Eigen::Index>(profile.dim());
  const auto rows = static_cast<Eigen::Index>(n);
  const CounterRng rng(seed, 0x5a3b);
  Matrix z(rows, d);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      z(i, j) = profile.lambdas[j] * rng.normal(static_cast<std::uint64_t>(i * d + j));
    }
  }
  if (profile.rotated()) return z * profile.Q.transpose();
  return z;
}

std::size_t effective_p(const EigenProfile &profile, double R, double r) {
  const double cut = r / (2.0 * R);
  std::size_t p = 0;
  while (p < profile.dim() && profile.lambdas[static_cast<Eigen::Index>(p)] >= cut) ++p;
  return p;
}

EllipsoidSet make_ellipsoid_set(const EigenProfile &profile, double R, double r) {
  if (!(R > 0.0) || !(r > 0.0)) throw ParameterError("ellipsoid set: R and r must be positive");
  return {profile, R, r, effective_p(profile, R, r)};
}

bool membership_eigen(const EllipsoidSet &set, const double *z) {
  const auto d = set.profile.dim();
  double q = 0.0;
  for (std::size_t i = 0; i < set.p; ++i) {
    const double s = z[i] / set.profile.lambdas[static_cast<Eigen::Index>(i)];
    q += s * s;
  }
  if (q > set.R * set.R) return false;
  for (std::size_t j = set.p; j < d; ++j) {
    if (std::abs(z[j]) > set.r / 2.0) return false;
  }
  return true;
}

bool membership(const EllipsoidSet &set, const Vector &x) {
  if (static_cast<std::size_t>(x.size()) != set.profile.dim()) {
    throw ShapeError("membership: point has wrong dimension");
  }
  if (!set.profile.rotated()) return membership_eigen(set, x.data());
  const Vector z = set.profile.Q.transpose() * x;
  return membership_eigen(set, z.data());
}

double tail_bound_chisq(std::size_t p, double t) {
  const double pp = static_cast<double>(p);
  const double t2 = t * t;
  return std::pow((2.0 * t2 + pp) / pp, pp / 2.0) * std::exp(-t2 * t2 / (2.0 * t2 + pp));
}

double tail_bound_scalar(double t) { return std::exp(-t * t / 2.0); }

double prob_outside_bound(const EllipsoidSet &set) {
  const double p = static_cast<double>(set.p);
  if (!(set.R * set.R > p)) {
    throw DomainError("prob_outside_bound: requires R^2 > p (R = " + std::to_string(set.R) +
                      ", p = " + std::to_string(set.p) + ")");
  }
  double total = set.p == 0 ? 0.0 : tail_bound_chisq(set.p, set.R);
  for (std::size_t j = set.p; j < set.profile.dim(); ++j) {
    const double l = set.profile.lambdas[static_cast<Eigen::Index>(j)];
    total += std::exp(-set.r * set.r / (8.0 * l * l));
  }
  return total;
}

Schedule schedule(const EigenProfile &profile, double n, double beta, double eta) {
  if (!(n >= 3.0)) throw ParameterError("schedule: n must be at least 3");
  if (!(beta > 0.0)) throw ParameterError("schedule: beta must be positive");
  const double d = static_cast<double>(profile.dim());
  const double logn = std::log(n);
  Schedule s;
  s.n = n;
  s.beta = beta;
  s.eta = eta;
  if (profile.law == DecayLaw::kExponential) {
    const double root = std::sqrt(logn / profile.theta);
    const double denom = 2.0 * beta + root;
    s.r = std::pow(n, -(1.0 - eta) / denom);
    s.R = logn;
    s.p = std::log(2.0 * profile.mu * s.R / s.r) / profile.theta;
    s.exponent = 2.0 * beta * (1.0 - eta) / denom;
    s.B = std::pow(n, beta / denom) * std::pow(logn, beta);
    s.K = std::pow(n, root / denom);
  } else if (profile.law == DecayLaw::kPolynomial) {
    const double w = profile.omega;
    const double kappa = (1.0 + 1.0 / w) / w;
    const double nk = std::pow(n, kappa);
    s.r = std::pow(n, -1.0 / (2.0 * beta + nk));
    s.R = std::pow(n, 1.0 / (2.0 * w * beta + w * nk));
    s.p = std::pow(2.0 * profile.rho * s.R / s.r, 1.0 / w);
    s.exponent = 2.0 * beta / (2.0 * beta + nk);
    s.B = std::pow(n, (1.0 + 1.0 / w) * beta / (2.0 * beta + nk));
    s.K = std::pow(n, (1.0 + 1.0 / w) * std::pow(n, kappa / (2.0 * beta + nk)) / (4.0 * beta + 2.0 * nk));
  } else {
    throw ParameterError("schedule: explicit profiles have no decay law");
  }
  if (s.p > d) {
    s.p = d;
    s.p_truncated = true;
  }
  s.L = 11.0 + 2.0 * d * std::log2(5.0) + (11.0 + (1.0 + beta) / d) * (2.0 + std::log2(beta));
  return s;
}

} // namespace effdim
