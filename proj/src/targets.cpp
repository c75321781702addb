#include "effdim/targets.hpp"

#include "effdim/errors.hpp"
#include "effdim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace effdim {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

int order(const MultiIndex &a) { return std::accumulate(a.begin(), a.end(), 0); }

// Norm bound from per-derivative sup bounds.
double norm_from_sups(std::size_t d, double beta, const std::function<double(const MultiIndex &)> &sup) {
  const int k = static_cast<int>(std::floor(beta));
  const double s = beta - k;
  double low = 0.0, top = 0.0;
  for (const auto &a : multi_indices(static_cast<int>(d), k)) {
    if (order(a) < k) {
      low = std::max(low, sup(a));
      continue;
    }
    double q = 2.0 * sup(a);
    if (s > 0.0) {
      double grad = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        MultiIndex b = a;
        ++b[i];
        grad += sup(b);
      }
      q = std::pow(2.0 * sup(a), 1.0 - s) * std::pow(grad, s);
    }
    top = std::max(top, q);
  }
  return low + top;
}

double hermite(int k, double u) {
  double h0 = 1.0, h1 = u;
  if (k == 0) return h0;
  for (int j = 1; j < k; ++j) {
    const double h2 = u * h1 - j * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Scale so that declared_norm <= 1 and |f| <= 1 with a small safety margin.
double amplitude_for(double unit_norm, double unit_sup) {
  const double limit = std::max(unit_norm, unit_sup);
  return limit > 0.0 ? 0.999 / limit : 1.0;
}

void reject_unknown(const nlohmann::json &doc, std::initializer_list<const char *> keys) {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto &[k, v] : doc.items()) {
    if (!allowed.count(k)) throw ParameterError("target: unknown key \"" + k + "\"");
  }
}

Vector vector_field(const nlohmann::json &doc, const char *key, std::size_t d, double fallback) {
  if (!doc.contains(key)) return Vector::Constant(static_cast<Eigen::Index>(d), fallback);
  const auto &a = doc[key];
  if (a.is_number()) return Vector::Constant(static_cast<Eigen::Index>(d), a.get<double>());
  if (!a.is_array() || a.size() != d) {
    throw ParameterError(std::string("target: \"") + key + "\" must be a number or an array of length d");
  }
  Vector v(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

} // namespace

double hermite_envelope(int k) {
  // |He_k(u)| exp(-u^2/2) vanishes beyond |u| = 2 sqrt(k) + 6; the grid
  // maximum is inflated by a relative 1e-3 to cover the grid spacing.
  const double span = 2.0 * std::sqrt(static_cast<double>(k)) + 6.0;
  double best = 0.0;
  const int steps = 200000;
  for (int i = 0; i <= steps; ++i) {
    const double u = span * i / steps;
    best = std::max(best, std::abs(hermite(k, u)) * std::exp(-u * u / 2.0));
  }
  return best * 1.001;
}

HolderTarget make_trig_target(const Vector &w, double phase, double beta) {
  const std::size_t d = static_cast<std::size_t>(w.size());
  auto sup = [w](const MultiIndex &a) {
    double s = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) s *= std::pow(std::abs(w[static_cast<Eigen::Index>(i)]), a[i]);
    return s;
  };
  const double A = amplitude_for(norm_from_sups(d, beta, sup), 1.0);
  HolderTarget t;
  t.name = "trig";
  t.d = d;
  t.beta = beta;
  t.value = [=](const Vector &x) { return A * std::sin(w.dot(x) + phase); };
  t.partial = [=](const MultiIndex &a, const Vector &x) {
    double s = A;
    for (std::size_t i = 0; i < a.size(); ++i) s *= std::pow(w[static_cast<Eigen::Index>(i)], a[i]);
    return s * std::sin(w.dot(x) + phase + order(a) * kHalfPi);
  };
  t.declared_norm = A * norm_from_sups(d, beta, sup);
  t.domain_radius = std::numeric_limits<double>::infinity();
  t.params = {{"family", "trig"}, {"w", std::vector<double>(w.data(), w.data() + w.size())},
              {"phase", phase}, {"amplitude", A}};
  return t;
}

HolderTarget make_bump_target(const Vector &center, double width, double beta) {
  if (!(width > 0.0)) throw ParameterError("bump target: width must be positive");
  const std::size_t d = static_cast<std::size_t>(center.size());
  std::vector<double> env;
  for (int k = 0; k <= static_cast<int>(std::floor(beta)) + 1; ++k) env.push_back(hermite_envelope(k));
  auto sup = [=](const MultiIndex &a) {
    double s = 1.0;
    for (int ai : a) s *= env[static_cast<std::size_t>(ai)] * std::pow(width, -ai);
    return s;
  };
  const double A = amplitude_for(norm_from_sups(d, beta, sup), 1.0);
  HolderTarget t;
  t.name = "bump";
  t.d = d;
  t.beta = beta;
  t.value = [=](const Vector &x) { return A * std::exp(-(x - center).squaredNorm() / (2.0 * width * width)); };
  t.partial = [=](const MultiIndex &a, const Vector &x) {
    double s = A;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double u = (x[static_cast<Eigen::Index>(i)] - center[static_cast<Eigen::Index>(i)]) / width;
      s *= std::pow(-1.0 / width, a[i]) * hermite(a[i], u) * std::exp(-u * u / 2.0);
    }
    return s;
  };
  t.declared_norm = A * norm_from_sups(d, beta, sup);
  t.domain_radius = std::numeric_limits<double>::infinity();
  t.params = {{"family", "bump"}, {"center", std::vector<double>(center.data(), center.data() + center.size())},
              {"width", width}, {"amplitude", A}};
  return t;
}

HolderTarget make_poly_target(std::size_t d, const std::map<MultiIndex, double> &terms, double radius,
                              double beta) {
  if (!(radius > 0.0)) throw ParameterError("poly target: radius must be positive");
  for (const auto &[a, c] : terms) {
    if (a.size() != d) throw ParameterError("poly target: multi-index has wrong dimension");
  }
  // Sup of |d^alpha p| on the cube, bounded term by term.
  auto sup = [=](const MultiIndex &a) {
    double s = 0.0;
    for (const auto &[g, c] : terms) {
      double term = std::abs(c);
      for (std::size_t i = 0; i < d && term != 0.0; ++i) {
        if (g[i] < a[i]) {
          term = 0.0;
          break;
        }
        term *= factorial(g[i]) / factorial(g[i] - a[i]) * std::pow(radius, g[i] - a[i]);
      }
      s += term;
    }
    return s;
  };
  const double A = amplitude_for(norm_from_sups(d, beta, sup), sup(MultiIndex(d, 0)));
  HolderTarget t;
  t.name = "poly";
  t.d = d;
  t.beta = beta;
  auto eval = [=](const MultiIndex &a, const Vector &x) {
    double s = 0.0;
    for (const auto &[g, c] : terms) {
      double term = c;
      for (std::size_t i = 0; i < d && term != 0.0; ++i) {
        if (g[i] < a[i]) {
          term = 0.0;
          break;
        }
        term *= factorial(g[i]) / factorial(g[i] - a[i]) * std::pow(x[static_cast<Eigen::Index>(i)], g[i] - a[i]);
      }
      s += term;
    }
    return A * s;
  };
  t.value = [=](const Vector &x) { return eval(MultiIndex(d, 0), x); };
  t.partial = eval;
  t.declared_norm = A * norm_from_sups(d, beta, sup);
  t.domain_radius = radius;
  nlohmann::json jt = nlohmann::json::array();
  for (const auto &[g, c] : terms) jt.push_back({{"alpha", g}, {"coef", c}});
  t.params = {{"family", "poly"}, {"terms", jt}, {"radius", radius}, {"amplitude", A}};
  return t;
}

HolderTarget make_constant_target(std::size_t d, double c, double beta) {
  if (std::abs(c) > 1.0) throw ParameterError("constant target: |c| must be <= 1");
  HolderTarget t;
  t.name = "constant";
  t.d = d;
  t.beta = beta;
  t.value = [c](const Vector &) { return c; };
  t.partial = [c](const MultiIndex &a, const Vector &) { return order(a) == 0 ? c : 0.0; };
  t.declared_norm = norm_from_sups(d, beta, [c](const MultiIndex &a) { return order(a) == 0 ? std::abs(c) : 0.0; });
  t.domain_radius = std::numeric_limits<double>::infinity();
  t.params = {{"family", "constant"}, {"c", c}};
  return t;
}

HolderTarget make_linear_target(const Vector &a, double b, double radius, double beta) {
  const std::size_t d = static_cast<std::size_t>(a.size());
  auto sup = [=](const MultiIndex &al) {
    const int o = order(al);
    if (o == 0) return std::abs(b) + a.cwiseAbs().sum() * radius;
    if (o == 1) {
      for (std::size_t i = 0; i < d; ++i) {
        if (al[i] == 1) return std::abs(a[static_cast<Eigen::Index>(i)]);
      }
    }
    return 0.0;
  };
  HolderTarget t;
  t.name = "linear";
  t.d = d;
  t.beta = beta;
  t.value = [=](const Vector &x) { return a.dot(x) + b; };
  t.partial = [=](const MultiIndex &al, const Vector &x) {
    const int o = order(al);
    if (o == 0) return a.dot(x) + b;
    if (o == 1) {
      for (std::size_t i = 0; i < d; ++i) {
        if (al[i] == 1) return a[static_cast<Eigen::Index>(i)];
      }
    }
    return 0.0;
  };
  t.declared_norm = norm_from_sups(d, beta, sup);
  t.domain_radius = radius;
  if (t.declared_norm > 1.0 || sup(MultiIndex(d, 0)) > 1.0) {
    throw ParameterError("linear target: norm on the cube exceeds 1");
  }
  t.params = {{"family", "linear"}, {"a", std::vector<double>(a.data(), a.data() + a.size())}, {"b", b},
              {"radius", radius}};
  return t;
}

std::vector<HolderTarget> target_library(std::size_t d, double beta) {
  const auto n = static_cast<Eigen::Index>(d);
  Vector w(n), c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w[i] = 2.0 - 0.7 * static_cast<double>(i) / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));
    c[i] = 0.45 + 0.1 * static_cast<double>(i);
  }
  std::map<MultiIndex, double> terms;
  MultiIndex a(d, 0);
  a[0] = 3;
  terms[a] = 0.5;
  a[0] = 1;
  terms[a] = 0.4;
  for (std::size_t i = 0; i < d; ++i) {
    MultiIndex s(d, 0);
    s[i] = 2;
    terms[s] += -1.0 / static_cast<double>(i + 1);
  }
  MultiIndex mixed(d, 0);
  mixed[0] += 1;
  mixed[d - 1] += 1;
  terms[mixed] += 0.3;
  return {make_trig_target(w, 0.3, beta), make_bump_target(c, 0.35, beta),
          make_poly_target(d, terms, 1.5, beta)};
}

HolderTarget target_from_json(const nlohmann::json &doc, std::size_t d, double beta) {
  if (!doc.is_object() || !doc.contains("family") || !doc["family"].is_string()) {
    throw ParameterError("target: expected an object with a \"family\" string");
  }
  const auto fam = doc["family"].get<std::string>();
  if (fam == "trig") {
    reject_unknown(doc, {"family", "w", "phase"});
    return make_trig_target(vector_field(doc, "w", d, 1.5), doc.value("phase", 0.3), beta);
  }
  if (fam == "bump") {
    reject_unknown(doc, {"family", "center", "width"});
    return make_bump_target(vector_field(doc, "center", d, 0.5), doc.value("width", 0.35), beta);
  }
  if (fam == "poly") {
    reject_unknown(doc, {"family", "terms", "radius"});
    if (!doc.contains("terms")) return target_library(d, beta)[2];
    std::map<MultiIndex, double> terms;
    for (const auto &jt : doc["terms"]) {
      terms[jt.at("alpha").get<MultiIndex>()] += jt.at("coef").get<double>();
    }
    return make_poly_target(d, terms, doc.value("radius", 1.5), beta);
  }
  if (fam == "constant") {
    reject_unknown(doc, {"family", "c"});
    return make_constant_target(d, doc.value("c", 0.3), beta);
  }
  if (fam == "linear") {
    reject_unknown(doc, {"family", "a", "b", "radius"});
    return make_linear_target(vector_field(doc, "a", d, 0.1), doc.value("b", 0.0), doc.value("radius", 1.0), beta);
  }
  throw ParameterError("target: unknown family \"" + fam + "\"");
}

double sampled_holder_norm(const HolderTarget &t, double lo, double hi, std::size_t pairs, std::uint64_t seed) {
  const int k = static_cast<int>(std::floor(t.beta));
  const double s = t.beta - k;
  const auto d = static_cast<Eigen::Index>(t.d);
  const CounterRng rng(seed, 0x401d);
  const auto alphas = multi_indices(static_cast<int>(t.d), k);
  double low = 0.0, top = 0.0;
  Vector x(d), y(d);
  for (std::size_t n = 0; n < pairs; ++n) {
    for (Eigen::Index i = 0; i < d; ++i) {
      x[i] = lo + (hi - lo) * rng.uniform(2 * (n * t.d + static_cast<std::size_t>(i)));
      y[i] = lo + (hi - lo) * rng.uniform(2 * (n * t.d + static_cast<std::size_t>(i)) + 1);
    }
    const double dist = (x - y).cwiseAbs().maxCoeff();
    for (const auto &a : alphas) {
      if (order(a) < k) {
        low = std::max(low, std::abs(t.partial(a, x)));
      } else if (dist > 0.0) {
        top = std::max(top, std::abs(t.partial(a, x) - t.partial(a, y)) / std::pow(dist, s));
      }
    }
  }
  return low + top;
}

double taylor_value(const HolderTarget &t, const Vector &xbar, const Vector &x) {
  const int k = static_cast<int>(std::floor(t.beta));
  double v = 0.0;
  for (const auto &a : multi_indices(static_cast<int>(t.d), k)) {
    double mono = 1.0, fact = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      mono *= std::pow(x[static_cast<Eigen::Index>(i)] - xbar[static_cast<Eigen::Index>(i)], a[i]);
      fact *= factorial(a[i]);
    }
    v += t.partial(a, xbar) / fact * mono;
  }
  return v;
}

} // namespace effdim
