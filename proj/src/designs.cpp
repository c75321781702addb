#include "effdim/designs.hpp"

#include "effdim/errors.hpp"
#include "effdim/rng.hpp"

#include <set>

namespace effdim {

namespace {

void reject_unknown(const nlohmann::json &doc, std::initializer_list<const char *> keys) {
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto &[k, v] : doc.items()) {
    if (!allowed.count(k)) throw ParameterError("design: unknown key \"" + k + "\"");
  }
}

Vector read_vector(const nlohmann::json &a, const char *what) {
  if (!a.is_array() || a.empty()) throw ParameterError(std::string("design: \"") + what + "\" must be a nonempty array");
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

std::size_t read_count(const nlohmann::json &doc, const char *key, std::size_t fallback) {
  if (!doc.contains(key)) return fallback;
  const auto &v = doc[key];
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw ParameterError(std::string("design: \"") + key + "\" must be a positive integer");
  }
  return v.get<std::size_t>();
}

} // namespace

std::size_t DesignSpec::intrinsic_dim() const {
  switch (kind) {
  case Kind::kSegment: return 1;
  case Kind::kFlat: return m;
  default: return d;
  }
}

DesignSpec segment_design(const Vector &a, const Vector &b) {
  if (a.size() != b.size() || a.size() == 0) throw ParameterError("segment design: end points differ in dimension");
  DesignSpec s;
  s.kind = DesignSpec::Kind::kSegment;
  s.d = static_cast<std::size_t>(a.size());
  s.a = a;
  s.b = b;
  return s;
}

DesignSpec flat_design(std::size_t d, std::size_t m, double offset, std::uint64_t rotate_seed) {
  if (m == 0 || m > d) throw ParameterError("flat design: need 1 <= m <= d");
  DesignSpec s;
  s.kind = DesignSpec::Kind::kFlat;
  s.d = d;
  s.m = m;
  s.offset = offset;
  s.rotate_seed = rotate_seed;
  return s;
}

DesignSpec cube_design(std::size_t d, double lo, double hi) {
  if (d == 0 || !(lo < hi)) throw ParameterError("cube design: need d >= 1 and lo < hi");
  DesignSpec s;
  s.kind = DesignSpec::Kind::kCube;
  s.d = d;
  s.lo = lo;
  s.hi = hi;
  return s;
}

DesignSpec gaussian_design(const EigenProfile &profile) {
  DesignSpec s;
  s.kind = DesignSpec::Kind::kGaussian;
  s.d = profile.dim();
  s.profile = profile;
  return s;
}

Matrix draw(const DesignSpec &spec, std::size_t n, std::uint64_t seed) {
  if (spec.kind == DesignSpec::Kind::kGaussian) return sample(spec.profile, n, seed);
  const auto d = static_cast<Eigen::Index>(spec.d);
  const auto rows = static_cast<Eigen::Index>(n);
  const CounterRng rng(seed, 0xde51);
  Matrix x(rows, d);
  switch (spec.kind) {
  case DesignSpec::Kind::kSegment:
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double t = rng.uniform(static_cast<std::uint64_t>(i));
      x.row(i) = (spec.a + t * (spec.b - spec.a)).transpose();
    }
    break;
  case DesignSpec::Kind::kFlat: {
    const auto m = static_cast<Eigen::Index>(spec.m);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        x(i, j) = j < m ? rng.uniform(static_cast<std::uint64_t>(i * m + j)) : spec.offset;
      }
    }
    if (spec.rotate_seed != 0) x = x * random_orthogonal(spec.d, spec.rotate_seed).transpose();
    break;
  }
  case DesignSpec::Kind::kCube:
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        x(i, j) = spec.lo + (spec.hi - spec.lo) * rng.uniform(static_cast<std::uint64_t>(i * d + j));
      }
    }
    break;
  case DesignSpec::Kind::kGaussian:
    break;
  }
  return x;
}

DesignSpec design_from_json(const nlohmann::json &doc) {
  if (!doc.is_object() || !doc.contains("kind") || !doc["kind"].is_string()) {
    throw ParameterError("design: expected an object with a \"kind\" string");
  }
  const auto kind = doc["kind"].get<std::string>();
  if (kind == "segment") {
    reject_unknown(doc, {"kind", "a", "b"});
    if (!doc.contains("a") || !doc.contains("b")) throw ParameterError("design: segment needs \"a\" and \"b\"");
    return segment_design(read_vector(doc["a"], "a"), read_vector(doc["b"], "b"));
  }
  if (kind == "flat") {
    reject_unknown(doc, {"kind", "d", "m", "offset", "rotate_seed"});
    return flat_design(read_count(doc, "d", 2), read_count(doc, "m", 1), doc.value("offset", 0.37),
                       doc.value("rotate_seed", std::uint64_t{0}));
  }
  if (kind == "cube") {
    reject_unknown(doc, {"kind", "d", "lo", "hi"});
    return cube_design(read_count(doc, "d", 1), doc.value("lo", 0.0), doc.value("hi", 1.0));
  }
  if (kind == "gaussian") {
    reject_unknown(doc, {"kind", "profile"});
    if (!doc.contains("profile")) throw ParameterError("design: gaussian needs a \"profile\"");
    return gaussian_design(profile_from_json(doc["profile"]));
  }
  throw ParameterError("design: unknown kind \"" + kind + "\"");
}

nlohmann::json to_json(const DesignSpec &s) {
  auto vec = [](const Vector &v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  switch (s.kind) {
  case DesignSpec::Kind::kSegment: return {{"kind", "segment"}, {"a", vec(s.a)}, {"b", vec(s.b)}};
  case DesignSpec::Kind::kFlat:
    return {{"kind", "flat"}, {"d", s.d}, {"m", s.m}, {"offset", s.offset}, {"rotate_seed", s.rotate_seed}};
  case DesignSpec::Kind::kCube: return {{"kind", "cube"}, {"d", s.d}, {"lo", s.lo}, {"hi", s.hi}};
  case DesignSpec::Kind::kGaussian: return {{"kind", "gaussian"}, {"profile", to_json(s.profile)}};
  }
  return {};
}

} // namespace effdim
