#include "effdim/cli.hpp"

#include "effdim/approximator.hpp"
#include "effdim/covering.hpp"
#include "effdim/csv.hpp"
#include "effdim/designs.hpp"
#include "effdim/dim_estimators.hpp"
#include "effdim/errors.hpp"
#include "effdim/gaussian_design.hpp"
#include "effdim/kernels.hpp"
#include "effdim/regression_lab.hpp"
#include "effdim/targets.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

namespace effdim {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// ---- config reading ------------------------------------------------------

void check_keys(const json &doc, const std::string &where, std::initializer_list<const char *> keys,
                bool top_level) {
  if (!doc.is_object()) throw ConfigError(where + ": expected a JSON object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  if (top_level) allowed.insert({"command", "seed", "output_path", "threads"});
  for (const auto &[k, v] : doc.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key \"" + k + "\"");
  }
}

double number(const json &doc, const char *key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number");
  return doc[key].get<double>();
}

double positive(const json &doc, const char *key, double fallback) {
  const double v = number(doc, key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("\"") + key + "\" must be positive");
  return v;
}

std::size_t count(const json &doc, const char *key, std::size_t fallback, std::size_t min = 1) {
  if (!doc.contains(key)) return fallback;
  const auto &v = doc[key];
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min)) {
    throw ConfigError(std::string("\"") + key + "\" must be an integer >= " + std::to_string(min));
  }
  return v.get<std::size_t>();
}

bool flag(const json &doc, const char *key, bool fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_boolean()) throw ConfigError(std::string("\"") + key + "\" must be true or false");
  return doc[key].get<bool>();
}

std::string text(const json &doc, const char *key, const std::string &fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_string()) throw ConfigError(std::string("\"") + key + "\" must be a string");
  return doc[key].get<std::string>();
}

std::vector<double> numbers(const json &doc, const char *key, std::vector<double> fallback) {
  if (!doc.contains(key)) return fallback;
  const auto &v = doc[key];
  if (!v.is_array() || v.empty()) throw ConfigError(std::string("\"") + key + "\" must be a nonempty array");
  std::vector<double> out;
  for (const auto &e : v) {
    if (!e.is_number()) throw ConfigError(std::string("\"") + key + "\" must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<double> positives(const json &doc, const char *key, std::vector<double> fallback) {
  auto v = numbers(doc, key, std::move(fallback));
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string("\"") + key + "\" must hold positive numbers");
  }
  return v;
}

std::vector<std::size_t> counts(const json &doc, const char *key, std::vector<std::size_t> fallback) {
  if (!doc.contains(key)) return fallback;
  const auto &v = doc[key];
  if (!v.is_array() || v.empty()) throw ConfigError(std::string("\"") + key + "\" must be a nonempty array");
  std::vector<std::size_t> out;
  for (const auto &e : v) {
    if (!e.is_number_integer() || e.get<long long>() < 1) {
      throw ConfigError(std::string("\"") + key + "\" must hold positive integers");
    }
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

const json &child(const json &doc, const char *key) {
  if (!doc.contains(key)) throw ConfigError(std::string("missing \"") + key + "\"");
  return doc[key];
}

// Library functions signal bad values with ParameterError; inside the parse
// phase those are configuration errors.
template <class F> auto parse_with(const char *what, F &&f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError &) {
    throw;
  } catch (const std::invalid_argument &e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  } catch (const json::exception &e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

HolderTarget read_target(const json &spec, std::size_t d, double beta) {
  return parse_with("target", [&] {
    if (spec.is_string()) {
      const auto name = spec.get<std::string>();
      for (auto &t : target_library(d, beta)) {
        if (t.name == name) return t;
      }
      throw ConfigError("target: no library target \"" + name + "\" (trig, bump, poly)");
    }
    return target_from_json(spec, d, beta);
  });
}

// ---- output --------------------------------------------------------------

struct Run {
  fs::path out;
  std::uint64_t seed = 1;
  bool gnuplot = false;
};

std::ofstream open_file(const fs::path &p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw RuntimeFailure("cannot open " + p.string() + " for writing");
  return f;
}

std::string timing(bool record, double seconds) { return record ? format_double(seconds) : std::string("NA"); }

struct Plot {
  std::string csv;
  int x = 1;
  std::vector<std::pair<int, std::string>> ys;
  bool logx = false, logy = false;
  std::string xlabel, ylabel;
};

void write_gnuplot(const Run &run, const std::string &name, const Plot &p) {
  auto f = open_file(run.out / (name + ".gp"));
  f << "set datafile separator ','\n";
  f << "set key autotitle columnhead\n";
  f << "set xlabel '" << p.xlabel << "'\n";
  f << "set ylabel '" << p.ylabel << "'\n";
  if (p.logx) f << "set logscale x\n";
  if (p.logy) f << "set logscale y\n";
  f << "plot ";
  for (std::size_t i = 0; i < p.ys.size(); ++i) {
    if (i) f << ", \\\n     ";
    f << "'" << p.csv << "' using " << p.x << ":" << p.ys[i].first << " with linespoints title '" << p.ys[i].second
      << "'";
  }
  f << "\n";
}

struct Command {
  json echo;
  std::function<void(const Run &)> run;
};

// ---- approx --------------------------------------------------------------

Command parse_approx(const json &doc) {
  check_keys(doc, "approx", {"d", "beta", "targets", "domain", "epsilons", "n_sweep", "n_mc", "max_cells",
                             "record_timing"},
             true);
  const double beta = positive(doc, "beta", 1.5);
  const json domain = doc.value("domain", json{{"kind", "box"}, {"lo", 0.0}, {"hi", 1.0}});
  const std::string kind = parse_with("domain", [&] { return domain.at("kind").get<std::string>(); });
  std::size_t d = count(doc, "d", 1);
  double lo = 0.0, hi = 1.0, R = 0.0;
  EigenProfile profile;
  if (kind == "box") {
    check_keys(domain, "domain", {"kind", "lo", "hi"}, false);
    lo = number(domain, "lo", 0.0);
    hi = number(domain, "hi", 1.0);
    if (!(hi > lo)) throw ConfigError("domain: need lo < hi");
  } else if (kind == "ellipsoid") {
    check_keys(domain, "domain", {"kind", "profile", "R"}, false);
    profile = parse_with("profile", [&] { return profile_from_json(child(domain, "profile")); });
    R = positive(domain, "R", 4.0);
    if (doc.contains("d") && d != profile.dim()) throw ConfigError("approx: d does not match the profile");
    d = profile.dim();
  } else {
    throw ConfigError("domain: kind must be \"box\" or \"ellipsoid\"");
  }
  const json target_specs = doc.value("targets", json::array({"trig", "bump", "poly"}));
  if (!target_specs.is_array() || target_specs.empty()) throw ConfigError("\"targets\" must be a nonempty array");
  std::vector<HolderTarget> targets;
  for (const auto &t : target_specs) targets.push_back(read_target(t, d, beta));
  const auto eps = positives(doc, "epsilons", {0.2, 0.1, 0.05});
  const std::size_t n_sweep = count(doc, "n_sweep", 20000, 0);
  const std::size_t n_mc = count(doc, "n_mc", 10000, 0);
  const std::size_t max_cells = count(doc, "max_cells", 200000);
  const bool record = flag(doc, "record_timing", false);

  Command c;
  c.echo = {{"d", d}, {"beta", beta}, {"targets", target_specs}, {"domain", domain}, {"epsilons", eps},
            {"n_sweep", n_sweep}, {"n_mc", n_mc}, {"max_cells", max_cells}, {"record_timing", record}};
  c.run = [=](const Run &run) {
    auto f = open_file(run.out / "approx.csv");
    CsvWriter csv(f, {"target", "d", "beta", "epsilon", "tau", "sup_err", "l2_err", "l2_stderr", "L", "B", "K",
                      "cells", "build_seconds", "r", "p", "sweep_points", "l2_bound"});
    for (const auto &t : targets) {
      for (double e : eps) {
        const double r = approx_cell_side(d, beta, e);
        LatticeCover cover;
        DesignSpec design;
        SweepRegion region;
        double tau = 0.0;
        std::size_t p = d;
        std::optional<EllipsoidSet> set;
        if (kind == "box") {
          cover = cover_box(d, lo, hi, r);
          design = cube_design(d, lo, hi);
          region.lo = Vector::Constant(static_cast<Eigen::Index>(d), lo);
          region.hi = Vector::Constant(static_cast<Eigen::Index>(d), hi);
        } else {
          set = make_ellipsoid_set(profile, R, r);
          p = set->p;
          tau = prob_outside_bound(*set);
          cover = cover_ellipsoid_set(*set);
          design = gaussian_design(profile);
          region.lo.resize(static_cast<Eigen::Index>(d));
          region.hi.resize(static_cast<Eigen::Index>(d));
          for (std::size_t i = 0; i < d; ++i) {
            const double h = i < p ? profile.lambdas[static_cast<Eigen::Index>(i)] * R : r / 2.0;
            region.lo[static_cast<Eigen::Index>(i)] = -h;
            region.hi[static_cast<Eigen::Index>(i)] = h;
          }
          region.inside = [s = *set](const Vector &x) { return membership(s, x); };
        }
        const auto grouped = group_cells(cover);
        const auto a = build_approximator(t, grouped, e, max_cells);
        // Corners of every cell are cheap only in low dimension.
        if (d <= 2) region.cover = &grouped.cover;
        const auto cert = measure_errors(a.net, t, design, region, n_sweep, n_mc, run.seed);
        const auto na = [](double v, bool ok) { return ok ? CsvWriter::Cell(v) : CsvWriter::Cell("NA"); };
        csv.row({t.name, static_cast<long long>(d), beta, e, tau, na(cert.sup_on_S, cert.sweep_points > 0),
                 na(cert.l2, n_mc > 0), na(cert.l2_stderr, n_mc > 0), static_cast<long long>(a.size.depth_L),
                 a.size.max_weight_B, static_cast<long long>(a.size.nonzeros_K), static_cast<long long>(cover.size()),
                 timing(record, a.build_seconds), r, static_cast<long long>(p),
                 static_cast<long long>(cert.sweep_points), e * e + 4.0 * tau});
      }
    }
    if (run.gnuplot) write_gnuplot(run, "approx", {"approx.csv", 4, {{11, "K"}}, true, true, "epsilon", "nonzeros K"});
  };
  return c;
}

// ---- cover ---------------------------------------------------------------

Command parse_cover(const json &doc) {
  check_keys(doc, "cover", {"profile", "R", "r", "p", "max_box_cells", "export_cells"}, true);
  const auto profile = parse_with("profile", [&] { return profile_from_json(child(doc, "profile")); });
  const auto Rs = positives(doc, "R", {2.0});
  const auto rs = positives(doc, "r", {0.5});
  const std::size_t p_fixed = count(doc, "p", 0, 0);
  if (p_fixed > profile.dim()) throw ConfigError("cover: p exceeds the dimension");
  const std::size_t max_box = count(doc, "max_box_cells", 5000000);
  const bool export_cells = flag(doc, "export_cells", false);

  Command c;
  c.echo = {{"profile", to_json(profile)}, {"R", Rs},           {"r", rs},
            {"p", p_fixed},               {"max_box_cells", max_box}, {"export_cells", export_cells}};
  c.run = [=](const Run &run) {
    auto f = open_file(run.out / "cover.csv");
    CsvWriter csv(f, {"row", "R", "r", "p", "cells", "product_bound", "box_cells"});
    std::size_t row = 0;
    for (double R : Rs) {
      for (double r : rs) {
        auto set = make_ellipsoid_set(profile, R, r);
        if (p_fixed) set.p = p_fixed;
        const double box = ellipsoid_box_cells(set);
        if (box > static_cast<double>(max_box)) {
          throw RuntimeFailure("cover: " + format_double(box) + " candidate cells exceed max_box_cells");
        }
        const auto cover = cover_ellipsoid_set(set);
        csv.row({static_cast<long long>(row), R, r, static_cast<long long>(set.p),
                 static_cast<long long>(cover.size()), ellipsoid_product_bound(set), box});
        if (export_cells) {
          auto fc = open_file(run.out / ("cover_cells_" + std::to_string(row) + ".csv"));
          write_cover_csv(fc, cover);
        }
        ++row;
      }
    }
    if (run.gnuplot) {
      write_gnuplot(run, "cover", {"cover.csv", 3, {{5, "cells"}, {6, "product bound"}}, true, true, "r", "cells"});
    }
  };
  return c;
}

// ---- gaussian-check ------------------------------------------------------

Command parse_gaussian_check(const json &doc) {
  check_keys(doc, "gaussian-check", {"profile", "R", "r", "p", "n_mc"}, true);
  const auto profile = parse_with("profile", [&] { return profile_from_json(child(doc, "profile")); });
  const auto Rs = positives(doc, "R", {2.0, 3.0, 4.0});
  const double r = positive(doc, "r", 0.1);
  const std::size_t p_fixed = count(doc, "p", 0, 0);
  if (p_fixed > profile.dim()) throw ConfigError("gaussian-check: p exceeds the dimension");
  const std::size_t n_mc = count(doc, "n_mc", 1000000, 2);

  Command c;
  c.echo = {{"profile", to_json(profile)}, {"R", Rs}, {"r", r}, {"p", p_fixed}, {"n_mc", n_mc}};
  c.run = [=](const Run &run) {
    auto f = open_file(run.out / "gaussian-check.csv");
    CsvWriter csv(f, {"R", "r", "p", "outside", "mc_prob", "mc_stderr", "bound", "holds"});
    for (double R : Rs) {
      auto set = make_ellipsoid_set(profile, R, r);
      if (p_fixed) set.p = p_fixed;
      const double bound = prob_outside_bound(set);
      const std::size_t out = kernels::count_outside_omp(set, n_mc, run.seed);
      const double n = static_cast<double>(n_mc);
      const double q = static_cast<double>(out) / n;
      const double se = std::sqrt(q * (1.0 - q) / n);
      csv.row({R, r, static_cast<long long>(set.p), static_cast<long long>(out), q, se, bound,
               std::string(q + 3.0 * se <= bound ? "1" : "0")});
    }
    if (run.gnuplot) {
      write_gnuplot(run, "gaussian-check",
                    {"gaussian-check.csv", 1, {{5, "MC"}, {7, "bound"}}, false, true, "R", "P(X outside S)"});
    }
  };
  return c;
}

// ---- tails ---------------------------------------------------------------

Command parse_tails(const json &doc) {
  check_keys(doc, "tails", {"p", "t", "n_mc"}, true);
  const auto ps = counts(doc, "p", {1, 2, 5});
  const auto ts = positives(doc, "t", {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0});
  const std::size_t n_mc = count(doc, "n_mc", 10000000, 2);

  Command c;
  c.echo = {{"p", ps}, {"t", ts}, {"n_mc", n_mc}};
  c.run = [=](const Run &run) {
    auto f = open_file(run.out / "tails.csv");
    CsvWriter csv(f, {"p", "t", "mc_prob", "mc_stderr", "bound_chisq", "bound_scalar"});
    for (std::size_t p : ps) {
      const auto hits = kernels::tail_counts_omp(p, ts, n_mc, run.seed);
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const double n = static_cast<double>(n_mc);
        const double q = static_cast<double>(hits[i]) / n;
        csv.row({static_cast<long long>(p), ts[i], q, std::sqrt(q * (1.0 - q) / n), tail_bound_chisq(p, ts[i]),
                 p == 1 ? CsvWriter::Cell(tail_bound_scalar(ts[i])) : CsvWriter::Cell("NA")});
      }
    }
    if (run.gnuplot) {
      write_gnuplot(run, "tails", {"tails.csv", 2, {{3, "MC"}, {5, "chi-square bound"}}, false, true, "t", "P(|Z| > t)"});
    }
  };
  return c;
}

// ---- effdim --------------------------------------------------------------

Command parse_effdim(const json &doc) {
  check_keys(doc, "effdim", {"design", "n", "r", "tau"}, true);
  const auto design = parse_with("design", [&] { return design_from_json(child(doc, "design")); });
  const std::size_t n = count(doc, "n", 100000);
  const auto rs = positives(doc, "r", {0.2, 0.1, 0.05});
  const auto taus = numbers(doc, "tau", {0.01});
  for (double r : rs) {
    if (r >= 1.0) throw ConfigError("effdim: r must be below 1");
  }
  for (double t : taus) {
    if (!(t >= 0.0 && t < 1.0)) throw ConfigError("effdim: tau must lie in [0, 1)");
  }

  Command c;
  c.echo = {{"design", to_json(design)}, {"n", n}, {"r", rs}, {"tau", taus}};
  c.run = [=](const Run &run) {
    const Matrix pts = draw(design, n, run.seed);
    auto f = open_file(run.out / "effdim.csv");
    CsvWriter csv(f, {"r", "tau", "n_cells", "p_hat", "retained_mass", "R_S"});
    for (double r : rs) {
      for (double t : taus) {
        const auto est = estimate_effective_dim(pts, r, t);
        csv.row({r, t, static_cast<long long>(est.n_cells), est.p_hat, est.retained_mass, est.R_S});
      }
    }
    if (run.gnuplot) write_gnuplot(run, "effdim", {"effdim.csv", 1, {{4, "p_hat"}}, true, false, "r", "p_hat"});
  };
  return c;
}

// ---- mle -----------------------------------------------------------------

Command parse_mle(const json &doc) {
  check_keys(doc, "mle", {"design", "ns", "seeds", "k", "aggregation"}, true);
  const auto design = parse_with("design", [&] { return design_from_json(child(doc, "design")); });
  const auto ns = counts(doc, "ns", {100, 1000, 10000});
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (ns[i] <= ns[i - 1]) throw ConfigError("mle: ns must be increasing");
  }
  MleConfig cfg;
  cfg.k = count(doc, "k", 20, 3);
  cfg.aggregation = parse_with("aggregation", [&] {
    return aggregation_from_string(text(doc, "aggregation", to_string(MleAggregation::kMeanOfInverses)));
  });
  if (ns.front() <= cfg.k) throw ConfigError("mle: every n must exceed k");
  const std::size_t seeds = count(doc, "seeds", 5);

  Command c;
  c.echo = {{"design", to_json(design)}, {"ns", ns}, {"seeds", seeds}, {"k", cfg.k},
            {"aggregation", to_string(cfg.aggregation)}};
  c.run = [=](const Run &run) {
    const auto curve = growth_curve(design, ns, cfg, seeds, run.seed);
    std::vector<double> medians;
    for (const auto &g : curve) medians.push_back(g.median);
    const double tau = kendall_tau(medians);
    auto f = open_file(run.out / "mle.csv");
    CsvWriter csv(f, {"n", "median", "q25", "q75", "kendall_tau"});
    auto fr = open_file(run.out / "mle_runs.csv");
    CsvWriter runs(fr, {"n", "seed", "k", "estimate"});
    for (const auto &g : curve) {
      csv.row({static_cast<long long>(g.n), g.median, g.q25, g.q75, tau});
      for (std::size_t s = 0; s < g.estimates.size(); ++s) {
        runs.row({static_cast<long long>(g.n), std::to_string(growth_seed(run.seed, s)),
                  static_cast<long long>(cfg.k), g.estimates[s]});
      }
    }
    if (run.gnuplot) {
      write_gnuplot(run, "mle", {"mle.csv", 1, {{2, "median"}, {3, "q25"}, {4, "q75"}}, true, false, "n", "MLE dimension"});
    }
  };
  return c;
}

// ---- rates ---------------------------------------------------------------

Command parse_rates(const json &doc) {
  check_keys(doc, "rates", {"target", "beta", "design", "sigma", "ns", "replications", "param_scale",
                            "p_hypothesis", "n_mc", "bootstrap", "train"},
             true);
  const auto design = parse_with("design", [&] { return design_from_json(child(doc, "design")); });
  const double beta = positive(doc, "beta", 1.0);
  const json target_spec = doc.value("target", json("trig"));
  const auto target = read_target(target_spec, design.d, beta);
  const double sigma = number(doc, "sigma", 0.1);
  if (!(sigma >= 0.0)) throw ConfigError("rates: sigma must be nonnegative");
  RateConfig cfg;
  cfg.ns = counts(doc, "ns", {256, 512, 1024, 2048, 4096, 8192, 16384});
  cfg.replications = count(doc, "replications", 3, 3);
  cfg.param_scale = positive(doc, "param_scale", cfg.param_scale);
  cfg.p_hypothesis = count(doc, "p_hypothesis", design.intrinsic_dim());
  cfg.n_mc = count(doc, "n_mc", cfg.n_mc, 10000);
  cfg.bootstrap = count(doc, "bootstrap", cfg.bootstrap, 0);
  const json train = doc.value("train", json::object());
  check_keys(train, "train", {"depth", "batch", "learning_rate", "max_epochs", "patience", "tol"}, false);
  cfg.train.depth = count(train, "depth", cfg.train.depth, 2);
  cfg.train.batch = count(train, "batch", cfg.train.batch);
  cfg.train.learning_rate = positive(train, "learning_rate", cfg.train.learning_rate);
  cfg.train.max_epochs = count(train, "max_epochs", cfg.train.max_epochs);
  cfg.train.patience = count(train, "patience", cfg.train.patience);
  cfg.train.tol = number(train, "tol", cfg.train.tol);
  const auto [lo, hi] = std::minmax_element(cfg.ns.begin(), cfg.ns.end());
  if (cfg.ns.size() < 4 || *hi < 8 * *lo) throw ConfigError("rates: ns needs 4 or more sizes spanning 8x");

  Command c;
  c.echo = {{"target", target_spec}, {"beta", beta}, {"design", to_json(design)}, {"sigma", sigma}, {"ns", cfg.ns},
            {"replications", cfg.replications}, {"param_scale", cfg.param_scale},
            {"p_hypothesis", cfg.p_hypothesis}, {"n_mc", cfg.n_mc}, {"bootstrap", cfg.bootstrap},
            {"train", {{"depth", cfg.train.depth}, {"batch", cfg.train.batch},
                       {"learning_rate", cfg.train.learning_rate}, {"max_epochs", cfg.train.max_epochs},
                       {"patience", cfg.train.patience}, {"tol", cfg.train.tol}}}};
  c.run = [=](const Run &run) {
    RateConfig rc = cfg;
    rc.seed = run.seed;
    const auto fit = rate_experiment(target, design, sigma, rc);
    auto f = open_file(run.out / "rates.csv");
    CsvWriter csv(f, {"n", "seed", "beta", "sigma", "p_eff_hypothesis", "risk", "stderr", "train_loss", "params"});
    for (const auto &r : fit.runs) {
      csv.row({static_cast<long long>(r.n), std::to_string(r.seed), beta, sigma,
               static_cast<long long>(rc.p_hypothesis), r.risk, r.stderr_, r.train_loss,
               static_cast<long long>(r.params)});
    }
    auto fs = open_file(run.out / "rates_summary.csv");
    CsvWriter sum(fs, {"slope", "ci_lo", "ci_hi", "predicted_intrinsic", "predicted_ambient",
                       "predicted_hypothesis", "closer_to"});
    const double di = std::abs(fit.slope - fit.predicted.at("intrinsic"));
    const double da = std::abs(fit.slope - fit.predicted.at("ambient"));
    sum.row({fit.slope, fit.ci_lo, fit.ci_hi, fit.predicted.at("intrinsic"), fit.predicted.at("ambient"),
             fit.predicted.at("hypothesis"), std::string(di < da ? "intrinsic" : "ambient")});
    if (run.gnuplot) write_gnuplot(run, "rates", {"rates.csv", 1, {{6, "risk"}}, true, true, "n", "L2 risk"});
  };
  return c;
}

// ---- schedule ------------------------------------------------------------

Command parse_schedule(const json &doc) {
  check_keys(doc, "schedule", {"rows"}, true);
  const auto &rows = child(doc, "rows");
  if (!rows.is_array() || rows.empty()) throw ConfigError("schedule: \"rows\" must be a nonempty array");
  struct Row {
    EigenProfile profile;
    double n, beta, eta;
  };
  std::vector<Row> parsed;
  json echo_rows = json::array();
  for (const auto &r : rows) {
    check_keys(r, "schedule row", {"profile", "n", "beta", "eta"}, false);
    Row row{parse_with("profile", [&] { return profile_from_json(child(r, "profile")); }),
            positive(r, "n", 0.0), positive(r, "beta", 1.0), number(r, "eta", 0.0)};
    if (row.profile.law == DecayLaw::kExplicit) throw ConfigError("schedule: profile must be exp or poly");
    if (row.n < 3.0) throw ConfigError("schedule: n must be at least 3");
    echo_rows.push_back({{"profile", to_json(row.profile)}, {"n", row.n}, {"beta", row.beta}, {"eta", row.eta}});
    parsed.push_back(std::move(row));
  }

  Command c;
  c.echo = {{"rows", echo_rows}};
  c.run = [=](const Run &run) {
    auto f = open_file(run.out / "schedule.csv");
    CsvWriter csv(f, {"decay", "rate", "d", "n", "beta", "eta", "r", "R", "p", "p_truncated", "L", "B", "K",
                      "exponent"});
    for (const auto &row : parsed) {
      const auto s = schedule(row.profile, row.n, row.beta, row.eta);
      const bool exp = row.profile.law == DecayLaw::kExponential;
      csv.row({std::string(exp ? "exp" : "poly"), exp ? row.profile.theta : row.profile.omega,
               static_cast<long long>(row.profile.dim()), row.n, row.beta, row.eta, s.r, s.R, s.p,
               static_cast<long long>(s.p_truncated), s.L, s.B, s.K, s.exponent});
    }
    if (run.gnuplot) write_gnuplot(run, "schedule", {"schedule.csv", 4, {{9, "p"}}, true, false, "n", "p"});
  };
  return c;
}

using Parser = Command (*)(const json &);

const std::vector<std::pair<std::string, Parser>> &parsers() {
  static const std::vector<std::pair<std::string, Parser>> table = {
      {"approx", parse_approx}, {"cover", parse_cover}, {"gaussian-check", parse_gaussian_check},
      {"tails", parse_tails},   {"effdim", parse_effdim}, {"mle", parse_mle},
      {"rates", parse_rates},   {"schedule", parse_schedule},
  };
  return table;
}

const char *kHelp[] = {
    "Build an approximating network per target and epsilon; sup and L2 errors",
    "Exact lattice covering numbers of ellipsoid sets against the product bound",
    "Monte Carlo P(X outside S) against the closed-form bound",
    "Monte Carlo Gaussian norm tails against the two tail bounds",
    "Box-counting effective dimension of a synthetic design",
    "kNN maximum-likelihood dimension over growing sample sizes",
    "Empirical risk rate of a trained ReLU surrogate",
    "Sample-size schedules (r, R, p, L, B, K, exponent)",
};

json read_config(const std::string &path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config " + path);
  try {
    return json::parse(f);
  } catch (const json::exception &e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
}

} // namespace

const std::vector<std::string> &cli_commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto &[n, p] : parsers()) v.push_back(n);
    return v;
  }();
  return names;
}

int run_cli(int argc, const char *const *argv, std::ostream &err) {
  CLI::App app{"Effective-dimension experiments: approximation, covering, tails, estimators, rates"};
  app.require_subcommand(1);
  struct Opts {
    std::string config, out;
    std::uint64_t seed = 0;
    int threads = 0;
    bool gnuplot = false;
  };
  std::vector<Opts> opts(parsers().size());
  std::vector<CLI::App *> subs;
  for (std::size_t i = 0; i < parsers().size(); ++i) {
    auto *sub = app.add_subcommand(parsers()[i].first, kHelp[i]);
    sub->add_option("--config", opts[i].config, "JSON config file")->required();
    sub->add_option("--out", opts[i].out, "Output directory (overrides output_path)");
    sub->add_option("--seed", opts[i].seed, "Seed (overrides the config)");
    sub->add_option("--threads", opts[i].threads, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
    sub->add_flag("--emit-gnuplot", opts[i].gnuplot, "Also write a gnuplot script next to the CSV");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    std::ostringstream o, e2;
    app.exit(e, o, e2);
    err << o.str();
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    err << o.str() << e2.str();
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::size_t which = 0;
  while (!subs[which]->parsed()) ++which;
  const auto &name = parsers()[which].first;
  const Opts &o = opts[which];

  Command cmd;
  Run run;
  int threads = omp_get_num_procs();
  try {
    const json doc = read_config(o.config);
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    if (doc.contains("command") && doc["command"] != name) {
      throw ConfigError("config was written for \"" + doc["command"].dump() + "\", not \"" + name + "\"");
    }
    run.seed = doc.contains("seed") ? static_cast<std::uint64_t>(count(doc, "seed", 1, 0)) : 1;
    if (subs[which]->count("--seed")) run.seed = o.seed;
    std::string out = text(doc, "output_path", "");
    if (!o.out.empty()) out = o.out;
    if (out.empty()) throw ConfigError("no output path: pass --out or set output_path");
    run.out = out;
    threads = static_cast<int>(count(doc, "threads", static_cast<std::size_t>(threads)));
    if (o.threads > 0) threads = o.threads;
    run.gnuplot = o.gnuplot;
    cmd = parsers()[which].second(doc);
  } catch (const ConfigError &e) {
    err << name << ": config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    omp_set_num_threads(threads);
    fs::create_directories(run.out);
    json echo = cmd.echo;
    echo["command"] = name;
    echo["seed"] = run.seed;
    echo["threads"] = threads;
    echo["output_path"] = run.out.string();
    {
      auto f = open_file(run.out / (name + ".config.json"));
      f << echo.dump(2) << "\n";
    }
    cmd.run(run);
  } catch (const std::exception &e) {
    err << name << ": error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

} // namespace effdim
