// End-to-end acceptance checks. Prints one PASS/FAIL line per check and
// exits nonzero if any check fails. Each check also has a wall-clock budget
// that counts towards its verdict.

#include "oracle_values.hpp"

#include "effdim/approximator.hpp"
#include "effdim/cli.hpp"
#include "effdim/covering.hpp"
#include "effdim/dim_estimators.hpp"
#include "effdim/gaussian_design.hpp"
#include "effdim/kernels.hpp"
#include "effdim/net_blocks.hpp"
#include "effdim/regression_lab.hpp"
#include "effdim/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace effdim;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// `detail` holds the measurements, `why` the failed conditions.
struct Verdict {
  bool pass = true;
  std::ostringstream detail;
  std::vector<std::string> why;
  void require(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      why.push_back(what);
    }
  }
};

struct Check {
  const char *name;
  double budget_seconds;
  std::function<void(Verdict &)> run;
};

// Deterministic uniforms for the random configurations below.
class Uniform {
public:
  explicit Uniform(std::uint64_t seed) : rng_(seed, 0xacce) {}
  double operator()(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(next_++); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(rng_.bits(next_++) % n); }

private:
  CounterRng rng_;
  std::uint64_t next_ = 0;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::setprecision(digits) << v;
  return s.str();
}

// ---- network blocks -------------------------------------------------------

void indicator_exactness(Verdict &v) {
  Uniform u(1);
  double worst_in = 0.0, worst_ring = 0.0, worst_out = 0.0;
  std::size_t points = 0;
  for (std::size_t d : {1u, 2u, 3u}) {
    const auto di = static_cast<Eigen::Index>(d);
    for (int c = 0; c < 10; ++c) {
      CubeSpec cube{Vector(di), u(0.05, 0.5)};
      for (Eigen::Index i = 0; i < di; ++i) cube.center[i] = u(-1.0, 1.0);
      const auto net = build_indicator(cube);
      Matrix in(di + 1, 100000);
      for (Eigen::Index k = 0; k < in.cols(); ++k) {
        for (Eigen::Index i = 0; i < di; ++i) in(i, k) = cube.center[i] + u(-1.5, 1.5) * cube.side;
        in(di, k) = u(0.0, 4.0);
      }
      const Matrix out = kernels::evaluate_batch_omp(net, in);
      for (Eigen::Index k = 0; k < in.cols(); ++k) {
        const double dist = (in.col(k).head(di) - cube.center).cwiseAbs().maxCoeff();
        const double y = in(di, k), val = out(0, k);
        if (dist <= cube.side / 2) worst_in = std::max(worst_in, std::abs(val - y));
        else if (dist <= cube.side) worst_ring = std::max(worst_ring, std::max(val - y, -val));
        else worst_out = std::max(worst_out, std::abs(val));
      }
      points += static_cast<std::size_t>(in.cols());
    }
  }
  v.detail << points << " points; max |g-y| inside " << fmt(worst_in) << ", ring excess " << fmt(worst_ring)
           << ", max |g| outside " << fmt(worst_out);
  v.require(worst_in <= 1e-10 && worst_ring <= 1e-10 && worst_out <= 1e-10, "tolerance 1e-10 exceeded");
}

void size_accounting(Verdict &v) {
  std::ostringstream s;
  bool ok = true;
  Uniform u(2);
  for (std::size_t d : {1u, 2u, 3u, 5u, 8u}) {
    const double r = u(0.05, 0.5);
    CubeSpec cube{Vector(static_cast<Eigen::Index>(d)), r};
    for (Eigen::Index i = 0; i < cube.center.size(); ++i) cube.center[i] = u(r, 1.0 - r);
    const auto sz = size_of(build_indicator(cube));
    const double b_bound = std::max({4.0, static_cast<double>(d), 1.0 + r, 2.0 / r});
    const auto want_k = 24 * d + 6;
    s << "ind d=" << d << " (L,K,B)=(" << sz.depth_L << "," << sz.nonzeros_K << "," << fmt(sz.max_weight_B)
      << ") want (3," << want_k << ",<=" << fmt(b_bound) << "); ";
    ok &= sz.depth_L == 3 && sz.nonzeros_K == want_k && sz.max_weight_B <= b_bound;
  }
  const auto m = size_of(build_clamp());
  s << "mod (L,B,K)=(" << m.depth_L << "," << fmt(m.max_weight_B) << "," << m.nonzeros_K << ") want (3,<=2,12)";
  ok &= m.depth_L == 3 && m.max_weight_B <= 2.0 && m.nonzeros_K == 12;
  v.detail << s.str();
  v.require(ok, "(L, K, B) differ from the stated values");
}

void multiplication_gadget(Verdict &v) {
  bool ok = true;
  for (double M : {1.0, 4.0}) {
    double prev = 0.0;
    v.detail << "M=" << M << ":";
    for (int T : {2, 4, 6, 8}) {
      const auto g = build_mult(T, M);
      Matrix in(2, 401 * 401);
      for (int i = 0; i <= 400; ++i) {
        for (int j = 0; j <= 400; ++j) {
          in(0, i * 401 + j) = -M + 2.0 * M * i / 400.0;
          in(1, i * 401 + j) = -M + 2.0 * M * j / 400.0;
        }
      }
      const Matrix out = kernels::evaluate_batch_omp(g.net, in);
      double err = 0.0;
      for (Eigen::Index k = 0; k < in.cols(); ++k) err = std::max(err, std::abs(out(0, k) - in(0, k) * in(1, k)));
      v.detail << " T" << T << " err " << fmt(err, 3) << "/cert " << fmt(g.certificate, 3);
      ok &= err <= g.certificate;
      if (T > 2) {
        v.detail << " (drop " << fmt(prev / err, 3) << "x)";
        ok &= prev >= 10.0 * err;
      }
      prev = err;
    }
    v.detail << "; ";
  }
  v.require(ok, "error above certificate or drop below 10x");
}

// ---- approximation ---------------------------------------------------------

void end_to_end(Verdict &v) {
  double worst_ratio = 0.0;
  std::string worst;
  bool ok = true;
  for (std::size_t d : {1u, 2u}) {
    for (double beta : {1.5, 2.0}) {
      for (const auto &t : target_library(d, beta)) {
        for (double eps : {0.2, 0.1, 0.05}) {
          const auto g = group_cells(cover_box(d, 0.0, 1.0, approx_cell_side(d, beta, eps)));
          const auto a = build_approximator(t, g, eps);
          const auto di = static_cast<Eigen::Index>(d);
          SweepRegion region{Vector::Zero(di), Vector::Ones(di),
                             [](const Vector &x) { return (x.array() >= 0.0).all() && (x.array() <= 1.0).all(); },
                             &g.cover};
          const auto c = measure_errors(a.net, t, cube_design(d), region, 20000, 0, 1);
          ok &= c.sup_on_S <= eps;
          if (c.sup_on_S / eps > worst_ratio) {
            worst_ratio = c.sup_on_S / eps;
            worst = "d=" + std::to_string(d) + " beta=" + fmt(beta) + " " + t.name + " eps=" + fmt(eps);
          }
        }
      }
    }
  }
  v.detail << "sup on S: worst sup/eps " << fmt(worst_ratio, 3) << " (" << worst << ")";

  // L2 over a Gaussian design, d = 4, exponential decay theta = 1
  const auto prof = exponential_profile(4, 0.25, 1.0);
  double worst_margin = -1e300;
  for (double beta : {1.5, 2.0}) {
    for (const auto &t : target_library(4, beta)) {
      for (double eps : {0.2, 0.1, 0.05}) {
        const auto set = make_ellipsoid_set(prof, 4.0, approx_cell_side(4, beta, eps));
        const auto g = group_cells(cover_ellipsoid_set(set));
        const auto a = build_approximator(t, g, eps);
        const double tau = prob_outside_bound(set);
        const auto c = measure_errors(a.net, t, gaussian_design(prof), SweepRegion{}, 0, 10000, 7);
        const double margin = c.l2 - (eps * eps + 4.0 * tau + 3.0 * c.l2_stderr);
        ok &= margin <= 0.0;
        worst_margin = std::max(worst_margin, margin);
      }
    }
  }
  v.detail << "; L2 on Gaussian d=4: max(l2 - eps^2 - 4tau - 3se) = " << fmt(worst_margin, 3);
  v.require(ok, "sup error above eps or L2 above eps^2 + 4 tau + 3 se");
}

void size_scaling(Verdict &v) {
  struct Case {
    std::size_t p;
    double beta;
  };
  const std::vector<double> eps = {0.2, 0.1, 0.05, 0.025, 0.0125};
  bool ok = true;
  for (Case c : {Case{1, 1.0}, Case{1, 2.0}, Case{2, 2.0}}) {
    const Matrix pts = draw(flat_design(c.p + 1, c.p), 200000, 11);
    const double want = static_cast<double>(c.p) / c.beta;
    v.detail << "(p,beta)=(" << c.p << "," << c.beta << ") want " << fmt(want) << ":";
    for (const auto &t : target_library(c.p + 1, c.beta)) {
      const auto fit = size_scaling_probe(t, pts, eps);
      v.detail << " " << t.name << " " << fmt(fit.slope, 3);
      ok &= std::abs(fit.slope - want) <= 0.3 * want;
    }
    v.detail << "; ";
  }
  v.require(ok, "slope outside +-30% of p/beta");
}

// ---- Gaussian bounds -------------------------------------------------------

void outside_and_covering(Verdict &v) {
  Uniform u(6);
  int mc_ok = 0, cover_ok = 0, ceil_ok = 0, configs = 0;
  double worst_gap = -1e300, worst_cover = 0.0;
  std::string cover_example;
  while (configs < 20) {
    const std::size_t d = 2 + u.index(5);
    const std::size_t p = 1 + u.index(std::min<std::size_t>(3, d));
    const auto prof = u(0.0, 1.0) < 0.5 ? exponential_profile(d, u(0.5, 2.0), u(0.3, 1.2))
                                        : polynomial_profile(d, u(0.5, 2.0), u(1.2, 3.0));
    const double R = u(std::sqrt(static_cast<double>(p)) + 0.3, 4.0);
    // the set's r is tied to p through lambda_p = r / (2R)
    const double r = 2.0 * R * prof.lambdas[static_cast<Eigen::Index>(p - 1)];
    const EllipsoidSet set{prof, R, r, p};
    if (ellipsoid_box_cells(set) > 2e6) continue;
    ++configs;

    const std::size_t n = 1000000;
    const double q = static_cast<double>(kernels::count_outside_omp(set, n, 100 + configs)) / static_cast<double>(n);
    const double se = std::sqrt(q * (1.0 - q) / static_cast<double>(n));
    const double bound = prob_outside_bound(set);
    worst_gap = std::max(worst_gap, q + 3.0 * se - bound);
    mc_ok += q + 3.0 * se <= bound;

    const double count = static_cast<double>(cover_ellipsoid_set(set).size());
    const double product = ellipsoid_product_bound(set);
    ceil_ok += count <= ellipsoid_box_cells(set); // diagnostic only
    if (count <= product) {
      ++cover_ok;
    } else if (count / product > worst_cover) {
      worst_cover = count / product;
      cover_example = "d=" + std::to_string(d) + " p=" + std::to_string(p) + " N=" + fmt(count, 8) +
                      " prod=" + fmt(product, 6) + " ceil-prod=" + fmt(ellipsoid_box_cells(set), 8);
    }
  }
  v.detail << "MC+3se <= bound in " << mc_ok << "/20 (max excess " << fmt(worst_gap, 3) << "); N_r(S) <= prod in "
           << cover_ok << "/20, <= prod ceil(2 lambda_i R / r) in " << ceil_ok << "/20";
  if (!cover_example.empty()) v.detail << " (worst " << cover_example << ")";
  v.require(mc_ok == 20, "MC outside probability above the bound");
  v.require(cover_ok == 20, "lattice count above prod lambda_i / lambda_p");
}

void tail_bounds(Verdict &v) {
  std::vector<double> ts;
  for (double t = 0.5; t <= 4.0 + 1e-12; t += 0.5) ts.push_back(t);
  const std::size_t n = 10000000;
  bool ok = true;
  double min_slack = 1e300;
  for (std::size_t p : {1u, 2u, 5u}) {
    const auto counts = kernels::tail_counts_omp(p, ts, n, 40 + p);
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const double q = static_cast<double>(counts[j]) / static_cast<double>(n);
      double bound = tail_bound_chisq(p, ts[j]);
      if (p == 1) bound = std::min(bound, tail_bound_scalar(ts[j]));
      ok &= q <= bound;
      min_slack = std::min(min_slack, bound - q);
      if (p == 1) ok &= q <= tail_bound_scalar(ts[j]) && q <= tail_bound_chisq(1, ts[j]);
    }
  }
  v.detail << "3 x 8 grid points, 1e7 draws each p; min(bound - mc) = " << fmt(min_slack, 3);
  v.require(ok, "MC tail above a bound");
}

void taylor_remainder(Verdict &v) {
  Uniform u(8);
  std::size_t pairs = 0, bad = 0;
  double worst = 0.0;
  for (std::size_t d : {1u, 2u, 3u}) {
    for (double beta : {1.0, 1.5, 2.0, 2.5}) {
      for (const auto &t : target_library(d, beta)) {
        const double box = std::min(1.0, t.domain_radius);
        for (int i = 0; i < 10000; ++i) {
          Vector xbar(static_cast<Eigen::Index>(d)), x(static_cast<Eigen::Index>(d));
          for (Eigen::Index j = 0; j < xbar.size(); ++j) {
            xbar[j] = u(-box, box);
            x[j] = u(-box, box);
          }
          const auto [rem, bound] = taylor_remainder_check(t, xbar, x);
          ++pairs;
          if (rem > bound) ++bad;
          if (bound > 0) worst = std::max(worst, rem / bound);
        }
      }
    }
  }
  v.detail << pairs << " pairs over 36 targets; max remainder/bound " << fmt(worst, 3);
  v.require(bad == 0, std::to_string(bad) + " pairs above the bound");
}

// ---- dimension estimators ----------------------------------------------------

void effective_dimension(Verdict &v) {
  Vector a(3), b(3);
  a << 0.0, 0.52, 0.37;
  b << 1.0, 0.52, 0.37;
  const Matrix seg = draw(segment_design(a, b), 100000, 1);
  const Matrix sq = draw(flat_design(5, 2), 100000, 2);
  const double box_seg = estimate_effective_dim(seg, 0.05, 0.01).p_hat;
  const double box_sq = estimate_effective_dim(sq, 0.1, 0.05).p_hat;
  const double mle_seg = mle_dimension(seg, {});
  const double mle_sq = mle_dimension(sq, {});
  v.detail << "box-counting segment " << fmt(box_seg) << " square " << fmt(box_sq) << "; MLE segment "
           << fmt(mle_seg) << " square " << fmt(mle_sq);
  v.require(box_seg >= 0.85 && box_seg <= 1.15 && box_sq >= 1.8 && box_sq <= 2.2 &&
                std::abs(mle_seg - 1.0) <= 0.2 && std::abs(mle_sq - 2.0) <= 0.4,
            "estimate outside its window");
}

void growth_with_n(Verdict &v) {
  const auto des = gaussian_design(exponential_profile(20, 1.0, 0.5));
  const auto curve = growth_curve(des, {100, 1000, 10000, 100000}, {}, 5, 17);
  std::vector<double> med;
  bool nondecreasing = true;
  v.detail << "medians";
  for (const auto &pt : curve) {
    if (!med.empty()) nondecreasing &= pt.median >= med.back();
    med.push_back(pt.median);
    v.detail << " " << fmt(pt.median);
  }
  const double tau = kendall_tau(med);
  v.detail << "; Kendall tau " << fmt(tau, 3);
  v.require(nondecreasing && tau > 0.0, "medians not nondecreasing");
}

// ---- regression ---------------------------------------------------------------

void rate_property(Verdict &v) {
  Vector a(3), b(3);
  a << 0.1, 0.2, 0.3;
  b << 0.9, 0.7, 0.5;
  RateConfig cfg;
  for (std::size_t n = 256; n <= 16384; n *= 2) cfg.ns.push_back(n);
  cfg.replications = 3;
  cfg.p_hypothesis = 1;
  cfg.seed = 1;
  const auto fit = rate_experiment(target_library(3, 1.0)[0], segment_design(a, b), 0.1, cfg);
  const double intrinsic = -2.0 / 3.0, ambient = -2.0 / 5.0;
  v.detail << "slope " << fmt(fit.slope, 3) << " CI [" << fmt(fit.ci_lo, 3) << ", " << fmt(fit.ci_hi, 3)
           << "]; |slope+2/3| " << fmt(std::abs(fit.slope - intrinsic), 3) << " vs |slope+2/5| "
           << fmt(std::abs(fit.slope - ambient), 3);
  v.require(fit.slope < 0.0 && std::abs(fit.slope - intrinsic) < std::abs(fit.slope - ambient),
            "slope not negative or not closer to -2/3");
}

void schedule_formulas(Verdict &v) {
  double worst = 0.0;
  for (const auto &row : oracle::kSchedule) {
    const auto prof = row.exponential ? exponential_profile(10, row.scale, row.rate)
                                      : polynomial_profile(10, row.scale, row.rate);
    const auto s = schedule(prof, row.n, row.beta, row.eta);
    for (auto [got, want] : {std::pair{s.r, row.r}, {s.R, row.R}, {s.p, row.p}, {s.exponent, row.exponent}}) {
      worst = std::max(worst, std::abs(got - want) / std::abs(want));
    }
  }
  v.detail << "5 tuples; max relative error " << fmt(worst, 3);
  v.require(worst <= 1e-12, "relative error above 1e-12");
}

// ---- CLI determinism --------------------------------------------------------------

std::string slurp(const fs::path &p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int run_cli_args(const std::vector<std::string> &args) {
  std::vector<const char *> argv{"effdim_lab"};
  for (const auto &a : args) argv.push_back(a.c_str());
  std::ostringstream err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), err);
  if (code != 0) std::cerr << err.str();
  return code;
}

void cli_determinism(Verdict &v) {
  const json exp4 = {{"decay", "exp"}, {"mu", 1.0}, {"theta", 0.5}, {"d", 4}};
  const std::vector<std::pair<std::string, json>> configs = {
      {"approx",
       {{"d", 1}, {"beta", 1.5}, {"targets", {"trig", "bump"}}, {"domain", {{"kind", "box"}, {"lo", 0.0}, {"hi", 1.0}}},
        {"epsilons", {0.2, 0.1}}, {"n_sweep", 2000}, {"n_mc", 10000}}},
      {"cover", {{"profile", exp4}, {"R", {2.0, 3.0}}, {"r", {0.5, 0.25}}, {"export_cells", true}}},
      {"gaussian-check", {{"profile", exp4}, {"R", {2.5, 4.0}}, {"r", 0.3}, {"n_mc", 100000}}},
      {"tails", {{"p", {1, 2, 5}}, {"t", {0.5, 1.0, 2.0, 3.0}}, {"n_mc", 200000}}},
      {"effdim",
       {{"design", {{"kind", "flat"}, {"d", 4}, {"m", 2}}}, {"n", 20000}, {"r", {0.2, 0.1}}, {"tau", {0.0, 0.05}}}},
      {"mle", {{"design", {{"kind", "gaussian"}, {"profile", exp4}}}, {"ns", {100, 1000, 3000}}, {"seeds", 3}}},
      {"rates",
       {{"target", "trig"},
        {"design", {{"kind", "segment"}, {"a", {0.1, 0.2, 0.3}}, {"b", {0.9, 0.7, 0.5}}}},
        {"ns", {64, 128, 256, 512}},
        {"n_mc", 10000},
        {"bootstrap", 200},
        {"train", {{"max_epochs", 60}}}}},
      {"schedule",
       {{"rows",
         {{{"profile", {{"decay", "exp"}, {"mu", 1.0}, {"theta", 1.0}, {"d", 10}}}, {"n", 1000.0}, {"beta", 1.0}},
          {{"profile", {{"decay", "poly"}, {"rho", 1.0}, {"omega", 2.0}, {"d", 10}}}, {"n", 1000.0}, {"beta", 2.0}}}}}},
  };
  const fs::path root = fs::temp_directory_path() / "effdim_acceptance_cli";
  fs::remove_all(root);
  std::size_t files = 0;
  std::vector<std::string> differing;
  // Both runs write to the same directory (the echo records the path), so
  // the first run's files are read back before the second run.
  auto snapshot = [](const fs::path &dir) {
    std::map<std::string, std::string> files;
    if (fs::exists(dir)) {
      for (const auto &e : fs::directory_iterator(dir)) files[e.path().filename().string()] = slurp(e.path());
    }
    return files;
  };
  for (const auto &[name, cfg] : configs) {
    const fs::path dir = root / name;
    fs::create_directories(dir);
    std::ofstream(dir / "in.json") << cfg.dump(2);
    std::map<std::string, std::string> runs[2];
    for (auto &out : runs) {
      fs::remove_all(dir / "out");
      const int code = run_cli_args({name, "--config", (dir / "in.json").string(), "--out", (dir / "out").string(),
                                     "--seed", "2024", "--emit-gnuplot"});
      v.require(code == 0, name + " exited with " + std::to_string(code));
      out = snapshot(dir / "out");
    }
    files += runs[0].size();
    if (runs[0].empty() || runs[0] != runs[1]) differing.push_back(name);
  }
  v.detail << "8 subcommands, " << files << " output files compared";
  if (!differing.empty()) {
    std::string list;
    for (const auto &n : differing) list += " " + n;
    v.require(false, "outputs differ for" + list);
  }
}

} // namespace

int main(int argc, char **argv) {
  // Optional arguments select checks by number, e.g. `effdim_acceptance 6 13`.
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));
  const std::vector<Check> checks = {
      {"indicator exactness", 10, indicator_exactness},
      {"size accounting of indicator and clamp", 1, size_accounting},
      {"multiplication gadget certificate", 30, multiplication_gadget},
      {"end-to-end approximation", 300, end_to_end},
      {"size scaling K ~ eps^(-p/beta)", 300, size_scaling},
      {"outside-probability bound and covering count", 120, outside_and_covering},
      {"Gaussian tail bounds", 60, tail_bounds},
      {"Taylor remainder", 10, taylor_remainder},
      {"effective-dimension estimators", 60, effective_dimension},
      {"MLE growth with n", 180, growth_with_n},
      {"risk rate slope", 1200, rate_property},
      {"schedule formulas", 1, schedule_formulas},
      {"CLI determinism", 600, cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto &c = checks[i];
    if (!only.empty() && !only.count(i + 1)) continue;
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception &e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) v.require(false, "over time budget");
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << std::setw(2) << i + 1 << "] " << c.name << " ("
              << std::fixed << std::setprecision(1) << secs << " s / " << c.budget_seconds << " s): "
              << std::defaultfloat << v.detail.str();
    for (const auto &w : v.why) std::cout << " | " << w;
    std::cout << std::endl;
  }
  const std::size_t ran = only.empty() ? checks.size() : only.size();
  std::cout << (ran - static_cast<std::size_t>(failed)) << "/" << ran << " passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
