// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. `acceptance --record-pins` rewrites the pinned empirical
// constants used by criterion 10 and then runs the suite.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "torusqe/dictionary.hpp"
#include "torusqe/io.hpp"
#include "torusqe/torusqe.hpp"

using namespace torusqe;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned threads() { return default_thread_count(); }

// the basis grid shared by criteria 2 and 3
std::vector<std::pair<std::string, BasisProvider>> basis_grid() {
  std::vector<std::pair<std::string, BasisProvider>> out;
  out.emplace_back("exponential", [](const ShellPtr& s) { return exponential_basis(s); });
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    out.emplace_back("haar" + std::to_string(seed), [seed](const ShellPtr& s) { return random_onb(s, seed); });
  }
  out.emplace_back("paired_real", [](const ShellPtr& s) { return paired_basis(s, true); });
  out.emplace_back("paired_complex", [](const ShellPtr& s) { return paired_basis(s, false); });
  out.emplace_back("reflection", [](const ShellPtr& s) { return reflection_basis(s); });
  return out;
}

std::vector<std::int64_t> nonempty_shells(int d, std::int64_t E_max) {
  std::vector<std::int64_t> out;
  for (std::int64_t E = 1; E <= E_max; ++E) {
    if (shell_size(d, E) > 0) out.push_back(E);
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome lattice_identities() {
  const auto t0 = Clock::now();
  Outcome o;
  std::vector<std::string> bad;
  // r_d(lambda) counts points of norm lambda, i.e. the shell E = lambda^2
  for (int q = 0; q <= 8; ++q) {
    const auto E = static_cast<std::int64_t>(std::pow(9.0, q));
    if (shell_size(2, E) != 4) bad.push_back(fmt("r2(3^%d)", q));
  }
  for (int q = 0; q <= 8; ++q) {
    const std::int64_t E = std::int64_t{1} << (2 * q);
    if (shell_size(3, E) != 6) bad.push_back(fmt("r3(E=4^%d)", q));
  }
  for (int q = 0; q <= 6; ++q) {
    const std::int64_t E = std::int64_t{2} << (2 * q);
    if (shell_size(4, E) != 24) bad.push_back(fmt("r4(E=2*4^%d)", q));
  }
  const auto r4_210 = shell_size(4, 210);
  if (r4_210 != 576) bad.push_back(fmt("r4(E=210)=%zu, expected 576", r4_210));
  const double t = seconds_since(t0);
  o.pass = bad.empty() && t < 5.0;
  o.detail = fmt("%.2fs", t);
  for (const auto& b : bad) o.detail += "; mismatch " + b;
  return o;
}

Outcome master_variance() {
  const auto t0 = Clock::now();
  const auto bases = basis_grid();
  std::int64_t checks = 0, violations = 0;
  double worst_gap = -1e300;
  for (int d : {2, 3}) {
    const auto dict = observable_dictionary(d);
    const auto Es = nonempty_shells(d, d == 2 ? 2500 : 400);
    struct Tally {
      std::int64_t checks = 0, violations = 0;
      double worst = -1e300;
    };
    const auto per = parallel_map(
        Es.size(),
        [&](std::size_t i) {
          Tally t;
          const auto shell = make_shell(d, Es[i]);
          std::vector<double> rhs;
          for (const auto& e : dict) rhs.push_back(moment_bound_rhs(e.a, *shell));
          for (const auto& [name, provider] : bases) {
            const auto B = provider(shell);
            for (std::size_t k = 0; k < dict.size(); ++k) {
              const double gap = s2(dict[k].a, B) - rhs[k];
              ++t.checks;
              t.violations += gap > kInequalitySlack;
              t.worst = std::max(t.worst, gap);
            }
          }
          return t;
        },
        threads());
    for (const auto& t : per) {
      checks += t.checks;
      violations += t.violations;
      worst_gap = std::max(worst_gap, t.worst);
    }
  }
  const double t = seconds_since(t0);
  return {violations == 0 && t < 120.0,
          fmt("%lld checks, %lld violations, max S2-rhs %.3g, %.1fs", static_cast<long long>(checks),
              static_cast<long long>(violations), worst_gap, t)};
}

Outcome window_inequality() {
  const auto t0 = Clock::now();
  struct Window {
    int d;
    double lambda;
    bool is_short;
  };
  std::vector<Window> windows;
  for (int l = 5; l <= 50; l += 5) windows.push_back({2, static_cast<double>(l), false});
  for (int l = 5; l <= 50; l += 5) windows.push_back({2, static_cast<double>(l), true});
  for (int l = 4; l <= 14; l += 2) windows.push_back({3, static_cast<double>(l), false});
  for (int l : {6, 9, 12, 14}) windows.push_back({3, static_cast<double>(l), true});

  std::int64_t checks = 0, violations = 0;
  double worst_ratio = 0.0;
  for (const auto& [name, inner] : basis_grid()) {
    for (int d : {2, 3}) {
      const auto provider = caching_provider(inner);  // nested windows share bases
      const auto dict = observable_dictionary(d);
      for (const auto& w : windows) {
        if (w.d != d) continue;
        for (const auto& e : dict) {
          const auto rep = w.is_short ? short_interval_report(e.a, w.lambda, provider, threads())
                                      : v2(e.a, SpectralWindow::long_window(d, w.lambda), provider, threads());
          if (rep.empty) continue;
          ++checks;
          violations += !rep.prop_holds;
          if (rep.prop_rhs > 0) worst_ratio = std::max(worst_ratio, rep.v2 / rep.prop_rhs);
        }
      }
    }
  }
  const double t = seconds_since(t0);
  return {violations == 0 && windows.size() == 30,
          fmt("%zu windows, %lld checks, %lld violations, max V2/bound %.6f, %.1fs", windows.size(),
              static_cast<long long>(checks), static_cast<long long>(violations), worst_ratio, t)};
}

Outcome zygmund() {
  const auto t0 = Clock::now();
  const double bound = std::pow(3.0, 0.25);
  const auto Es = nonempty_shells(2, 500);
  struct Tally {
    double max_l4 = 0.0, worst_chain = -1e300;
    std::int64_t samples = 0;
  };
  const auto per = parallel_map(
      Es.size(),
      [&](std::size_t i) {
        Tally t;
        for (const auto& psi : haar_samples(make_shell(2, Es[i]), 0, 200)) {
          const auto rho = density_coeffs(psi);  // |psi|^2 as a trigonometric polynomial
          const double l4_4 = rho.l2_norm_sq();
          const double X = l4_4 - 1.0;
          const double var = rho.centered_l2_norm_sq();  // int (|psi|^2 - 1)^2
          t.worst_chain = std::max(t.worst_chain, X * X - 2.0 * var);
          t.max_l4 = std::max(t.max_l4, l4_norm(psi));
          ++t.samples;
        }
        return t;
      },
      threads());
  Tally all;
  for (const auto& t : per) {
    all.max_l4 = std::max(all.max_l4, t.max_l4);
    all.worst_chain = std::max(all.worst_chain, t.worst_chain);
    all.samples += t.samples;
  }
  double phi_err = 0.0;
  for (std::int64_t n = 1; n <= 40; ++n) phi_err = std::max(phi_err, std::abs(l4_norm(sharpness_sequence(n)) - std::pow(1.5, 0.25)));
  const bool ok = all.max_l4 <= bound + 1e-9 && all.worst_chain <= 1e-9 && phi_err <= 1e-12;
  return {ok, fmt("%lld samples on %zu shells, max L4 %.12f (bound %.12f), max X^2-2X %.3g, phi_q err %.2g, %.1fs",
                  static_cast<long long>(all.samples), Es.size(), all.max_l4, bound, all.worst_chain, phi_err,
                  seconds_since(t0))};
}

Outcome pair_cap() {
  const auto t0 = Clock::now();
  const auto caps = parallel_map(
      10000, [](std::size_t i) { return max_pair_count(enumerate_shell(2, static_cast<std::int64_t>(i) + 1)); },
      threads());
  std::int64_t worst = 0, over = 0;
  for (auto c : caps) {
    worst = std::max(worst, c);
    over += c > 2;
  }
  const double t = seconds_since(t0);
  return {over == 0 && t < 180.0,
          fmt("max pair count %lld over E <= 10000, %lld shells above 2, %.1fs", static_cast<long long>(worst),
              static_cast<long long>(over), t)};
}

Outcome oracle_agreement() {
  const auto t0 = Clock::now();
  const std::vector<std::int64_t> Es{1, 2, 5, 25, 50, 65, 85, 125, 130, 325};
  const auto errs = parallel_map(
      100,
      [&](std::size_t i) {
        const auto shell = make_shell(2, Es[i % Es.size()]);
        const auto a = detail::random_real_observable(2, 1000 + i, 1 + static_cast<int>(i % 7), 2 + static_cast<std::int64_t>(i % 9));
        const auto psi = random_onb(shell, i).function(i % shell->size());
        std::int64_t spread = 2 * isqrt(shell->norm_sq());
        const int grid = static_cast<int>(2 * (a.max_frequency() + spread) + 1);
        return std::abs(integrate_density(a, psi) - grid_integral_oracle(a, psi, grid));
      },
      threads());
  double worst_grid = 0.0;
  for (double e : errs) worst_grid = std::max(worst_grid, e);

  std::vector<LatticePoint> ns;
  for (std::int64_t x = -50; x <= 50; ++x) {
    for (std::int64_t y = -50; y <= 50; ++y) {
      if (x * x + y * y <= 2500) ns.push_back(LatticePoint{x, y});
    }
  }
  const std::array<double, 2> c{0.3, -0.7};
  const auto closed = circle_measure(c, 1.0);
  const auto quad = quadrature_measure(circle_curve(c, 1.0), 1e-12);
  const auto cerr = parallel_map(ns.size(), [&](std::size_t i) { return std::abs(closed(ns[i]) - quad(ns[i])); }, threads());
  double worst_circle = 0.0;
  for (double e : cerr) worst_circle = std::max(worst_circle, e);
  return {worst_grid <= 1e-9 && worst_circle <= 1e-10,
          fmt("grid: 100 cases, max err %.3g; circle: %zu frequencies, max err %.3g; %.1fs", worst_grid, ns.size(),
              worst_circle, seconds_since(t0))};
}

Outcome littman_decay() {
  const auto t0 = Clock::now();
  const auto circle = circle_measure({0.0, 0.0}, 1.0);
  double sup = 0.0;
  for (std::int64_t x = -100; x <= 100; ++x) {
    for (std::int64_t y = -100; y <= 100; ++y) {
      const LatticePoint n{x, y};
      const auto e = n.norm_sq();
      if (e < 1 || e > 10000) continue;
      sup = std::max(sup, std::norm(circle(n)) * n.norm());
    }
  }
  const auto fc = decay_fit(circle, 10000, threads());
  const auto fs = decay_fit(sphere_measure({0.0, 0.0, 0.0}, 1.0), 2500, threads());
  const bool ok = std::isfinite(sup) && std::abs(fc.alpha - 1.0) <= 0.15 && std::abs(fs.alpha - 2.0) <= 0.15;
  return {ok, fmt("sup |s^(n)|^2 |n| = %.6f; circle alpha %.4f; sphere alpha %.4f; %.1fs", sup, fc.alpha, fs.alpha,
                  seconds_since(t0))};
}

Outcome exact_cancellation() {
  const auto t0 = Clock::now();
  const auto survey = separation_survey(2000, 0.2, threads());
  std::vector<std::int64_t> Es;
  for (const auto& r : survey.records) {
    if (r.is_separated) Es.push_back(r.norm_sq);
  }
  struct Tally {
    std::int64_t checks = 0, violations = 0;
    double worst = 0.0;
  };
  const auto per = parallel_map(
      Es.size(),
      [&](std::size_t i) {
        Tally t;
        const auto shell = make_shell(2, Es[i]);
        const auto psis = haar_samples(shell, 0, 5);
        const auto sep_sq = shell->size() >= 2 ? min_separation_sq(*shell) : std::int64_t{1} << 40;
        const auto m = isqrt(sep_sq);
        for (std::int64_t x = -m; x <= m; ++x) {
          for (std::int64_t y = -m; y <= m; ++y) {
            const LatticePoint p{x, y};
            if (p.is_zero() || p.norm_sq() >= sep_sq) continue;
            const auto c = exact_cancellation_check(shell, p, psis, 1e-12);
            ++t.checks;
            t.violations += !(c.separated && c.holds);
            t.worst = std::max(t.worst, c.max_abs);
          }
        }
        return t;
      },
      threads());
  Tally all;
  for (const auto& t : per) {
    all.checks += t.checks;
    all.violations += t.violations;
    all.worst = std::max(all.worst, t.worst);
  }
  return {all.violations == 0,
          fmt("%zu separated shells, %lld (E, p) checks, %lld violations, max |integral| %.3g, %.1fs", Es.size(),
              static_cast<long long>(all.checks), static_cast<long long>(all.violations), all.worst,
              seconds_since(t0))};
}

Outcome sharpness() {
  const auto a = Observable::cosine(LatticePoint{0, 2});
  const auto entries = iwaniec_search(100);
  double worst = 0.0;
  for (const auto& e : entries) {
    const double dev = integrate_density(a, sharpness_sequence(e.n)).real() - a.mean().real();
    worst = std::max(worst, std::abs(dev - 1.0));
  }
  return {worst <= 1e-12, fmt("%zu Iwaniec n <= 100, max |deviation - 1| = %.3g", entries.size(), worst)};
}

// ---------------------------------------------------------------------------
// Pinned empirical constants

using Pins = std::map<std::string, double>;

Pins compute_pins(unsigned nthreads) {
  Pins p;
  const auto dict = observable_dictionary(2);
  const auto haar = caching_provider([](const ShellPtr& s) { return random_onb(s, 0); });
  double short_max = 0.0, main_max = 0.0;
  for (const auto& e : dict) {
    for (int l = 5; l <= 50; l += 5) {
      const auto rep = short_interval_report(e.a, l, haar, nthreads);
      if (!rep.empty) short_max = std::max(short_max, rep.short_ratio);
    }
    for (int l = 10; l <= 50; l += 10) {
      main_max = std::max(main_max, v2(e.a, SpectralWindow::long_window(2, l), haar, nthreads).maintheo_ratio);
    }
  }
  p["short_window_ratio_max"] = short_max;
  p["long_window_ratio_max"] = main_max;

  const auto circle = circle_measure({0.0, 0.0}, 1.0);
  double scaled_obs = 0.0, scaled_cs = 0.0;
  for (const auto& row : period_decay_sweep(circle, 2500, 0, 8, 0.1, nthreads)) {
    scaled_obs = std::max(scaled_obs, std::sqrt(row.lambda) * row.max_period);
    scaled_cs = std::max(scaled_cs, row.scaled_half);
  }
  p["period_scaled_max"] = scaled_obs;
  p["period_cs_scaled_max"] = scaled_cs;

  std::vector<ShellPtr> shells;
  for (auto E : nonempty_shells(2, 2500)) shells.push_back(make_shell(2, E));
  double lo = 1e300, hi = 0.0;
  for (const auto& r : restriction_sweep(Observable::constant(2, 1.0), circle, shells,
                                         [](const ShellPtr& s) { return random_onb(s, 0); }, nthreads)) {
    lo = std::min(lo, r.l2_ratio);
    hi = std::max(hi, r.l2_ratio);
  }
  p["br_ratio_min"] = lo;
  p["br_ratio_max"] = hi;
  return p;
}

double max_pin_gap(const Pins& a, const Pins& b) {
  double g = 0.0;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    g = std::max(g, it == b.end() ? INFINITY : std::abs(v - it->second));
  }
  return a.size() == b.size() ? g : INFINITY;
}

Outcome pins(bool record) {
  const auto t0 = Clock::now();
  const auto one = compute_pins(1);
  const auto again = compute_pins(1);
  const auto many = compute_pins(4);
  const double gap = std::max(max_pin_gap(one, again), max_pin_gap(one, many));
  std::string detail;
  for (const auto& [k, v] : one) detail += fmt("%s=%.12g ", k.c_str(), v);

  if (record) {
    io::json j = io::json::object();
    for (const auto& [k, v] : one) j[k] = v;
    io::write_file(TORUSQE_PINS_PATH, j.dump(2) + "\n");
  }
  Pins recorded;
  double rec_gap = INFINITY;
  try {
    const auto j = io::read_json_file(TORUSQE_PINS_PATH);
    for (const auto& [k, v] : j.items()) recorded[k] = v.get<double>();
    rec_gap = max_pin_gap(one, recorded);
  } catch (const std::exception&) {
    detail += "(no recorded pins) ";
  }
  return {gap <= 1e-9 && rec_gap <= 1e-9,
          detail + fmt("; rerun/thread gap %.3g, gap to recorded %.3g, %.1fs", gap, rec_gap, seconds_since(t0))};
}

Outcome flat_segment_periods() {
  const auto seg = quadrature_measure(flat_segment(0.0), 1e-12);
  double worst = 0.0;
  for (std::int64_t k = 1; k <= 50; ++k) {
    const auto psi = Eigenfunction::exponential(make_shell(2, k * k), {0, k});
    worst = std::max(worst, std::abs(period_integral(psi, seg).value - cplx(seg.mass())));
  }
  return {worst <= 1e-10 && std::abs(seg.mass() - 2.0 * std::numbers::pi) <= 1e-12,
          fmt("k = 1..50, max |period - mass| = %.3g (mass %.15f)", worst, seg.mass())};
}

}  // namespace

int main(int argc, char** argv) {
  bool record = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--record-pins") == 0) {
      record = true;
    } else {
      std::fprintf(stderr, "usage: acceptance [--record-pins]\n");
      return 1;
    }
  }
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"lattice identities", lattice_identities},
      {"moment bound over all shells", master_variance},
      {"window pair-count bound", window_inequality},
      {"L4 bound and chain", zygmund},
      {"d=2 pair-count cap", pair_cap},
      {"oracle agreement", oracle_agreement},
      {"Fourier decay of circle and sphere", littman_decay},
      {"exact cancellation on separated shells", exact_cancellation},
      {"sharpness sequence deviation", sharpness},
      {"pinned empirical constants", [record] { return pins(record); }},
      {"flat segment has no decay", flat_segment_periods},
  };
  std::printf("threads: %u\n", threads());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
