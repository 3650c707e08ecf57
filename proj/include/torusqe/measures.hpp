#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "torusqe/bessel.hpp"
#include "torusqe/observables.hpp"
#include "torusqe/quadrature.hpp"

namespace torusqe {

using Vec3 = std::array<double, 3>;

enum class MeasureKind { closed_form, quadrature, tabulated };

inline const char* to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::closed_form: return "closed_form";
    case MeasureKind::quadrature: return "quadrature";
    case MeasureKind::tabulated: return "tabulated";
  }
  return "?";
}

/// Bookkeeping for quadrature-backed coefficients. The largest refinement
/// difference over all calls so far is tracked as the achieved error.
struct QuadratureInfo {
  double tol = 0.0;
  int order = kPanelOrder;
  std::shared_ptr<std::atomic<double>> max_error = std::make_shared<std::atomic<double>>(0.0);
  std::shared_ptr<std::atomic<int>> max_level = std::make_shared<std::atomic<int>>(0);

  void record(double err, int level) const {
    double cur = max_error->load();
    while (err > cur && !max_error->compare_exchange_weak(cur, err)) {
    }
    int lv = max_level->load();
    while (level > lv && !max_level->compare_exchange_weak(lv, level)) {
    }
  }
};

/// A finite measure on T^d through its Fourier coefficients
/// mu^(n) = int exp(-i<n,x>) dmu(x), so that int e_m dmu = mu^(-m).
class TorusMeasure {
 public:
  using Oracle = std::function<cplx(const LatticePoint&)>;

  TorusMeasure(int dim, double mass, Oracle coeff, MeasureKind kind, std::string name)
      : dim_(dim), mass_(mass), coeff_(std::move(coeff)), kind_(kind), name_(std::move(name)) {}

  int dim() const noexcept { return dim_; }
  double mass() const noexcept { return mass_; }
  MeasureKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }

  cplx operator()(const LatticePoint& n) const {
    if (n.dim() != dim_) throw std::invalid_argument("measure coefficient: dimension mismatch");
    return coeff_(n);
  }

  /// Decay exponent alpha with |mu^(n)|^2 <= C |n|^{-alpha}, when known.
  const std::optional<double>& decay_alpha() const noexcept { return alpha_; }
  TorusMeasure& set_decay_alpha(double alpha) {
    alpha_ = alpha;
    return *this;
  }

  const std::optional<QuadratureInfo>& quadrature_info() const noexcept { return quad_; }
  TorusMeasure& set_quadrature_info(QuadratureInfo q) {
    quad_ = std::move(q);
    return *this;
  }

  /// mu / mass(mu), a probability measure.
  TorusMeasure normalized() const {
    if (!(mass_ > 0.0)) throw std::domain_error("cannot normalize a measure with non-positive mass");
    const double inv = 1.0 / mass_;
    auto inner = coeff_;
    TorusMeasure out(dim_, 1.0, [inner, inv](const LatticePoint& n) { return inner(n) * inv; }, kind_,
                     name_ + "/mass");
    out.alpha_ = alpha_;
    out.quad_ = quad_;
    return out;
  }

  /// Memoizes coefficients behind a shared mutex. Values are deterministic,
  /// so concurrent fills of the same key agree.
  TorusMeasure cached() const {
    struct Cache {
      std::shared_mutex mu;
      std::unordered_map<LatticePoint, cplx, LatticePointHash> map;
    };
    auto cache = std::make_shared<Cache>();
    auto inner = coeff_;
    TorusMeasure out(
        dim_, mass_,
        [cache, inner](const LatticePoint& n) {
          {
            std::shared_lock lock(cache->mu);
            auto it = cache->map.find(n);
            if (it != cache->map.end()) return it->second;
          }
          const cplx v = inner(n);
          std::unique_lock lock(cache->mu);
          cache->map.emplace(n, v);
          return v;
        },
        kind_, name_);
    out.alpha_ = alpha_;
    out.quad_ = quad_;
    return out;
  }

 private:
  int dim_;
  double mass_;
  Oracle coeff_;
  MeasureKind kind_;
  std::string name_;
  std::optional<double> alpha_;
  std::optional<QuadratureInfo> quad_;
};

namespace detail {

inline double phase_dot(const LatticePoint& n, std::span<const double> c) {
  double s = 0.0;
  for (int i = 0; i < n.dim(); ++i) s += static_cast<double>(n[i]) * c[static_cast<std::size_t>(i)];
  return s;
}

inline cplx unit_phase(double phi) { return {std::cos(phi), -std::sin(phi)}; }  // exp(-i phi)

}  // namespace detail

/// Arclength on the circle |x - center| = r in T^2:
/// sigma^(n) = 2 pi r exp(-i<n,center>) J0(r |n|).
inline TorusMeasure circle_measure(std::array<double, 2> center, double r) {
  if (!(r > 0.0 && r < std::numbers::pi)) throw std::invalid_argument("circle radius must lie in (0, pi)");
  const double mass = 2.0 * std::numbers::pi * r;
  TorusMeasure m(
      2, mass,
      [center, r, mass](const LatticePoint& n) {
        return mass * detail::unit_phase(detail::phase_dot(n, center)) * bessel_j0(r * n.norm());
      },
      MeasureKind::closed_form, "circle");
  m.set_decay_alpha(1.0);
  return m;
}

/// Surface area on the sphere |x - center| = r in T^3:
/// sigma^(n) = 4 pi r^2 exp(-i<n,center>) sin(r|n|)/(r|n|).
inline TorusMeasure sphere_measure(std::array<double, 3> center, double r) {
  if (!(r > 0.0 && r < std::numbers::pi)) throw std::invalid_argument("sphere radius must lie in (0, pi)");
  const double mass = 4.0 * std::numbers::pi * r * r;
  TorusMeasure m(
      3, mass,
      [center, r, mass](const LatticePoint& n) {
        return mass * detail::unit_phase(detail::phase_dot(n, center)) * sinc(r * n.norm());
      },
      MeasureKind::closed_form, "sphere");
  m.set_decay_alpha(2.0);
  return m;
}

/// The normalized volume dx: mu^(n) = [n = 0].
inline TorusMeasure lebesgue_measure(int dim) {
  TorusMeasure m(dim, 1.0, [](const LatticePoint& n) { return n.is_zero() ? cplx(1.0) : cplx(0.0); },
                 MeasureKind::tabulated, "lebesgue");
  m.set_decay_alpha(std::numeric_limits<double>::infinity());
  return m;
}

/// Unit point mass at x0: mu^(n) = exp(-i<n,x0>).
inline TorusMeasure dirac_measure(std::vector<double> x0) {
  const int d = static_cast<int>(x0.size());
  TorusMeasure m(d, 1.0, [x0](const LatticePoint& n) { return detail::unit_phase(detail::phase_dot(n, x0)); },
                 MeasureKind::closed_form, "dirac");
  m.set_decay_alpha(0.0);
  return m;
}

/// Coefficients listed explicitly; unlisted frequencies are zero.
inline TorusMeasure tabulated_measure(int dim, double mass,
                                      std::unordered_map<LatticePoint, cplx, LatticePointHash> entries) {
  auto table = std::make_shared<const std::unordered_map<LatticePoint, cplx, LatticePointHash>>(std::move(entries));
  return TorusMeasure(
      dim, mass,
      [table](const LatticePoint& n) {
        auto it = table->find(n);
        return it == table->end() ? cplx(0.0) : it->second;
      },
      MeasureKind::tabulated, "tabulated");
}

// ---------------------------------------------------------------------------
// Parameterized hypersurfaces

/// A curve t -> gamma(t) in T^2 on [t0, t1] with two derivatives.
struct CurveParam {
  std::function<Vec3(double)> pos, d1, d2;
  double t0 = 0.0, t1 = 2.0 * std::numbers::pi;
  bool periodic = true;
};

/// A surface patch (u, v) -> gamma(u, v) in T^3 with first and second partials.
struct PatchParam {
  std::function<Vec3(double, double)> pos, du, dv, duu, duv, dvv;
  double u0 = 0.0, u1 = 1.0, v0 = 0.0, v1 = 1.0;
  bool periodic_u = false, periodic_v = false;
};

class ParamHypersurface {
 public:
  ParamHypersurface(std::string kind, CurveParam c) : dim_(2), kind_(std::move(kind)), param_(std::move(c)) {}
  ParamHypersurface(std::string kind, PatchParam p) : dim_(3), kind_(std::move(kind)), param_(std::move(p)) {}

  int dim() const noexcept { return dim_; }
  const std::string& kind() const noexcept { return kind_; }
  bool is_curve() const noexcept { return std::holds_alternative<CurveParam>(param_); }
  const CurveParam& curve() const { return std::get<CurveParam>(param_); }
  const PatchParam& patch() const { return std::get<PatchParam>(param_); }

 private:
  int dim_;
  std::string kind_;
  std::variant<CurveParam, PatchParam> param_;
};

inline ParamHypersurface ellipse_curve(std::array<double, 2> center, double a, double b) {
  if (!(a > 0.0 && b > 0.0 && a < std::numbers::pi && b < std::numbers::pi)) {
    throw std::invalid_argument("ellipse semi-axes must lie in (0, pi)");
  }
  CurveParam c;
  c.pos = [=](double t) { return Vec3{center[0] + a * std::cos(t), center[1] + b * std::sin(t), 0.0}; };
  c.d1 = [=](double t) { return Vec3{-a * std::sin(t), b * std::cos(t), 0.0}; };
  c.d2 = [=](double t) { return Vec3{-a * std::cos(t), -b * std::sin(t), 0.0}; };
  return ParamHypersurface(a == b ? "circle" : "ellipse", std::move(c));
}

inline ParamHypersurface circle_curve(std::array<double, 2> center, double r) { return ellipse_curve(center, r, r); }

/// The horizontal closed geodesic x_2 = height: a flat one-dimensional subtorus.
inline ParamHypersurface flat_segment(double height = 0.0) {
  CurveParam c;
  c.pos = [=](double t) { return Vec3{t, height, 0.0}; };
  c.d1 = [](double) { return Vec3{1.0, 0.0, 0.0}; };
  c.d2 = [](double) { return Vec3{0.0, 0.0, 0.0}; };
  return ParamHypersurface("segment", std::move(c));
}

/// Closed curve through equally spaced samples, by trigonometric interpolation.
inline ParamHypersurface sampled_curve(const std::vector<std::array<double, 2>>& samples) {
  const int n = static_cast<int>(samples.size());
  if (n < 5) throw std::invalid_argument("sampled curve needs at least 5 samples");
  // real DFT coefficients: x(t) = sum_m (A_m cos mt + B_m sin mt)
  const int top = (n - 1) / 2;
  std::vector<std::array<double, 2>> A(static_cast<std::size_t>(top + 1)), B(static_cast<std::size_t>(top + 1));
  for (int m = 0; m <= top; ++m) {
    for (int axis = 0; axis < 2; ++axis) {
      double ca = 0.0, sb = 0.0;
      for (int j = 0; j < n; ++j) {
        const double t = 2.0 * std::numbers::pi * j / n;
        ca += samples[static_cast<std::size_t>(j)][static_cast<std::size_t>(axis)] * std::cos(m * t);
        sb += samples[static_cast<std::size_t>(j)][static_cast<std::size_t>(axis)] * std::sin(m * t);
      }
      A[static_cast<std::size_t>(m)][static_cast<std::size_t>(axis)] = (m == 0 ? 1.0 : 2.0) * ca / n;
      B[static_cast<std::size_t>(m)][static_cast<std::size_t>(axis)] = 2.0 * sb / n;
    }
  }
  auto eval = [A, B, top](double t, int deriv) {
    Vec3 out{0.0, 0.0, 0.0};
    for (int m = 0; m <= top; ++m) {
      const double c = std::cos(m * t), s = std::sin(m * t);
      for (int axis = 0; axis < 2; ++axis) {
        const double a = A[static_cast<std::size_t>(m)][static_cast<std::size_t>(axis)];
        const double b = B[static_cast<std::size_t>(m)][static_cast<std::size_t>(axis)];
        double v = 0.0;
        switch (deriv) {
          case 0: v = a * c + b * s; break;
          case 1: v = m * (-a * s + b * c); break;
          default: v = -m * m * (a * c + b * s); break;
        }
        out[static_cast<std::size_t>(axis)] += v;
      }
    }
    return out;
  };
  CurveParam c;
  c.pos = [eval](double t) { return eval(t, 0); };
  c.d1 = [eval](double t) { return eval(t, 1); };
  c.d2 = [eval](double t) { return eval(t, 2); };
  return ParamHypersurface("samples", std::move(c));
}

/// Round sphere of radius r in spherical coordinates (theta, phi).
inline ParamHypersurface sphere_surface(std::array<double, 3> center, double r) {
  if (!(r > 0.0 && r < std::numbers::pi)) throw std::invalid_argument("sphere radius must lie in (0, pi)");
  PatchParam p;
  p.u0 = 0.0;
  p.u1 = std::numbers::pi;
  p.v0 = 0.0;
  p.v1 = 2.0 * std::numbers::pi;
  p.periodic_v = true;
  using std::cos, std::sin;
  p.pos = [=](double u, double v) {
    return Vec3{center[0] + r * sin(u) * cos(v), center[1] + r * sin(u) * sin(v), center[2] + r * cos(u)};
  };
  p.du = [=](double u, double v) { return Vec3{r * cos(u) * cos(v), r * cos(u) * sin(v), -r * sin(u)}; };
  p.dv = [=](double u, double v) { return Vec3{-r * sin(u) * sin(v), r * sin(u) * cos(v), 0.0}; };
  p.duu = [=](double u, double v) { return Vec3{-r * sin(u) * cos(v), -r * sin(u) * sin(v), -r * cos(u)}; };
  p.duv = [=](double u, double v) { return Vec3{-r * cos(u) * sin(v), r * cos(u) * cos(v), 0.0}; };
  p.dvv = [=](double u, double v) { return Vec3{-r * sin(u) * cos(v), -r * sin(u) * sin(v), 0.0}; };
  return ParamHypersurface("sphere", std::move(p));
}

/// The flat two-dimensional subtorus x_3 = height in T^3.
inline ParamHypersurface flat_plane(double height = 0.0) {
  PatchParam p;
  p.u1 = p.v1 = 2.0 * std::numbers::pi;
  p.periodic_u = p.periodic_v = true;
  p.pos = [=](double u, double v) { return Vec3{u, v, height}; };
  p.du = [](double, double) { return Vec3{1.0, 0.0, 0.0}; };
  p.dv = [](double, double) { return Vec3{0.0, 1.0, 0.0}; };
  p.duu = p.duv = p.dvv = [](double, double) { return Vec3{0.0, 0.0, 0.0}; };
  return ParamHypersurface("plane", std::move(p));
}

namespace detail {

inline double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
inline double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross3(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double phase3(const LatticePoint& n, const Vec3& x) {
  double s = 0.0;
  for (int i = 0; i < n.dim(); ++i) s += static_cast<double>(n[i]) * x[static_cast<std::size_t>(i)];
  return s;
}

inline constexpr int kMaxRefinement = 1 << 16;

inline int pow2_at_least(double x) {
  int p = 1;
  while (p < x && p < (1 << 28)) p *= 2;
  return p;
}

// Largest |gamma'| over a sample grid, padded; bounds the phase speed
// |d/dt <n, gamma(t)>| <= |n| * speed.
inline double curve_speed_bound(const CurveParam& c) {
  double s = 0.0;
  for (int i = 0; i <= 256; ++i) s = std::max(s, norm3(c.d1(c.t0 + (c.t1 - c.t0) * i / 256.0)));
  return 1.25 * s;
}

inline std::array<double, 2> patch_speed_bound(const PatchParam& p) {
  std::array<double, 2> s{0.0, 0.0};
  for (int i = 0; i <= 64; ++i) {
    for (int j = 0; j <= 64; ++j) {
      const double u = p.u0 + (p.u1 - p.u0) * i / 64.0, v = p.v0 + (p.v1 - p.v0) * j / 64.0;
      s[0] = std::max(s[0], norm3(p.du(u, v)));
      s[1] = std::max(s[1], norm3(p.dv(u, v)));
    }
  }
  return {1.25 * s[0], 1.25 * s[1]};
}

// Starting resolution for a phase sweeping `radians` over the parameter
// interval, so the first two levels cannot alias onto each other: trapezoid
// points beyond twice the number of oscillations, or one 10-point panel per
// ~4 radians.
inline double periodic_points_needed(double radians) { return radians / std::numbers::pi + 16.0; }
inline double panels_needed(double radians) { return std::max(2.0, radians / 4.0); }

inline QuadResult curve_coefficient(const CurveParam& c, const LatticePoint& n, double tol, double speed) {
  auto eval = [&](int level) {
    const auto rule = Rule1D::make(c.t0, c.t1, level, c.periodic);
    cplx s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = rule.nodes[i];
      s += rule.weights[i] * norm3(c.d1(t)) * unit_phase(phase3(n, c.pos(t)));
    }
    return s;
  };
  const double radians = n.norm() * speed * (c.t1 - c.t0);
  const int start = pow2_at_least(c.periodic ? periodic_points_needed(radians) : panels_needed(radians));
  return refine_until(eval, start, std::max(kMaxRefinement, 8 * start), tol);
}

inline QuadResult patch_coefficient(const PatchParam& p, const LatticePoint& n, double tol,
                                    std::array<double, 2> speed) {
  auto eval = [&](int level) {
    const auto ru = Rule1D::make(p.u0, p.u1, p.periodic_u ? 4 * level : level, p.periodic_u);
    const auto rv = Rule1D::make(p.v0, p.v1, p.periodic_v ? 4 * level : level, p.periodic_v);
    cplx s = 0.0;
    for (std::size_t i = 0; i < ru.nodes.size(); ++i) {
      for (std::size_t j = 0; j < rv.nodes.size(); ++j) {
        const double u = ru.nodes[i], v = rv.nodes[j];
        const double area = norm3(cross3(p.du(u, v), p.dv(u, v)));
        s += ru.weights[i] * rv.weights[j] * area * unit_phase(phase3(n, p.pos(u, v)));
      }
    }
    return s;
  };
  auto need = [&](double len, double sp, bool periodic) {
    const double radians = n.norm() * sp * len;
    return periodic ? periodic_points_needed(radians) / 4.0 : panels_needed(radians);
  };
  const int start = pow2_at_least(std::max({4.0, need(p.u1 - p.u0, speed[0], p.periodic_u),
                                            need(p.v1 - p.v0, speed[1], p.periodic_v)}));
  return refine_until(eval, start, std::max(1 << 10, 8 * start), tol);
}

}  // namespace detail

/// Induced hypersurface measure of sigma, with coefficients computed by
/// quadrature refined by doubling until successive results differ by < tol.
/// Closed curves use the periodic trapezoid rule; open directions use
/// composite Gauss-Legendre panels.
inline TorusMeasure quadrature_measure(const ParamHypersurface& sigma, double tol) {
  if (!(tol >= 1e-12)) throw std::invalid_argument("quadrature tolerance must be >= 1e-12");
  QuadratureInfo info;
  info.tol = tol;
  auto surf = std::make_shared<const ParamHypersurface>(sigma);
  const double curve_speed = sigma.is_curve() ? detail::curve_speed_bound(sigma.curve()) : 0.0;
  const auto patch_speed = sigma.is_curve() ? std::array<double, 2>{} : detail::patch_speed_bound(sigma.patch());
  auto oracle = [surf, tol, info, curve_speed, patch_speed](const LatticePoint& n) {
    const auto res = surf->is_curve() ? detail::curve_coefficient(surf->curve(), n, tol, curve_speed)
                                      : detail::patch_coefficient(surf->patch(), n, tol, patch_speed);
    info.record(res.error, res.level);
    return res.value;
  };
  const double mass = oracle(LatticePoint::zero(sigma.dim())).real();
  TorusMeasure m(sigma.dim(), mass, oracle, MeasureKind::quadrature, sigma.kind());
  m.set_quadrature_info(info);
  return m;
}

/// Smallest |curvature| over a midpoint sample grid: signed curvature for
/// curves, the smaller principal curvature for surfaces.
inline double curvature_min(const ParamHypersurface& sigma, int samples) {
  if (samples < 1) throw std::invalid_argument("curvature_min needs at least one sample");
  double best = std::numeric_limits<double>::infinity();
  if (sigma.is_curve()) {
    const auto& c = sigma.curve();
    for (int s = 0; s < samples; ++s) {
      const double t = c.t0 + (c.t1 - c.t0) * (s + 0.5) / samples;
      const Vec3 g1 = c.d1(t), g2 = c.d2(t);
      const double speed = detail::norm3(g1);
      if (speed < 1e-12) throw std::domain_error("degenerate parameterization: |gamma'| vanishes");
      const double k = (g1[0] * g2[1] - g1[1] * g2[0]) / (speed * speed * speed);
      best = std::min(best, std::fabs(k));
    }
    return best;
  }
  const auto& p = sigma.patch();
  for (int a = 0; a < samples; ++a) {
    for (int b = 0; b < samples; ++b) {
      const double u = p.u0 + (p.u1 - p.u0) * (a + 0.5) / samples;
      const double v = p.v0 + (p.v1 - p.v0) * (b + 0.5) / samples;
      const Vec3 gu = p.du(u, v), gv = p.dv(u, v);
      const Vec3 nrm = detail::cross3(gu, gv);
      const double area = detail::norm3(nrm);
      if (area < 1e-12) throw std::domain_error("degenerate parameterization: |gamma_u x gamma_v| vanishes");
      const Vec3 N{nrm[0] / area, nrm[1] / area, nrm[2] / area};
      // second fundamental form in the orthonormal frame e1 = gu/|gu|, e2 perpendicular:
      // gu = al e1, gv = be e1 + ga e2; then the principal curvatures are the
      // eigenvalues of the symmetric matrix [[A, B], [B, C]].
      const double al = detail::norm3(gu);
      const double be = detail::dot3(gv, gu) / al;
      const double ga = area / al;
      const double L = detail::dot3(p.duu(u, v), N), M = detail::dot3(p.duv(u, v), N),
                   Nn = detail::dot3(p.dvv(u, v), N);
      const double A = L / (al * al);
      const double B = (M - al * be * A) / (al * ga);
      const double C = (Nn - be * be * A - 2.0 * be * ga * B) / (ga * ga);
      const double mid = 0.5 * (A + C), rad = std::hypot(0.5 * (A - C), B);
      const double k1 = mid + rad, k2 = mid - rad;
      best = std::min({best, std::fabs(k1), std::fabs(k2)});
    }
  }
  return best;
}

/// Sampled embedding diagnostics: smallest speed and smallest distance on the
/// torus between samples that are not parameter neighbours.
struct EmbeddingCheck {
  double min_speed = 0.0;
  double min_spacing = 0.0;
  bool ok = false;
};

inline EmbeddingCheck check_embedding(const ParamHypersurface& sigma, int samples = 256) {
  EmbeddingCheck out{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), false};
  if (!sigma.is_curve()) {
    const auto& p = sigma.patch();
    for (int a = 0; a < samples; ++a) {
      for (int b = 0; b < samples; ++b) {
        const double u = p.u0 + (p.u1 - p.u0) * (a + 0.5) / samples;
        const double v = p.v0 + (p.v1 - p.v0) * (b + 0.5) / samples;
        out.min_speed = std::min(out.min_speed, detail::norm3(detail::cross3(p.du(u, v), p.dv(u, v))));
      }
    }
    out.min_spacing = 0.0;
    out.ok = out.min_speed > 1e-9;
    return out;
  }
  const auto& c = sigma.curve();
  std::vector<Vec3> pts;
  for (int s = 0; s < samples; ++s) {
    const double t = c.t0 + (c.t1 - c.t0) * (s + 0.5) / samples;
    pts.push_back(c.pos(t));
    out.min_speed = std::min(out.min_speed, detail::norm3(c.d1(t)));
  }
  const double two_pi = 2.0 * std::numbers::pi;
  auto torus_gap = [&](double x) {
    x = std::fmod(std::fabs(x), two_pi);
    return std::min(x, two_pi - x);
  };
  for (int i = 0; i < samples; ++i) {
    for (int j = i + 2; j < samples; ++j) {
      if (c.periodic && i == 0 && j == samples - 1) continue;
      const auto& a = pts[static_cast<std::size_t>(i)];
      const auto& b = pts[static_cast<std::size_t>(j)];
      out.min_spacing = std::min(out.min_spacing, std::hypot(torus_gap(a[0] - b[0]), torus_gap(a[1] - b[1])));
    }
  }
  out.ok = out.min_speed > 1e-9 && out.min_spacing > 1e-9;
  return out;
}

struct DecayFit {
  double alpha = 0.0;          // fit of log sup|mu^|^2 against -alpha log|n|
  double constant = 0.0;       // envelope C
  double alpha_shifted = 0.0;  // same fit against -alpha log(1 + |n|)
  double constant_shifted = 0.0;
  int shells_used = 0;
};

/// Least-squares decay exponent from the per-shell suprema of |mu^(n)|^2
/// over nonempty shells 1 <= E <= E_max. Shells where the supremum vanishes
/// are skipped.
inline DecayFit decay_fit(const TorusMeasure& mu, std::int64_t E_max, unsigned threads = 0) {
  if (E_max < 16) throw std::invalid_argument("decay_fit needs E_max >= 16");
  const int d = mu.dim();
  auto sups = parallel_map(
      static_cast<std::size_t>(E_max),
      [&](std::size_t i) {
        const auto shell = enumerate_shell(d, static_cast<std::int64_t>(i) + 1);
        double s = -1.0;
        for (const auto& n : shell.points()) s = std::max(s, std::norm(mu(n)));
        return s;
      },
      threads);
  auto fit = [&](bool shifted, double& alpha, double& constant) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t i = 0; i < sups.size(); ++i) {
      if (!(sups[i] > 0.0)) continue;
      const double r = std::sqrt(static_cast<double>(i + 1));
      const double x = -std::log(shifted ? 1.0 + r : r);
      const double y = std::log(sups[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++m;
    }
    if (m < 3) throw std::runtime_error("decay_fit: too few shells with nonzero coefficients");
    const double denom = m * sxx - sx * sx;
    alpha = (m * sxy - sx * sy) / denom;
    constant = std::exp((sy - alpha * sx) / m);
    return m;
  };
  DecayFit out;
  out.shells_used = fit(false, out.alpha, out.constant);
  fit(true, out.alpha_shifted, out.constant_shifted);
  return out;
}

/// int a(x) exp(-i<n,x>) dmu = sum_p a_p mu^(n - p).
inline cplx convolve_observable(const Observable& a, const TorusMeasure& mu, const LatticePoint& n) {
  if (a.dim() != mu.dim() || n.dim() != mu.dim()) throw std::invalid_argument("convolve_observable: dimension mismatch");
  cplx s = 0.0;
  for (const auto& [p, v] : a.coeffs()) s += v * mu(n - p);
  return s;
}

/// W_{kl} = int a e_{k-l} dmu = convolve_observable(a, mu, l - k), row-major
/// over the shell ordering.
inline std::vector<cplx> measure_pairing_matrix(const Observable& a, const TorusMeasure& mu, const LatticeShell& shell) {
  const std::size_t r = shell.size();
  std::vector<cplx> W(r * r);
  for (std::size_t k = 0; k < r; ++k) {
    for (std::size_t l = 0; l < r; ++l) W[k * r + l] = convolve_observable(a, mu, shell[l] - shell[k]);
  }
  return W;
}

/// sum_{k,l} c_k conj(c_l) W_{kl}
inline cplx measure_quadratic_form(std::span<const cplx> W, std::span<const cplx> c) {
  const std::size_t r = c.size();
  cplx v = 0.0;
  for (std::size_t k = 0; k < r; ++k) {
    if (c[k] == cplx(0.0)) continue;
    cplx inner = 0.0;
    for (std::size_t l = 0; l < r; ++l) inner += std::conj(c[l]) * W[k * r + l];
    v += c[k] * inner;
  }
  return v;
}

}  // namespace torusqe
