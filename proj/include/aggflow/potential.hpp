#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "aggflow/convex_set.hpp"
#include "aggflow/vec.hpp"

namespace aggflow {

// Absolute tolerance deciding whether a difference vector sits on a kink of
// the kernel. Particle differences never hit kinks exactly in floating point,
// while the worked configurations place atoms exactly on them.
inline constexpr double kKinkTol = 1e-9;

enum class PotentialForm { kGeneral, kDifference, kRadial };

namespace detail {

// Profile w(r) on r >= 0 of a kernel W(z) = w(|z|). Supplies values, slopes,
// kink metadata and the proximal value used by the Moreau envelope.
class RadialProfile {
 public:
  virtual ~RadialProfile() = default;

  virtual double value(double r) const = 0;
  // derivative at smooth r > 0
  virtual double slope(double r) const = 0;
  virtual const std::vector<double>& kinks() const {
    static const std::vector<double> none;
    return none;
  }
  // (left, right) slopes at a kink radius
  virtual std::pair<double, double> one_sided(double) const {
    throw std::logic_error("RadialProfile::one_sided: profile has no kinks");
  }
  virtual double slope_at_zero() const = 0;
  // inf over r > 0 of the minimal-norm slope (signed); the Omega of the
  // collapse estimate for convex profiles
  virtual double min_slope() const = 0;

  // W_n restricted to the ray through z: inf_{s>=0} w(s) + (n/2)(r-s)^2
  virtual double prox_value(double r, double n) const { return numeric_prox(r, n); }

 protected:
  // golden-section bracket shrink plus a short Newton polish away from kinks
  double numeric_prox(double r, double n) const {
    const auto g = [&](double s) { return value(s) + 0.5 * n * (r - s) * (r - s); };
    double hi = std::max(1.0, 2.0 * r);
    for (int k = 0; k < 200 && g(2.0 * hi) < g(hi); ++k) hi *= 2.0;
    double a = 0.0, b = 2.0 * hi;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = g(x1), f2 = g(x2);
    while (b - a > 1e-12 * (1.0 + b)) {
      if (f1 > f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = g(x2);
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = g(x1);
      }
    }
    double s = 0.5 * (a + b);
    for (int it = 0; it < 4; ++it) {
      bool near_kink = s < 1e-5;
      for (double rk : kinks()) near_kink = near_kink || std::abs(s - rk) < 1e-5;
      if (near_kink) break;
      const double h = 1e-7 * (1.0 + s);
      const double g1 = slope(s) - n * (r - s);
      const double g2 = (slope(s + h) - slope(s - h)) / (2.0 * h) + n;
      if (!(g2 > 0.0)) break;
      const double s_new = s - g1 / g2;
      if (!(s_new >= 0.0) || std::abs(s_new - s) > (b - a)) break;
      s = s_new;
    }
    return g(std::max(0.0, s));
  }
};

class PowerLawProfile final : public RadialProfile {
 public:
  explicit PowerLawProfile(double alpha) : alpha_(alpha) {}
  double value(double r) const override { return std::pow(r, alpha_); }
  double slope(double r) const override { return alpha_ * std::pow(r, alpha_ - 1.0); }
  double slope_at_zero() const override { return alpha_ == 1.0 ? 1.0 : 0.0; }
  double min_slope() const override { return alpha_ == 1.0 ? 1.0 : 0.0; }
  double prox_value(double r, double n) const override {
    if (alpha_ == 1.0) return r <= 1.0 / n ? 0.5 * n * r * r : r - 0.5 / n;  // Huber
    if (alpha_ == 2.0) return n * r * r / (n + 2.0);
    return numeric_prox(r, n);
  }

 private:
  double alpha_;
};

// w(r) = |r^2 - 1| / 2, the Lipschitz double well
class DoubleWellProfile final : public RadialProfile {
 public:
  double value(double r) const override { return 0.5 * std::abs(r * r - 1.0); }
  double slope(double r) const override { return r > 1.0 ? r : -r; }
  const std::vector<double>& kinks() const override {
    static const std::vector<double> ks{1.0};
    return ks;
  }
  std::pair<double, double> one_sided(double) const override { return {-1.0, 1.0}; }
  double slope_at_zero() const override { return 0.0; }
  double min_slope() const override { return -1.0; }
  double prox_value(double r, double n) const override {
    // stationary branches of w(s) + (n/2)(r-s)^2 glued at the kink s = 1
    if (r <= (n - 1.0) / n) return 0.5 - n * r * r / (2.0 * (n - 1.0));
    if (r >= (n + 1.0) / n) return n * r * r / (2.0 * (n + 1.0)) - 0.5;
    return 0.5 * n * (r - 1.0) * (r - 1.0);
  }
};

// w(r) = (r^2 - 1)^2 / 2, the smooth double well
class SmoothDoubleWellProfile final : public RadialProfile {
 public:
  double value(double r) const override {
    const double q = r * r - 1.0;
    return 0.5 * q * q;
  }
  double slope(double r) const override { return 2.0 * r * (r * r - 1.0); }
  double slope_at_zero() const override { return 0.0; }
  double min_slope() const override { return -4.0 / (3.0 * std::sqrt(3.0)); }
  double prox_value(double r, double n) const override {
    // unique root of 2 v^3 + (n-2) v - n r = 0 (strictly convex for n > 2)
    const double p = 0.5 * (n - 2.0);
    const double q = -0.5 * n * r;
    const double disc = 0.25 * q * q + p * p * p / 27.0;
    const double sq = std::sqrt(disc);
    const double v = std::cbrt(-0.5 * q + sq) + std::cbrt(-0.5 * q - sq);
    return value(v) + 0.5 * n * (r - v) * (r - v);
  }
};

class PiecewiseLinearProfile final : public RadialProfile {
 public:
  PiecewiseLinearProfile(std::vector<double> breaks, std::vector<double> slopes)
      : breaks_(std::move(breaks)), slopes_(std::move(slopes)) {
    if (slopes_.size() != breaks_.size() + 1)
      throw std::invalid_argument("piecewise profile: need one more slope than breakpoints");
    if (slopes_.front() < 0.0)
      throw std::invalid_argument("piecewise profile: slope at the origin must be >= 0");
    for (std::size_t k = 0; k + 1 < slopes_.size(); ++k)
      if (slopes_[k + 1] < slopes_[k])
        throw std::invalid_argument("piecewise profile: slopes must be non-decreasing (convexity)");
    double prev = 0.0;
    for (double b : breaks_) {
      if (b <= prev) throw std::invalid_argument("piecewise profile: breakpoints must be positive and increasing");
      prev = b;
    }
    vals_.resize(breaks_.size());
    double v = 0.0, r0 = 0.0;
    for (std::size_t k = 0; k < breaks_.size(); ++k) {
      v += slopes_[k] * (breaks_[k] - r0);
      vals_[k] = v;
      r0 = breaks_[k];
    }
    for (std::size_t k = 0; k + 1 < slopes_.size(); ++k)
      if (slopes_[k + 1] > slopes_[k]) kinks_.push_back(breaks_[k]);
  }

  double value(double r) const override {
    const std::size_t k = seg(r);
    const double r0 = k == 0 ? 0.0 : breaks_[k - 1];
    const double v0 = k == 0 ? 0.0 : vals_[k - 1];
    return v0 + slopes_[k] * (r - r0);
  }
  double slope(double r) const override { return slopes_[seg(r)]; }
  const std::vector<double>& kinks() const override { return kinks_; }
  std::pair<double, double> one_sided(double rk) const override {
    for (std::size_t k = 0; k < breaks_.size(); ++k)
      if (breaks_[k] == rk) return {slopes_[k], slopes_[k + 1]};
    throw std::invalid_argument("piecewise profile: not a breakpoint");
  }
  double slope_at_zero() const override { return slopes_.front(); }
  double min_slope() const override { return slopes_.front(); }
  double top_slope() const { return slopes_.back(); }

 private:
  std::size_t seg(double r) const {
    std::size_t k = 0;
    while (k < breaks_.size() && r > breaks_[k]) ++k;
    return k;
  }
  std::vector<double> breaks_, slopes_, vals_, kinks_;
};

class PotentialImpl {
 public:
  virtual ~PotentialImpl() = default;
  virtual double eval_diff(const Vec& z) const = 0;
  virtual double eval_pair(const Vec& x, const Vec& y) const { return eval_diff(x - y); }
  virtual ConvexSet subdiff(const Vec& z, double kink_tol) const = 0;
  virtual double moreau(const Vec& z, double n) const = 0;
  virtual const RadialProfile* profile() const { return nullptr; }
};

class RadialImpl final : public PotentialImpl {
 public:
  RadialImpl(std::shared_ptr<const RadialProfile> prof, int dim) : prof_(std::move(prof)), dim_(dim) {}

  double eval_diff(const Vec& z) const override { return prof_->value(norm(z)); }

  ConvexSet subdiff(const Vec& z, double kink_tol) const override {
    const double r = norm(z);
    if (r <= kink_tol) {
      // In 1D the set at the origin is the slope interval; in higher
      // dimension it is a ball, which we represent by its canonical element 0
      // (the value forced on coincident pairs by antisymmetry).
      if (dim_ == 1) {
        const double s0 = prof_->slope_at_zero();
        if (s0 <= 0.0) return ConvexSet::singleton(Vec::zero(1));
        return ConvexSet::segment(Vec{-s0}, Vec{s0});
      }
      return ConvexSet::singleton(Vec::zero(dim_));
    }
    const Vec u = (1.0 / r) * z;
    for (double rk : prof_->kinks()) {
      if (std::abs(r - rk) <= kink_tol) {
        const auto [sl, sr] = prof_->one_sided(rk);
        return ConvexSet::segment(sl * u, sr * u);
      }
    }
    return ConvexSet::singleton(prof_->slope(r) * u);
  }

  double moreau(const Vec& z, double n) const override { return prof_->prox_value(norm(z), n); }

  const RadialProfile* profile() const override { return prof_.get(); }

 private:
  std::shared_ptr<const RadialProfile> prof_;
  int dim_;
};

// W(z) = f(||z||_inf) with f(r) = r for r <= 1 and f(r) = 1 + theta (r - 1)
// beyond; level sets are squares, the graph a pyramid with a change of slope.
class PyramidImpl final : public PotentialImpl {
 public:
  explicit PyramidImpl(double theta) : theta_(theta) {}

  double eval_diff(const Vec& z) const override {
    const double r = std::max(std::abs(z[0]), std::abs(z[1]));
    return r <= 1.0 ? r : 1.0 + theta_ * (r - 1.0);
  }

  ConvexSet subdiff(const Vec& z, double kink_tol) const override {
    const double ax = std::abs(z[0]), ay = std::abs(z[1]);
    const double r = std::max(ax, ay);
    if (r <= kink_tol) {
      // subdifferential of ||.||_inf at the origin: unit cross-polytope
      return ConvexSet::polygon({Vec{1.0, 0.0}, Vec{0.0, 1.0}, Vec{-1.0, 0.0}, Vec{0.0, -1.0}});
    }
    const bool radius_kink = std::abs(r - 1.0) <= kink_tol;
    const bool corner = std::abs(ax - ay) <= kink_tol;
    std::vector<double> slopes = radius_kink ? std::vector<double>{1.0, theta_}
                                             : std::vector<double>{r < 1.0 ? 1.0 : theta_};
    std::vector<Vec> dirs;
    if (corner || ax >= ay) dirs.push_back(Vec{z[0] >= 0.0 ? 1.0 : -1.0, 0.0});
    if (corner || ay > ax) dirs.push_back(Vec{0.0, z[1] >= 0.0 ? 1.0 : -1.0});

    std::vector<Vec> pts;
    for (const Vec& d : dirs)
      for (double s : slopes) pts.push_back(s * d);
    if (pts.size() == 1) return ConvexSet::singleton(pts[0]);
    if (pts.size() == 2) return ConvexSet::segment(pts[0], pts[1]);
    // four limiting gradients: order counter-clockwise around their centroid
    Vec c = Vec::zero(2);
    for (const Vec& p : pts) c += 0.25 * p;
    std::sort(pts.begin(), pts.end(), [&](const Vec& a, const Vec& b) {
      return std::atan2(a[1] - c[1], a[0] - c[0]) < std::atan2(b[1] - c[1], b[0] - c[0]);
    });
    return ConvexSet::polygon(pts);
  }

  double moreau(const Vec& z, double n) const override {
    // Reduce to the fundamental cone z1 >= z2 >= 0; the prox stays there.
    double z1 = std::abs(z[0]), z2 = std::abs(z[1]);
    if (z1 < z2) std::swap(z1, z2);
    const auto f = [&](double p) { return p <= 1.0 ? p : 1.0 + theta_ * (p - 1.0); };
    // h(p) = f(p) + (n/2) (z1-p)^2 + (n/2) (z2 - min(z2,p))^2, piecewise
    // quadratic in the dominant coordinate p of the prox point
    const auto h = [&](double p) {
      const double q = std::min(z2, p);
      return f(p) + 0.5 * n * ((z1 - p) * (z1 - p) + (z2 - q) * (z2 - q));
    };
    double best = h(0.0);
    const auto consider = [&](double lo, double hi, double vertex) {
      if (lo > hi) return;
      const double p = std::clamp(vertex, lo, hi);
      best = std::min(best, h(p));
      best = std::min(best, h(lo));
      best = std::min(best, h(hi));
    };
    const double big = z1 + theta_ / n + 1.0;
    // p <= min(z2,1): both coordinates move, slope 1
    consider(0.0, std::min(z2, 1.0), (n * (z1 + z2) - 1.0) / (2.0 * n));
    // 1 <= p <= z2: both coordinates move, slope theta
    if (z2 > 1.0) consider(1.0, z2, (n * (z1 + z2) - theta_) / (2.0 * n));
    // z2 <= p <= 1: only the dominant coordinate moves, slope 1
    if (z2 <= 1.0) consider(z2, 1.0, z1 - 1.0 / n);
    // p >= max(z2,1): slope theta
    consider(std::max(z2, 1.0), big, z1 - theta_ / n);
    return best;
  }

 private:
  double theta_;
};

class GeneralImpl final : public PotentialImpl {
 public:
  explicit GeneralImpl(std::function<double(const Vec&, const Vec&)> kernel) : kernel_(std::move(kernel)) {}
  double eval_pair(const Vec& x, const Vec& y) const override { return kernel_(x, y); }
  double eval_diff(const Vec&) const override {
    throw std::domain_error("general-form potential has no difference reduction");
  }
  ConvexSet subdiff(const Vec&, double) const override {
    throw std::domain_error("general-form potential has no analytic subdifferential");
  }
  double moreau(const Vec&, double) const override {
    throw std::domain_error("general-form potential has no analytic Moreau envelope");
  }

 private:
  std::function<double(const Vec&, const Vec&)> kernel_;
};

class CustomRadialProfile final : public RadialProfile {
 public:
  CustomRadialProfile(std::function<double(double)> w, std::function<double(double)> dw,
                      std::vector<double> kinks)
      : w_(std::move(w)), dw_(std::move(dw)), kinks_(std::move(kinks)) {}
  double value(double r) const override { return w_(r); }
  double slope(double r) const override { return dw_(r); }
  const std::vector<double>& kinks() const override { return kinks_; }
  std::pair<double, double> one_sided(double rk) const override {
    const double h = 1e-7 * (1.0 + rk);
    return {dw_(rk - h), dw_(rk + h)};
  }
  double slope_at_zero() const override { return dw_(1e-12); }
  double min_slope() const override {
    double m = slope_at_zero();
    for (double r = 1e-3; r < 20.0; r *= 1.05) m = std::min(m, dw_(r));
    return m;
  }

 private:
  std::function<double(double)> w_, dw_;
  std::vector<double> kinks_;
};

}  // namespace detail

// Interaction kernel descriptor. lambda is the convexity modulus of the
// kernel as a function of the difference variable (the modulus that enters
// the pointwise subgradient inequality and the contraction rate); the
// bivariate map (x,y) -> W(x-y) satisfies the product-space convexity test
// with modulus min(0, 2 lambda), exposed as pair_lambda().
class Potential {
 public:
  double eval(const Vec& x, const Vec& y) const {
    require_dim(x, dim_, "Potential::eval");
    require_dim(y, dim_, "Potential::eval");
    return form_ == PotentialForm::kGeneral ? impl_->eval_pair(x, y) : impl_->eval_diff(x - y);
  }

  double eval_diff(const Vec& z) const {
    require_difference("Potential::eval_diff");
    require_dim(z, dim_, "Potential::eval_diff");
    return impl_->eval_diff(z);
  }

  ConvexSet subdiff(const Vec& z, double kink_tol = kKinkTol) const {
    require_difference("Potential::subdiff");
    require_dim(z, dim_, "Potential::subdiff");
    return impl_->subdiff(z, kink_tol);
  }

  Vec min_norm_subgrad(const Vec& z) const {
    require_difference("Potential::min_norm_subgrad");
    require_dim(z, dim_, "Potential::min_norm_subgrad");
    if (norm(z) <= kKinkTol) return Vec::zero(dim_);  // eta(0) = 0 by antisymmetry
    return impl_->subdiff(z, kKinkTol).min_norm();
  }

  // W_n(z) = inf_v W(v) + (n/2)|z-v|^2; defined for n above the threshold
  // 4 max(-lambda, 0) that keeps the regularised kernel bounded below.
  double moreau_envelope(const Vec& z, double n) const {
    require_difference("Potential::moreau_envelope");
    require_dim(z, dim_, "Potential::moreau_envelope");
    if (!(n > moreau_threshold()))
      throw std::domain_error("Potential::moreau_envelope: n below validity threshold");
    return impl_->moreau(z, n);
  }

  double moreau_threshold() const { return std::max(4.0 * std::max(-lambda_, 0.0), 0.0); }

  PotentialForm form() const { return form_; }
  int dimension() const { return dim_; }
  double lambda() const { return lambda_; }
  // modulus governing the measure-level inequalities and the contraction rate
  double geodesic_lambda() const { return std::min(0.0, lambda_); }
  // modulus for the convexity test on the product space R^d x R^d
  double pair_lambda() const {
    return form_ == PotentialForm::kGeneral ? lambda_ : std::min(0.0, 2.0 * lambda_);
  }
  double growth_constant() const { return growth_; }
  // K with W(z) >= -K(1 + |z|^2); built from the centred subgradient bound
  double lower_bound_K() const { return k_lower_; }
  const std::string& name() const { return name_; }

  bool has_difference_form() const { return form_ != PotentialForm::kGeneral; }
  bool is_radial() const { return form_ == PotentialForm::kRadial; }
  bool is_convex() const { return lambda_ >= 0.0; }

  // Omega = inf over r > 0 of the minimal subgradient slope (radial only)
  double min_slope() const {
    const detail::RadialProfile* p = impl_->profile();
    if (p == nullptr) throw std::domain_error("Potential::min_slope: radial form required");
    return p->min_slope();
  }

  std::vector<double> kink_radii() const {
    const detail::RadialProfile* p = impl_->profile();
    return p == nullptr ? std::vector<double>{} : p->kinks();
  }

  Potential with_lambda(double lam) const {
    Potential q(*this);
    q.lambda_ = lam;
    q.k_lower_ = k_from(q.center_value_, lam);
    return q;
  }

  static Potential make(std::shared_ptr<const detail::PotentialImpl> impl, PotentialForm form, int dim,
                        double lambda, double growth, std::string name, double center_value) {
    Potential p;
    p.impl_ = std::move(impl);
    p.form_ = form;
    p.dim_ = dim;
    p.lambda_ = lambda;
    p.growth_ = growth;
    p.name_ = std::move(name);
    p.center_value_ = center_value;
    p.k_lower_ = k_from(center_value, lambda);
    return p;
  }

 private:
  static double k_from(double w0, double lambda) {
    // W(z) >= W(0) + (lambda/2)|z|^2 since 0 is a subgradient at the origin
    return std::max({std::abs(w0), std::max(0.0, -lambda), 1e-12});
  }

  void require_difference(const char* what) const {
    if (form_ == PotentialForm::kGeneral)
      throw std::domain_error(std::string(what) + ": unsupported for general-form potentials");
  }

  std::shared_ptr<const detail::PotentialImpl> impl_;
  PotentialForm form_ = PotentialForm::kGeneral;
  int dim_ = 1;
  double lambda_ = 0.0, growth_ = 1.0, k_lower_ = 1.0, center_value_ = 0.0;
  std::string name_;
};

// ---- built-in kernels ----

inline Potential power_law(double alpha, int dim) {
  if (alpha < 1.0) throw std::invalid_argument("power_law: alpha must be >= 1");
  auto prof = std::make_shared<const detail::PowerLawProfile>(alpha);
  // quadratic growth constant; exact for alpha <= 2, sampled-box bound beyond
  const double growth = alpha <= 2.0 ? 2.0 : 2.0 * std::pow(10.0, alpha - 2.0);
  return Potential::make(std::make_shared<const detail::RadialImpl>(prof, dim), PotentialForm::kRadial,
                         dim, 0.0, growth, "power_law", 0.0);
}

inline Potential double_well_lip() {
  auto prof = std::make_shared<const detail::DoubleWellProfile>();
  return Potential::make(std::make_shared<const detail::RadialImpl>(prof, 1), PotentialForm::kRadial, 1,
                         -1.0, 1.0, "double_well_lip", 0.5);
}

inline Potential double_well_lip_radial() {
  auto prof = std::make_shared<const detail::DoubleWellProfile>();
  return Potential::make(std::make_shared<const detail::RadialImpl>(prof, 2), PotentialForm::kRadial, 2,
                         -1.0, 1.0, "double_well_lip_radial", 0.5);
}

inline Potential double_well_smooth() {
  auto prof = std::make_shared<const detail::SmoothDoubleWellProfile>();
  // inf of the second derivative 6 r^2 - 2 is -2. The quartic tails violate
  // quadratic growth globally; the constant below covers |x|, |y| <= 10.
  return Potential::make(std::make_shared<const detail::RadialImpl>(prof, 1), PotentialForm::kRadial, 1,
                         -2.0, 400.0, "double_well_smooth", 0.5);
}

inline Potential pyramid2d(double theta) {
  if (!(theta > 2.0)) throw std::invalid_argument("pyramid2d: theta must be > 2");
  return Potential::make(std::make_shared<const detail::PyramidImpl>(theta), PotentialForm::kDifference,
                         2, 0.0, 1.0 + 2.0 * theta, "pyramid2d", 0.0);
}

inline Potential piecewise_linear_radial(std::vector<double> breaks, std::vector<double> slopes, int dim) {
  auto prof = std::make_shared<const detail::PiecewiseLinearProfile>(std::move(breaks), std::move(slopes));
  const double growth = std::max(1.0, prof->top_slope());
  return Potential::make(std::make_shared<const detail::RadialImpl>(prof, dim), PotentialForm::kRadial,
                         dim, 0.0, growth, "piecewise_linear_radial", 0.0);
}

inline Potential custom_radial(std::function<double(double)> w, std::function<double(double)> dw,
                               std::vector<double> kinks, int dim, double lambda, double growth,
                               std::string name = "custom_radial") {
  const double w0 = w(0.0);
  auto prof = std::make_shared<const detail::CustomRadialProfile>(std::move(w), std::move(dw), std::move(kinks));
  return Potential::make(std::make_shared<const detail::RadialImpl>(prof, dim), PotentialForm::kRadial,
                         dim, lambda, growth, std::move(name), w0);
}

// Evaluation-only bivariate kernel; the selection machinery rejects it.
inline Potential general_kernel(std::function<double(const Vec&, const Vec&)> kernel, int dim,
                                double lambda, double growth, std::string name = "general") {
  const Vec o = Vec::zero(dim);
  const double w0 = kernel(o, o);
  return Potential::make(std::make_shared<const detail::GeneralImpl>(std::move(kernel)),
                         PotentialForm::kGeneral, dim, lambda, growth, std::move(name), w0);
}

}  // namespace aggflow
