// Scalar convex-analysis engine for time/space-dependent potentials j(t,x,r)
// with maximal monotone subdifferential graphs beta = dj:
//
//   j* (Legendre-Fenchel conjugate), resolvent (1 + lambda*beta)^{-1},
//   Yosida approximation beta_lambda, Moreau envelope j_lambda, and the
//   smoothed potential j_{lambda,sigma} = j_lambda + (sigma/2) r^2 together
//   with its conjugate.
//
// Families: r^2/2, |r|^p/p, sgn(r)log(|r|+a), sgn(r)exp(a r^2) (as graphs),
// |r|, and monotone breakpoint tables. All values are immutable after
// construction; every operation is a pure function of its inputs.

#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bevar {

// Spatial point, up to 2 coordinates (x1 ignored in 1D).
struct Point {
  double x0 = 0.0;
  double x1 = 0.0;
};

// Diagnostic error for scalar root solves that fail to converge.
class RootSolveError : public std::runtime_error {
 public:
  RootSolveError(const std::string& what, double bracket_lo, double bracket_hi,
                 double residual)
      : std::runtime_error(what + " [bracket " + std::to_string(bracket_lo) +
                           ", " + std::to_string(bracket_hi) + ", residual " +
                           std::to_string(residual) + "]"),
        bracket_lo(bracket_lo),
        bracket_hi(bracket_hi),
        residual(residual) {}
  double bracket_lo, bracket_hi, residual;
};

enum class PotentialFamily {
  quadratic,
  power,
  log_type,
  exp_type,
  abs_value,
  custom_tabulated,
};

const char* family_name(PotentialFamily f);
std::optional<PotentialFamily> family_from_name(const std::string& name);

enum class CoefficientKind { constant, time_ramp, space_bump };

const char* coefficient_kind_name(CoefficientKind k);
std::optional<CoefficientKind> coefficient_kind_from_name(const std::string&);

// Pointwise coefficient a(t,x) from a closed preset catalog:
//   constant:   base
//   time_ramp:  base + amplitude * t
//   space_bump: base + amplitude * exp(-8 |x - (0.5,0.5)|^2)
struct CoefficientField {
  CoefficientKind kind = CoefficientKind::constant;
  double base = 1.0;
  double amplitude = 0.0;

  double operator()(double t, const Point& x) const;
  bool time_dependent() const { return kind == CoefficientKind::time_ramp; }
  bool space_dependent() const { return kind == CoefficientKind::space_bump; }
};

// Closed interval of graph values beta(t,x,r); lo == hi wherever j is
// differentiable. The deterministic single-valued selection is the midpoint.
struct GraphValue {
  double lo = 0.0;
  double hi = 0.0;
  double selection() const { return 0.5 * (lo + hi); }
  // Distance of w to the interval (0 when contained).
  double distance(double w) const {
    if (w < lo) return lo - w;
    if (w > hi) return w - hi;
    return 0.0;
  }
};

// One row of a custom_tabulated graph: value interval [lo,hi] at abscissa r.
struct Breakpoint {
  double r = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

struct AffineMinorant {
  double k1 = 0.0;  // slope of the minorant of j
  double k2 = 0.0;  // offset: j(t,x,r) >= k1*r + k2
  double k3 = 0.0;  // slope of the minorant of j*
  double k4 = 0.0;  // offset: j*(t,x,w) >= k3*w + k4
};

struct SymmetryCert {
  double gamma1 = 1.0;
  double gamma2 = 0.0;
  bool holds = false;
  double worst_ratio_location = 0.0;  // probe r maximizing j(-r) - g1*j(r) - g2
  double worst_excess = 0.0;
};

struct CoercivityReport {
  bool superlinear_j = false;
  bool superlinear_jstar = false;
  bool weakly_coercive() const { return superlinear_j && superlinear_jstar; }
  // j/|r| resp. j*/|w| on the ladder {r_max/100, r_max/10, r_max}.
  std::array<double, 3> j_ratios{};
  std::array<double, 3> jstar_ratios{};
};

struct FenchelReport {
  // max over samples of r*w - j - j*; Fenchel-Young says <= 0.
  double max_inequality_violation = 0.0;
  // max over samples of |j + j* - r*w| with w selected from beta(r).
  double max_equality_gap = 0.0;
  std::int64_t samples = 0;
};

class PotentialSpec {
 public:
  // Factories validate parameters and the structural assumptions
  // (sampled convexity/monotonicity, finite j(.,.,0), j*(.,.,0),
  //  coefficient lower bound) and throw std::invalid_argument on failure.
  static PotentialSpec quadratic();
  static PotentialSpec power(double p);
  static PotentialSpec log_type(CoefficientField a, double a0 = 1.0);
  static PotentialSpec exp_type(CoefficientField a, double a0 = 1.0);
  static PotentialSpec abs_value();
  static PotentialSpec custom_tabulated(std::vector<Breakpoint> table);

  PotentialFamily family() const { return family_; }
  double exponent() const { return exponent_; }
  const CoefficientField& coefficient() const { return coeff_; }
  double coefficient_floor() const { return a0_; }
  bool time_dependent() const { return coeff_.time_dependent(); }
  bool space_dependent() const { return coeff_.space_dependent(); }
  const std::vector<Breakpoint>& table() const { return table_; }

  // j(t,x,r); convex and continuous in r, finite for finite r
  // (+inf only through double overflow for the exp family at huge r).
  double j(double t, const Point& x, double r) const;

  // Full subdifferential interval beta(t,x,r) = dj(t,x,r).
  GraphValue beta(double t, const Point& x, double r) const;

  // Unique z with z + lambda*b = r, b in beta(t,x,z). Nonexpansive in r.
  double resolvent(double t, const Point& x, double lambda, double r) const;

  // beta_lambda(r) = (r - resolvent(r)) / lambda; (1/lambda)-Lipschitz.
  double yosida(double t, const Point& x, double lambda, double r) const;

  // d/dr beta_lambda(r) (defined a.e.; = 1/lambda inside jump bands).
  double yosida_slope(double t, const Point& x, double lambda, double r) const;

  // Moreau envelope j_lambda(r) via the resolvent closed form
  //   j_lambda(r) = |z - r|^2/(2 lambda) + j(z), z = resolvent(r).
  double moreau(double t, const Point& x, double lambda, double r) const;

  // j*(t,x,w) = sup_r (w r - j(r)). Closed form for quadratic/power,
  // numeric Legendre transform otherwise. Returns +inf when the bracket
  // expansion exceeds its cap (conjugate effectively infinite at w);
  // numeric failures throw RootSolveError instead.
  double conjugate(double t, const Point& x, double omega) const;

  // A maximizer of w r - j(r) (finite only where conjugate() is finite).
  double conjugate_argmax(double t, const Point& x, double omega) const;

  // True if 0 in beta(t,x,0) at the validation sample points.
  bool zero_in_beta_at_zero() const;

 private:
  PotentialSpec() = default;
  void validate() const;

  PotentialFamily family_ = PotentialFamily::quadratic;
  double exponent_ = 2.0;            // power family, p > 1
  CoefficientField coeff_;           // log/exp families
  double a0_ = 1.0;                  // declared pointwise floor of coeff_
  std::vector<Breakpoint> table_;    // custom family, sorted by r
  std::vector<double> table_cum_;    // integral of the selection up to r_i
  double table_j_at_zero_ = 0.0;     // anchor so that j(0) = 0
};

// j_{lambda,sigma} = j_lambda + (sigma/2) r^2 and its conjugate.
struct ValueSlope {
  double value = 0.0;
  double slope = 0.0;
};

class RegularizedPotential {
 public:
  RegularizedPotential(PotentialSpec base, double lambda, double sigma);

  const PotentialSpec& base() const { return base_; }
  double lambda() const { return lambda_; }
  double sigma() const { return sigma_; }

  // value = j_lambda(r) + (sigma/2) r^2, slope = beta_lambda(r) + sigma r.
  ValueSlope value(double t, const Point& x, double r) const;

  // Smooth conjugate: value = sup_r (w r - j_{lambda,sigma}(r)), slope = the
  // maximizing r ((1/sigma)-Lipschitz in w). Requires sigma > 0.
  ValueSlope conjugate(double t, const Point& x, double omega) const;

  // Conjugate value also valid at sigma == 0 through the Moreau identity
  // (j_lambda)* = j* + (lambda/2) w^2.
  double conjugate_value(double t, const Point& x, double omega) const;

 private:
  PotentialSpec base_;
  double lambda_;
  double sigma_;
};

struct FenchelOptions {
  double r_radius = 3.0;     // samples r in [-r_radius, r_radius]
  double t_max = 1.0;        // samples t in [0, t_max]
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

FenchelReport check_fenchel_young(const PotentialSpec& spec,
                                  std::int64_t sample_count,
                                  const FenchelOptions& opts = {});

SymmetryCert check_symmetry(const PotentialSpec& spec, double probe_radius,
                            double gamma1, double gamma2);

CoercivityReport check_coercivity(const PotentialSpec& spec, double r_max);

AffineMinorant affine_minorant(const PotentialSpec& spec);

}  // namespace bevar
