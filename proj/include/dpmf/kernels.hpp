#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>
#include <vector>

namespace dpmf {

/// Coordinates of one interaction as seen by one participant.
/// Dimension 0 is time (weeks), 1 is the home indicator, 2.. index `extra`.
struct SideInfo {
  double raw_week = 0.0;
  int is_home = 0;
  std::vector<double> extra;

  std::size_t num_dims() const { return 2 + extra.size(); }
};

inline constexpr int kTimeDim = 0;
inline constexpr int kHomeDim = 1;

void validate(const SideInfo& x);

/// Coordinate `dim` of `x`; time is returned unwarped.
double coordinate(const SideInfo& x, int dim);

std::string dim_name(int dim);

struct SeasonBoundary {
  double season_end_week = 0.0;
  double next_season_start_week = 0.0;
};

/// Off-season intervals over which the time axis is compressed.
struct SeasonCalendar {
  std::vector<SeasonBoundary> boundaries;
  double true_gap_weeks = 28.0;

  void validate() const;
};

/// Effective time after replacing the elapsed off-seasons with `gap` weeks
/// each (relative to the nominal `true_gap_weeks`). Identity when gap equals
/// the true gap; strictly increasing in raw_week for any admissible gap.
double warp_time(double raw_week, double gap, const SeasonCalendar& cal);

enum class KernelFamily { Ard, Periodic, Product };

struct KernelSpec {
  KernelFamily family = KernelFamily::Ard;
  std::vector<int> dims;            // Ard: one length scale each; Periodic: exactly one
  double period = 52.0;             // Periodic only
  std::vector<KernelSpec> factors;  // Product only

  static KernelSpec ard(std::vector<int> dims);
  static KernelSpec periodic(int dim, double period);
  static KernelSpec product(std::vector<KernelSpec> factors);

  /// Length scales consumed by this kernel, in evaluation order.
  std::size_t num_length_scales() const;
  /// The input dimension each length scale applies to.
  std::vector<int> length_scale_dims() const;
  bool uses_dim(int dim) const;

  void validate(std::size_t available_dims) const;
};

struct HyperParams {
  std::vector<double> length_scales;
  double season_gap_weeks = 28.0;
};

/// Closed interval used for top-hat priors.
struct Box {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

double corr_ard(const SideInfo& x1, const SideInfo& x2, std::span<const int> dims,
                std::span<const double> length_scales);

/// exp{-2 sin^2(pi (x1 - x2) / period) / ell^2}; period 2 pi recovers the
/// textbook form with sin^2((x1 - x2) / 2).
double corr_periodic(double x1, double x2, double ell, double period);

/// Kernel value between two points whose time coordinate is already warped.
double kernel_value(const KernelSpec& spec, const SideInfo& x1, const SideInfo& x2,
                    std::span<const double> length_scales);

/// Copies of `points` with the time coordinate warped by hp.season_gap_weeks.
std::vector<SideInfo> warp_points(std::span<const SideInfo> points, double gap,
                                  const SeasonCalendar& cal);

/// Correlation matrix over `points` (raw time; warping happens here).
Eigen::MatrixXd gram(std::span<const SideInfo> points, const KernelSpec& spec,
                     const HyperParams& hp, const SeasonCalendar& cal);

/// Correlations between every point in `points` and `target`.
Eigen::VectorXd cross_corr(std::span<const SideInfo> points, const SideInfo& target,
                           const KernelSpec& spec, const HyperParams& hp,
                           const SeasonCalendar& cal);

inline constexpr std::array<double, 4> kJitterLadder{0.0, 1e-10, 1e-8, 1e-6};

struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

/// Lower Cholesky factor of m + eps I, with eps the first rung of the jitter
/// ladder that factors. Throws NotPositiveDefinite past the last rung.
CholeskyFactor chol_jitter(const Eigen::MatrixXd& m);

}  // namespace dpmf
