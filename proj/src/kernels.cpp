#include "dpmf/kernels.hpp"

#include <cmath>
#include <numbers>

#include "dpmf/error.hpp"
#include "dpmf/simd.hpp"

namespace dpmf {

void validate(const SideInfo& x) {
  if (!std::isfinite(x.raw_week)) throw DomainError("side information: non-finite week");
  if (x.is_home != 0 && x.is_home != 1) throw DomainError("side information: is_home must be 0 or 1");
  for (double e : x.extra)
    if (!std::isfinite(e)) throw DomainError("side information: non-finite extra coordinate");
}

double coordinate(const SideInfo& x, int dim) {
  if (dim == kTimeDim) return x.raw_week;
  if (dim == kHomeDim) return static_cast<double>(x.is_home);
  const auto e = static_cast<std::size_t>(dim - 2);
  if (dim < 0 || e >= x.extra.size())
    throw IndexError("side information has no dimension " + std::to_string(dim));
  return x.extra[e];
}

std::string dim_name(int dim) {
  if (dim == kTimeDim) return "time";
  if (dim == kHomeDim) return "home";
  return "extra" + std::to_string(dim - 2);
}

void SeasonCalendar::validate() const {
  if (!(true_gap_weeks > 0.0) || !std::isfinite(true_gap_weeks))
    throw DomainError("season calendar: true gap must be positive");
  double prev_next = -std::numeric_limits<double>::infinity();
  for (const auto& b : boundaries) {
    if (!(b.season_end_week < b.next_season_start_week))
      throw DomainError("season calendar: boundary ends after the next season starts");
    if (!(b.season_end_week >= prev_next))
      throw DomainError("season calendar: boundaries overlap or are out of order");
    prev_next = b.next_season_start_week;
  }
}

double warp_time(double raw_week, double gap, const SeasonCalendar& cal) {
  if (!(gap > 0.0) || gap > cal.true_gap_weeks)
    throw DomainError("season gap " + std::to_string(gap) + " outside (0, " +
                      std::to_string(cal.true_gap_weeks) + "]");
  if (!std::isfinite(raw_week) || raw_week < 0.0)
    throw DomainError("raw week must be finite and non-negative");
  if (gap == cal.true_gap_weeks) return raw_week;

  // Each off-season interval keeps a fraction gap/true_gap of its length; for
  // an interval of exactly true_gap weeks that removes true_gap - gap weeks.
  const double keep = gap / cal.true_gap_weeks;
  double removed = 0.0;
  for (const auto& b : cal.boundaries) {
    if (raw_week >= b.next_season_start_week) {
      removed += (b.next_season_start_week - b.season_end_week) * (1.0 - keep);
    } else {
      if (raw_week > b.season_end_week) removed += (raw_week - b.season_end_week) * (1.0 - keep);
      break;
    }
  }
  return raw_week - removed;
}

KernelSpec KernelSpec::ard(std::vector<int> dims) {
  KernelSpec k;
  k.family = KernelFamily::Ard;
  k.dims = std::move(dims);
  return k;
}

KernelSpec KernelSpec::periodic(int dim, double period) {
  KernelSpec k;
  k.family = KernelFamily::Periodic;
  k.dims = {dim};
  k.period = period;
  return k;
}

KernelSpec KernelSpec::product(std::vector<KernelSpec> factors) {
  KernelSpec k;
  k.family = KernelFamily::Product;
  k.factors = std::move(factors);
  return k;
}

std::size_t KernelSpec::num_length_scales() const {
  switch (family) {
    case KernelFamily::Ard: return dims.size();
    case KernelFamily::Periodic: return 1;
    case KernelFamily::Product: {
      std::size_t n = 0;
      for (const auto& f : factors) n += f.num_length_scales();
      return n;
    }
  }
  return 0;
}

std::vector<int> KernelSpec::length_scale_dims() const {
  switch (family) {
    case KernelFamily::Ard:
    case KernelFamily::Periodic: return dims;
    case KernelFamily::Product: {
      std::vector<int> out;
      for (const auto& f : factors) {
        const auto d = f.length_scale_dims();
        out.insert(out.end(), d.begin(), d.end());
      }
      return out;
    }
  }
  return {};
}

bool KernelSpec::uses_dim(int dim) const {
  const auto d = length_scale_dims();
  return std::find(d.begin(), d.end(), dim) != d.end();
}

void KernelSpec::validate(std::size_t available_dims) const {
  switch (family) {
    case KernelFamily::Ard:
      if (dims.empty()) throw DomainError("ARD kernel needs at least one dimension");
      break;
    case KernelFamily::Periodic:
      if (dims.size() != 1) throw DomainError("periodic kernel takes exactly one dimension");
      if (!(period > 0.0) || !std::isfinite(period))
        throw DomainError("periodic kernel period must be positive");
      break;
    case KernelFamily::Product:
      if (factors.empty()) throw DomainError("product kernel without factors");
      for (const auto& f : factors) f.validate(available_dims);
      return;
  }
  for (int d : dims)
    if (d < 0 || static_cast<std::size_t>(d) >= available_dims)
      throw DomainError("kernel references missing dimension " + std::to_string(d));
}

double corr_ard(const SideInfo& x1, const SideInfo& x2, std::span<const int> dims,
                std::span<const double> length_scales) {
  if (dims.size() != length_scales.size())
    throw DomainError("ARD kernel: length scale count does not match dimensions");
  double acc = 0.0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const double diff = (coordinate(x1, dims[i]) - coordinate(x2, dims[i])) / length_scales[i];
    acc += diff * diff;
  }
  return std::exp(-0.5 * acc);
}

double corr_periodic(double x1, double x2, double ell, double period) {
  if (!(period > 0.0) || !(ell > 0.0)) throw DomainError("periodic kernel needs positive period and length scale");
  const double s = std::sin(std::numbers::pi * (x1 - x2) / period);
  return std::exp(-2.0 * s * s / (ell * ell));
}

namespace {

double kernel_value_at(const KernelSpec& spec, const SideInfo& x1, const SideInfo& x2,
                       std::span<const double> ls, std::size_t& cursor) {
  switch (spec.family) {
    case KernelFamily::Ard: {
      const auto n = spec.dims.size();
      const double v = corr_ard(x1, x2, spec.dims, ls.subspan(cursor, n));
      cursor += n;
      return v;
    }
    case KernelFamily::Periodic: {
      const int d = spec.dims.front();
      const double v = corr_periodic(coordinate(x1, d), coordinate(x2, d), ls[cursor], spec.period);
      cursor += 1;
      return v;
    }
    case KernelFamily::Product: {
      double v = 1.0;
      for (const auto& f : spec.factors) v *= kernel_value_at(f, x1, x2, ls, cursor);
      return v;
    }
  }
  return 0.0;
}

void check_length_scales(const KernelSpec& spec, const HyperParams& hp) {
  if (hp.length_scales.size() != spec.num_length_scales())
    throw DomainError("expected " + std::to_string(spec.num_length_scales()) +
                      " length scales, got " + std::to_string(hp.length_scales.size()));
  for (double l : hp.length_scales)
    if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("length scales must be positive");
}

// Fills `out` (n x n) with the correlation of one factor; `cursor` walks the
// length-scale list the same way kernel_value_at does.
void factor_gram(const KernelSpec& spec, std::span<const SideInfo> pts, std::span<const double> ls,
                 std::size_t& cursor, Eigen::MatrixXd& out) {
  const std::size_t n = pts.size();
  switch (spec.family) {
    case KernelFamily::Ard: {
      const std::size_t dims = spec.dims.size();
      std::vector<double> coords(dims * n);
      for (std::size_t d = 0; d < dims; ++d) {
        const double ell = ls[cursor + d];
        for (std::size_t i = 0; i < n; ++i) coords[d * n + i] = coordinate(pts[i], spec.dims[d]) / ell;
      }
      cursor += dims;
      std::vector<double> row(n);
      for (std::size_t i = 0; i < n; ++i) {
        simd::ard_sqdist_row(coords, dims, n, i, row);
        out(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
          const double v = std::exp(-0.5 * row[j]);
          out(i, j) = v;
          out(j, i) = v;
        }
      }
      return;
    }
    case KernelFamily::Periodic: {
      const int d = spec.dims.front();
      const double ell = ls[cursor++];
      for (std::size_t i = 0; i < n; ++i) {
        out(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) {
          const double v = corr_periodic(coordinate(pts[i], d), coordinate(pts[j], d), ell, spec.period);
          out(i, j) = v;
          out(j, i) = v;
        }
      }
      return;
    }
    case KernelFamily::Product: {
      out.setOnes();
      Eigen::MatrixXd f(n, n);
      for (const auto& factor : spec.factors) {
        factor_gram(factor, pts, ls, cursor, f);
        out.array() *= f.array();
      }
      return;
    }
  }
}

}  // namespace

double kernel_value(const KernelSpec& spec, const SideInfo& x1, const SideInfo& x2,
                    std::span<const double> length_scales) {
  if (length_scales.size() != spec.num_length_scales())
    throw DomainError("kernel_value: wrong number of length scales");
  std::size_t cursor = 0;
  return kernel_value_at(spec, x1, x2, length_scales, cursor);
}

std::vector<SideInfo> warp_points(std::span<const SideInfo> points, double gap,
                                  const SeasonCalendar& cal) {
  std::vector<SideInfo> out(points.begin(), points.end());
  for (auto& p : out) p.raw_week = warp_time(p.raw_week, gap, cal);
  return out;
}

Eigen::MatrixXd gram(std::span<const SideInfo> points, const KernelSpec& spec,
                     const HyperParams& hp, const SeasonCalendar& cal) {
  check_length_scales(spec, hp);
  const auto warped = warp_points(points, hp.season_gap_weeks, cal);
  const std::size_t n = warped.size();
  Eigen::MatrixXd out(n, n);
  std::size_t cursor = 0;
  factor_gram(spec, warped, hp.length_scales, cursor, out);
  return out;
}

Eigen::VectorXd cross_corr(std::span<const SideInfo> points, const SideInfo& target,
                           const KernelSpec& spec, const HyperParams& hp,
                           const SeasonCalendar& cal) {
  check_length_scales(spec, hp);
  const auto warped = warp_points(points, hp.season_gap_weeks, cal);
  SideInfo t = target;
  t.raw_week = warp_time(target.raw_week, hp.season_gap_weeks, cal);
  Eigen::VectorXd k(static_cast<Eigen::Index>(warped.size()));
  for (std::size_t i = 0; i < warped.size(); ++i)
    k(static_cast<Eigen::Index>(i)) = kernel_value(spec, warped[i], t, hp.length_scales);
  return k;
}

CholeskyFactor chol_jitter(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DomainError("chol_jitter: matrix is not square");
  const auto n = m.rows();
  for (double eps : kJitterLadder) {
    Eigen::LLT<Eigen::MatrixXd> llt;
    if (eps == 0.0) {
      llt.compute(m);
    } else {
      Eigen::MatrixXd a = m;
      a.diagonal().array() += eps;
      llt.compute(a);
    }
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd l = llt.matrixL();
    bool ok = true;
    for (Eigen::Index i = 0; i < n && ok; ++i) ok = std::isfinite(l(i, i)) && l(i, i) > 0.0;
    if (ok) return {std::move(l), eps};
  }
  throw NotPositiveDefinite("Cholesky failed at maximum jitter " +
                            std::to_string(kJitterLadder.back()));
}

}  // namespace dpmf
