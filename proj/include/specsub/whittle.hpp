#ifndef SPECSUB_WHITTLE_HPP
#define SPECSUB_WHITTLE_HPP

/** @file
 * Whittle log-likelihood,
 *   l(theta) = - sum_k [ log f_theta(w_k) + I(w_k) / f_theta(w_k) ],
 * as a sum of per-frequency terms over the positive Fourier frequencies.
 */

#include "specsub/models.hpp"
#include "specsub/spectral.hpp"
#include "specsub/target.hpp"

#include <cmath>
#include <vector>

namespace specsub {

/// Periodogram plus model: the data of a Whittle posterior. Read-only after
/// construction and safe to share across threads.
class WhittleData {
public:
  WhittleData(Periodogram periodogram, ModelSpec spec)
      : periodogram_(std::move(periodogram)), spec_(std::move(spec)) {
    if (periodogram_.size() == 0)
      fail(ErrorCategory::domain, "periodogram is empty");
    points_.reserve(periodogram_.size());
    for (double w : periodogram_.grid().omegas())
      points_.push_back(FrequencyPoint::at(w));
  }

  class Bound {
  public:
    Bound(const WhittleData &data, const ParamVector &v)
        : data_(&data), density_(data.spec_, v) {}

    double log_density(std::size_t k) const {
      return density_.log_density(data_->points_[k]);
    }
    double term(std::size_t k) const {
      const double lf = log_density(k);
      return -(lf + data_->periodogram_[k] * std::exp(-lf));
    }

  private:
    const WhittleData *data_;
    SpectralDensity density_;
  };

  Bound bind(const ParamVector &v) const { return Bound(*this, v); }

  std::size_t size() const { return periodogram_.size(); }
  std::size_t dim() const { return spec_.dim(); }
  const ModelSpec &spec() const { return spec_; }
  const Periodogram &periodogram() const { return periodogram_; }
  const std::vector<FrequencyPoint> &points() const { return points_; }

  double log_prior(const ParamVector &v) const {
    return specsub::log_prior(spec_, v);
  }

private:
  Periodogram periodogram_;
  ModelSpec spec_;
  std::vector<FrequencyPoint> points_;
};

static_assert(TermTarget<WhittleData>);

/// Single Whittle term from a log spectral density value.
inline double whittle_term(double log_f, double ordinate) {
  return -(log_f + ordinate * std::exp(-log_f));
}

} // namespace specsub

#endif
