#ifndef DISCOFLUX_RATE_HPP
#define DISCOFLUX_RATE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace discoflux {

/// Jump rate g(k) of the zero range process: g(0)=0, nondecreasing, g(k)>0 for k>=1.
class RateFunction {
 public:
  enum class Kind { Indicator, Identity, Table };

  /// g(k) = 1{k >= 1}; geometric site marginals.
  static RateFunction indicator();
  /// g(k) = k; Poisson site marginals.
  static RateFunction identity();
  /// g(k) = values[k-1] for 1 <= k <= n, g(k) = values[n-1] beyond.
  static RateFunction table(std::vector<double> values);

  /// Parses "indicator", "identity" or "table:v1,v2,...".
  static RateFunction parse(const std::string& tag);

  double operator()(std::int64_t k) const noexcept {
    if (k <= 0) return 0.0;
    switch (kind_) {
      case Kind::Indicator:
        return 1.0;
      case Kind::Identity:
        return static_cast<double>(k);
      case Kind::Table:
        break;
    }
    const auto n = static_cast<std::int64_t>(values_.size());
    return values_[static_cast<std::size_t>((k <= n ? k : n) - 1)];
  }

  Kind kind() const noexcept { return kind_; }
  std::string tag() const;

  /// First k beyond which g is constant, if g is eventually constant.
  std::optional<std::int64_t> constant_from() const noexcept;

  /// sup_k g(k); +inf for unbounded rates.
  double limit() const noexcept;

  /// Series truncation cap K used for unbounded rates; g(K)/K^2 < 1e-3 holds here.
  std::int64_t truncation_cap() const noexcept { return cap_; }

 private:
  RateFunction(Kind kind, std::vector<double> values, std::int64_t cap);

  Kind kind_;
  std::vector<double> values_;
  std::int64_t cap_;
};

}  // namespace discoflux

#endif  // DISCOFLUX_RATE_HPP
