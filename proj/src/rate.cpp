#include "discoflux/rate.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "discoflux/errors.hpp"

namespace discoflux {

namespace {
constexpr std::int64_t kDefaultCap = 2000;
}

RateFunction::RateFunction(Kind kind, std::vector<double> values, std::int64_t cap)
    : kind_(kind), values_(std::move(values)), cap_(cap) {
  const double gk = (*this)(cap_);
  if (!(gk / (static_cast<double>(cap_) * static_cast<double>(cap_)) < 1e-3)) {
    throw DomainError("rate function violates g(K)/K^2 < 1e-3 at the truncation cap");
  }
}

RateFunction RateFunction::indicator() { return RateFunction(Kind::Indicator, {}, kDefaultCap); }

RateFunction RateFunction::identity() { return RateFunction(Kind::Identity, {}, kDefaultCap); }

RateFunction RateFunction::table(std::vector<double> values) {
  if (values.empty()) throw DomainError("rate table must contain g(1)");
  double prev = 0.0;
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("rate table entries must be positive");
    if (v < prev) throw DomainError("rate table must be nondecreasing");
    prev = v;
  }
  return RateFunction(Kind::Table, std::move(values), kDefaultCap);
}

RateFunction RateFunction::parse(const std::string& tag) {
  if (tag == "indicator") return indicator();
  if (tag == "identity") return identity();
  const std::string prefix = "table:";
  if (tag.rfind(prefix, 0) == 0) {
    std::vector<double> values;
    std::stringstream in(tag.substr(prefix.size()));
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        values.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw ConfigError("bad rate table entry '" + item + "'");
      }
    }
    return table(std::move(values));
  }
  throw ConfigError("unknown rate function '" + tag + "'");
}

std::string RateFunction::tag() const {
  switch (kind_) {
    case Kind::Indicator:
      return "indicator";
    case Kind::Identity:
      return "identity";
    case Kind::Table:
      break;
  }
  std::ostringstream out;
  out.precision(17);
  out << "table:";
  for (std::size_t i = 0; i < values_.size(); ++i) out << (i ? "," : "") << values_[i];
  return out.str();
}

std::optional<std::int64_t> RateFunction::constant_from() const noexcept {
  switch (kind_) {
    case Kind::Indicator:
      return 1;
    case Kind::Identity:
      return std::nullopt;
    case Kind::Table:
      break;
  }
  return static_cast<std::int64_t>(values_.size());
}

double RateFunction::limit() const noexcept {
  switch (kind_) {
    case Kind::Indicator:
      return 1.0;
    case Kind::Identity:
      return std::numeric_limits<double>::infinity();
    case Kind::Table:
      break;
  }
  return values_.back();
}

}  // namespace discoflux
