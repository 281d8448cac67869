#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

namespace cvpyr {

/// Per-pixel kernels over one discrete depth distribution. Templated so the
/// volume code runs them in float while oracles and tests run them in double.

/// Max-subtracted softmax. Entries with keep[i] == 0 get probability 0; an
/// empty `keep` keeps everything. Returns false, writing a uniform
/// distribution, when nothing is kept.
template <typename T>
bool softmax(std::span<const T> scores, std::span<const unsigned char> keep, std::span<T> out) {
  assert(out.size() == scores.size());
  const bool all = keep.empty();
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (all || keep[i]) peak = std::max(peak, static_cast<double>(scores[i]));
  }
  if (!std::isfinite(peak)) {
    std::fill(out.begin(), out.end(), static_cast<T>(1.0 / static_cast<double>(out.size())));
    return false;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double e = (all || keep[i]) ? std::exp(static_cast<double>(scores[i]) - peak) : 0.0;
    out[i] = static_cast<T>(e);
    sum += e;
  }
  for (auto& v : out) v = static_cast<T>(static_cast<double>(v) / sum);
  return true;
}

template <typename T>
bool softmax(std::span<const T> scores, std::span<T> out) {
  return softmax<T>(scores, {}, out);
}

/// Soft-argmax: sum_j P_j d_j.
template <typename P, typename D>
double expectation(std::span<const P> prob, std::span<const D> depths) {
  assert(prob.size() == depths.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < prob.size(); ++j) {
    acc += static_cast<double>(prob[j]) * static_cast<double>(depths[j]);
  }
  return acc;
}

/// sum_j P_j (d_j - mean)^2.
template <typename P, typename D>
double variance(std::span<const P> prob, std::span<const D> depths, double mean) {
  assert(prob.size() == depths.size());
  double acc = 0.0;
  for (std::size_t j = 0; j < prob.size(); ++j) {
    const double r = static_cast<double>(depths[j]) - mean;
    acc += static_cast<double>(prob[j]) * r * r;
  }
  return acc;
}

/// First index of the maximum.
template <typename P>
std::size_t argmax(std::span<const P> prob) {
  return static_cast<std::size_t>(std::max_element(prob.begin(), prob.end()) - prob.begin());
}

}  // namespace cvpyr
