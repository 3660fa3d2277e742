// Copyright 2026 The roomsir Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "roomsir/hoa.hpp"

#include <array>
#include <cmath>
#include <string>

#include "roomsir/error.hpp"

namespace roomsir {

namespace {

// Per (l, m >= 0): N3D normalization and the Legendre recurrence
// weights for Q_l^m = (a * z * Q_{l-1}^m - b * Q_{l-2}^m).
struct Tables {
  std::array<double, sh_channels(kMaxShOrder)> n3d{};
  std::array<double, kMaxShOrder + 1> sn3d_divisor{};  // sqrt(2l+1)
  std::array<double, sh_channels(kMaxShOrder)> a{};
  std::array<double, sh_channels(kMaxShOrder)> b{};
  std::array<double, kMaxShOrder + 1> sectoral{};  // Q_m^m = (2m-1)!!

  Tables() {
    std::array<long double, 2 * kMaxShOrder + 1> fact{};
    fact[0] = 1.0L;
    for (std::size_t i = 1; i < fact.size(); ++i) fact[i] = fact[i - 1] * static_cast<long double>(i);
    for (int l = 0; l <= kMaxShOrder; ++l) {
      sn3d_divisor[l] = std::sqrt(2.0 * l + 1.0);
      for (int m = 0; m <= l; ++m) {
        const long double k = (2.0L * l + 1.0L) * (m == 0 ? 1.0L : 2.0L) * fact[l - m] / fact[l + m];
        const std::size_t i = acn(l, m);
        n3d[i] = static_cast<double>(std::sqrt(k));
        if (l >= m + 2) {
          a[i] = static_cast<double>(2 * l - 1) / static_cast<double>(l - m);
          b[i] = static_cast<double>(l + m - 1) / static_cast<double>(l - m);
        }
      }
    }
    double dfact = 1.0;
    for (int m = 0; m <= kMaxShOrder; ++m) {
      if (m > 0) dfact *= 2.0 * m - 1.0;
      sectoral[m] = dfact;
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

void check_order(int order) {
  if (order < 0 || order > kMaxShOrder) {
    throw ConfigError("ambisonic order must be in [0, 9], got " + std::to_string(order));
  }
}

Vec3 unit(const Vec3& d, std::size_t row, bool batch) {
  const double n = d.norm();
  if (!(std::abs(n - 1.0) < 1e-3)) {
    throw ConfigError((batch ? "direction at row " + std::to_string(row) : std::string("direction")) +
                      " is not unit length");
  }
  return d / n;
}

// Evaluates `lanes` directions at once; out rows are `stride` apart.
template <std::size_t kLanes>
void eval_block(const Vec3* dirs, std::size_t lanes, int order, ShNorm norm, double* out,
                std::size_t stride) {
  const Tables& t = tables();
  double x[kLanes], y[kLanes], z[kLanes];
  for (std::size_t k = 0; k < lanes; ++k) {
    x[k] = dirs[k].x;
    y[k] = dirs[k].y;
    z[k] = dirs[k].z;
  }
  // c + i s = (x + i y)^m
  double c[kLanes], s[kLanes];
  for (std::size_t k = 0; k < lanes; ++k) {
    c[k] = 1.0;
    s[k] = 0.0;
  }
  for (int m = 0; m <= order; ++m) {
    if (m > 0) {
      for (std::size_t k = 0; k < lanes; ++k) {
        const double cn = x[k] * c[k] - y[k] * s[k];
        s[k] = x[k] * s[k] + y[k] * c[k];
        c[k] = cn;
      }
    }
    double q2[kLanes] = {}, q1[kLanes] = {};  // Q_{l-2}^m, Q_{l-1}^m
    for (int l = m; l <= order; ++l) {
      double q[kLanes];
      if (l == m) {
        for (std::size_t k = 0; k < lanes; ++k) q[k] = t.sectoral[m];
      } else if (l == m + 1) {
        for (std::size_t k = 0; k < lanes; ++k) q[k] = (2.0 * m + 1.0) * z[k] * q1[k];
      } else {
        const double a = t.a[acn(l, m)];
        const double b = t.b[acn(l, m)];
        for (std::size_t k = 0; k < lanes; ++k) q[k] = a * z[k] * q1[k] - b * q2[k];
      }
      const double f = t.n3d[acn(l, m)];
      if (m == 0) {
        for (std::size_t k = 0; k < lanes; ++k) out[k * stride + acn(l, 0)] = f * q[k];
      } else {
        for (std::size_t k = 0; k < lanes; ++k) {
          out[k * stride + acn(l, m)] = f * q[k] * c[k];
          out[k * stride + acn(l, -m)] = f * q[k] * s[k];
        }
      }
      if (norm == ShNorm::kSN3D) {
        const double div = t.sn3d_divisor[l];
        for (std::size_t k = 0; k < lanes; ++k) {
          out[k * stride + acn(l, m)] /= div;
          if (m > 0) out[k * stride + acn(l, -m)] /= div;
        }
      }
      for (std::size_t k = 0; k < lanes; ++k) {
        q2[k] = q1[k];
        q1[k] = q[k];
      }
    }
  }
}

}  // namespace

int acn_degree(std::size_t channel) {
  int l = 0;
  while (sh_channels(l) <= channel) ++l;
  return l;
}

void sh_eval(const Vec3& direction, int order, ShNorm norm, std::span<double> out) {
  check_order(order);
  if (out.size() < sh_channels(order)) throw ConfigError("output span too small for order");
  const Vec3 d = unit(direction, 0, false);
  eval_block<1>(&d, 1, order, norm, out.data(), 0);
}

std::vector<double> sh_eval(const Vec3& direction, int order, ShNorm norm) {
  check_order(order);
  std::vector<double> out(sh_channels(order));
  sh_eval(direction, order, norm, out);
  return out;
}

std::vector<double> sh_eval_batch(std::span<const Vec3> directions, int order, ShNorm norm) {
  check_order(order);
  constexpr std::size_t kLanes = 8;
  const std::size_t channels = sh_channels(order);
  std::vector<double> out(directions.size() * channels);
  std::array<Vec3, kLanes> block;
  for (std::size_t begin = 0; begin < directions.size(); begin += kLanes) {
    const std::size_t lanes = std::min(kLanes, directions.size() - begin);
    for (std::size_t k = 0; k < lanes; ++k) block[k] = unit(directions[begin + k], begin + k, true);
    eval_block<kLanes>(block.data(), lanes, order, norm, out.data() + begin * channels, channels);
  }
  return out;
}

}  // namespace roomsir
