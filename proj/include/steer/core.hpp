// Copyright 2026 The Steer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Shared value types: paired opaque/interpretable representations, weighted
// training examples, the domain bridge contract and the proximity kernel.

#ifndef STEER_CORE_HPP_
#define STEER_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "steer/errors.hpp"

namespace steer {

using FeatureIndex = std::uint32_t;

// One keep/drop flag per interpretable feature.
using Mask = std::vector<std::uint8_t>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Cosine similarity; 0 when either side is the zero vector.
inline double cosine_similarity(std::span<const double> a,
                                std::span<const double> b) {
  const double ab = dot(a, b);
  const double aa = dot(a, a);
  const double bb = dot(b, b);
  if (aa == 0.0 || bb == 0.0) return 0.0;
  return ab / std::sqrt(aa * bb);
}

// Dense vector in the opaque model's input space.
class OpaqueVec {
 public:
  OpaqueVec() = default;
  explicit OpaqueVec(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
      if (!std::isfinite(v)) throw ValueError("OpaqueVec: non-finite entry");
    }
  }
  static OpaqueVec zeros(std::size_t dim) {
    return OpaqueVec(std::vector<double>(dim, 0.0));
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vec() const noexcept { return values_; }

  friend bool operator==(const OpaqueVec&, const OpaqueVec&) = default;

 private:
  std::vector<double> values_;
};

// Sparse nonnegative activations over the interpretable vocabulary. A feature
// is present iff its activation is > 0; zero activations are never stored.
class InterpVec {
 public:
  using Entry = std::pair<FeatureIndex, double>;

  InterpVec() = default;
  explicit InterpVec(std::size_t dim) : dim_(dim) {}

  // Entries may arrive in any order; duplicates are rejected.
  InterpVec(std::size_t dim, std::vector<Entry> entries) : dim_(dim) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto [j, v] = entries[i];
      if (j >= dim_) throw ShapeError("InterpVec: feature index out of range");
      if (i > 0 && entries[i - 1].first == j) {
        throw ValueError("InterpVec: duplicate feature index");
      }
      if (!std::isfinite(v) || v < 0.0) {
        throw ValueError("InterpVec: activations must be finite and >= 0");
      }
      if (v > 0.0) entries_.push_back(entries[i]);
    }
  }

  static InterpVec from_dense(std::span<const double> values) {
    std::vector<Entry> e;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (values[j] != 0.0) e.emplace_back(static_cast<FeatureIndex>(j), values[j]);
    }
    return InterpVec(values.size(), std::move(e));
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::span<const Entry> entries() const noexcept { return entries_; }

  double activation(FeatureIndex j) const {
    if (j >= dim_) throw ShapeError("InterpVec: feature index out of range");
    auto it = std::lower_bound(
        entries_.begin(), entries_.end(), j,
        [](const Entry& e, FeatureIndex k) { return e.first < k; });
    return (it != entries_.end() && it->first == j) ? it->second : 0.0;
  }
  bool present(FeatureIndex j) const { return activation(j) > 0.0; }

  double squared_norm() const noexcept {
    double s = 0.0;
    for (const auto& [j, v] : entries_) s += v * v;
    return s;
  }

  double dot(const InterpVec& other) const {
    if (dim_ != other.dim_) throw ShapeError("InterpVec: dimension mismatch");
    double s = 0.0;
    auto a = entries_.begin();
    auto b = other.entries_.begin();
    while (a != entries_.end() && b != other.entries_.end()) {
      if (a->first < b->first) {
        ++a;
      } else if (b->first < a->first) {
        ++b;
      } else {
        s += a->second * b->second;
        ++a;
        ++b;
      }
    }
    return s;
  }

  // Elementwise product with a keep/drop mask of length dim().
  InterpVec masked(const Mask& mask) const {
    if (mask.size() != dim_) throw ShapeError("InterpVec: mask length mismatch");
    InterpVec out(dim_);
    for (const auto& e : entries_) {
      if (mask[e.first]) out.entries_.push_back(e);
    }
    return out;
  }

  std::vector<double> to_dense() const {
    std::vector<double> d(dim_, 0.0);
    for (const auto& [j, v] : entries_) d[j] = v;
    return d;
  }

  friend bool operator==(const InterpVec&, const InterpVec&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Entry> entries_;
};

// Cosine distance in the interpretable space, in [0, 1]. When exactly one
// side is the zero vector the distance is 1.
inline double interp_distance(const InterpVec& a, const InterpVec& b) {
  if (a.dim() != b.dim()) throw ShapeError("interp_distance: dimension mismatch");
  const double aa = a.squared_norm();
  const double bb = b.squared_norm();
  if (aa == 0.0 && bb == 0.0) {
    throw DegenerateDistance("interp_distance: both vectors are zero");
  }
  if (aa == 0.0 || bb == 0.0) return 1.0;
  if (a == b) return 0.0;
  const double cos = a.dot(b) / std::sqrt(aa * bb);
  return std::clamp(1.0 - cos, 0.0, 1.0);
}

struct ProximityKernel {
  double sigma = 0.75;

  explicit ProximityKernel(double s = 0.75) : sigma(s) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw ValueError("ProximityKernel: sigma must be > 0");
    }
  }
};

// exp(-d^2 / sigma^2): 1 at d = 0 and strictly decreasing.
inline double kernel_weight(double d, const ProximityKernel& k) {
  if (!(d >= 0.0)) throw ValueError("kernel_weight: distance must be >= 0");
  return std::exp(-(d * d) / (k.sigma * k.sigma));
}

struct WeightedExample {
  OpaqueVec x;
  int y = 1;
  double w = 1.0;

  WeightedExample(OpaqueVec x_, int y_, double w_ = 1.0)
      : x(std::move(x_)), y(y_), w(w_) {
    if (y != 1 && y != -1) throw ValueError("WeightedExample: label must be +-1");
    if (!(w > 0.0) || !std::isfinite(w)) {
      throw ValueError("WeightedExample: weight must be > 0");
    }
  }
};

// Exact-match table from opaque vectors to the interpretable vectors they
// were produced from. Thread-safe.
class PairingRegistry {
 public:
  void add(const OpaqueVec& x, const InterpVec& x_interp) {
    std::unique_lock lock(mu_);
    auto& bucket = table_[key(x)];
    for (const auto& [ox, ix] : bucket) {
      if (ox == x) {
        if (!(ix == x_interp)) {
          throw InconsistentInstance(
              "PairingRegistry: opaque vector already paired differently");
        }
        return;
      }
    }
    bucket.emplace_back(x, x_interp);
  }

  std::optional<InterpVec> find(const OpaqueVec& x) const {
    std::shared_lock lock(mu_);
    auto it = table_.find(key(x));
    if (it == table_.end()) return std::nullopt;
    for (const auto& entry : it->second) {
      if (entry.first == x) return entry.second;
    }
    return std::nullopt;
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    std::size_t n = 0;
    for (const auto& [k, b] : table_) n += b.size();
    return n;
  }

 private:
  static std::uint64_t key(const OpaqueVec& x) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : x.values()) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      h ^= bits;
      h *= 0x100000001b3ULL;
      h ^= h >> 29;
    }
    return h;
  }

  mutable std::shared_mutex mu_;
  std::unordered_map<std::uint64_t, std::vector<std::pair<OpaqueVec, InterpVec>>>
      table_;
};

class Instance;

// Links an opaque representation to its interpretable one. The opaque map is
// many-to-one, so h_prime is answered from pairings recorded when vectors are
// produced (by the domain's generator or by realize_instance).
class DomainBridge {
 public:
  virtual ~DomainBridge() = default;

  virtual std::size_t interp_dim() const = 0;
  // Must return base.x bit-for-bit for the all-ones mask.
  virtual OpaqueVec realize(const Instance& base, const Mask& mask) const = 0;

  virtual InterpVec h_prime(const OpaqueVec& x) const {
    if (auto found = pairs_.find(x)) return *std::move(found);
    throw ValueError("h_prime: opaque vector was not produced by this bridge");
  }
  virtual double opaque_similarity(const OpaqueVec& a, const OpaqueVec& b) const {
    return cosine_similarity(a.values(), b.values());
  }

  void pair(const OpaqueVec& x, const InterpVec& x_interp) const {
    if (x_interp.dim() != interp_dim()) throw ShapeError("pair: interpretable dimension mismatch");
    pairs_.add(x, x_interp);
  }

  // realize() plus pairing of the result with the masked interpretable vector.
  Instance realize_instance(const Instance& base, const Mask& mask, std::string id) const;

 private:
  mutable PairingRegistry pairs_;
};

class Instance {
 public:
  // Rejects x_interp unless it equals bridge.h_prime(x) exactly.
  Instance(std::string id, OpaqueVec x, InterpVec x_interp,
           const DomainBridge& bridge)
      : id_(std::move(id)), x_(std::move(x)), x_interp_(std::move(x_interp)) {
    if (!(bridge.h_prime(x_) == x_interp_)) {
      throw InconsistentInstance("Instance '" + id_ +
                                 "': interpretable vector does not match h'(x)");
    }
  }

  const std::string& id() const noexcept { return id_; }
  const OpaqueVec& x() const noexcept { return x_; }
  const InterpVec& x_interp() const noexcept { return x_interp_; }

 private:
  std::string id_;
  OpaqueVec x_;
  InterpVec x_interp_;
};

inline Instance DomainBridge::realize_instance(const Instance& base, const Mask& mask,
                                              std::string id) const {
  OpaqueVec x = realize(base, mask);
  InterpVec xi = base.x_interp().masked(mask);
  pair(x, xi);
  return Instance(std::move(id), std::move(x), std::move(xi), *this);
}

// Labeled examples plus an immutable, shareable unlabeled pool. Pool ids in
// `consumed` are skipped by pool-based candidate strategies.
struct Dataset {
  std::vector<WeightedExample> labeled;
  std::shared_ptr<const std::vector<Instance>> pool;
  std::unordered_set<std::string> consumed;

  Dataset() : pool(std::make_shared<const std::vector<Instance>>()) {}
  explicit Dataset(std::shared_ptr<const std::vector<Instance>> p,
                   std::vector<WeightedExample> l = {})
      : labeled(std::move(l)), pool(std::move(p)) {
    if (!pool) pool = std::make_shared<const std::vector<Instance>>();
    std::unordered_set<std::string> seen;
    for (const auto& inst : *pool) {
      if (!seen.insert(inst.id()).second) {
        throw ValueError("Dataset: duplicate pool id '" + inst.id() + "'");
      }
    }
  }

  std::span<const Instance> pool_view() const { return *pool; }
};

}  // namespace steer

#endif  // STEER_CORE_HPP_
