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

#include <cmath>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "steer/core.hpp"
#include "steer/errors.hpp"
#include "steer/random.hpp"
#include "test_util.hpp"

namespace steer {
namespace {

using testing::DenseBridge;

InterpVec iv(std::vector<double> dense) { return InterpVec::from_dense(dense); }

TEST(InterpDistance, IdenticalVectorsAreZero) {
  EXPECT_DOUBLE_EQ(interp_distance(iv({1, 0, 1}), iv({1, 0, 1})), 0.0);
}

TEST(InterpDistance, OrthogonalVectorsAreOne) {
  EXPECT_DOUBLE_EQ(interp_distance(iv({1, 0}), iv({0, 1})), 1.0);
}

TEST(InterpDistance, HandEvaluatedCosine) {
  EXPECT_NEAR(interp_distance(iv({1, 1}), iv({1, 0})), 1.0 - 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(interp_distance(iv({1, 1}), iv({1, 0})), 0.29289, 1e-5);
}

TEST(InterpDistance, BothZeroIsDegenerate) {
  EXPECT_THROW(interp_distance(iv({0, 0}), iv({0, 0})), DegenerateDistance);
}

TEST(InterpDistance, OneZeroIsMaximal) {
  EXPECT_DOUBLE_EQ(interp_distance(iv({0, 0}), iv({1, 2})), 1.0);
}

TEST(InterpDistance, DimensionMismatchThrows) {
  EXPECT_THROW(interp_distance(iv({1, 0}), iv({1, 0, 1})), ShapeError);
}

TEST(InterpDistance, SymmetricAndZeroOnSelfProperty) {
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> a(6), b(6);
    for (int i = 0; i < 6; ++i) {
      a[i] = rng.bernoulli(0.5) ? rng.uniform() : 0.0;
      b[i] = rng.bernoulli(0.5) ? rng.uniform() : 0.0;
    }
    a[t % 6] += 0.1;
    b[(t + 1) % 6] += 0.1;
    const double ab = interp_distance(iv(a), iv(b));
    EXPECT_EQ(ab, interp_distance(iv(b), iv(a)));
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_EQ(interp_distance(iv(a), iv(a)), 0.0);
  }
}

TEST(KernelWeight, ZeroDistanceIsOne) {
  for (double s : {0.1, 0.75, 3.0}) EXPECT_DOUBLE_EQ(kernel_weight(0.0, ProximityKernel(s)), 1.0);
}

TEST(KernelWeight, HandEvaluatedValues) {
  EXPECT_NEAR(kernel_weight(1.0, ProximityKernel(1.0)), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(kernel_weight(1.0, ProximityKernel(1.0)), 0.367879, 1e-6);
  EXPECT_NEAR(kernel_weight(0.5, ProximityKernel(0.25)), 0.018316, 1e-6);
}

TEST(KernelWeight, RejectsBadInput) {
  EXPECT_THROW(kernel_weight(-0.1, ProximityKernel()), ValueError);
  EXPECT_THROW(ProximityKernel(0.0), ValueError);
  EXPECT_THROW(ProximityKernel(-1.0), ValueError);
  EXPECT_DOUBLE_EQ(ProximityKernel().sigma, 0.75);
}

TEST(KernelWeight, StrictlyDecreasingProperty) {
  Rng rng(11);
  for (int t = 0; t < 2000; ++t) {
    const double sigma = 0.05 + 2.0 * rng.uniform();
    double d1 = rng.uniform(), d2 = rng.uniform();
    if (d1 == d2) continue;
    if (d1 > d2) std::swap(d1, d2);
    const ProximityKernel k(sigma);
    const double w1 = kernel_weight(d1, k), w2 = kernel_weight(d2, k);
    // Both can underflow to the same double for tiny sigma.
    if (w2 == 0.0) continue;
    EXPECT_GT(w1, w2) << "sigma=" << sigma << " d1=" << d1 << " d2=" << d2;
    EXPECT_LE(w1, 1.0);
  }
}

TEST(InterpVecTest, KeepsOnlyPositiveSortedEntries) {
  const InterpVec v = iv({0.0, 2.0, 0.0, 0.5});
  EXPECT_EQ(v.dim(), 4u);
  EXPECT_EQ(v.nnz(), 2u);
  EXPECT_EQ(v.activation(1), 2.0);
  EXPECT_EQ(v.activation(0), 0.0);
  EXPECT_TRUE(v.present(3));
  EXPECT_FALSE(v.present(2));
  EXPECT_THROW(InterpVec(3, {{1, -1.0}}), ValueError);
  EXPECT_THROW(InterpVec(3, {{5, 1.0}}), ShapeError);
}

TEST(InterpVecTest, MaskedDropsFeatures) {
  const InterpVec v = iv({1, 2, 3});
  const InterpVec m = v.masked(Mask{1, 0, 1});
  EXPECT_EQ(m, iv({1, 0, 3}));
}

TEST(OpaqueVecTest, RejectsNonFinite) {
  EXPECT_THROW(OpaqueVec({1.0, std::nan("")}), ValueError);
  EXPECT_THROW(OpaqueVec({INFINITY}), ValueError);
}

TEST(WeightedExampleTest, ValidatesLabelAndWeight) {
  EXPECT_THROW(WeightedExample(OpaqueVec({1.0}), 0, 1.0), ValueError);
  EXPECT_THROW(WeightedExample(OpaqueVec({1.0}), 1, 0.0), ValueError);
  EXPECT_NO_THROW(WeightedExample(OpaqueVec({1.0}), -1, 0.5));
}

TEST(InstanceTest, RejectsInconsistentInterpretableVector) {
  const DenseBridge bridge = DenseBridge::random(4, 3, 1);
  const Instance a = bridge.make("a", std::vector<double>{1, 0, 1});
  EXPECT_THROW(Instance("b", a.x(), iv({1, 1, 1}), bridge), InconsistentInstance);
  // The same pairing is accepted.
  EXPECT_NO_THROW(Instance("c", a.x(), iv({1, 0, 1}), bridge));
}

TEST(InstanceTest, UnpairedOpaqueVectorIsRejected) {
  const DenseBridge bridge = DenseBridge::random(4, 3, 1);
  EXPECT_THROW(Instance("z", OpaqueVec({1, 2, 3, 4}), iv({1, 0, 0}), bridge), ValueError);
}

TEST(DomainBridgeTest, AllOnesRealizesBaseBitForBit) {
  const DenseBridge bridge = DenseBridge::random(8, 5, 2);
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> d(5);
    for (auto& v : d) v = rng.bernoulli(0.6) ? rng.uniform() : 0.0;
    d[0] += 0.5;
    const Instance inst = bridge.make("i" + std::to_string(t), d);
    EXPECT_EQ(bridge.realize(inst, Mask(5, 1)), inst.x());
  }
}

TEST(DomainBridgeTest, RealizeInstancePairsMaskedVector) {
  const DenseBridge bridge = DenseBridge::random(6, 4, 9);
  const Instance base = bridge.make("base", std::vector<double>{1, 2, 0, 3});
  const Instance r = bridge.realize_instance(base, Mask{1, 0, 1, 0}, "r");
  EXPECT_EQ(r.x_interp(), iv({1, 0, 0, 0}));
  EXPECT_EQ(bridge.h_prime(r.x()), r.x_interp());
}

TEST(PairingRegistryTest, ConcurrentAddAndFind) {
  PairingRegistry reg;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&reg, t] {
      for (int i = 0; i < 200; ++i) {
        const double v = t * 1000 + i + 1;
        reg.add(OpaqueVec({v}), InterpVec::from_dense(std::vector<double>{v}));
        auto f = reg.find(OpaqueVec({v}));
        ASSERT_TRUE(f.has_value());
        ASSERT_EQ(f->activation(0), v);
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(reg.size(), 800u);
}

TEST(DatasetTest, RejectsDuplicatePoolIds) {
  const DenseBridge bridge = DenseBridge::identity(2);
  auto pool = std::make_shared<std::vector<Instance>>();
  pool->push_back(bridge.make("x", std::vector<double>{1, 0}));
  pool->push_back(bridge.make("x", std::vector<double>{0, 1}));
  EXPECT_THROW(Dataset(std::shared_ptr<const std::vector<Instance>>(pool)), ValueError);
}

TEST(RngTest, SeededStreamsRepeatAndDerivedSeedsDiffer) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next(), b.next());
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
  Rng c(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(c.below(7), 7u);
  }
}

}  // namespace
}  // namespace steer
