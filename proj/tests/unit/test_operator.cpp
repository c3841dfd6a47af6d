// Copyright 2026 The ethsim Authors
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

#include <gtest/gtest.h>

#include <algorithm>

#include "ethsim/error.hpp"
#include "ethsim/operator.hpp"
#include "ethsim/serialize.hpp"
#include "test_util.hpp"

namespace ethsim {
namespace {

using testing::max_abs_diff;

const Operator kPauliX = Operator::from_rows({{0, 1}, {1, 0}});

TEST(Operator, RejectsNonSquare) {
  EXPECT_THROW(Operator(Matrix::Zero(2, 3)), InvalidArgument);
  EXPECT_THROW(Operator(Matrix(0, 0)), InvalidArgument);
}

TEST(Operator, DoubleAdjointIsIdentity) {
  CounterRng rng(1, 0);
  for (int i = 0; i < 20; ++i) {
    const Operator a = testing::random_operator(1 + i % 6, rng);
    EXPECT_EQ(max_abs_diff(a.adjoint().adjoint(), a), 0.0);
  }
}

TEST(Operator, DimensionMismatchThrows) {
  EXPECT_THROW(Operator::identity(2) * Operator::identity(3), InvalidArgument);
  EXPECT_THROW(Operator::identity(2) + Operator::identity(3), InvalidArgument);
}

TEST(SpectralDecompose, IdentityHasOneCluster) {
  const auto sd = spectral_decompose(Operator::diagonal({1, 1}));
  ASSERT_EQ(sd.size(), 1u);
  EXPECT_NEAR(sd.eigenvalues[0], 1.0, 1e-15);
  EXPECT_LT(max_abs_diff(sd.projections[0], Operator::identity(2)), 1e-15);
}

TEST(SpectralDecompose, DiagonalInput) {
  const auto sd = spectral_decompose(Operator::diagonal({-1, 1}));
  ASSERT_EQ(sd.size(), 2u);
  EXPECT_NEAR(sd.eigenvalues[0], -1.0, 1e-15);
  EXPECT_NEAR(sd.eigenvalues[1], 1.0, 1e-15);
  EXPECT_LT(max_abs_diff(sd.projections[0], Operator::diagonal({1, 0})), 1e-15);
  EXPECT_LT(max_abs_diff(sd.projections[1], Operator::diagonal({0, 1})), 1e-15);
}

TEST(SpectralDecompose, PauliX) {
  const auto sd = spectral_decompose(kPauliX);
  ASSERT_EQ(sd.size(), 2u);
  EXPECT_NEAR(sd.eigenvalues[0], -1.0, 1e-15);
  EXPECT_NEAR(sd.eigenvalues[1], 1.0, 1e-15);
  const Operator minus = Operator::from_rows({{0.5, -0.5}, {-0.5, 0.5}});
  const Operator plus = Operator::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_LT(max_abs_diff(sd.projections[0], minus), 1e-15);
  EXPECT_LT(max_abs_diff(sd.projections[1], plus), 1e-15);
  // Independent check by multiplication.
  for (const auto& p : sd.projections) EXPECT_LT(max_abs_diff(p * p, p), 1e-15);
  EXPECT_LT(max_abs_diff(sd.reconstruct(), kPauliX), 1e-15);
}

TEST(SpectralDecompose, RejectsNonHermitianWithDiagnostic) {
  const Operator n = Operator::from_rows({{0, 1}, {0, 0}});
  try {
    spectral_decompose(n);
    FAIL() << "expected a throw";
  } catch (const InvalidArgument& e) {
    // ||(N - N*)/2|| = 1/2
    EXPECT_NE(std::string(e.what()).find("0.5"), std::string::npos) << e.what();
  }
}

TEST(SpectralDecompose, ClustersNearDegenerateEigenvalues) {
  const auto sd = spectral_decompose(Operator::diagonal({1.0, 1.0 + 1e-10, 2.0}));
  ASSERT_EQ(sd.size(), 2u);
  EXPECT_NEAR(sd.projections[0].trace().real(), 2.0, 1e-14);
  // Clusters further apart than the tolerance stay separate.
  EXPECT_EQ(spectral_decompose(Operator::diagonal({1.0, 1.0 + 1e-6})).size(), 2u);
}

TEST(SpectralDecompose, RandomInvariants) {
  CounterRng rng(2, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 1 + trial % 16;
    Operator x = testing::random_hermitian(d, rng);
    if (trial % 3 == 0) {
      // Force exact degeneracies through a spectrum with repeats.
      std::vector<double> diag_vals(d);
      for (std::size_t i = 0; i < d; ++i) diag_vals[i] = double(i % 3);
      std::vector<Complex> c(diag_vals.begin(), diag_vals.end());
      const Operator u = testing::random_unitary(d, rng);
      x = Operator(u.matrix() * Operator::diagonal(std::span<const Complex>(c)).matrix() *
                   u.matrix().adjoint());
      x = Complex(0.5) * (x + x.adjoint());
    }
    const auto sd = spectral_decompose(x);
    EXPECT_LE(sd.max_residual(x), 1e-10) << "trial " << trial;
    for (std::size_t j = 1; j < sd.size(); ++j) EXPECT_GT(sd.eigenvalues[j], sd.eigenvalues[j - 1]);
  }
}

TEST(OperatorNorm, Examples) {
  EXPECT_NEAR(operator_norm(Operator::identity(3)), 1.0, 1e-15);
  EXPECT_NEAR(operator_norm(Operator::diagonal({2, -5})), 5.0, 1e-14);
  EXPECT_NEAR(operator_norm(Operator::from_rows({{0, 1}, {0, 0}})), 1.0, 1e-15);
  EXPECT_EQ(operator_norm(Operator::zero(4)), 0.0);
}

TEST(OperatorNorm, SubMultiplicative) {
  CounterRng rng(3, 0);
  for (int i = 0; i < 100; ++i) {
    const std::size_t d = 1 + i % 8;
    const Operator a = testing::random_operator(d, rng);
    const Operator b = testing::random_operator(d, rng);
    EXPECT_LE(operator_norm(a * b), operator_norm(a) * operator_norm(b) * (1 + 1e-12));
  }
}

TEST(Conjugate, Examples) {
  CounterRng rng(4, 0);
  const Operator a = testing::random_operator(3, rng);
  EXPECT_LT(max_abs_diff(conjugate(a, Operator::identity(3)), a), 1e-15);
  const double s = std::sqrt(0.5);
  const Operator h = Operator::from_rows({{s, s}, {s, -s}});
  const Operator expected = Operator::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  EXPECT_LT(max_abs_diff(conjugate(Operator::diagonal({1, 0}), h), expected), 1e-15);
}

TEST(Conjugate, RejectsNonUnitary) {
  EXPECT_THROW(conjugate(Operator::identity(2), Operator::diagonal({1, 2})), InvalidArgument);
}

TEST(Conjugate, PreservesSpectrumHermiticityAndTrace) {
  CounterRng rng(5, 0);
  for (int i = 0; i < 100; ++i) {
    const std::size_t d = 1 + i % 8;
    const Operator a = testing::random_hermitian(d, rng);
    const Operator u = testing::random_unitary(d, rng);
    const Operator c = conjugate(a, u);
    Eigen::SelfAdjointEigenSolver<Matrix> ea(a.matrix(), Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Matrix> ec(0.5 * (c.matrix() + c.matrix().adjoint()),
                                             Eigen::EigenvaluesOnly);
    EXPECT_LT((ea.eigenvalues() - ec.eigenvalues()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE(c.hermiticity_defect(), 1e-12 * std::max(1.0, operator_norm(a)));
    EXPECT_NEAR(c.trace().real(), a.trace().real(), 1e-12 * std::max(1.0, hs_norm(a)));
  }
}

TEST(DensityState, Validation) {
  EXPECT_NO_THROW(DensityState::diagonal({0.3, 0.7}));
  EXPECT_THROW(DensityState::diagonal({0.3, 0.6}), InvalidArgument);
  EXPECT_THROW(DensityState::diagonal({1.2, -0.2}), InvalidArgument);
  EXPECT_THROW(DensityState(Operator::from_rows({{0.5, 1}, {0, 0.5}})), InvalidArgument);
  const DensityState p = DensityState::pure(Vector::Ones(2));
  EXPECT_NEAR(p.expectation(kPauliX).real(), 1.0, 1e-15);
}

TEST(PartitionOfUnity, Validation) {
  EXPECT_NO_THROW(PartitionOfUnity::computational({"a", "b", "c"}));
  EXPECT_THROW(PartitionOfUnity({"a", "a"}, {Operator::diagonal({1, 0}), Operator::diagonal({0, 1})}),
               InvalidArgument);
  EXPECT_THROW(PartitionOfUnity({"a", "b"}, {Operator::diagonal({1, 0}), Operator::diagonal({1, 0})}),
               InvalidArgument);
  EXPECT_THROW(PartitionOfUnity({"a"}, {Operator::diagonal({1, 0})}), InvalidArgument);
  EXPECT_THROW(PartitionOfUnity({"a", "b"}, {Operator::diagonal({2, 0}), Operator::diagonal({0, 1})}),
               InvalidArgument);
  const auto p = PartitionOfUnity::computational({"+", "-"});
  EXPECT_THROW(p.projection("0"), InvalidArgument);
  EXPECT_EQ(p.index_of("-"), 1u);
}

TEST(PartitionOfUnity, SpectralLabelsAreRounded) {
  const auto p = PartitionOfUnity::from_spectral(spectral_decompose(kPauliX));
  EXPECT_EQ(p.labels(), (std::vector<std::string>{"-1", "1"}));
}

TEST(FormatLabel, ShortestRoundTrip) {
  EXPECT_EQ(format_label(0.3), "0.3");
  EXPECT_EQ(format_label(-0.0), "0");
  EXPECT_EQ(format_label(1e-20), "1e-20");
}

TEST(Serialize, OperatorRoundTrip) {
  CounterRng rng(6, 0);
  for (int i = 0; i < 20; ++i) {
    const Operator a = testing::random_operator(1 + i % 5, rng);
    const Json j = Json::parse(to_json(a).dump());
    const Operator b = operator_from_json(j);
    const double rel = (a.matrix() - b.matrix()).norm() / a.matrix().norm();
    EXPECT_LE(rel, 1e-15);
  }
}

TEST(Serialize, ImaginaryPartOptionalAndErrorsNamePath) {
  const Operator a = operator_from_json(Json::parse(R"({"dim": 2, "re": [[1, 0], [0, 2]]})"));
  EXPECT_EQ(a.matrix()(1, 1), Complex(2.0));
  try {
    operator_from_json(Json::parse(R"({"dim": 2, "re": [[1, 0], [0, "x"]]})"), "/op");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "/op/re/1/1");
  }
}

}  // namespace
}  // namespace ethsim
