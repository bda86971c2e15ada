#include <gtest/gtest.h>

#include <cmath>

#include "airfed/codec.hpp"
#include "airfed/diagnostics.hpp"
#include "airfed/error.hpp"

namespace airfed::codec {
namespace {

const channel::QuantizationGrid kGrid = channel::make_grid(8);

TEST(BetaOf, SmallestCoveringExponent) {
  const auto c = make_codec(0.01, kGrid.delta);
  EXPECT_EQ(beta_of(0.0, c), 0);
  EXPECT_EQ(beta_of(0.01, c), 0);
  EXPECT_EQ(beta_of(-0.01, c), 0);
  EXPECT_EQ(beta_of(std::nextafter(0.01, 1.0), c), 1);
  EXPECT_EQ(beta_of(0.02, c), 1);
  EXPECT_EQ(beta_of(0.0201, c), 2);
  EXPECT_EQ(beta_of(std::ldexp(0.01, 40), c), 40);
  EXPECT_EQ(beta_of(std::nextafter(std::ldexp(0.01, 40), INFINITY), c), 41);
}

TEST(BetaOf, MatchesLinearScan) {
  const auto c = make_codec(1e-3, kGrid.delta);
  RngStream r(1);
  for (int t = 0; t < 100000; ++t) {
    const double x = std::ldexp(r.uniform() + 0.5, static_cast<int>(r.below(70)) - 20);
    int k = 0;
    while (std::fabs(x) > std::ldexp(1e-3, k)) ++k;
    if (k > c.beta_max) {
      EXPECT_THROW(beta_of(x, c), ExponentOverflow);
    } else {
      ASSERT_EQ(beta_of(x, c), k) << x;
    }
  }
}

TEST(BetaOf, RejectsNonFinite) {
  const auto c = make_codec(0.01, kGrid.delta);
  EXPECT_THROW(beta_of(NAN, c), InvalidInput);
  EXPECT_THROW(beta_of(INFINITY, c), InvalidInput);
  EXPECT_THROW(beta_of(1e300, make_codec(0.01, kGrid.delta, 10)), ExponentOverflow);
}

TEST(MakeCodec, ValidatesParameters) {
  EXPECT_THROW(make_codec(0.0, 0.2), InvalidInput);
  EXPECT_THROW(make_codec(0.1, 1.0), InvalidInput);
  EXPECT_THROW(make_codec(0.1, 0.2, 0), InvalidInput);
  EXPECT_NO_THROW(make_codec(0.1, 0.2, 1000));
}

TEST(BitsPerExponent, CeilLog2) {
  EXPECT_EQ(bits_per_exponent(make_codec(0.1, 0.2, 63)), 6);
  EXPECT_EQ(bits_per_exponent(make_codec(0.1, 0.2, 64)), 7);
  EXPECT_EQ(bits_per_exponent(make_codec(0.1, 0.2, 1)), 1);
  EXPECT_EQ(bits_per_exponent(make_codec(0.1, 0.2, 255)), 8);
}

TEST(Codec, IdentitiesOverLogUniformInputs) {
  for (int q : {4, 8, 16}) {
    const auto g = channel::make_grid(q);
    const auto c = make_codec(1e-3, g.delta);
    const auto rep = harness::codec_identities(c, 200000, RngStream(q));
    EXPECT_LE(rep.max_ulps, 2u) << rep.worst_x;
    EXPECT_TRUE(rep.psi_ok);
    EXPECT_LE(rep.max_abs_psi, 1.0 - g.delta);
    EXPECT_EQ(rep.bracket_failures, 0u);
  }
}

TEST(Codec, PsiSignAndExactAssembleOnBinaryGrid) {
  const auto c = make_codec(0.25, 0.5);
  EXPECT_EQ(psi_of(0.25, c), 0.5);
  EXPECT_EQ(psi_of(-1.0, c), -0.5);
  EXPECT_EQ(assemble(psi_of(3.0, c), beta_of(3.0, c), c), 3.0);
}

TEST(UlpDistance, Basics) {
  EXPECT_EQ(harness::ulp_distance(1.0, 1.0), 0u);
  EXPECT_EQ(harness::ulp_distance(1.0, std::nextafter(1.0, 2.0)), 1u);
  EXPECT_EQ(harness::ulp_distance(-0.0, 0.0), 0u);
  EXPECT_EQ(harness::ulp_distance(std::nextafter(0.0, -1.0), std::nextafter(0.0, 1.0)), 2u);
}

TEST(StageStreams, IndependentPerCoordinateAndStage) {
  const RngStream link(5);
  EXPECT_NE(stage_stream(link, 0, Stage::Dac).key(), stage_stream(link, 0, Stage::Awgn).key());
  EXPECT_NE(stage_stream(link, 0, Stage::Dac).key(), stage_stream(link, 1, Stage::Dac).key());
  EXPECT_EQ(stage_stream(link, 3, Stage::Postcode).key(), link.child({3, 3}).key());
}

TEST(TransmitVector, DeterministicAndAccounted) {
  const auto pc = postcode::make_postcode(kGrid, 0.25 * kGrid.delta);
  ASSERT_TRUE(pc.has_value());
  const auto c = make_codec(0.01, kGrid.delta);
  const std::vector<double> u{0.3, -1.7, 0.0, 5e-4, 12.0};
  const channel::AwgnChannel ch{0.25 * kGrid.delta};
  const auto a = transmit_vector(u, c, kGrid, ch, pc->hm, RngStream(9));
  const auto b = transmit_vector(u, c, kGrid, ch, pc->hm, RngStream(9));
  EXPECT_EQ(a.u_hat, b.u_hat);
  EXPECT_EQ(a.physical_symbols, 5u);
  EXPECT_EQ(a.coded_bits, 5u * 6u);
}

TEST(TransmitVector, NoiselessIdentityPathIsDacOnly) {
  const auto pc = postcode::make_postcode(kGrid, 0.0);
  const auto c = make_codec(0.01, kGrid.delta);
  const std::vector<double> u{0.3, -1.7};
  const auto enc = encode(u, c);
  const auto out = transmit_vector(u, c, kGrid, channel::AwgnChannel{0.0}, pc->hm, RngStream(1));
  for (std::size_t i = 0; i < u.size(); ++i) {
    // Output is one of the two neighbouring scaled levels.
    const double scale = std::ldexp(0.01, enc.beta[i]) / (1 - kGrid.delta);
    EXPECT_LE(std::fabs(out.u_hat[i] - u[i]), scale * kGrid.delta + 1e-15);
  }
}

TEST(PipelineDiagnostics, UnbiasedWithinBound) {
  const double sigma = 0.25 * kGrid.delta;
  const auto pc = postcode::make_postcode(kGrid, sigma);
  const auto c = make_codec(0.01, kGrid.delta);
  RngStream r(4);
  std::vector<double> u(16);
  for (auto& x : u) x = 4 * r.uniform() - 2;
  const auto d = harness::pipeline_diagnostics(u, c, kGrid, channel::AwgnChannel{sigma}, pc->hm,
                                               20000, RngStream(12));
  EXPECT_TRUE(d.unbiased_ok) << d.max_abs_z;
  EXPECT_TRUE(d.variance_ok);
  EXPECT_LT(d.mse, d.bound);
}

TEST(PipelineDiagnostics, DetectsMisnormalizedPostcode) {
  const double sigma = 0.25 * kGrid.delta;
  const auto pc = postcode::make_postcode(kGrid, sigma);
  Matrix bad = pc->hm.h();
  for (std::size_t i = 1; i + 1 < bad.rows(); ++i)
    for (std::size_t k = 0; k < bad.cols(); ++k) bad(i, k) *= 0.8;
  const auto hm = postcode::PostcodeMatrix::unchecked(bad, pc->hm.v_star());
  const auto c = make_codec(0.01, kGrid.delta);
  const std::vector<double> u(16, 0.7);
  const auto d = harness::pipeline_diagnostics(u, c, kGrid, channel::AwgnChannel{sigma}, hm, 20000,
                                               RngStream(12));
  EXPECT_FALSE(d.unbiased_ok);
}

}  // namespace
}  // namespace airfed::codec
