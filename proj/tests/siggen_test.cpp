#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cpsense/siggen.hpp"
#include "oracles.hpp"

using namespace cpsense;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

std::vector<double> periodogram(const CVector& x) {
  auto mag = oracle::dft_magnitude(x);
  for (auto& v : mag) v *= v;
  return mag;
}

}  // namespace

TEST(GenMp, QuarterRateTone) {
  const auto s = CoprimeScheme::make(2, 3, 1, 1, 32.0);
  const ToneSpec tone{8.0, 1.0, 0.0};
  const auto f = gen_mp(std::span(&tone, 1), s);
  ASSERT_EQ(f.x.size(), 12u);
  const cplx cycle[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (std::size_t n = 0; n < 12; ++n) EXPECT_LT(std::abs(f.x[n] - cycle[n % 4]), 1e-12) << n;
}

TEST(GenMp, RandomSceneStaysInBand) {
  std::mt19937_64 rng(50);
  const auto tones = random_tones(50, 2e9, 18e9, rng);
  ASSERT_EQ(tones.size(), 50u);
  for (const auto& t : tones) {
    EXPECT_GE(t.frequency, 2e9);
    EXPECT_LT(t.frequency, 18e9);
    EXPECT_GE(t.phase, 0.0);
    EXPECT_LT(t.phase, 2 * M_PI);
  }
  const auto s = CoprimeScheme::make(3, 4, 3000, 1, 32e9);
  EXPECT_EQ(gen_mp(tones, s).x.size(), 36012u);
}

TEST(GenMp, PowerOfEqualAmplitudeTones) {
  std::mt19937_64 rng(17);
  const auto s = CoprimeScheme::make(3, 4, 900, 1, 32e9);
  ASSERT_GE(s.frame_length(), 10000);
  const auto tones = random_tones(10, 2e9, 18e9, rng);
  EXPECT_NEAR(mean_power(gen_mp(tones, s).x), 10.0, 0.1);
  for (const auto& t : tones) EXPECT_NEAR(mean_power(gen_mp(std::span(&t, 1), s).x), 1.0, 1e-12);
}

TEST(GenMp, OutOfBand) {
  const auto s = CoprimeScheme::make(2, 3, 1, 1, 10.0);
  const ToneSpec at_fs{10.0}, negative{-1.0};
  EXPECT_EQ(code_of([&] { gen_mp(std::span(&at_fs, 1), s); }), ErrorCode::FrequencyOutOfBand);
  EXPECT_EQ(code_of([&] { gen_mp(std::span(&negative, 1), s); }), ErrorCode::FrequencyOutOfBand);
}

TEST(GenBpsk, ZeroCodeIsCarrier) {
  const auto s = CoprimeScheme::make(3, 4, 20, 1, 32e9);
  BpskSpec b{5e9, 1e9, std::vector<std::uint8_t>(64, 0), 1.0, 0.4};
  const ToneSpec tone{5e9, 1.0, 0.4};
  const auto bp = gen_bpsk(b, s);
  const auto mp = gen_mp(std::span(&tone, 1), s);
  for (std::size_t n = 0; n < bp.x.size(); ++n) EXPECT_LT(std::abs(bp.x[n] - mp.x[n]), 1e-12);
}

TEST(GenBpsk, AlternatingCodeMainLobe) {
  // fs = 1, R = 1/8: the +-1 modulation is a period-16 square wave, whose
  // discrete Fourier series puts 2 / (8 sin(pi/16))^2 of the power on the
  // fundamental pair fc +- R/2, the only lines inside the main lobe fc +- R.
  const auto s = CoprimeScheme::make(3, 4, 63, 1, 1.0);   // N = 768 = 48 * 16
  const std::size_t N = 768;
  std::vector<std::uint8_t> code(200);
  for (std::size_t k = 0; k < code.size(); ++k) code[k] = k % 2;
  const BpskSpec b{0.25, 0.125, code, 1.0, 0.0};
  const auto P = periodogram(gen_bpsk(b, s).x);
  double total = 0.0, lobe = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    total += P[k];
    const double f = double(k) / double(N);
    if (std::abs(f - 0.25) < 0.125) lobe += P[k];
  }
  const double expected = 2.0 / std::pow(8.0 * std::sin(M_PI / 16.0), 2);
  EXPECT_NEAR(lobe / total, expected, 1e-9);
  EXPECT_LT(P[N / 4], 1e-12 * total);                           // null at the carrier
  EXPECT_NEAR(P[N / 4 + N / 16], P[N / 4 - N / 16], 1e-6 * total);   // lines at fc +- R/2
  EXPECT_NEAR(P[N / 4 + N / 16] / total, expected / 2.0, 1e-9);
}

TEST(GenBpsk, SymbolBoundariesSnapToNearestSample) {
  // 2.5 samples per symbol, halves rounded away from zero: boundaries 0, 3, 5, 8, 10
  const auto s = CoprimeScheme::make(2, 3, 1, 1, 1.0);
  const BpskSpec b{0.0, 0.4, {0, 1, 0, 1, 0, 1}, 1.0, 0.0};
  const auto x = gen_bpsk(b, s).x;
  const double sign[12] = {1, 1, 1, -1, -1, 1, 1, 1, -1, -1, 1, 1};
  for (std::size_t n = 0; n < 12; ++n) EXPECT_DOUBLE_EQ(x[n].real(), sign[n]) << n;
}

TEST(GenBpsk, Errors) {
  const auto s = CoprimeScheme::make(2, 3, 1, 1, 10.0);
  EXPECT_EQ(code_of([&] { gen_bpsk({1.0, 10.0, {0}, 1.0, 0.0}, s); }), ErrorCode::SymbolRateTooHigh);
  EXPECT_EQ(code_of([&] { gen_bpsk({11.0, 1.0, {0}, 1.0, 0.0}, s); }),
            ErrorCode::FrequencyOutOfBand);
  EXPECT_EQ(code_of([&] { gen_bpsk({1.0, 1.0, {}, 1.0, 0.0}, s); }), ErrorCode::InvalidConfig);
}

TEST(GenLfm, ZeroBandwidthIsTone) {
  const auto s = CoprimeScheme::make(3, 4, 10, 1, 32e9);
  const LfmSpec l{7e9, 0.0, 1e-6, 1.0, 0.2};
  const ToneSpec t{7e9, 1.0, 0.2};
  const auto a = gen_lfm(l, s).x;
  const auto b = gen_mp(std::span(&t, 1), s).x;
  for (std::size_t n = 0; n < a.size(); ++n) EXPECT_LT(std::abs(a[n] - b[n]), 1e-12);
}

TEST(GenLfm, InstantaneousFrequencyAtMidFrame) {
  const auto s = CoprimeScheme::make(3, 4, 300, 1, 32e9);
  const auto N = s.frame_length();
  const double T = double(N) / s.fs();
  const LfmSpec l{4e9, 10e9, T, 1.0, 0.0};
  const auto x = gen_lfm(l, s).x;
  const std::size_t n = static_cast<std::size_t>(N / 2);
  // Central difference of the phase: fs (arg(x[n+1] conj(x[n-1]))) / (4 pi).
  const double f = std::arg(x[n + 1] * std::conj(x[n - 1])) / (4.0 * M_PI) * s.fs();
  double expected = l.start_frequency + l.bandwidth / 2.0;
  expected = std::fmod(expected, s.fs() / 2.0);   // arg() wraps at fs / 2
  EXPECT_NEAR(std::fmod(f + s.fs(), s.fs() / 2.0), expected, 1e-3 * s.fs());
}

TEST(GenLfm, SweepOutOfBand) {
  const auto s = CoprimeScheme::make(3, 4, 10, 1, 1.0);
  const double T = double(s.frame_length());
  EXPECT_EQ(code_of([&] { gen_lfm({0.9, 0.2, T, 1.0, 0.0}, s); }), ErrorCode::SweepOutOfBand);
  EXPECT_EQ(code_of([&] { gen_lfm({0.1, -0.2, T, 1.0, 0.0}, s); }), ErrorCode::SweepOutOfBand);
  EXPECT_NO_THROW(gen_lfm({0.6, -0.2, T, 1.0, 0.0}, s));
}

TEST(AddAwgn, NoiselessFlag) {
  const auto s = CoprimeScheme::make(2, 3, 1, 1, 1.0);
  const ToneSpec t{0.1};
  const auto f = gen_mp(std::span(&t, 1), s);
  EXPECT_EQ(add_awgn(f, {std::nullopt, 1}).x, f.x);
  EXPECT_EQ(add_awgn(f, {std::numeric_limits<double>::infinity(), 1}).x, f.x);
}

TEST(AddAwgn, CalibratedAndDeterministic) {
  const auto s = CoprimeScheme::make(3, 4, 100, 1, 1.0);
  const ToneSpec t{0.3};
  const auto clean = gen_mp(std::span(&t, 1), s);
  for (double snr : {-10.0, 0.0, 15.0}) {
    const auto noisy = add_awgn(clean, {snr, 42});
    CVector w(noisy.x.size());
    for (std::size_t n = 0; n < w.size(); ++n) w[n] = noisy.x[n] - clean.x[n];
    const double realized = 10.0 * std::log10(mean_power(clean.x) / mean_power(w));
    EXPECT_NEAR(realized, snr, 0.1);
    if (snr == 0.0) EXPECT_NEAR(mean_power(w), 1.0, 0.01);
    EXPECT_EQ(add_awgn(clean, {snr, 42}).x, noisy.x);
  }
  EXPECT_NE(add_awgn(clean, {0.0, 1}).x, add_awgn(clean, {0.0, 2}).x);
}

TEST(AddAwgn, ZeroSignal) {
  const NyquistFrame zero{CVector(16), 1.0};
  EXPECT_EQ(code_of([&] { add_awgn(zero, {0.0, 1}); }), ErrorCode::ZeroSignalPower);
}

TEST(ApplyDelay, ShiftsTimeNotSpectrum) {
  const auto s = CoprimeScheme::make(3, 4, 20, 1, 32e9);
  const ToneSpec t{3.3e9, 1.0, 0.7};
  auto gen = [&](std::int64_t d) { return gen_mp(std::span(&t, 1), s, d); };
  EXPECT_EQ(apply_delay(gen, 0).x, gen(0).x);
  for (std::int64_t d : {1, 1000, 100000}) {
    const auto shifted = apply_delay(gen, d).x;
    const auto base = gen(0).x;
    const cplx rot = std::polar(1.0, 2.0 * M_PI * std::fmod(t.frequency / s.fs() * double(d), 1.0));
    for (std::size_t n = 0; n < base.size(); ++n) EXPECT_LT(std::abs(shifted[n] - base[n] * rot), 1e-9);
  }
  EXPECT_EQ(code_of([&] { apply_delay(gen, -1); }), ErrorCode::NonPositiveParameter);
}

TEST(ApplyDelay, BpskContinuesTheCode) {
  const auto s = CoprimeScheme::make(2, 3, 2, 1, 1.0);
  const BpskSpec b{0.0, 0.25, {0, 1, 1, 0, 1, 0, 0, 1, 1, 1}, 1.0, 0.0};
  const auto full = gen_bpsk(b, CoprimeScheme::make(2, 3, 3, 1, 1.0)).x;   // N = 24
  const auto late = apply_delay([&](std::int64_t d) { return gen_bpsk(b, s, d); }, 6).x;   // N = 18
  for (std::size_t n = 0; n < late.size(); ++n) EXPECT_LT(std::abs(late[n] - full[n + 6]), 1e-12);
}

TEST(Synthesize, DeterministicAndLinear) {
  const auto s = CoprimeScheme::make(3, 4, 30, 1, 32e9);
  std::mt19937_64 rng(3);
  auto bp = random_bpsk(2, 2e9, 18e9, 1e8, s.fs(), s.frame_length(), rng);
  std::vector<ComponentSpec> parts{ToneSpec{1e9, 0.5, 0.1}, bp[0], bp[1],
                                   LfmSpec{4e9, 1e9, 1e-7, 1.0, 0.0}};
  const auto a = synthesize(parts, s);
  EXPECT_EQ(a.x, synthesize(parts, s).x);
  CVector sum(a.x.size());
  for (const auto& part : parts) {
    const auto one = synthesize(std::span(&part, 1), s);
    for (std::size_t n = 0; n < sum.size(); ++n) sum[n] += one.x[n];
  }
  for (std::size_t n = 0; n < sum.size(); ++n) EXPECT_LT(std::abs(sum[n] - a.x[n]), 1e-12);
}

TEST(RealMode, FoldingAndMirrorLines) {
  EXPECT_DOUBLE_EQ(fold_to_real_band(3.0, 10.0), 3.0);
  EXPECT_DOUBLE_EQ(fold_to_real_band(7.0, 10.0), 3.0);
  EXPECT_DOUBLE_EQ(fold_to_real_band(13.0, 10.0), 3.0);

  const auto s = CoprimeScheme::make(3, 5, 4, 1, 75.0);   // N = 75, bins at 1 Hz
  const ToneSpec t{20.0};
  const auto real = to_real(gen_mp(std::span(&t, 1), s));
  const auto mag = oracle::dft_magnitude(real.x);
  EXPECT_NEAR(mag[20], 75.0, 1e-9);
  EXPECT_NEAR(mag[55], 75.0, 1e-9);
  for (auto v : real.x) EXPECT_EQ(v.imag(), 0.0);
}
