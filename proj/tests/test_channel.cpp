#include "overlink/channel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <vector>

namespace ol = overlink;

TEST(Pdp, TdlaShape) {
  const auto pdp = ol::tdla_pdp(100e-9);
  ASSERT_EQ(pdp.taps.size(), 23u);
  double total = 0.0;
  for (std::size_t i = 0; i < pdp.taps.size(); ++i) {
    total += pdp.taps[i].power;
    EXPECT_GT(pdp.taps[i].power, 0.0);
    if (i > 0) {
      EXPECT_GT(pdp.taps[i].delay_s, pdp.taps[i - 1].delay_s);
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(pdp.taps.front().delay_s, 0.0, 1e-18);
  EXPECT_NEAR(pdp.taps.back().delay_s, 965.86e-9, 1e-11);
}

TEST(Pdp, ScalesWithDelaySpread) {
  const auto a = ol::tdla_pdp(100e-9);
  const auto b = ol::tdla_pdp(300e-9);
  for (std::size_t i = 0; i < a.taps.size(); ++i) {
    EXPECT_NEAR(b.taps[i].delay_s, 3.0 * a.taps[i].delay_s, 1e-15);
    EXPECT_DOUBLE_EQ(b.taps[i].power, a.taps[i].power);
  }
}

TEST(Doppler, SpeedConversion) {
  // 500 km/h at 2 GHz: (500/3.6) * 2e9 / 299792458 = 926.567 Hz.
  EXPECT_NEAR(ol::doppler_from_speed(5.0, 2e9), 9.26567, 1e-4);
  EXPECT_NEAR(ol::doppler_from_speed(500.0, 2e9), 926.567, 0.01);
  EXPECT_DOUBLE_EQ(ol::doppler_from_speed(0.0, 2e9), 0.0);
}

TEST(Fading, ZeroDopplerIsTimeConstant) {
  const auto pdp = ol::tdla_pdp(100e-9);
  const auto fp = ol::generate_fading(pdp, 0.0, 14, 1.0 / 30e3, 99);
  for (int tap = 0; tap < fp.n_taps; ++tap) {
    for (int t = 1; t < fp.n_samples; ++t) {
      EXPECT_NEAR(std::abs(fp.at(tap, t) - fp.at(tap, 0)), 0.0, 1e-12);
    }
  }
}

TEST(Fading, SeedDeterminismAndIndependence) {
  const auto pdp = ol::tdla_pdp(100e-9);
  const auto a = ol::generate_fading(pdp, 10.0, 14, 1.0 / 30e3, 5);
  const auto b = ol::generate_fading(pdp, 10.0, 14, 1.0 / 30e3, 5);
  const auto c = ol::generate_fading(pdp, 10.0, 14, 1.0 / 30e3, 6);
  EXPECT_EQ(a.gains.size(), b.gains.size());
  for (std::size_t i = 0; i < a.gains.size(); ++i) {
    EXPECT_EQ(a.gains[i], b.gains[i]);
  }
  double diff = 0.0;
  for (std::size_t i = 0; i < a.gains.size(); ++i) {
    diff += std::abs(a.gains[i] - c.gains[i]);
  }
  EXPECT_GT(diff, 1e-3);
}

TEST(Fading, UnitAveragePower) {
  const auto pdp = ol::tdla_pdp(100e-9);
  double power = 0.0;
  const int n_seeds = 3000;
  for (int s = 0; s < n_seeds; ++s) {
    const auto fp = ol::generate_fading(pdp, 50.0, 1, 1.0 / 30e3, 1000 + s);
    for (int tap = 0; tap < fp.n_taps; ++tap) power += ol::abs2(fp.at(tap, 0));
  }
  EXPECT_NEAR(power / n_seeds, 1.0, 0.02);
}

TEST(Fading, MarginalIsNearGaussian) {
  // Excess kurtosis of the per-tap quadratures; the 64-sinusoid sum gives
  // 3 - 3/(2*64), comfortably inside the 3 +/- 0.1 window.
  const auto pdp = ol::tdla_pdp(100e-9);
  double sum2 = 0.0, sum4 = 0.0;
  std::size_t n = 0;
  for (int s = 0; s < 400; ++s) {
    const auto fp = ol::generate_fading(pdp, 100.0, 60, 1.0 / 30e3, 77000 + s);
    for (int tap = 0; tap < fp.n_taps; ++tap) {
      const double inv = 1.0 / std::sqrt(pdp.taps[tap].power);
      for (int t = 0; t < fp.n_samples; t += 3) {  // decimate: near-iid samples
        for (double x : {fp.at(tap, t).real() * inv, fp.at(tap, t).imag() * inv}) {
          sum2 += x * x;
          sum4 += x * x * x * x;
          ++n;
        }
      }
    }
  }
  const double var = sum2 / n;
  const double kurt = sum4 / n / (var * var);
  EXPECT_NEAR(kurt, 3.0, 0.1);
}

TEST(Fading, AutocorrelationTracksBessel) {
  // Ensemble-averaged lag correlation vs J0(2*pi*fd*tau) at highway Doppler.
  const double fd = ol::doppler_from_speed(500.0, 2e9);
  const double ts = 1.0 / 30e3;
  const auto pdp = ol::tdla_pdp(100e-9);
  const int n_proc = 150;
  const int n_samp = 90;  // 3 ms
  std::vector<std::complex<double>> acc(31, {0.0, 0.0});
  double p0 = 0.0;
  for (int s = 0; s < n_proc; ++s) {
    const auto fp = ol::generate_fading(pdp, fd, n_samp, ts, 31000 + s);
    for (int tap = 0; tap < fp.n_taps; ++tap) {
      for (int lag = 0; lag <= 30; ++lag) {
        std::complex<double> c(0, 0);
        for (int t = 0; t + lag < n_samp; ++t) {
          c += fp.at(tap, t) * std::conj(fp.at(tap, t + lag));
        }
        acc[lag] += c / (pdp.taps[tap].power * (n_samp - lag));
      }
    }
    p0 += 1.0;
  }
  const double norm = acc[0].real();
  for (int lag = 0; lag <= 30; ++lag) {
    const double expected = std::cyl_bessel_j(0.0, 2.0 * ol::kPi * fd * lag * ts);
    EXPECT_NEAR(acc[lag].real() / norm, expected, 0.06) << "lag " << lag;
  }
}

TEST(FreqResponse, MatchesDirectSum) {
  const auto pdp = ol::tdla_pdp(100e-9);
  const auto fp = ol::generate_fading(pdp, 30.0, 4, 1.0 / 30e3, 12);
  const auto h = ol::freq_response(fp, pdp, 48, 30e3);
  ASSERT_EQ(h.size(), 4u * 48u);
  for (int t = 0; t < 4; ++t) {
    for (int f = 0; f < 48; ++f) {
      ol::cplx ref(0, 0);
      for (int tap = 0; tap < fp.n_taps; ++tap) {
        const double ang = -2.0 * ol::kPi * (f * 30e3) * pdp.taps[tap].delay_s;
        ref += fp.at(tap, t) * ol::cplx(std::cos(ang), std::sin(ang));
      }
      EXPECT_NEAR(std::abs(h[t * 48 + f] - ref), 0.0, 1e-12);
    }
  }
}

TEST(FreqResponse, TwoTapNotchAnalytic) {
  // Equal unit taps at 0 and tau produce H(f) = 1 + exp(-j*2*pi*f*tau):
  // a notch where f*tau = 1/2.
  ol::PowerDelayProfile pdp;
  pdp.taps = {{0.0, 0.5}, {1.0 / (24.0 * 30e3), 0.5}};
  ol::FadingProcess fp;
  fp.n_taps = 2;
  fp.n_samples = 1;
  fp.gains = {{1.0, 0.0}, {1.0, 0.0}};
  const auto h = ol::freq_response(fp, pdp, 48, 30e3);
  EXPECT_NEAR(std::abs(h[0]), 2.0, 1e-12);
  EXPECT_NEAR(std::abs(h[12]), 0.0, 1e-12);  // 12/24 turns = half cycle
  EXPECT_NEAR(std::abs(h[24]), 2.0, 1e-12);
  for (int f = 0; f < 48; ++f) {
    const double ang = -2.0 * ol::kPi * f / 24.0;
    const ol::cplx ref = 1.0 + ol::cplx(std::cos(ang), std::sin(ang));
    EXPECT_NEAR(std::abs(h[f] - ref), 0.0, 1e-12);
  }
}

TEST(Awgn, VarianceAndDeterminism) {
  std::vector<ol::cplx> clean(100000, ol::cplx(1.0, -2.0));
  const auto noisy = ol::add_awgn(clean, 0.25, 777);
  const auto noisy2 = ol::add_awgn(clean, 0.25, 777);
  double p = 0.0;
  ol::cplx mean(0, 0);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    EXPECT_EQ(noisy[i], noisy2[i]);
    p += ol::abs2(noisy[i] - clean[i]);
    mean += noisy[i] - clean[i];
  }
  EXPECT_NEAR(p / clean.size(), 0.25, 0.01);
  EXPECT_NEAR(std::abs(mean) / static_cast<double>(clean.size()), 0.0, 0.01);
}

TEST(Awgn, ZeroVarianceIsIdentity) {
  std::vector<ol::cplx> clean = {{1, 2}, {3, 4}};
  const auto out = ol::add_awgn(clean, 0.0, 1);
  EXPECT_EQ(out, clean);
}
