#include "insar/interferometry.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "insar/phase.hpp"

namespace insar {

void FilterConfig::validate() const {
  if (!(goldstein_alpha >= 0.0 && goldstein_alpha <= 1.0))
    throw Error(Errc::InvalidArgument, "goldstein alpha must be in [0, 1]");
  if (patch < 2 || (patch & (patch - 1)) != 0)
    throw Error(Errc::InvalidArgument, "filter patch must be a power of two >= 2");
  if (overlap < 0 || overlap >= patch)
    throw Error(Errc::InvalidArgument, "filter overlap must satisfy 0 <= overlap < patch");
  if (coherence_window < 1 || coherence_window % 2 == 0)
    throw Error(Errc::InvalidArgument, "coherence window must be odd");
}

Interferogram form_interferogram(const ComplexRaster& master, const ComplexRaster& slave,
                                 const PairSpec& pair) {
  require_compatible(master.meta(), slave.meta());
  Interferogram ifg{master.meta(), RealRaster(master.meta(), RasterKind::Phase),
                    RealRaster(master.meta(), RasterKind::Coherence, RealRaster::kNoData), pair};
  for (std::size_t i = 0; i < master.size(); ++i) {
    const std::complex<double> m(master[i]), s(slave[i]);
    if (std::norm(m) == 0.0 || std::norm(s) == 0.0) {
      ifg.phase.mask(i);
      continue;
    }
    ifg.phase.set(i, wrap_phase(std::arg(m * std::conj(s))));
  }
  return ifg;
}

RealRaster flat_earth_phase(const GridMeta& meta, const PairSpec& pair,
                            const AcquisitionMeta& acq) {
  acq.validate();
  const double theta = acq.incidence_deg * kPi / 180.0;
  const double k = 4.0 * kPi / acq.wavelength_m * pair.perp_baseline_m /
                   (acq.slant_range_m * std::tan(theta));
  RealRaster out(meta, RasterKind::Phase, 0.0);
  for (int r = 0; r < meta.height; ++r)
    for (int c = 0; c < meta.width; ++c) out.set(r, c, k * c * meta.pixel_spacing_east);
  return out;
}

RealRaster topographic_phase(const RealRaster& dem, const PairSpec& pair,
                             const AcquisitionMeta& acq) {
  acq.validate();
  const double theta = acq.incidence_deg * kPi / 180.0;
  const double k =
      4.0 * kPi / acq.wavelength_m * pair.perp_baseline_m / (acq.slant_range_m * std::sin(theta));
  RealRaster out(dem.meta(), RasterKind::Phase, 0.0);
  for (std::size_t i = 0; i < dem.size(); ++i) {
    if (dem.masked(i))
      out.mask(i);
    else
      out.set(i, k * dem[i]);
  }
  return out;
}

RealRaster add_wrapped(const RealRaster& phase, const RealRaster& add, double sign) {
  require_compatible(phase.meta(), add.meta());
  RealRaster out(phase.meta(), RasterKind::Phase, 0.0);
  for (std::size_t i = 0; i < phase.size(); ++i) {
    if (phase.masked(i) || add.masked(i))
      out.mask(i);
    else
      out.set(i, wrap_phase(phase[i] + sign * add[i]));
  }
  return out;
}

Interferogram remove_flat_earth(const Interferogram& ifg, const PairSpec& pair,
                                const AcquisitionMeta& acq) {
  Interferogram out = ifg;
  out.phase = add_wrapped(ifg.phase, flat_earth_phase(ifg.meta, pair, acq), -1.0);
  return out;
}

Interferogram remove_topographic_phase(const Interferogram& ifg, const RealRaster& dem,
                                       const PairSpec& pair, const AcquisitionMeta& acq) {
  require_compatible(ifg.meta, dem.meta());
  Interferogram out = ifg;
  out.phase = add_wrapped(ifg.phase, topographic_phase(dem, pair, acq), -1.0);
  return out;
}

namespace {

// Summed-area table with a zero guard row/column.
class Integral {
 public:
  Integral(int width, int height) : w_(width + 1), data_((width + 1) * (height + 1), 0.0) {}

  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * w_ + c]; }
  double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * w_ + c]; }

  // Sum over rows [r0, r1), cols [c0, c1).
  double box(int r0, int c0, int r1, int c1) const {
    return at(r1, c1) - at(r0, c1) - at(r1, c0) + at(r0, c0);
  }

 private:
  std::size_t w_;
  std::vector<double> data_;
};

}  // namespace

RealRaster estimate_coherence(const ComplexRaster& master, const ComplexRaster& slave,
                              int window) {
  require_compatible(master.meta(), slave.meta());
  if (window < 1 || window % 2 == 0)
    throw Error(Errc::InvalidArgument, "coherence window must be odd, got " + std::to_string(window));
  const GridMeta& g = master.meta();
  Integral re(g.width, g.height), im(g.width, g.height), pm(g.width, g.height),
      ps(g.width, g.height);
  for (int r = 0; r < g.height; ++r) {
    for (int c = 0; c < g.width; ++c) {
      const std::complex<double> m(master(r, c)), s(slave(r, c));
      const std::complex<double> x = m * std::conj(s);
      re.at(r + 1, c + 1) = x.real() + re.at(r, c + 1) + re.at(r + 1, c) - re.at(r, c);
      im.at(r + 1, c + 1) = x.imag() + im.at(r, c + 1) + im.at(r + 1, c) - im.at(r, c);
      pm.at(r + 1, c + 1) = std::norm(m) + pm.at(r, c + 1) + pm.at(r + 1, c) - pm.at(r, c);
      ps.at(r + 1, c + 1) = std::norm(s) + ps.at(r, c + 1) + ps.at(r + 1, c) - ps.at(r, c);
    }
  }
  const int half = window / 2;
  RealRaster out(g, RasterKind::Coherence, 0.0);
  for (int r = 0; r < g.height; ++r) {
    const int r0 = std::max(0, r - half), r1 = std::min(g.height, r + half + 1);
    for (int c = 0; c < g.width; ++c) {
      const int c0 = std::max(0, c - half), c1 = std::min(g.width, c + half + 1);
      const double den = std::sqrt(pm.box(r0, c0, r1, c1) * ps.box(r0, c0, r1, c1));
      if (!(den > 0.0)) {
        out.mask(r, c);
        continue;
      }
      const double num = std::hypot(re.box(r0, c0, r1, c1), im.box(r0, c0, r1, c1));
      out.set(r, c, std::clamp(num / den, 0.0, 1.0));
    }
  }
  return out;
}

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Mirror index into [0, n) without repeating the edge sample.
int mirror(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

class FftPair {
 public:
  explicit FftPair(int n) : n_(n) {
    buf_ = fftw_alloc_complex(static_cast<std::size_t>(n) * n);
    std::lock_guard lock(fftw_planner_mutex());
    fwd_ = fftw_plan_dft_2d(n, n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_2d(n, n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftPair() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(buf_);
  }
  FftPair(const FftPair&) = delete;
  FftPair& operator=(const FftPair&) = delete;

  fftw_complex* data() { return buf_; }
  void forward() { fftw_execute(fwd_); }
  void inverse() { fftw_execute(inv_); }

 private:
  int n_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

}  // namespace

Interferogram goldstein_filter(const Interferogram& ifg, const FilterConfig& cfg) {
  cfg.validate();
  const GridMeta& g = ifg.meta;
  const int P = cfg.patch;
  const int step = P - cfg.overlap;
  const std::size_t np = static_cast<std::size_t>(P) * P;

  std::vector<std::complex<double>> z(g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    if (!ifg.phase.masked(i)) z[i] = std::polar(1.0, ifg.phase[i]);

  std::vector<double> w1(P);
  for (int i = 0; i < P; ++i) {
    const double s = std::sin(kPi * (i + 0.5) / P);
    w1[i] = s * s;
  }

  std::vector<std::complex<double>> acc(g.size());
  std::vector<double> wsum(g.size(), 0.0);
  FftPair fft(P);
  std::vector<double> mag(np);

  for (int r0 = -cfg.overlap; r0 < g.height; r0 += step) {
    for (int c0 = -cfg.overlap; c0 < g.width; c0 += step) {
      fftw_complex* buf = fft.data();
      for (int i = 0; i < P; ++i) {
        const int r = mirror(r0 + i, g.height);
        for (int j = 0; j < P; ++j) {
          const auto v = z[g.index({r, mirror(c0 + j, g.width)})];
          buf[i * P + j][0] = v.real();
          buf[i * P + j][1] = v.imag();
        }
      }
      fft.forward();
      double peak = 0.0;
      for (std::size_t k = 0; k < np; ++k) {
        mag[k] = std::hypot(buf[k][0], buf[k][1]);
        peak = std::max(peak, mag[k]);
      }
      if (peak > 0.0) {
        for (std::size_t k = 0; k < np; ++k) {
          const double gain = std::pow(mag[k] / peak, cfg.goldstein_alpha);
          buf[k][0] *= gain;
          buf[k][1] *= gain;
        }
        fft.inverse();
      }
      const double norm = peak > 0.0 ? 1.0 / static_cast<double>(np) : 0.0;
      for (int i = 0; i < P; ++i) {
        const int r = r0 + i;
        if (r < 0 || r >= g.height) continue;
        for (int j = 0; j < P; ++j) {
          const int c = c0 + j;
          if (c < 0 || c >= g.width) continue;
          const double w = w1[i] * w1[j];
          const std::size_t idx = g.index({r, c});
          acc[idx] += w * norm * std::complex<double>(buf[i * P + j][0], buf[i * P + j][1]);
          wsum[idx] += w;
        }
      }
    }
  }

  Interferogram out = ifg;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (ifg.phase.masked(i)) continue;
    const std::complex<double> v = acc[i] / wsum[i];
    if (std::abs(v) > 0.0) out.phase.set(i, wrap_phase(std::arg(v)));
  }
  return out;
}

Interferogram multilook(const Interferogram& ifg, int looks_x, int looks_y) {
  if (looks_x < 1 || looks_y < 1) throw Error(Errc::InvalidArgument, "looks must be >= 1");
  const GridMeta& g = ifg.meta;
  GridMeta m = g;
  m.width = g.width / looks_x;
  m.height = g.height / looks_y;
  if (m.width < 1 || m.height < 1)
    throw Error(Errc::InvalidArgument, "looks exceed raster dimensions");
  m.pixel_spacing_east = g.pixel_spacing_east * looks_x;
  m.pixel_spacing_north = g.pixel_spacing_north * looks_y;
  const LatLon origin = g.to_latlon({(looks_y - 1) / 2.0, (looks_x - 1) / 2.0});
  m.origin_lat = origin.lat;
  m.origin_lon = origin.lon;

  Interferogram out{m, RealRaster(m, RasterKind::Phase), RealRaster(m, RasterKind::Coherence),
                    ifg.pair};
  for (int R = 0; R < m.height; ++R) {
    for (int C = 0; C < m.width; ++C) {
      std::complex<double> sum, sum_unweighted;
      double coh = 0.0;
      int n = 0, ncoh = 0;
      for (int dr = 0; dr < looks_y; ++dr) {
        for (int dc = 0; dc < looks_x; ++dc) {
          const int r = R * looks_y + dr, c = C * looks_x + dc;
          if (ifg.phase.masked(r, c)) continue;
          const auto e = std::polar(1.0, ifg.phase(r, c));
          sum_unweighted += e;
          ++n;
          if (!ifg.coherence.masked(r, c)) {
            sum += ifg.coherence(r, c) * e;
            coh += ifg.coherence(r, c);
            ++ncoh;
          }
        }
      }
      if (n == 0) {
        out.phase.mask(R, C);
        out.coherence.mask(R, C);
        continue;
      }
      const std::complex<double> v = coh > 0.0 ? sum : sum_unweighted;
      if (looks_x == 1 && looks_y == 1)
        out.phase.set(R, C, ifg.phase(R, C));
      else
        out.phase.set(R, C, wrap_phase(std::arg(v)));
      if (ncoh > 0)
        out.coherence.set(R, C, coh / ncoh);
      else
        out.coherence.mask(R, C);
    }
  }
  return out;
}

}  // namespace insar
