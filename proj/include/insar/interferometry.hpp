#pragma once

#include "insar/catalog.hpp"
#include "insar/raster.hpp"

namespace insar {

/// Wrapped interferometric phase in (-pi, pi] plus coherence in [0, 1].
struct Interferogram {
  GridMeta meta;
  RealRaster phase;
  RealRaster coherence;
  PairSpec pair;
};

struct FilterConfig {
  double goldstein_alpha = 0.8;
  int patch = 32;           // power of two
  int overlap = 16;         // patch / 2 gives exact raised-cosine partition of unity
  int coherence_window = 5; // odd

  void validate() const;
};

/// phase = arg(master * conj(slave)). Pixels where either image has zero
/// amplitude are masked. Coherence starts fully masked.
Interferogram form_interferogram(const ComplexRaster& master, const ComplexRaster& slave,
                                 const PairSpec& pair);

/// Unwrapped flat-earth phase (4 pi / lambda) B_perp x / (R tan theta) with
/// x = col * spacing_east.
RealRaster flat_earth_phase(const GridMeta& meta, const PairSpec& pair,
                            const AcquisitionMeta& acq);

/// Unwrapped topographic phase (4 pi / lambda) B_perp h / (R sin theta).
/// Masked DEM pixels stay masked.
RealRaster topographic_phase(const RealRaster& dem, const PairSpec& pair,
                             const AcquisitionMeta& acq);

Interferogram remove_flat_earth(const Interferogram& ifg, const PairSpec& pair,
                                const AcquisitionMeta& acq);
Interferogram remove_topographic_phase(const Interferogram& ifg, const RealRaster& dem,
                                       const PairSpec& pair, const AcquisitionMeta& acq);

/// Wrapped sum `phase + add` on the common unmasked support.
RealRaster add_wrapped(const RealRaster& phase, const RealRaster& add, double sign = 1.0);

/// Sample coherence |sum m s*| / sqrt(sum |m|^2 sum |s|^2) over a centered
/// odd window, truncated at the borders. Windows with no energy are masked.
RealRaster estimate_coherence(const ComplexRaster& master, const ComplexRaster& slave,
                              int window);

/// Goldstein spectral filter on exp(i phase): each patch spectrum is weighted
/// by (|F| / max|F|)^alpha, patches are blended with a raised-cosine window.
/// Out-of-grid patch samples are mirrored. Coherence passes through.
Interferogram goldstein_filter(const Interferogram& ifg, const FilterConfig& cfg);

/// Coherence-weighted complex average over looks_x x looks_y blocks; the
/// output grid drops incomplete trailing blocks and scales spacings.
Interferogram multilook(const Interferogram& ifg, int looks_x, int looks_y);

}  // namespace insar
