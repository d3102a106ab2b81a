#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "psfr/grid.hpp"

namespace psfr {

// Named aberrator strengths. These are conventions of this library, not
// measured tissue values.
enum class AberratorPreset { none, mild, moderate, severe };

struct AberratorSettings {
  double rms = 0.0;       // seconds
  double corr_len = 5.0;  // elements
};

AberratorSettings preset_settings(AberratorPreset preset);
AberratorPreset parse_preset(std::string_view name);

// Near-field phase screen: one time shift per element, applied on transmit
// and on receive. White Gaussian noise smoothed by a Gaussian window of
// standard deviation corr_len elements, then made zero-mean and rescaled to
// the requested RMS.
AberrationProfile make_aberration_profile(std::size_t n_elements, double rms, double corr_len, std::uint64_t seed);

AberrationProfile zero_profile(std::size_t n_elements);

struct Scatterer {
  double x = 0.0;
  double z = 0.0;
  double amp = 1.0;
};

struct TimeWindow {
  double t0 = 0.0;
  std::size_t n_samples = 0;
};

// Transmit focusing path offset |e - F| - |F| for element e; time zero is
// when a virtual source at the array centre would have fired.
double focus_path_offset(const ArrayGeometry& geom, std::size_t element);

// Smallest sample-aligned window holding every echo, padded by `margin`
// samples at both ends.
TimeWindow covering_window(const ArrayGeometry& geom, const Pulse& pulse, const std::vector<Scatterer>& scatterers,
                           const AberrationProfile& profile, std::size_t margin = 16);

// Single focused transmit, all elements receiving. Every transmit/receive
// path carries 1/d spherical spreading and the phase-screen delays of both
// elements involved.
ChannelData simulate_channel_data(const ArrayGeometry& geom, const Pulse& pulse,
                                  const std::vector<Scatterer>& scatterers, const AberrationProfile& profile,
                                  const TimeWindow& window);

// Per-channel IQ: mix with exp(-i 2 pi f t) and average over one carrier
// period. Scaled by 2 so |iq| tracks the RF envelope.
Grid<cplx> demodulate_channels(const ChannelData& ch, double f_demod);

// Arrival time of the focused transmit at p under the nominal sound speed.
double nominal_transmit_time(const ArrayGeometry& geom, Point2 p);

// Dynamic-receive delay-and-sum with nominal delays and rectangular
// apodisation, demodulated to baseband against the two-way depth time.
ComplexImage beamform_das(const ChannelData& ch, const ArrayGeometry& geom, const GridSpec& grid, double f_demod);

struct PsfSpec {
  std::size_t nx = 33;  // lateral pixels
  std::size_t nz = 65;  // axial pixels
  double dx = 1e-4;
  double dz = 5e-5;
};

// Point response at the transmit focus: simulated on a patch twice the
// requested size, recentred on its envelope peak and cropped.
Psf simulate_psf(const ArrayGeometry& geom, const Pulse& pulse, const AberrationProfile& profile,
                 const PsfSpec& spec);

struct PointTarget {
  double x = 0.0;
  double z = 0.0;
  double amp = 1.0;
};

struct PhantomSpec {
  double width = 25.6e-3;
  double height = 12.8e-3;
  Point2 center{0.0, 0.025};  // centre of the extent
  Point2 cyst_center{-3e-3, 0.025};
  double cyst_radius = 2.5e-3;
  double cyst_amp = 0.0;
  std::vector<PointTarget> point_targets{{7e-3, 0.025, 40.0}};
  double scatterer_density = 40.0;  // per mm^2
  double background_gap = 0.5e-3;   // cyst edge to inner annulus radius

  void validate() const;
};

struct Phantom {
  ScattererMap scatterers;
  RegionMask cyst;
  RegionMask background;
  std::size_t n_scatterers = 0;
};

Phantom make_phantom(const PhantomSpec& spec, const GridSpec& grid, std::uint64_t seed);

// R = S * PSF: same-size linear convolution with zero padding, PSF anchored
// on its centre.
ComplexImage synth_speckle(const ScattererMap& s, const Psf& psf);

}  // namespace psfr
