#pragma once

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ibt/grid.hpp"

namespace ibt {

enum class Axis { z, zt, both };

namespace detail {

// FFTW's planner is not re-entrant; execution of an existing plan is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

struct FftwPlanDestroy {
  void operator()(fftw_plan p) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

using FftwPlan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, FftwPlanDestroy>;

inline void require_power_of_two(std::size_t n, const char* what) {
  if (n < 2 || !std::has_single_bit(n)) {
    throw std::invalid_argument(std::string("Fourier transform: ") + what +
                                " length must be a power of two, got " + std::to_string(n));
  }
}

}  // namespace detail

/// In-place 2D (or single-axis) DFT on a row-major nz x nzt array.
///
/// Plans are made with FFTW_ESTIMATE on an owned, FFTW-aligned buffer so that
/// repeated executions pick the same codelets and results are bit-reproducible.
/// The *_unnormalized members work directly on buffer(); forward()/inverse()
/// copy in and out and apply the unitary 1/sqrt(N) scaling.
class Fourier2D {
 public:
  Fourier2D(std::size_t nz, std::size_t nzt, Axis axis = Axis::both)
      : nz_(nz), nzt_(nzt), axis_(axis), buffer_(fftw_alloc_complex(nz * nzt)) {
    if (axis != Axis::zt) detail::require_power_of_two(nz, "z-axis");
    if (axis != Axis::z) detail::require_power_of_two(nzt, "z~-axis");
    if (!buffer_) throw std::bad_alloc();
    std::fill_n(reinterpret_cast<double*>(buffer_.get()), 2 * nz * nzt, 0.0);
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_.reset(make_plan(FFTW_FORWARD));
    backward_.reset(make_plan(FFTW_BACKWARD));
  }

  Fourier2D(const Fourier2D&) = delete;
  Fourier2D& operator=(const Fourier2D&) = delete;

  std::size_t size() const { return nz_ * nzt_; }

  Complex* buffer() { return reinterpret_cast<Complex*>(buffer_.get()); }
  std::span<Complex> buffer_span() { return {buffer(), size()}; }

  void forward_unnormalized() { fftw_execute(forward_.get()); }
  void inverse_unnormalized() { fftw_execute(backward_.get()); }

  /// Number of points along the transformed axes; the unitary scale is 1/sqrt of this.
  double transform_length() const {
    switch (axis_) {
      case Axis::z: return static_cast<double>(nz_);
      case Axis::zt: return static_cast<double>(nzt_);
      case Axis::both: break;
    }
    return static_cast<double>(nz_ * nzt_);
  }

  void forward(std::span<Complex> data) { run(data, true); }
  void inverse(std::span<Complex> data) { run(data, false); }

 private:
  fftw_plan make_plan(int sign) {
    auto* b = buffer_.get();
    const int nz = static_cast<int>(nz_);
    const int nzt = static_cast<int>(nzt_);
    switch (axis_) {
      case Axis::both:
        return fftw_plan_dft_2d(nz, nzt, b, b, sign, FFTW_ESTIMATE);
      case Axis::z: {
        int n[] = {nz};
        return fftw_plan_many_dft(1, n, nzt, b, nullptr, nzt, 1, b, nullptr, nzt, 1, sign, FFTW_ESTIMATE);
      }
      case Axis::zt: {
        int n[] = {nzt};
        return fftw_plan_many_dft(1, n, nz, b, nullptr, 1, nzt, b, nullptr, 1, nzt, sign, FFTW_ESTIMATE);
      }
    }
    return nullptr;
  }

  void run(std::span<Complex> data, bool fwd) {
    if (data.size() != size()) throw std::invalid_argument("Fourier2D: array size does not match plan");
    std::copy(data.begin(), data.end(), buffer());
    fwd ? forward_unnormalized() : inverse_unnormalized();
    const double scale = 1.0 / std::sqrt(transform_length());
    const Complex* b = buffer();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = b[i] * scale;
  }

  std::size_t nz_;
  std::size_t nzt_;
  Axis axis_;
  std::unique_ptr<fftw_complex, detail::FftwFree> buffer_;
  detail::FftwPlan forward_;
  detail::FftwPlan backward_;
};

/// Unitary forward DFT (kernel e^{-ikx}) along the selected axes; returns a fresh array.
inline std::vector<Complex> fourier_forward(std::span<const Complex> amplitudes, std::size_t nz,
                                            std::size_t nzt, Axis axis = Axis::both) {
  Fourier2D ft(nz, nzt, axis);
  std::vector<Complex> out(amplitudes.begin(), amplitudes.end());
  ft.forward(out);
  return out;
}

/// Unitary inverse DFT; fourier_inverse(fourier_forward(x)) == x to rounding.
inline std::vector<Complex> fourier_inverse(std::span<const Complex> amplitudes, std::size_t nz,
                                            std::size_t nzt, Axis axis = Axis::both) {
  Fourier2D ft(nz, nzt, axis);
  std::vector<Complex> out(amplitudes.begin(), amplitudes.end());
  ft.inverse(out);
  return out;
}

}  // namespace ibt
