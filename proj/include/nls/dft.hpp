#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include "nls/core.hpp"

namespace nls {

/// Discrete Fourier transform of a fixed length. Forward is unnormalized,
/// inverse carries the 1/m factor, so inverse(forward(u)) = u.
///
/// The plan is immutable after construction and may be shared between
/// threads; every call works on caller-provided buffers.
class Dft {
 public:
  explicit Dft(std::size_t m);
  ~Dft();
  Dft(const Dft&) = delete;
  Dft& operator=(const Dft&) = delete;
  Dft(Dft&&) noexcept;
  Dft& operator=(Dft&&) noexcept;

  std::size_t size() const { return m_; }

  /// `in` and `out` may alias.
  void forward(std::span<const Complex> in, std::span<Complex> out) const;
  void inverse(std::span<const Complex> in, std::span<Complex> out) const;

 private:
  struct Plans;
  std::size_t m_;
  std::unique_ptr<Plans> plans_;
};

ComplexVector dft_forward(std::span<const Complex> u);
ComplexVector dft_inverse(std::span<const Complex> u_hat);

}  // namespace nls
