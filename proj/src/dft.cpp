#include "nls/dft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "nls/errors.hpp"

namespace nls {

namespace {

// FFTW's planner is not re-entrant; execution through the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const Complex* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p));
}

}  // namespace

struct Dft::Plans {
  fftw_plan forward_oop = nullptr;
  fftw_plan inverse_oop = nullptr;
  fftw_plan forward_ip = nullptr;
  fftw_plan inverse_ip = nullptr;

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    for (auto p : {forward_oop, inverse_oop, forward_ip, inverse_ip})
      if (p) fftw_destroy_plan(p);
  }
};

Dft::Dft(std::size_t m) : m_(m), plans_(std::make_unique<Plans>()) {
  if (m == 0) throw DimensionError("Dft: zero length");
  ComplexVector a(m), b(m);
  const int n = static_cast<int>(m);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  plans_->forward_oop = fftw_plan_dft_1d(n, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags);
  plans_->inverse_oop = fftw_plan_dft_1d(n, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags);
  plans_->forward_ip = fftw_plan_dft_1d(n, as_fftw(a.data()), as_fftw(a.data()), FFTW_FORWARD, flags);
  plans_->inverse_ip = fftw_plan_dft_1d(n, as_fftw(a.data()), as_fftw(a.data()), FFTW_BACKWARD, flags);
  if (!plans_->forward_oop || !plans_->inverse_oop || !plans_->forward_ip || !plans_->inverse_ip)
    throw NumericalFailure("Dft: FFTW planning failed");
}

Dft::~Dft() = default;
Dft::Dft(Dft&&) noexcept = default;
Dft& Dft::operator=(Dft&&) noexcept = default;

void Dft::forward(std::span<const Complex> in, std::span<Complex> out) const {
  if (in.size() != m_ || out.size() != m_) throw DimensionError("Dft::forward: length mismatch");
  const bool in_place = in.data() == out.data();
  fftw_execute_dft(in_place ? plans_->forward_ip : plans_->forward_oop, as_fftw(in.data()),
                   as_fftw(out.data()));
}

void Dft::inverse(std::span<const Complex> in, std::span<Complex> out) const {
  if (in.size() != m_ || out.size() != m_) throw DimensionError("Dft::inverse: length mismatch");
  const bool in_place = in.data() == out.data();
  fftw_execute_dft(in_place ? plans_->inverse_ip : plans_->inverse_oop, as_fftw(in.data()),
                   as_fftw(out.data()));
  const double m = static_cast<double>(m_);
  for (auto& z : out) z = Complex(z.real() / m, z.imag() / m);
}

ComplexVector dft_forward(std::span<const Complex> u) {
  Dft dft(u.size());
  ComplexVector out(u.size());
  dft.forward(u, out);
  return out;
}

ComplexVector dft_inverse(std::span<const Complex> u_hat) {
  Dft dft(u_hat.size());
  ComplexVector out(u_hat.size());
  dft.inverse(u_hat, out);
  return out;
}

}  // namespace nls
