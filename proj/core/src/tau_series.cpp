#include "qbnf/tau_series.hpp"

#include <algorithm>
#include <cmath>

#include "qbnf/error.hpp"

namespace qbnf {

TauSeries::TauSeries(std::initializer_list<Complex> c, int order)
    : TauSeries(std::vector<Complex>(c), order) {}

TauSeries::TauSeries(std::vector<Complex> c, int order) : coeffs_(std::move(c)) {
  if (order < 0) throw SpecError("TauSeries order must be nonnegative");
  coeffs_.resize(static_cast<std::size_t>(order) + 1, Complex{0.0});
}

TauSeries TauSeries::constant(Complex c, int order) {
  TauSeries s(order);
  s[0] = c;
  return s;
}

Complex TauSeries::operator()(Complex tau) const {
  Complex acc{0.0};
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * tau + *it;
  return acc;
}

TauSeries TauSeries::derivative() const {
  TauSeries d(order());
  for (int a = 1; a <= order(); ++a) d[a - 1] = static_cast<double>(a) * (*this)[a];
  return d;
}

TauSeries TauSeries::resized(int new_order) const {
  return TauSeries(coeffs_, new_order);
}

TauSeries TauSeries::reciprocal() const {
  const Complex c0 = coeffs_.front();
  if (std::abs(c0) == 0.0) throw DegeneracyError("TauSeries::reciprocal: zero constant term");
  TauSeries r(order());
  r[0] = 1.0 / c0;
  for (int n = 1; n <= order(); ++n) {
    Complex acc{0.0};
    for (int a = 1; a <= n; ++a) acc += (*this)[a] * r[n - a];
    r[n] = -acc / c0;
  }
  return r;
}

bool TauSeries::is_real(double tol) const {
  return std::all_of(coeffs_.begin(), coeffs_.end(),
                     [tol](Complex c) { return std::abs(c.imag()) <= tol; });
}

TauSeries& TauSeries::operator+=(const TauSeries& o) {
  if (o.order() > order()) coeffs_.resize(o.coeffs_.size(), Complex{0.0});
  for (int a = 0; a <= o.order(); ++a) (*this)[a] += o[a];
  return *this;
}

TauSeries& TauSeries::operator-=(const TauSeries& o) {
  if (o.order() > order()) coeffs_.resize(o.coeffs_.size(), Complex{0.0});
  for (int a = 0; a <= o.order(); ++a) (*this)[a] -= o[a];
  return *this;
}

TauSeries& TauSeries::operator*=(Complex s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

TauSeries operator*(const TauSeries& a, const TauSeries& b) {
  const int order = std::min(a.order(), b.order());
  TauSeries r(order);
  for (int i = 0; i <= order; ++i)
    for (int j = 0; i + j <= order; ++j) r[i + j] += a[i] * b[j];
  return r;
}

}  // namespace qbnf
