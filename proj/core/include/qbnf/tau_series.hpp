#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace qbnf {

using Complex = std::complex<double>;

/// Truncated Taylor series g(tau) = sum_a c_a tau^a, a = 0..order().
class TauSeries {
 public:
  TauSeries() : coeffs_(1, Complex{0.0}) {}
  explicit TauSeries(int order) : coeffs_(static_cast<std::size_t>(order) + 1, Complex{0.0}) {}
  TauSeries(std::initializer_list<Complex> c, int order);
  TauSeries(std::vector<Complex> c, int order);

  static TauSeries constant(Complex c, int order);

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<Complex>& coeffs() const { return coeffs_; }
  Complex operator[](int a) const { return coeffs_[static_cast<std::size_t>(a)]; }
  Complex& operator[](int a) { return coeffs_[static_cast<std::size_t>(a)]; }

  Complex operator()(Complex tau) const;
  TauSeries derivative() const;
  /// Same coefficients, padded with zeros or truncated to the given order.
  TauSeries resized(int order) const;

  /// Truncated reciprocal; requires a nonzero constant term.
  TauSeries reciprocal() const;
  bool is_real(double tol = 0.0) const;

  TauSeries& operator+=(const TauSeries& o);
  TauSeries& operator-=(const TauSeries& o);
  TauSeries& operator*=(Complex s);

  friend TauSeries operator+(TauSeries a, const TauSeries& b) { return a += b; }
  friend TauSeries operator-(TauSeries a, const TauSeries& b) { return a -= b; }
  friend TauSeries operator*(TauSeries a, Complex s) { return a *= s; }
  friend TauSeries operator*(Complex s, TauSeries a) { return a *= s; }
  /// Cauchy product truncated to min(order(a), order(b)).
  friend TauSeries operator*(const TauSeries& a, const TauSeries& b);
  friend bool operator==(const TauSeries&, const TauSeries&) = default;

 private:
  std::vector<Complex> coeffs_;
};

}  // namespace qbnf
