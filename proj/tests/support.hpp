// Shared helpers for the unit tests.
#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <unistd.h>
#include <vector>

#include "odn/matrix.hpp"
#include "odn/random.hpp"
#include "odn/tensor.hpp"

namespace odn::test {

inline Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
  Matrix m(r, c);
  for (auto& v : m.data) v = rng.uniform(lo, hi);
  return m;
}

inline Tensor random_tensor(Shape shape, Rng& rng, bool requires_grad = true) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return Tensor::from(std::move(shape), std::move(v), requires_grad);
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Central differences of a scalar function of several leaf tensors, compared
// against the tape gradient. Returns the worst relative error
// |g - fd| / max(1, |g|, |fd|).
inline double gradient_check(const std::function<Tensor()>& f, std::vector<Tensor> leaves,
                             double eps = 1e-6) {
  for (auto& l : leaves) l.zero_grad();
  Tape tape;
  {
    TapeGuard guard(tape);
    tape.backward(f());
  }
  double worst = 0.0;
  for (auto& l : leaves) {
    std::vector<double> g(l.grad().begin(), l.grad().end());
    if (g.empty()) g.assign(l.size(), 0.0);
    auto x = l.mutable_data();
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double keep = x[i];
      x[i] = keep + eps;
      const double up = f().item();
      x[i] = keep - eps;
      const double down = f().item();
      x[i] = keep;
      const double fd = (up - down) / (2.0 * eps);
      const double scale = std::max({1.0, std::abs(fd), std::abs(g[i])});
      worst = std::max(worst, std::abs(fd - g[i]) / scale);
    }
  }
  return worst;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "odn-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace odn::test
