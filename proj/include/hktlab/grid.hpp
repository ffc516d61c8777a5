#pragma once

// Discrete periodic torus T^{4n}, scalar fields on it, per-axis derivative
// operators (Fourier-spectral or second-order centered differences), and the
// shared binary grid file format.
//
// Axis order is (t_1, x_1, y_1, z_1, t_2, ...), row-major with the last axis
// fastest.  First derivatives are antisymmetric circulants (spectral ones
// drop the Nyquist mode); same-axis second derivatives use the true spectral
// symbol so that constant-coefficient elliptic operators keep a
// one-dimensional kernel.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "hktlab/common.hpp"

namespace hktlab {

/// Worker cap for data-parallel loops (1 = serial).  Output is bitwise
/// independent of the cap: chunks are fixed and outputs disjoint.
inline int& workerCount() {
  static int n = 1;
  return n;
}
inline void setWorkerCount(int n) { workerCount() = std::max(1, n); }

template <typename Fn>
void parallelFor(std::size_t count, const Fn& fn) {
  const int workers = workerCount();
  if (workers <= 1 || count < 1024) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t chunks = 64;
  const std::size_t chunkSize = (count + chunks - 1) / chunks;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      const std::size_t lo = c * chunkSize;
      const std::size_t hi = std::min(count, lo + chunkSize);
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

enum class DiffScheme { Spectral, FD2 };

struct TorusGrid {
  int n = 1;                    // quaternionic dimension
  std::vector<int> sides;      // 4n entries
  std::vector<double> lengths; // axis periods, default 1

  TorusGrid() = default;
  TorusGrid(int n_, std::vector<int> sides_, std::vector<double> lengths_ = {})
      : n(n_), sides(std::move(sides_)), lengths(std::move(lengths_)) {
    if (static_cast<int>(sides.size()) != 4 * n)
      throw InputError("grid needs 4n side lengths");
    for (int s : sides)
      if (s < 4) throw InputError("all grid sides must be >= 4");
    if (lengths.empty()) lengths.assign(4 * n, 1.0);
    if (static_cast<int>(lengths.size()) != 4 * n)
      throw InputError("grid needs 4n axis lengths");
  }
  static TorusGrid cube(int n_, int side) {
    return TorusGrid(n_, std::vector<int>(4 * n_, side));
  }

  int axes() const { return 4 * n; }
  std::size_t npts() const {
    std::size_t p = 1;
    for (int s : sides) p *= static_cast<std::size_t>(s);
    return p;
  }
  double spacing(int axis) const { return lengths[axis] / sides[axis]; }
  double cellVolume() const {
    double v = 1;
    for (int a = 0; a < axes(); ++a) v *= spacing(a);
    return v;
  }
  std::vector<std::size_t> strides() const {
    std::vector<std::size_t> s(axes());
    std::size_t acc = 1;
    for (int a = axes() - 1; a >= 0; --a) {
      s[a] = acc;
      acc *= sides[a];
    }
    return s;
  }
  std::size_t flatten(const std::vector<int>& coords) const {
    const auto s = strides();
    std::size_t idx = 0;
    for (int a = 0; a < axes(); ++a) {
      int c = coords[a] % sides[a];
      if (c < 0) c += sides[a];
      idx += s[a] * static_cast<std::size_t>(c);
    }
    return idx;
  }
  std::vector<int> unflatten(std::size_t idx) const {
    std::vector<int> c(axes());
    for (int a = axes() - 1; a >= 0; --a) {
      c[a] = static_cast<int>(idx % sides[a]);
      idx /= sides[a];
    }
    return c;
  }
  /// Physical coordinates of a grid point.
  std::vector<double> point(std::size_t idx) const {
    auto c = unflatten(idx);
    std::vector<double> x(axes());
    for (int a = 0; a < axes(); ++a) x[a] = c[a] * spacing(a);
    return x;
  }
  bool sameShape(const TorusGrid& o) const {
    return n == o.n && sides == o.sides && lengths == o.lengths;
  }
};

template <typename T>
class Field {
 public:
  Field() = default;
  explicit Field(const TorusGrid& g, T init = T{})
      : grid_(g), v_(g.npts(), init) {}
  Field(const TorusGrid& g, std::vector<T> data)
      : grid_(g), v_(std::move(data)) {
    if (v_.size() != grid_.npts()) throw InputError("field size mismatch");
  }

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  const T& operator[](std::size_t i) const { return v_[i]; }
  T& operator[](std::size_t i) { return v_[i]; }
  const std::vector<T>& data() const { return v_; }
  std::vector<T>& data() { return v_; }

  Field& operator+=(const Field& o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Field& operator*=(T s) {
    for (auto& x : v_) x *= s;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(T s, Field a) { return a *= s; }

 private:
  TorusGrid grid_;
  std::vector<T> v_;
};

using GridFunction = Field<double>;
using CGridFunction = Field<std::complex<double>>;

inline double maxAbs(const GridFunction& f) {
  double m = 0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
  return m;
}
inline double maxAbs(const CGridFunction& f) {
  double m = 0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
  return m;
}
inline double sum(const GridFunction& f) {
  double s = 0;  // fixed sequential order: deterministic
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i];
  return s;
}
inline double mean(const GridFunction& f) { return sum(f) / f.size(); }
inline double minValue(const GridFunction& f) {
  double m = f[0];
  for (std::size_t i = 1; i < f.size(); ++i) m = std::min(m, f[i]);
  return m;
}
inline double maxValue(const GridFunction& f) {
  double m = f[0];
  for (std::size_t i = 1; i < f.size(); ++i) m = std::max(m, f[i]);
  return m;
}
inline std::size_t argmax(const GridFunction& f) {
  std::size_t a = 0;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (f[i] > f[a]) a = i;
  return a;
}
inline bool allFinite(const GridFunction& f) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (!std::isfinite(f[i])) return false;
  return true;
}
inline CGridFunction toComplex(const GridFunction& f) {
  CGridFunction out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i];
  return out;
}
inline GridFunction realPart(const CGridFunction& f) {
  GridFunction out(f.grid());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].real();
  return out;
}
inline double maxImagAbs(const CGridFunction& f) {
  double m = 0;
  for (std::size_t i = 0; i < f.size(); ++i)
    m = std::max(m, std::abs(f[i].imag()));
  return m;
}

// ---------------------------------------------------------------------------
// Per-axis derivative stencils (circulant rows).

namespace detail {

/// First-derivative circulant row: spectral (Nyquist dropped) or centered FD2.
inline std::vector<double> firstDerivRow(int N, double T, DiffScheme scheme) {
  std::vector<double> row(N, 0.0);
  if (scheme == DiffScheme::FD2) {
    const double h = T / N;
    row[1] = 1.0 / (2 * h);
    row[N - 1] = -1.0 / (2 * h);
    return row;
  }
  for (int r = 0; r < N; ++r) {
    double s = 0;
    for (int m = 1; m < N; ++m) {
      int kt = (m <= N / 2) ? m : m - N;
      if (2 * m == N) kt = 0;  // odd symbol vanishes at Nyquist
      const double w = 2.0 * M_PI * kt / T;
      s += w * std::sin(2.0 * M_PI * m * r / N);
    }
    row[r] = s / N;
  }
  // enforce exact antisymmetry of the circulant
  for (int r = 1; 2 * r < N; ++r) {
    const double v = 0.5 * (row[r] - row[N - r]);
    row[r] = v;
    row[N - r] = -v;
  }
  row[0] = 0.0;
  if (N % 2 == 0) row[N / 2] = 0.0;
  return row;
}

/// Same-axis second-derivative circulant row (true spectral symbol, Nyquist
/// kept) or FD2 three-point stencil.
inline std::vector<double> secondDerivRow(int N, double T, DiffScheme scheme) {
  std::vector<double> row(N, 0.0);
  if (scheme == DiffScheme::FD2) {
    const double h = T / N;
    row[0] = -2.0 / (h * h);
    row[1] = 1.0 / (h * h);
    row[N - 1] = 1.0 / (h * h);
    return row;
  }
  for (int r = 0; r < N; ++r) {
    double s = 0;
    for (int m = 0; m < N; ++m) {
      const int kt = (2 * m <= N) ? m : m - N;
      const double w = 2.0 * M_PI * kt / T;
      s += -w * w * std::cos(2.0 * M_PI * m * r / N);
    }
    row[r] = s / N;
  }
  // enforce exact symmetry and zero row sum
  for (int r = 1; 2 * r < N; ++r) {
    const double v = 0.5 * (row[r] + row[N - r]);
    row[r] = v;
    row[N - r] = v;
  }
  double off = 0;
  for (int r = 1; r < N; ++r) off += row[r];
  row[0] = -off;
  return row;
}

}  // namespace detail

/// Precomputed derivative stencils for one grid.
class DerivKit {
 public:
  DerivKit() = default;
  DerivKit(const TorusGrid& g, DiffScheme scheme)
      : grid_(g), scheme_(scheme) {
    for (int a = 0; a < g.axes(); ++a) {
      d1_.push_back(detail::firstDerivRow(g.sides[a], g.lengths[a], scheme));
      d2_.push_back(detail::secondDerivRow(g.sides[a], g.lengths[a], scheme));
    }
  }

  const TorusGrid& grid() const { return grid_; }
  DiffScheme scheme() const { return scheme_; }

  /// First-derivative symbol per mode (imaginary part; Nyquist -> 0).
  double symbolD1(int axis, int mode) const {
    const int N = grid_.sides[axis];
    int kt = (mode <= N / 2) ? mode : mode - N;
    if (N % 2 == 0 && 2 * mode == N) kt = 0;
    if (scheme_ == DiffScheme::FD2) {
      const double h = grid_.spacing(axis);
      return std::sin(2.0 * M_PI * mode / N) / h;
    }
    return 2.0 * M_PI * kt / grid_.lengths[axis];
  }
  /// Second-derivative symbol per mode (real, <= 0).
  double symbolD2(int axis, int mode) const {
    const int N = grid_.sides[axis];
    if (scheme_ == DiffScheme::FD2) {
      const double h = grid_.spacing(axis);
      const double s = std::sin(M_PI * mode / N);
      return -4.0 * s * s / (h * h);
    }
    const int kt = (2 * mode <= N) ? mode : mode - N;
    const double w = 2.0 * M_PI * kt / grid_.lengths[axis];
    return -w * w;
  }

  template <typename T>
  Field<T> apply(const Field<T>& f, int axis, bool second) const {
    const auto& row = second ? d2_[axis] : d1_[axis];
    const TorusGrid& g = f.grid();
    const int N = g.sides[axis];
    const auto strides = g.strides();
    const std::size_t inner = strides[axis];
    const std::size_t lineStride = inner * static_cast<std::size_t>(N);
    const std::size_t lines = g.npts() / N;
    Field<T> out(g);
    const T* src = f.data().data();
    T* dst = out.data().data();
    parallelFor(lines, [&](std::size_t line) {
      const std::size_t outer = line / inner;
      const std::size_t off = line % inner;
      const std::size_t base = outer * lineStride + off;
      for (int i = 0; i < N; ++i) {
        T acc{};
        for (int r = 0; r < N; ++r) {
          if (row[r] == 0.0) continue;
          const int jidx = (i + r) % N;
          acc += row[r] * src[base + jidx * inner];
        }
        dst[base + i * inner] = acc;
      }
    });
    return out;
  }

  template <typename T>
  Field<T> d1(const Field<T>& f, int axis) const {
    return apply(f, axis, false);
  }
  /// Mixed second derivative; same-axis uses the dedicated stencil.
  template <typename T>
  Field<T> d2mixed(const Field<T>& f, int a, int b) const {
    if (a == b) return apply(f, a, true);
    return apply(apply(f, a, false), b, false);
  }

 private:
  TorusGrid grid_;
  DiffScheme scheme_ = DiffScheme::Spectral;
  std::vector<std::vector<double>> d1_, d2_;
};

// ---------------------------------------------------------------------------
// Forward/backward DFT along every axis (dense per-axis transforms; grids are
// small).  Used by the constant-coefficient preconditioner and Fourier
// diagnostics.

class FourierTransform {
 public:
  explicit FourierTransform(const TorusGrid& g) : grid_(g) {
    for (int a = 0; a < g.axes(); ++a) {
      const int N = g.sides[a];
      std::vector<std::complex<double>> tw(N);
      for (int r = 0; r < N; ++r)
        tw[r] = std::polar(1.0, -2.0 * M_PI * r / N);
      twiddle_.push_back(std::move(tw));
    }
  }

  CGridFunction forward(const CGridFunction& f) const { return pass(f, false); }
  CGridFunction inverse(const CGridFunction& f) const {
    CGridFunction out = pass(f, true);
    const double s = 1.0 / static_cast<double>(grid_.npts());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= s;
    return out;
  }

 private:
  CGridFunction pass(const CGridFunction& f, bool inverseSign) const {
    CGridFunction cur = f;
    for (int a = 0; a < grid_.axes(); ++a) {
      const int N = grid_.sides[a];
      const auto strides = cur.grid().strides();
      const std::size_t inner = strides[a];
      const std::size_t lineStride = inner * static_cast<std::size_t>(N);
      const std::size_t lines = cur.grid().npts() / N;
      CGridFunction nxt(cur.grid());
      const std::complex<double>* src = cur.data().data();
      std::complex<double>* dst = nxt.data().data();
      const auto& tw = twiddle_[a];
      parallelFor(lines, [&](std::size_t line) {
        const std::size_t outer = line / inner;
        const std::size_t off = line % inner;
        const std::size_t base = outer * lineStride + off;
        for (int k = 0; k < N; ++k) {
          std::complex<double> acc = 0;
          for (int r = 0; r < N; ++r) {
            std::complex<double> w = tw[(static_cast<std::size_t>(k) * r) % N];
            if (inverseSign) w = std::conj(w);
            acc += w * src[base + r * inner];
          }
          dst[base + k * inner] = acc;
        }
      });
      cur = std::move(nxt);
    }
    return cur;
  }

  TorusGrid grid_;
  std::vector<std::vector<std::complex<double>>> twiddle_;
};

// ---------------------------------------------------------------------------
// Binary grid format: "QMAG" | u32 version | u32 flags (bit0: complex payload)
// | u32 n | 4n x u32 sides | little-endian f64 payload, row-major.

namespace detail {

inline void putU32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}
inline std::uint32_t getU32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw InputError("truncated grid file header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}
inline void putF64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((u >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}
inline double getF64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw InputError("truncated grid file payload");
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

inline void writeGridHeader(std::ostream& os, const TorusGrid& g, bool complexPayload) {
  os.write("QMAG", 4);
  putU32(os, 1u);
  putU32(os, complexPayload ? 1u : 0u);
  putU32(os, static_cast<std::uint32_t>(g.n));
  for (int s : g.sides) putU32(os, static_cast<std::uint32_t>(s));
}

inline TorusGrid readGridHeader(std::istream& is, bool& complexPayload) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "QMAG", 4) != 0)
    throw InputError("bad magic: not a QMAG grid file");
  const std::uint32_t version = getU32(is);
  if (version != 1u) throw InputError("unsupported QMAG version");
  const std::uint32_t flags = getU32(is);
  complexPayload = (flags & 1u) != 0;
  const int n = static_cast<int>(getU32(is));
  if (n < 1 || n > 8) throw InputError("QMAG: implausible quaternionic dimension");
  std::vector<int> sides(4 * n);
  for (int& s : sides) s = static_cast<int>(getU32(is));
  return TorusGrid(n, sides);
}

}  // namespace detail

inline void writeGrid(const std::string& path, const GridFunction& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open for writing: " + path);
  detail::writeGridHeader(os, f.grid(), false);
  for (std::size_t i = 0; i < f.size(); ++i) detail::putF64(os, f[i]);
  if (!os) throw InputError("write failed: " + path);
}

inline void writeGrid(const std::string& path, const CGridFunction& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open for writing: " + path);
  detail::writeGridHeader(os, f.grid(), true);
  for (std::size_t i = 0; i < f.size(); ++i) {
    detail::putF64(os, f[i].real());
    detail::putF64(os, f[i].imag());
  }
  if (!os) throw InputError("write failed: " + path);
}

inline GridFunction readGrid(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open: " + path);
  bool complexPayload = false;
  const TorusGrid g = detail::readGridHeader(is, complexPayload);
  if (complexPayload) throw InputError("expected real payload: " + path);
  GridFunction f(g);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = detail::getF64(is);
  return f;
}

inline CGridFunction readGridComplex(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open: " + path);
  bool complexPayload = false;
  const TorusGrid g = detail::readGridHeader(is, complexPayload);
  if (!complexPayload) throw InputError("expected complex payload: " + path);
  CGridFunction f(g);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double re = detail::getF64(is);
    const double im = detail::getF64(is);
    f[i] = {re, im};
  }
  return f;
}

// ---------------------------------------------------------------------------

/// Band-limited random real field: sum of cosine modes with |k| <= kmax per
/// axis (never touching Nyquist), fixed term count.  Deterministic in seed.
inline GridFunction randomTrigField(const TorusGrid& g, std::mt19937_64& rng,
                                    int kmax = 2, int terms = 6,
                                    double amplitude = 1.0) {
  std::uniform_int_distribution<int> kd(-kmax, kmax);
  std::uniform_real_distribution<double> pd(0.0, 2.0 * M_PI);
  std::normal_distribution<double> ad(0.0, 1.0);
  const int axes = g.axes();
  std::vector<std::vector<double>> ks(terms, std::vector<double>(axes));
  std::vector<double> phase(terms), amp(terms);
  for (int t = 0; t < terms; ++t) {
    for (int a = 0; a < axes; ++a) {
      int k = kd(rng);
      if (2 * std::abs(k) >= g.sides[a]) k = 0;
      ks[t][a] = k;
    }
    phase[t] = pd(rng);
    amp[t] = amplitude * ad(rng);
  }
  GridFunction f(g);
  parallelFor(g.npts(), [&](std::size_t i) {
    const auto x = g.point(i);
    double v = 0;
    for (int t = 0; t < terms; ++t) {
      double arg = phase[t];
      for (int a = 0; a < axes; ++a)
        arg += 2.0 * M_PI * ks[t][a] * x[a] / g.lengths[a];
      v += amp[t] * std::cos(arg);
    }
    f[i] = v;
  });
  return f;
}

}  // namespace hktlab
