#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mfres {

// Dense 5-axis tensor (batch, z, y, x, channel), channel fastest. Spatial
// index order matches Grid::cell: x fastest, then y, then z.
struct TensorShape {
    int n = 1, z = 1, y = 1, x = 1, c = 1;
    std::int64_t count() const {
        return static_cast<std::int64_t>(n) * z * y * x * c;
    }
    std::int64_t spatial() const { return static_cast<std::int64_t>(z) * y * x; }
    bool operator==(const TensorShape&) const = default;
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(TensorShape s) : shape(s), v(static_cast<std::size_t>(s.count()), 0.0) {}
    Tensor(TensorShape s, double fill)
        : shape(s), v(static_cast<std::size_t>(s.count()), fill) {}

    double* data() { return v.data(); }
    const double* data() const { return v.data(); }
    std::int64_t count() const { return shape.count(); }

    std::int64_t idx(int n_, int z_, int y_, int x_, int c_) const {
        return (((static_cast<std::int64_t>(n_) * shape.z + z_) * shape.y + y_) * shape.x + x_) *
                   shape.c +
               c_;
    }
    double& at(int n_, int z_, int y_, int x_, int c_) {
        return v[static_cast<std::size_t>(idx(n_, z_, y_, x_, c_))];
    }
    double at(int n_, int z_, int y_, int x_, int c_) const {
        return v[static_cast<std::size_t>(idx(n_, z_, y_, x_, c_))];
    }

    void fill(double value) { std::fill(v.begin(), v.end(), value); }

    TensorShape shape;
    std::vector<double> v;
};

inline void require_shape(const Tensor& t, const TensorShape& s, const char* what) {
    if (!(t.shape == s)) throw std::invalid_argument(std::string("shape mismatch: ") + what);
}

}  // namespace mfres
