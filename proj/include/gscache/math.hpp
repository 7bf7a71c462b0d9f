// Copyright Contributors to the gscache Project
// SPDX-License-Identifier: Apache-2.0
//
// Small fixed-size vector/quaternion/matrix types. Float for per-Gaussian
// data, double for camera math.
//
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace gscache {

template <typename T> struct Vec3 {
    T x{}, y{}, z{};

    constexpr Vec3() = default;
    constexpr Vec3(T x_, T y_, T z_) : x(x_), y(y_), z(z_) {}

    template <typename U> constexpr explicit Vec3(const Vec3<U> &o)
        : x(static_cast<T>(o.x)), y(static_cast<T>(o.y)), z(static_cast<T>(o.z)) {}

    constexpr T &operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr T operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator+(const Vec3 &o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3 &o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(T s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(T s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 &operator+=(const Vec3 &o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr bool operator==(const Vec3 &) const = default;
};

template <typename T> constexpr Vec3<T> operator*(T s, const Vec3<T> &v) { return v * s; }

template <typename T> constexpr T dot(const Vec3<T> &a, const Vec3<T> &b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}

template <typename T> constexpr Vec3<T> cross(const Vec3<T> &a, const Vec3<T> &b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

template <typename T> constexpr Vec3<T> hadamard(const Vec3<T> &a, const Vec3<T> &b) {
    return {a.x * b.x, a.y * b.y, a.z * b.z};
}

template <typename T> T norm(const Vec3<T> &v) { return std::sqrt(dot(v, v)); }

template <typename T> Vec3<T> normalize(const Vec3<T> &v) { return v / norm(v); }

using Vec3f = Vec3<float>;
using Vec3d = Vec3<double>;

struct Vec2f {
    float x{}, y{};
    constexpr bool operator==(const Vec2f &) const = default;
};

/// Row-major 3x3 matrix.
template <typename T> struct Mat3 {
    std::array<T, 9> m{};

    constexpr T &operator()(int r, int c) { return m[r * 3 + c]; }
    constexpr T operator()(int r, int c) const { return m[r * 3 + c]; }

    static constexpr Mat3 identity() {
        Mat3 out;
        out(0, 0) = out(1, 1) = out(2, 2) = T(1);
        return out;
    }
    static constexpr Mat3 diagonal(const Vec3<T> &d) {
        Mat3 out;
        out(0, 0) = d.x;
        out(1, 1) = d.y;
        out(2, 2) = d.z;
        return out;
    }

    constexpr Mat3 transposed() const {
        Mat3 out;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                out(c, r) = (*this)(r, c);
        return out;
    }

    constexpr Mat3 operator*(const Mat3 &o) const {
        Mat3 out;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                out(r, c) = (*this)(r, 0) * o(0, c) + (*this)(r, 1) * o(1, c) +
                            (*this)(r, 2) * o(2, c);
        return out;
    }

    constexpr Vec3<T> operator*(const Vec3<T> &v) const {
        return {(*this)(0, 0) * v.x + (*this)(0, 1) * v.y + (*this)(0, 2) * v.z,
                (*this)(1, 0) * v.x + (*this)(1, 1) * v.y + (*this)(1, 2) * v.z,
                (*this)(2, 0) * v.x + (*this)(2, 1) * v.y + (*this)(2, 2) * v.z};
    }

    constexpr Vec3<T> column(int c) const { return {(*this)(0, c), (*this)(1, c), (*this)(2, c)}; }

    constexpr T determinant() const {
        const auto &a = *this;
        return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
               a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
               a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    }

    constexpr bool operator==(const Mat3 &) const = default;
};

using Mat3f = Mat3<float>;
using Mat3d = Mat3<double>;

/// Unit quaternion (w, x, y, z) used as a rotation.
template <typename T> struct Quat {
    T w{1}, x{}, y{}, z{};

    constexpr Quat() = default;
    constexpr Quat(T w_, T x_, T y_, T z_) : w(w_), x(x_), y(y_), z(z_) {}

    template <typename U> constexpr explicit Quat(const Quat<U> &o)
        : w(static_cast<T>(o.w)), x(static_cast<T>(o.x)), y(static_cast<T>(o.y)),
          z(static_cast<T>(o.z)) {}

    T norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    Quat normalized() const {
        const T n = norm();
        return {w / n, x / n, y / n, z / n};
    }

    constexpr Quat conjugate() const { return {w, -x, -y, -z}; }

    constexpr Quat operator*(const Quat &o) const {
        return {w * o.w - x * o.x - y * o.y - z * o.z, w * o.x + x * o.w + y * o.z - z * o.y,
                w * o.y - x * o.z + y * o.w + z * o.x, w * o.z + x * o.y - y * o.x + z * o.w};
    }

    constexpr Mat3<T> to_matrix() const {
        Mat3<T> r;
        r(0, 0) = 1 - 2 * (y * y + z * z);
        r(0, 1) = 2 * (x * y - z * w);
        r(0, 2) = 2 * (x * z + y * w);
        r(1, 0) = 2 * (x * y + z * w);
        r(1, 1) = 1 - 2 * (x * x + z * z);
        r(1, 2) = 2 * (y * z - x * w);
        r(2, 0) = 2 * (x * z - y * w);
        r(2, 1) = 2 * (y * z + x * w);
        r(2, 2) = 1 - 2 * (x * x + y * y);
        return r;
    }

    constexpr Vec3<T> rotate(const Vec3<T> &v) const { return to_matrix() * v; }

    static Quat from_axis_angle(const Vec3<T> &axis, T angle) {
        const Vec3<T> a = normalize(axis);
        const T s = std::sin(angle / 2);
        return {std::cos(angle / 2), a.x * s, a.y * s, a.z * s};
    }

    /// Quaternion of a proper rotation matrix (Shepperd's method).
    static Quat from_matrix(const Mat3<T> &m) {
        const T trace = m(0, 0) + m(1, 1) + m(2, 2);
        Quat q;
        if (trace > 0) {
            const T s = std::sqrt(trace + 1) * 2;
            q = {s / 4, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s, (m(1, 0) - m(0, 1)) / s};
        } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
            const T s = std::sqrt(1 + m(0, 0) - m(1, 1) - m(2, 2)) * 2;
            q = {(m(2, 1) - m(1, 2)) / s, s / 4, (m(0, 1) + m(1, 0)) / s, (m(0, 2) + m(2, 0)) / s};
        } else if (m(1, 1) > m(2, 2)) {
            const T s = std::sqrt(1 + m(1, 1) - m(0, 0) - m(2, 2)) * 2;
            q = {(m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, s / 4, (m(1, 2) + m(2, 1)) / s};
        } else {
            const T s = std::sqrt(1 + m(2, 2) - m(0, 0) - m(1, 1)) * 2;
            q = {(m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s, (m(1, 2) + m(2, 1)) / s, s / 4};
        }
        if (q.w < 0)
            q = {-q.w, -q.x, -q.y, -q.z};
        return q.normalized();
    }

    constexpr bool operator==(const Quat &) const = default;
};

using Quatf = Quat<float>;
using Quatd = Quat<double>;

/// Angle of the relative rotation between two unit quaternions, radians.
template <typename T> T angle_between(const Quat<T> &a, const Quat<T> &b) {
    const T d = std::abs(a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z);
    return 2 * std::acos(std::min(T(1), d));
}

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2f {
    float xx{}, xy{}, yy{};
    float determinant() const { return xx * yy - xy * xy; }
};

constexpr double kPi = 3.14159265358979323846;

} // namespace gscache
