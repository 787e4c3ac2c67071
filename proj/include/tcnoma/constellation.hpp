#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcnoma {

using cplx = std::complex<double>;

/// 8-PSK point m rotated by `rotation` radians: exp(j(m*pi/4 + rotation)).
inline cplx psk_point(int m, double rotation = 0.0)
{
    if (m < 0 || m > 7)
        throw std::invalid_argument("psk_point: index " + std::to_string(m) + " outside 0..7");
    return std::polar(1.0, m * std::numbers::pi / 4.0 + rotation);
}

/// Ordered set of unit-energy complex points. The index of a point is the
/// symbol label used by trellises and bit mappers.
class Constellation {
public:
    Constellation(std::vector<cplx> points, double rotation = 0.0)
        : points_(std::move(points)), rotation_(rotation)
    {
        if (points_.empty())
            throw std::invalid_argument("constellation: no points");
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (std::abs(std::abs(points_[i]) - 1.0) > 1e-12)
                throw std::invalid_argument("constellation: point " + std::to_string(i) +
                                            " is not unit magnitude");
            for (std::size_t k = 0; k < i; ++k)
                if (std::abs(points_[i] - points_[k]) < 1e-12)
                    throw std::invalid_argument("constellation: duplicate points");
        }
    }

    /// M-PSK with point m at angle 2*pi*m/M + offset + rotation.
    static Constellation psk(std::size_t order, double rotation = 0.0, double offset = 0.0)
    {
        std::vector<cplx> pts;
        pts.reserve(order);
        for (std::size_t m = 0; m < order; ++m)
            pts.push_back(std::polar(1.0, 2.0 * std::numbers::pi * double(m) / double(order) +
                                              offset + rotation));
        return {std::move(pts), rotation};
    }

    std::size_t size() const { return points_.size(); }
    double rotation() const { return rotation_; }
    const cplx& operator[](std::size_t i) const { return points_.at(i); }
    std::span<const cplx> points() const { return points_; }

    double average_energy() const
    {
        double e = 0.0;
        for (const auto& p : points_)
            e += std::norm(p);
        return e / double(points_.size());
    }

private:
    std::vector<cplx> points_;
    double rotation_;
};

inline Constellation make_8psk(double rotation = 0.0) { return Constellation::psk(8, rotation); }

/// Gray-mapped QPSK on exp(j(pi/4 + k*pi/2)). Index i carries the two bits
/// of i (MSB first): 00 -> pi/4, 01 -> 3pi/4, 11 -> 5pi/4, 10 -> 7pi/4.
inline Constellation make_qpsk_gray(double rotation = 0.0)
{
    const double q = std::numbers::pi / 4.0;
    return {{std::polar(1.0, q + rotation), std::polar(1.0, 3 * q + rotation),
             std::polar(1.0, 7 * q + rotation), std::polar(1.0, 5 * q + rotation)},
            rotation};
}

} // namespace tcnoma
